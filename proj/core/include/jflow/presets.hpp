#pragma once

#include "jflow/cohomology.hpp"
#include "jflow/split.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace jflow {

/// amplitude * cos|sin(2 pi k . (x1, y1, x2, y2))
struct FourierMode {
  double amplitude = 0.0;
  bool cosine = true;
  std::array<int, 4> k{};

  double operator()(const std::array<double, 4>& p) const;
  bool first_factor_only() const { return k[2] == 0 && k[3] == 0; }
  bool second_factor_only() const { return k[0] == 0 && k[1] == 0; }
};

/// Closed form given by its class and a finite potential spectrum.
struct FormSpec {
  Herm2 cls;
  std::vector<FourierMode> potential;

  /// Diagonal class and every mode confined to one factor.
  bool is_split() const;
  ScalarField potential_on(const Grid& grid) const;
  ClosedForm realize(const Grid& torus) const;
  SplitForm realize_split(const Grid& plane) const;
};

/// Background data for a run: chi_0, omega_0, omega_hat and optionally the
/// divisor model attached to omega_0.
struct PresetSpec {
  std::string name;
  FormSpec chi0;
  FormSpec omega0;
  FormSpec omega_hat;
  bool divisor = false;
  double beta = 1.0;
  double rho = 0.5;
  double c0_certificate = 0.0; ///< expected C0 when the divisor model is active (0 = unknown)

  bool is_split() const { return chi0.is_split() && omega0.is_split() && omega_hat.is_split(); }
  /// R_H := (omega_0 - diag(1 - rho, 1)) / rho, a representative of c1([D]) = diag(1, 0).
  FormSpec r_h() const;
  DivisorModel divisor_model(const Grid& torus) const;
};

/// identity, smooth_split, degenerate_split, nonsplit_perturbed.
PresetSpec preset(const std::string& name);
std::vector<std::string> preset_names();

/// Profile f = 1 + sin(2 pi x1)/2 of the smooth split preset.
double smooth_profile(double x1);
/// Profile f = sin^2(pi x1) + sin^2(pi y1) of the degenerate split preset.
double degenerate_profile(double x1, double y1);

} // namespace jflow
