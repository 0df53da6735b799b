#pragma once

#include "jflow/field.hpp"
#include "jflow/hermitian.hpp"

#include <array>
#include <optional>
#include <string>

namespace jflow {

/// A (1,1) class on the flat torus, represented by its constant harmonic
/// Hermitian matrix. Kaehler classes are the positive-definite ones.
struct CohomologyClass {
  Herm2 m;

  bool is_kahler() const { return m.min_eigenvalue() > 0.0; }
};

CohomologyClass operator+(const CohomologyClass& a, const CohomologyClass& b);
CohomologyClass operator-(const CohomologyClass& a, const CohomologyClass& b);
CohomologyClass operator*(double s, const CohomologyClass& a);

/// Closed real (1,1) form cls + d d^c potential. Closed by construction;
/// the realized field is computed once.
class ClosedForm {
public:
  ClosedForm(CohomologyClass cls, ScalarField potential);
  static ClosedForm constant(const Grid& grid, CohomologyClass cls);

  const CohomologyClass& cls() const { return cls_; }
  const ScalarField& potential() const { return potential_; }
  const HermitianFormField& realized() const { return realized_; }
  const Grid& grid() const { return potential_.grid(); }

private:
  CohomologyClass cls_;
  ScalarField potential_;
  HermitianFormField realized_;
};

ClosedForm operator+(const ClosedForm& a, const ClosedForm& b);
ClosedForm operator-(const ClosedForm& a, const ClosedForm& b);
ClosedForm operator*(double s, const ClosedForm& a);

/// sin^2(pi x1) + sin^2(pi y1): vanishes exactly on the divisor {z1 = 0}.
double divisor_proxy(double x1, double y1);

/// Model of the divisor D = {z1 = 0} with the data of the degeneracy
/// condition on omega_0.
struct DivisorModel {
  ScalarField s2_proxy;
  double beta = 1.0;
  double rho = 0.5;
  ClosedForm r_h;

  static constexpr double kLocusThreshold = 1e-12;
  bool on_locus(std::size_t i) const { return s2_proxy[i] < kLocusThreshold; }
};

/// Intersection number [A].[B] = 4 (A11 B22 + A22 B11 - 2 Re(A12 conj B12)).
double class_pairing(const CohomologyClass& a, const CohomologyClass& b);

/// c = 2 [X].[W] / [X]^2. Throws DomainError unless X is Kaehler.
double c_constant(const CohomologyClass& x, const CohomologyClass& w);

struct ConeVerdict {
  double c;
  double margin; ///< smallest eigenvalue of c X - W; condition holds iff > 0
  bool holds() const { return margin > 0.0; }
};

ConeVerdict cone_condition(const CohomologyClass& x, const CohomologyClass& w);

/// omega_eps = omega_0 + eps * omega_hat (class and potential add).
ClosedForm epsilon_form(const ClosedForm& omega0, double eps, const ClosedForm& omega_hat);

struct OmegaCertificate {
  bool ok = false;
  double c0 = 0.0;
  double beta = 0.0;
  double rho = 0.0;
  // Failure details, set when !ok.
  int violated_inequality = 0; ///< 1: omega0 >= s^{2 beta} omega_hat / C0; 2: omega0 - rho R_H >= omega_hat / C0
  std::size_t index = 0;
  std::array<double, 4> location{};
  double value = 0.0; ///< offending generalized eigenvalue
  std::string message;
};

/// Smallest C0 with omega0 >= s2^beta omega_hat / C0 and
/// omega0 - rho R_H >= omega_hat / C0 at every grid point.
OmegaCertificate verify_omega0_conditions(const ClosedForm& omega0, const DivisorModel& div,
                                          const ClosedForm& omega_hat);

/// Kaehler reference case: without a divisor only the second inequality
/// (with rho = 0) applies.
OmegaCertificate verify_omega0_conditions(const ClosedForm& omega0, const ClosedForm& omega_hat);

} // namespace jflow
