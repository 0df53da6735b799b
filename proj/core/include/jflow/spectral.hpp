#pragma once

#include "jflow/field.hpp"
#include "jflow/hermitian.hpp"

#include <complex>
#include <memory>
#include <vector>

namespace jflow {

/// Fourier-pseudospectral differentiation on one grid shape.
///
/// Derivative symbols use the integer wavenumber with the Nyquist entry set
/// to zero, and every second derivative is the product of two first
/// derivative symbols. With that choice the discrete d d^c operator has
/// rank-one symbol pi^2 v v^H and discrete integration by parts against
/// constant-coefficient forms is exact.
///
/// Instances own FFT plans and scratch buffers and are not thread-safe; use
/// spectral_for() to obtain a per-thread instance.
class Spectral {
public:
  explicit Spectral(const Grid& grid);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  const Grid& grid() const { return grid_; }
  std::size_t spectrum_size() const { return spec_size_; }

  /// Forward real-to-complex transform into the internal spectrum buffer.
  void forward(const ScalarField& f);
  /// Applies a real symbol (indexed like the half spectrum) to the stored
  /// spectrum and transforms back.
  ScalarField apply_symbol(const std::vector<double>& symbol);

  /// (d d^c phi)_{j kbar} = d^2 phi / dz_j dzbar_k on a torus grid.
  HermitianFormField complex_hessian(const ScalarField& phi);
  /// d^2 phi / dz dzbar on a plane grid (one complex dimension).
  ScalarField ddbar(const ScalarField& phi);
  /// d phi / dz_j for each complex direction, as (real, imaginary) parts.
  std::vector<std::pair<ScalarField, ScalarField>> dz(const ScalarField& phi);

  /// Solves sum_j a^{j kbar} d_j d_kbar u = src for mean-zero u, with a
  /// constant positive Hermitian coefficient (plane grids use a.a11 only).
  /// Modes where the symbol vanishes are projected out.
  ScalarField solve_constant_coefficient(const ScalarField& src, const Herm2& a_inverse);

  /// Removes the non-constant Fourier modes annihilated by every derivative
  /// symbol (those with all wavenumbers in {0, N/2}). dd^c cannot see them,
  /// so potentials are only determined modulo these modes and constants.
  ScalarField remove_null_modes(const ScalarField& f);

  // Symbols over the half spectrum.
  const std::vector<double>& symbol_hessian_11() const { return s11_; }
  const std::vector<double>& symbol_hessian_22() const { return s22_; }
  const std::vector<double>& symbol_hessian_12_re() const { return s12re_; }
  const std::vector<double>& symbol_hessian_12_im() const { return s12im_; }

private:
  void check_grid(const ScalarField& f) const;

  Grid grid_;
  Grid out_grid_;
  std::size_t spec_size_ = 0;
  std::vector<int> kx_; // derivative wavenumber per half-spectrum entry and real axis
  std::vector<double> s11_, s22_, s12re_, s12im_;
  std::vector<double> null_filter_; // 0 on non-constant null modes, 1 elsewhere
  std::vector<double> dz_re_[2], dz_im_[2]; // symbol of d/dz_j: pi (k_y + i k_x)

  struct Plans;
  std::unique_ptr<Plans> plans_;
};

/// Thread-local Spectral instance for the given grid shape.
Spectral& spectral_for(const Grid& grid);

/// Convenience wrappers over spectral_for(grid).
HermitianFormField complex_hessian(const ScalarField& phi);
ScalarField ddbar(const ScalarField& phi);
ScalarField remove_null_modes(const ScalarField& phi);

} // namespace jflow
