#pragma once

#include "jflow/field.hpp"

#include <complex>
#include <utility>

namespace jflow {

/// 2x2 Hermitian matrix [[a11, a12], [conj(a12), a22]]: the components
/// h_{j kbar} of a real (1,1)-form at one point.
struct Herm2 {
  double a11 = 0.0;
  double a22 = 0.0;
  std::complex<double> a12{};

  static Herm2 identity() { return {1.0, 1.0, {}}; }
  static Herm2 diag(double d1, double d2) { return {d1, d2, {}}; }

  double det() const { return a11 * a22 - std::norm(a12); }
  double trace() const { return a11 + a22; }
  /// Eigenvalues in ascending order.
  std::pair<double, double> eigenvalues() const;
  double min_eigenvalue() const { return eigenvalues().first; }
  Herm2 inverse() const;

  Herm2& operator+=(const Herm2& o);
  Herm2& operator-=(const Herm2& o);
  Herm2& operator*=(double s);
  bool operator==(const Herm2&) const = default;
};

Herm2 operator+(Herm2 a, const Herm2& b);
Herm2 operator-(Herm2 a, const Herm2& b);
Herm2 operator*(double s, Herm2 a);
/// Matrix product a*b*a for Hermitian a, b (used for h = chi^{-1} omega chi^{-1}).
Herm2 sandwich(const Herm2& a, const Herm2& b);
/// Largest eigenvalue of sandwich(a, b) for a, b Hermitian.
double sandwich_max_eigenvalue(const Herm2& a, const Herm2& b);

/// Pointwise coefficient of alpha ^ beta against (i dz1 dzbar1)(i dz2 dzbar2):
/// a11 b22 + a22 b11 - 2 Re(a12 conj(b12)). D(a, a) = 2 det a.
inline double wedge_density(const Herm2& a, const Herm2& b) {
  return a.a11 * b.a22 + a.a22 * b.a11 - 2.0 * (a.a12.real() * b.a12.real() + a.a12.imag() * b.a12.imag());
}

/// tr_a b = a^{j kbar} b_{j kbar} = 2 D(a, b) / D(a, a). Requires a > 0.
inline double trace_with(const Herm2& a, const Herm2& b) { return wedge_density(a, b) / a.det(); }

/// Roots of det(b - lambda a) = 0, ascending. Requires a > 0.
std::pair<double, double> generalized_eigenvalues(const Herm2& a, const Herm2& b);

/// Pointwise 2x2 Hermitian matrix field: the component representation of a
/// real (1,1)-form on a torus grid.
class HermitianFormField {
public:
  HermitianFormField() = default;
  explicit HermitianFormField(const Grid& grid, const Herm2& value = {});
  HermitianFormField(ScalarField h11, ScalarField h22, ScalarField h12_re, ScalarField h12_im);

  const Grid& grid() const { return h11_.grid(); }
  std::size_t size() const { return h11_.size(); }

  Herm2 at(std::size_t i) const { return {h11_[i], h22_[i], {h12_re_[i], h12_im_[i]}}; }
  void set(std::size_t i, const Herm2& m);

  const ScalarField& h11() const { return h11_; }
  const ScalarField& h22() const { return h22_; }
  const ScalarField& h12_re() const { return h12_re_; }
  const ScalarField& h12_im() const { return h12_im_; }

  /// Componentwise mean: the constant (harmonic) part on the torus.
  Herm2 mean() const;
  bool all_finite() const;

  HermitianFormField& operator+=(const HermitianFormField& o);
  HermitianFormField& operator-=(const HermitianFormField& o);
  HermitianFormField& operator+=(const Herm2& constant);
  HermitianFormField& operator*=(double s);

private:
  ScalarField h11_, h22_, h12_re_, h12_im_;
};

HermitianFormField operator+(HermitianFormField a, const HermitianFormField& b);
HermitianFormField operator-(HermitianFormField a, const HermitianFormField& b);
HermitianFormField operator+(HermitianFormField a, const Herm2& b);
HermitianFormField operator*(double s, HermitianFormField a);

ScalarField wedge_density(const HermitianFormField& a, const HermitianFormField& b);

/// tr_a b pointwise. Throws PositivityError at the first point where a is not
/// positive definite.
ScalarField trace_with(const HermitianFormField& a, const HermitianFormField& b);

/// Pointwise generalized eigenvalues (lower, upper). Same positivity contract
/// as trace_with.
std::pair<ScalarField, ScalarField> generalized_eigenvalues(const HermitianFormField& a,
                                                            const HermitianFormField& b);

/// Minimum over the grid of the smaller eigenvalue of a against the identity.
/// Negative values are valid results.
double positivity_margin(const HermitianFormField& a);

struct MarginLocation {
  double margin;
  std::size_t index;
};
MarginLocation positivity_margin_at(const HermitianFormField& a);

/// Throws PositivityError naming the worst point if the margin is <= 0.
void require_positive(const HermitianFormField& a, const char* what);

} // namespace jflow
