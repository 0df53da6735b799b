#include "jflow/hermitian.hpp"

#include "jflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace jflow {

namespace {

// Roots of a x^2 - b x + c with real discriminant, ascending, without
// cancellation in the smaller-magnitude root.
std::pair<double, double> quadratic_roots(double a, double b, double c) {
  const double disc = std::max(b * b - 4.0 * a * c, 0.0);
  const double s = std::sqrt(disc);
  const double q = 0.5 * (b + std::copysign(s, b));
  double r1, r2;
  if (q == 0.0) {
    r1 = r2 = 0.0;
  } else {
    r1 = q / a;
    r2 = c / q;
  }
  if (r1 > r2) std::swap(r1, r2);
  return {r1, r2};
}

} // namespace

std::pair<double, double> Herm2::eigenvalues() const {
  const double half_trace = 0.5 * (a11 + a22);
  const double d = 0.5 * (a11 - a22);
  const double half_gap = std::sqrt(d * d + std::norm(a12));
  return {half_trace - half_gap, half_trace + half_gap};
}

Herm2 Herm2::inverse() const {
  const double d = det();
  return {a22 / d, a11 / d, -a12 / d};
}

Herm2& Herm2::operator+=(const Herm2& o) {
  a11 += o.a11;
  a22 += o.a22;
  a12 += o.a12;
  return *this;
}

Herm2& Herm2::operator-=(const Herm2& o) {
  a11 -= o.a11;
  a22 -= o.a22;
  a12 -= o.a12;
  return *this;
}

Herm2& Herm2::operator*=(double s) {
  a11 *= s;
  a22 *= s;
  a12 *= s;
  return *this;
}

Herm2 operator+(Herm2 a, const Herm2& b) { return a += b; }
Herm2 operator-(Herm2 a, const Herm2& b) { return a -= b; }
Herm2 operator*(double s, Herm2 a) { return a *= s; }

double sandwich_max_eigenvalue(const Herm2& a, const Herm2& b) {
  // tr(a b a) = tr(a^2 b), det(a b a) = det(a)^2 det(b).
  const double z2 = std::norm(a.a12);
  const double s = a.a11 + a.a22;
  const double q11 = a.a11 * a.a11 + z2, q22 = a.a22 * a.a22 + z2;
  const double q12re = a.a12.real() * s, q12im = a.a12.imag() * s;
  const double tr = q11 * b.a11 + q22 * b.a22 + 2.0 * (q12re * b.a12.real() + q12im * b.a12.imag());
  const double da = a.det();
  const double det = da * da * b.det();
  const double half = 0.5 * tr;
  return half + std::sqrt(std::max(half * half - det, 0.0));
}

Herm2 sandwich(const Herm2& a, const Herm2& b) {
  // Row-major complex 2x2 products; the result is Hermitian.
  using C = std::complex<double>;
  const C A[2][2] = {{a.a11, a.a12}, {std::conj(a.a12), a.a22}};
  const C B[2][2] = {{b.a11, b.a12}, {std::conj(b.a12), b.a22}};
  C AB[2][2], R[2][2];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) AB[i][j] = A[i][0] * B[0][j] + A[i][1] * B[1][j];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) R[i][j] = AB[i][0] * A[0][j] + AB[i][1] * A[1][j];
  return {R[0][0].real(), R[1][1].real(), R[0][1]};
}

std::pair<double, double> generalized_eigenvalues(const Herm2& a, const Herm2& b) {
  return quadratic_roots(a.det(), wedge_density(a, b), b.det());
}

HermitianFormField::HermitianFormField(const Grid& grid, const Herm2& value)
    : h11_(grid, value.a11), h22_(grid, value.a22), h12_re_(grid, value.a12.real()),
      h12_im_(grid, value.a12.imag()) {
  if (grid.complex_dim() != 2) throw DomainError("Hermitian form fields live on torus grids");
}

HermitianFormField::HermitianFormField(ScalarField h11, ScalarField h22, ScalarField h12_re,
                                       ScalarField h12_im)
    : h11_(std::move(h11)), h22_(std::move(h22)), h12_re_(std::move(h12_re)),
      h12_im_(std::move(h12_im)) {
  const Grid& g = h11_.grid();
  if (!(h22_.grid() == g && h12_re_.grid() == g && h12_im_.grid() == g)) {
    throw DomainError("Hermitian form components live on different grids");
  }
  if (g.complex_dim() != 2) throw DomainError("Hermitian form fields live on torus grids");
}

void HermitianFormField::set(std::size_t i, const Herm2& m) {
  h11_[i] = m.a11;
  h22_[i] = m.a22;
  h12_re_[i] = m.a12.real();
  h12_im_[i] = m.a12.imag();
}

Herm2 HermitianFormField::mean() const {
  return {h11_.mean(), h22_.mean(), {h12_re_.mean(), h12_im_.mean()}};
}

bool HermitianFormField::all_finite() const {
  return h11_.all_finite() && h22_.all_finite() && h12_re_.all_finite() && h12_im_.all_finite();
}

HermitianFormField& HermitianFormField::operator+=(const HermitianFormField& o) {
  h11_ += o.h11_;
  h22_ += o.h22_;
  h12_re_ += o.h12_re_;
  h12_im_ += o.h12_im_;
  return *this;
}

HermitianFormField& HermitianFormField::operator-=(const HermitianFormField& o) {
  h11_ -= o.h11_;
  h22_ -= o.h22_;
  h12_re_ -= o.h12_re_;
  h12_im_ -= o.h12_im_;
  return *this;
}

HermitianFormField& HermitianFormField::operator+=(const Herm2& c) {
  h11_ += c.a11;
  h22_ += c.a22;
  h12_re_ += c.a12.real();
  h12_im_ += c.a12.imag();
  return *this;
}

HermitianFormField& HermitianFormField::operator*=(double s) {
  h11_ *= s;
  h22_ *= s;
  h12_re_ *= s;
  h12_im_ *= s;
  return *this;
}

HermitianFormField operator+(HermitianFormField a, const HermitianFormField& b) { return a += b; }
HermitianFormField operator-(HermitianFormField a, const HermitianFormField& b) { return a -= b; }
HermitianFormField operator+(HermitianFormField a, const Herm2& b) { return a += b; }
HermitianFormField operator*(double s, HermitianFormField a) { return a *= s; }

ScalarField wedge_density(const HermitianFormField& a, const HermitianFormField& b) {
  if (!(a.grid() == b.grid())) throw DomainError("forms live on different grids");
  ScalarField out(a.grid());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = wedge_density(a.at(i), b.at(i));
  return out;
}

namespace {

[[noreturn]] void throw_not_positive(const HermitianFormField& a, std::size_t i, const char* what) {
  const double margin = a.at(i).min_eigenvalue();
  const auto p = a.grid().point(i);
  std::ostringstream msg;
  msg << what << ": form not positive definite at point " << i << " (" << p[0] << ", " << p[1]
      << ", " << p[2] << ", " << p[3] << "), smallest eigenvalue " << margin;
  throw PositivityError(msg.str(), i, p, margin);
}

} // namespace

ScalarField trace_with(const HermitianFormField& a, const HermitianFormField& b) {
  if (!(a.grid() == b.grid())) throw DomainError("forms live on different grids");
  ScalarField out(a.grid());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Herm2 ai = a.at(i);
    if (!(ai.a11 > 0.0 && ai.det() > 0.0)) throw_not_positive(a, i, "trace_with");
    out[i] = trace_with(ai, b.at(i));
  }
  return out;
}

std::pair<ScalarField, ScalarField> generalized_eigenvalues(const HermitianFormField& a,
                                                            const HermitianFormField& b) {
  if (!(a.grid() == b.grid())) throw DomainError("forms live on different grids");
  ScalarField lo(a.grid()), hi(a.grid());
  for (std::size_t i = 0; i < lo.size(); ++i) {
    const Herm2 ai = a.at(i);
    if (!(ai.a11 > 0.0 && ai.det() > 0.0)) throw_not_positive(a, i, "generalized_eigenvalues");
    const auto [l, h] = generalized_eigenvalues(ai, b.at(i));
    lo[i] = l;
    hi[i] = h;
  }
  return {std::move(lo), std::move(hi)};
}

MarginLocation positivity_margin_at(const HermitianFormField& a) {
  MarginLocation best{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double m = a.at(i).min_eigenvalue();
    if (m < best.margin) best = {m, i};
  }
  return best;
}

double positivity_margin(const HermitianFormField& a) { return positivity_margin_at(a).margin; }

void require_positive(const HermitianFormField& a, const char* what) {
  const auto loc = positivity_margin_at(a);
  if (!(loc.margin > 0.0)) throw_not_positive(a, loc.index, what);
}

} // namespace jflow
