#pragma once

// Closed-form reference values computed without the library's kernels:
// analytic derivatives of Fourier modes, 2x2 algebra through determinants,
// and the exact critical potentials of the split presets.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <utility>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

struct H2 {
  double a11 = 0.0, a22 = 0.0;
  std::complex<double> a12{};
};

inline double det(const H2& a) { return a.a11 * a.a22 - std::norm(a.a12); }

inline H2 add(const H2& a, const H2& b) { return {a.a11 + b.a11, a.a22 + b.a22, a.a12 + b.a12}; }

// Mixed discriminant by polarization of the determinant.
inline double wedge(const H2& a, const H2& b) { return det(add(a, b)) - det(a) - det(b); }

// det(b - l a) = det(a) l^2 - wedge(a, b) l + det(b).
inline std::pair<double, double> gen_eig(const H2& a, const H2& b) {
  const double qa = det(a), qb = -wedge(a, b), qc = det(b);
  const double disc = std::sqrt(std::max(qb * qb - 4.0 * qa * qc, 0.0));
  return {(-qb - disc) / (2.0 * qa), (-qb + disc) / (2.0 * qa)};
}

inline double min_eig(const H2& a) {
  const double m = 0.5 * (a.a11 + a.a22);
  const double r = std::sqrt(0.25 * (a.a11 - a.a22) * (a.a11 - a.a22) + std::norm(a.a12));
  return m - r;
}

inline double pairing(const H2& a, const H2& b) { return 4.0 * wedge(a, b); }

// Complex Hessian of amp * cos(2 pi k.p) (or sin) from the real Hessian:
// d_j dbar_k = (1/4)(d_xj - i d_yj)(d_xk + i d_yk).
struct Mode {
  double amp;
  bool cosine;
  std::array<int, 4> k;
};

inline double mode_value(const Mode& m, const std::array<double, 4>& p) {
  double arg = 0.0;
  for (int a = 0; a < 4; ++a) arg += 2.0 * pi * m.k[a] * p[a];
  return m.amp * (m.cosine ? std::cos(arg) : std::sin(arg));
}

inline H2 mode_hessian(const Mode& m, const std::array<double, 4>& p) {
  double arg = 0.0;
  for (int a = 0; a < 4; ++a) arg += 2.0 * pi * m.k[a] * p[a];
  // d_a d_b f = -(2 pi)^2 k_a k_b f
  const double f = m.amp * (m.cosine ? std::cos(arg) : std::sin(arg));
  auto d2 = [&](int a, int b) { return -4.0 * pi * pi * m.k[a] * m.k[b] * f; };
  H2 h;
  h.a11 = 0.25 * (d2(0, 0) + d2(1, 1));
  h.a22 = 0.25 * (d2(2, 2) + d2(3, 3));
  h.a12 = 0.25 * std::complex<double>(d2(0, 2) + d2(1, 3), d2(0, 3) - d2(1, 2));
  return h;
}

// sin^2(pi x) + sin^2(pi y)
inline double s2(double x, double y) {
  const double a = std::sin(pi * x), b = std::sin(pi * y);
  return a * a + b * b;
}

// Critical potential of the smooth split preset (first factor).
inline double phi_star_smooth(double x1) { return -std::sin(2.0 * pi * x1) / (2.0 * pi * pi); }

// Critical potential of the degenerate split preset at eps = 0.
inline double phi_star_degenerate(double x1, double y1) {
  return (std::cos(2.0 * pi * x1) + std::cos(2.0 * pi * y1)) / (2.0 * pi * pi);
}

// For phi = a cos(2 pi x1) over the identity background:
// J = 2 pi^2 a^2, I = -2 pi^2 a^2, E = 4 pi^2 a^2.
inline double j_single_mode(double a) { return 2.0 * pi * pi * a * a; }
inline double i_single_mode(double a) { return -2.0 * pi * pi * a * a; }
inline double e_single_mode(double a) { return 4.0 * pi * pi * a * a; }

// Decay rate of a linearized mode cos(2 pi k.p) around the identity: the
// linearized velocity is tr_Id dd^c = Laplacian / 4.
inline double heat_rate(const std::array<int, 4>& k) {
  double s = 0.0;
  for (int a = 0; a < 4; ++a) s += k[a] * k[a];
  return pi * pi * s;
}

inline H2 random_positive(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  H2 a{1.5 + u(rng), 1.5 + u(rng), {0.4 * u(rng), 0.4 * u(rng)}};
  return a;
}

inline H2 random_hermitian(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  return {u(rng), u(rng), {u(rng), u(rng)}};
}

} // namespace oracle
