#include "jflow/krylov.hpp"

#include "jflow/error.hpp"

#include <cmath>

namespace jflow {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

} // namespace

GmresResult gmres(const LinearMap& a, const LinearMap& precond, std::span<const double> b,
                  std::span<double> x, double tol, int restart, int max_iterations) {
  if (restart < 1 || max_iterations < 1) throw DomainError("gmres needs positive iteration limits");
  const std::size_t n = b.size();
  const int m = restart;
  std::vector<std::vector<double>> v(m + 1, std::vector<double>(n)), z(m, std::vector<double>(n));
  std::vector<double> h((m + 1) * m), cs(m), sn(m), g(m + 1), r(n), w(n);
  auto H = [&](int i, int j) -> double& { return h[i * m + j]; };

  GmresResult out;
  auto true_residual = [&] {
    a(x, w);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - w[i];
    return norm(r);
  };
  out.residual = true_residual();
  while (out.residual > tol && out.iterations < max_iterations) {
    const double beta = out.residual;
    for (std::size_t i = 0; i < n; ++i) v[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    int k = 0;
    for (; k < m && out.iterations < max_iterations; ++k) {
      ++out.iterations;
      precond(v[k], z[k]);
      a(z[k], w);
      // Modified Gram-Schmidt.
      for (int i = 0; i <= k; ++i) {
        H(i, k) = dot(w, v[i]);
        for (std::size_t j = 0; j < n; ++j) w[j] -= H(i, k) * v[i][j];
      }
      H(k + 1, k) = norm(w);
      if (H(k + 1, k) > 0.0)
        for (std::size_t j = 0; j < n; ++j) v[k + 1][j] = w[j] / H(k + 1, k);
      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
        H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
        H(i, k) = t;
      }
      const double d = std::hypot(H(k, k), H(k + 1, k));
      cs[k] = d > 0.0 ? H(k, k) / d : 1.0;
      sn[k] = d > 0.0 ? H(k + 1, k) / d : 0.0;
      H(k, k) = d;
      H(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      if (std::abs(g[k + 1]) <= tol || H(k, k) == 0.0) {
        ++k;
        break;
      }
    }
    // Back substitution and update x += Z y.
    std::vector<double> y(k);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= H(i, j) * y[j];
      y[i] = H(i, i) != 0.0 ? s / H(i, i) : 0.0;
    }
    for (int j = 0; j < k; ++j)
      for (std::size_t i = 0; i < n; ++i) x[i] += y[j] * z[j][i];
    const double prev = out.residual;
    out.residual = true_residual();
    // A restart cycle that barely helps means b has a component outside the
    // range of A; further cycles only amplify rounding.
    if (!(out.residual < 0.5 * prev)) break;
  }
  out.converged = out.residual <= tol;
  return out;
}

} // namespace jflow
