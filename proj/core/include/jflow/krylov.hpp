#pragma once

#include <functional>
#include <span>
#include <vector>

namespace jflow {

using LinearMap = std::function<void(std::span<const double> x, std::span<double> y)>;

struct GmresResult {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0; ///< final ||b - A x|| (true residual)
};

/// Restarted GMRES with right preconditioning: solves A x = b, using
/// precond(r) ~ A^{-1} r. x holds the initial guess on entry.
GmresResult gmres(const LinearMap& a, const LinearMap& precond, std::span<const double> b,
                  std::span<double> x, double tol, int restart, int max_iterations);

} // namespace jflow
