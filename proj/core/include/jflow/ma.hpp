#pragma once

#include "jflow/cohomology.hpp"
#include "jflow/split.hpp"

#include <optional>
#include <vector>

namespace jflow {

struct MASolverConfig {
  double newton_tol = 1e-10; ///< on sup |log A^2 - log T^2|
  int max_newton = 50;
  double linear_tol = 1e-12; ///< relative, GMRES
  double damping = 0.5;      ///< backtracking factor
  int max_backtracks = 30;
  int gmres_restart = 50;
  int max_linear_iterations = 500;
  /// Shift the result so that sup psi = 0 instead of mean psi = 0.
  bool sup_gauge = false;

  void validate() const;
};

struct NewtonRecord {
  double residual;  ///< before the step
  double step_length;
  int linear_iterations;
};

struct MAResult {
  ScalarField psi;
  std::vector<NewtonRecord> iterations;
  double final_residual = 0.0;
  double compatibility = 0.0; ///< the constant b in log A^2 = log T^2 + b at the end
  /// sup of the residual's component along the null modes of dd^c (grid
  /// aliasing; no potential can change it). Not part of final_residual.
  double unresolved = 0.0;
};

/// alpha = c chi_0 - omega_eps. Throws ConeConditionError unless [alpha] > 0,
/// DomainError if [alpha]^2 != [omega_eps]^2 (c is not the flow constant).
ClosedForm build_alpha(const ClosedForm& chi0, const ClosedForm& omega_eps, double c);
SplitForm build_alpha(const SplitForm& chi0, const SplitForm& omega_eps, double c);

/// Newton-Krylov solve of (alpha + c dd^c psi)^2 = target^2 for mean-zero psi.
/// If alpha + c dd^c psi0 is not positive the iteration starts from
/// psi = -potential(alpha) / c, where A is the constant class [alpha].
/// Throws ConvergenceError with the residual trace on failure.
MAResult solve_ma(const ClosedForm& alpha, double c, const ClosedForm& target, const MASolverConfig& cfg,
                  const std::optional<ScalarField>& psi0 = std::nullopt);

struct SplitMAResult {
  SplitField psi;
  MAResult first;  ///< Newton record of the z1 factor
  MAResult second; ///< Newton record of the z2 factor
  double final_residual = 0.0; ///< sup over T^4 of the combined log residual
};

/// Product data: solves one plane problem per factor, with the factor
/// targets scaled so each factor's class condition holds.
SplitMAResult solve_ma(const SplitForm& alpha, double c, const SplitForm& target, const MASolverConfig& cfg,
                       const std::optional<SplitField>& psi0 = std::nullopt);

/// Solves along eps_list (descending), warm-starting each stage from the
/// previous one. psi of each stage is the chi-potential of the critical metric.
std::vector<SplitMAResult> solve_ma_continuation(const SplitForm& chi0, const SplitForm& omega0,
                                                 const SplitForm& omega_hat, const std::vector<double>& eps_list,
                                                 const MASolverConfig& cfg);

/// sup |2 chi_phi ^ omega - c chi_phi^2| in density form.
double critical_residual(const ScalarField& phi, const ClosedForm& chi0, const ClosedForm& omega, double c);
double critical_residual(const SplitField& phi, const SplitForm& chi0, const SplitForm& omega, double c);

/// Mean-zero u with tr_Id dd^c u = src (torus) or d^2 u/dz dzbar = src
/// (plane). Throws DomainError if |mean(src)| > 1e-12.
ScalarField poisson_solve(const ScalarField& src);

struct SplitCritical {
  double c1 = 0.0;
  double c2 = 0.0;
  SplitField phi;
};

/// Critical potential for chi_0 = X (constant, diagonal) and omega =
/// diag(f(z1), g(z2)): chi = diag(f / c1, g / c2).
SplitCritical split_critical(const ScalarField& f, const ScalarField& g, const CohomologyClass& x);

} // namespace jflow
