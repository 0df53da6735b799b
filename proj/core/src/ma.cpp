#include "jflow/ma.hpp"

#include "jflow/error.hpp"
#include "jflow/functionals.hpp"
#include "jflow/krylov.hpp"
#include "jflow/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace jflow {

void MASolverConfig::validate() const {
  std::vector<std::string> bad;
  if (!(newton_tol > 0.0)) bad.push_back("newton_tol must be positive");
  if (max_newton < 1) bad.push_back("max_newton must be >= 1");
  if (!(linear_tol > 0.0)) bad.push_back("linear_tol must be positive");
  if (!(damping > 0.0 && damping < 1.0)) bad.push_back("damping must lie in (0, 1)");
  if (max_backtracks < 1) bad.push_back("max_backtracks must be >= 1");
  if (gmres_restart < 1 || max_linear_iterations < 1) bad.push_back("linear iteration limits must be positive");
  if (!bad.empty()) {
    std::string msg = "invalid MA solver configuration:";
    for (const auto& b : bad) msg += " " + b + ";";
    throw DomainError(msg);
  }
}

namespace {

// --- per-geometry pieces of the Newton iteration -------------------------

// A = alpha + c dd^c psi on the torus; log density log D(A, A).
class TorusModel {
public:
  TorusModel(const ClosedForm& alpha, double c, const ClosedForm& target)
      : alpha_(alpha.realized()), c_(c), pot_(alpha.potential()),
        a_bar_inv_(alpha.cls().m.inverse()), target_log_(alpha.grid()) {
    const auto& t = target.realized();
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double d = wedge_density(t.at(i), t.at(i));
      if (!(d > 0.0)) throw DomainError("target volume form must be positive; use eps-continuation");
      target_log_[i] = std::log(d);
    }
  }

  const Grid& grid() const { return target_log_.grid(); }
  const ScalarField& target_log() const { return target_log_; }
  ScalarField fallback() const { return (-1.0 / c_) * pot_; }

  double assemble(const ScalarField& psi) {
    a_ = alpha_ + c_ * complex_hessian(psi);
    return positivity_margin(a_);
  }
  ScalarField log_density() const {
    ScalarField out(grid());
    for (std::size_t i = 0; i < a_.size(); ++i) out[i] = std::log(2.0 * a_.at(i).det());
    return out;
  }
  void apply(std::span<const double> v, std::span<double> out) const {
    const auto h = complex_hessian(ScalarField(grid(), std::vector<double>(v.begin(), v.end())));
    for (std::size_t i = 0; i < a_.size(); ++i) {
      const Herm2 ai = a_.at(i);
      out[i] = c_ * wedge_density(ai, h.at(i)) / ai.det();
    }
  }
  ScalarField precondition(const ScalarField& r) const {
    return (1.0 / c_) * spectral_for(grid()).solve_constant_coefficient(r, a_bar_inv_);
  }

private:
  HermitianFormField alpha_;
  double c_;
  ScalarField pot_;
  Herm2 a_bar_inv_;
  ScalarField target_log_;
  HermitianFormField a_;
};

// a = alpha + c d^2 psi / dz dzbar on a plane; log density log a.
class PlaneModel {
public:
  PlaneModel(const FactorForm& alpha, double c, const ScalarField& target)
      : alpha_(alpha.realized()), c_(c), pot_(alpha.potential()),
        a_bar_inv_(Herm2::diag(1.0 / alpha.cls(), 0.0)), target_log_(target.grid()) {
    for (std::size_t i = 0; i < target.size(); ++i) {
      if (!(target[i] > 0.0)) throw DomainError("target volume form must be positive; use eps-continuation");
      target_log_[i] = std::log(target[i]);
    }
  }

  const Grid& grid() const { return target_log_.grid(); }
  const ScalarField& target_log() const { return target_log_; }
  ScalarField fallback() const { return (-1.0 / c_) * pot_; }

  double assemble(const ScalarField& psi) {
    a_ = alpha_ + c_ * ddbar(psi);
    return a_.min();
  }
  ScalarField log_density() const {
    ScalarField out(grid());
    for (std::size_t i = 0; i < a_.size(); ++i) out[i] = std::log(a_[i]);
    return out;
  }
  void apply(std::span<const double> v, std::span<double> out) const {
    const auto h = ddbar(ScalarField(grid(), std::vector<double>(v.begin(), v.end())));
    for (std::size_t i = 0; i < a_.size(); ++i) out[i] = c_ * h[i] / a_[i];
  }
  ScalarField precondition(const ScalarField& r) const {
    return (1.0 / c_) * spectral_for(grid()).solve_constant_coefficient(r, a_bar_inv_);
  }

private:
  ScalarField alpha_;
  double c_;
  ScalarField pot_;
  Herm2 a_bar_inv_;
  ScalarField target_log_;
  ScalarField a_;
};

ScalarField minus_mean(ScalarField f) {
  f += -f.mean();
  return f;
}

// Newton on G(psi, b) = log A^2 - log T^2 - b with mean(psi) = 0.
template <class Model>
MAResult newton(Model& model, const MASolverConfig& cfg, std::optional<ScalarField> psi0) {
  cfg.validate();
  const std::size_t n = model.grid().size();
  ScalarField psi = psi0 ? minus_mean(remove_null_modes(*psi0)) : ScalarField(model.grid());
  if (psi.size() != n) throw DomainError("initial potential on the wrong grid");
  if (!(model.assemble(psi) > 0.0)) {
    psi = minus_mean(remove_null_modes(model.fallback()));
    const double m = model.assemble(psi);
    if (!(m > 0.0)) throw PositivityError("alpha + c dd^c psi cannot be made positive", 0, {}, m);
  }
  double b = 0.0;
  MAResult out;
  std::vector<double> trace;
  // The null modes of dd^c cannot be corrected by any update; the iteration
  // works on the remaining part and reports the rest as `unresolved`.
  auto residual_field = [&](double shift) {
    ScalarField g = model.log_density();
    g -= model.target_log();
    g += -shift;
    return remove_null_modes(g);
  };
  ScalarField g = residual_field(b);
  double res = g.sup_abs();

  // Restricted to the complement of the null modes on both sides, so the
  // linear system stays consistent.
  const LinearMap jac = [&](std::span<const double> x, std::span<double> y) {
    const ScalarField xv = remove_null_modes(
        ScalarField(model.grid(), std::vector<double>(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n))));
    ScalarField yv(model.grid());
    model.apply(xv.values(), yv.values());
    yv = remove_null_modes(yv);
    const double kappa = x[n];
    for (std::size_t i = 0; i < n; ++i) y[i] = yv[i] - kappa;
    y[n] = xv.mean();
  };
  const LinearMap prec = [&](std::span<const double> r, std::span<double> z) {
    ScalarField rr(model.grid(), std::vector<double>(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(n)));
    const double rm = rr.mean();
    rr += -rm;
    const ScalarField v = model.precondition(rr);
    for (std::size_t i = 0; i < n; ++i) z[i] = v[i] + r[n];
    z[n] = -rm;
  };

  for (int it = 0;; ++it) {
    trace.push_back(res);
    if (res < cfg.newton_tol) break;
    if (it >= cfg.max_newton) throw ConvergenceError("Newton iteration did not converge", trace);

    std::vector<double> rhs(n + 1), dx(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = -g[i];
    rhs[n] = -psi.mean();
    double rhs_norm = 0.0;
    for (double v : rhs) rhs_norm += v * v;
    rhs_norm = std::sqrt(rhs_norm);
    const GmresResult lin =
        gmres(jac, prec, rhs, dx, cfg.linear_tol * rhs_norm, cfg.gmres_restart, cfg.max_linear_iterations);

    // Gauge: the update is fixed modulo constants and the null modes of dd^c.
    const ScalarField dpsi = remove_null_modes(
        ScalarField(model.grid(), std::vector<double>(dx.begin(), dx.begin() + static_cast<std::ptrdiff_t>(n))));
    double s = 1.0;
    bool accepted = false;
    for (int k = 0; k < cfg.max_backtracks; ++k, s *= cfg.damping) {
      ScalarField trial = psi + s * dpsi;
      if (!(model.assemble(trial) > 0.0)) continue;
      ScalarField gt = residual_field(b + s * dx[n]);
      const double rt = gt.sup_abs();
      if (rt < res || rt < cfg.newton_tol) {
        psi = std::move(trial);
        b += s * dx[n];
        g = std::move(gt);
        out.iterations.push_back({res, s, lin.iterations});
        res = rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      model.assemble(psi);
      throw ConvergenceError("line search failed to reduce the residual", trace);
    }
  }
  model.assemble(psi);
  psi = minus_mean(psi);
  if (cfg.sup_gauge) psi += -psi.max();
  out.psi = std::move(psi);
  out.compatibility = b;
  out.final_residual = residual_field(0.0).sup_abs();
  ScalarField full = model.log_density();
  full -= model.target_log();
  out.unresolved = (full - remove_null_modes(full)).sup_abs();
  return out;
}

double pair_sup_abs(const ScalarField& a, const ScalarField& b) {
  return std::max(std::abs(a.max() + b.max()), std::abs(a.min() + b.min()));
}

} // namespace

namespace {

void check_alpha_class(const CohomologyClass& x, const CohomologyClass& w, double c) {
  const CohomologyClass a = c * x - w;
  if (!a.is_kahler()) {
    throw ConeConditionError("alpha = c chi0 - omega is not Kaehler", a.m.min_eigenvalue());
  }
  const double aa = class_pairing(a, a);
  const double ww = class_pairing(w, w);
  if (std::abs(aa - ww) > 1e-10 * std::max(1.0, std::abs(ww))) {
    throw DomainError("[alpha]^2 != [omega]^2: c is not the flow constant of the class pair");
  }
}

} // namespace

ClosedForm build_alpha(const ClosedForm& chi0, const ClosedForm& omega_eps, double c) {
  check_alpha_class(chi0.cls(), omega_eps.cls(), c);
  return c * chi0 - omega_eps;
}

SplitForm build_alpha(const SplitForm& chi0, const SplitForm& omega_eps, double c) {
  check_alpha_class(chi0.cls(), omega_eps.cls(), c);
  return c * chi0 + (-1.0) * omega_eps;
}

MAResult solve_ma(const ClosedForm& alpha, double c, const ClosedForm& target, const MASolverConfig& cfg,
                  const std::optional<ScalarField>& psi0) {
  if (!(c > 0.0)) throw DomainError("c must be positive");
  if (!(alpha.grid() == target.grid())) throw DomainError("alpha and target on different grids");
  TorusModel model(alpha, c, target);
  return newton(model, cfg, psi0);
}

SplitMAResult solve_ma(const SplitForm& alpha, double c, const SplitForm& target, const MASolverConfig& cfg,
                       const std::optional<SplitField>& psi0) {
  if (!(c > 0.0)) throw DomainError("c must be positive");
  // a1 a2 = t1 t2 splits as a1 = lambda t1, a2 = t2 / lambda with lambda
  // fixed by the factor classes.
  const double lambda = alpha.first.cls() / target.first.cls();
  PlaneModel m1(alpha.first, c, lambda * target.first.realized());
  PlaneModel m2(alpha.second, c, (1.0 / lambda) * target.second.realized());
  SplitMAResult out;
  out.first = newton(m1, cfg, psi0 ? std::optional(psi0->first) : std::nullopt);
  out.second = newton(m2, cfg, psi0 ? std::optional(psi0->second) : std::nullopt);
  out.psi = {out.first.psi, out.second.psi};
  ScalarField g1 = m1.log_density() - m1.target_log();
  ScalarField g2 = m2.log_density() - m2.target_log();
  out.final_residual = pair_sup_abs(g1, g2);
  return out;
}

std::vector<SplitMAResult> solve_ma_continuation(const SplitForm& chi0, const SplitForm& omega0,
                                                 const SplitForm& omega_hat, const std::vector<double>& eps_list,
                                                 const MASolverConfig& cfg) {
  std::vector<SplitMAResult> out;
  std::optional<SplitField> warm;
  for (std::size_t k = 0; k < eps_list.size(); ++k) {
    if (k > 0 && !(eps_list[k] < eps_list[k - 1])) throw DomainError("eps list must be descending");
    const SplitForm w = epsilon_form(omega0, eps_list[k], omega_hat);
    const double c = c_constant(chi0.cls(), w.cls());
    const SplitForm alpha = build_alpha(chi0, w, c);
    out.push_back(solve_ma(alpha, c, w, cfg, warm));
    warm = out.back().psi;
  }
  return out;
}

double critical_residual(const ScalarField& phi, const ClosedForm& chi0, const ClosedForm& omega, double c) {
  const auto x = chi0.realized() + complex_hessian(phi);
  const auto& w = omega.realized();
  double r = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Herm2 xi = x.at(i);
    r = std::max(r, std::abs(2.0 * wedge_density(xi, w.at(i)) - c * wedge_density(xi, xi)));
  }
  return r;
}

double critical_residual(const SplitField& phi, const SplitForm& chi0, const SplitForm& omega, double c) {
  const SplitHerm x = realize(chi0, phi);
  Separable res = 2.0 * wedge_density(x, realize(omega));
  res = res - c * wedge_density(x, x);
  return res.sup_abs();
}

ScalarField poisson_solve(const ScalarField& src) {
  if (std::abs(src.mean()) > 1e-12) throw DomainError("poisson source must have zero mean");
  return spectral_for(src.grid()).solve_constant_coefficient(src, Herm2::identity());
}

SplitCritical split_critical(const ScalarField& f, const ScalarField& g, const CohomologyClass& x) {
  if (x.m.a12 != std::complex<double>{} || !x.is_kahler()) {
    throw DomainError("split_critical needs a diagonal Kaehler class");
  }
  if (f.min() < 0.0 || g.min() < 0.0) throw DomainError("profiles must be nonnegative");
  if (!(f.mean() > 0.0 && g.mean() > 0.0)) throw DomainError("profiles must have positive mean");
  SplitCritical out;
  out.c1 = f.mean() / x.m.a11;
  out.c2 = g.mean() / x.m.a22;
  // The sources have zero mean up to rounding; remove it exactly.
  out.phi = {poisson_solve(minus_mean((1.0 / out.c1) * f)), poisson_solve(minus_mean((1.0 / out.c2) * g))};
  return out;
}

} // namespace jflow
