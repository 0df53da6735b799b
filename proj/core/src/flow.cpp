#include "jflow/flow.hpp"

#include "jflow/error.hpp"
#include "jflow/functionals.hpp"
#include "jflow/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>

namespace jflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

ScalarField field_of(const Grid& grid, std::span<const double> v) {
  return ScalarField(grid, std::vector<double>(v.begin(), v.end()));
}

double sup_abs(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::abs(x));
  return s;
}

bool finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// sup |a(i) + b(j)| over all pairs.
double pair_sup_abs(const ScalarField& a, const ScalarField& b) {
  return std::max(std::abs(a.max() + b.max()), std::abs(a.min() + b.min()));
}

double mean_of_product(const ScalarField& a, const ScalarField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s / static_cast<double>(a.size());
}

} // namespace

void FlowConfig::validate() const {
  std::vector<std::string> bad;
  if (!(eps >= 0.0)) bad.push_back("eps must be >= 0");
  if (!(dt_safety > 0.0)) bad.push_back("dt_safety must be positive");
  if (!(stop_tolerance > 0.0)) bad.push_back("stop_tolerance must be positive");
  if (!(max_time > 0.0)) bad.push_back("max_time must be positive");
  if (snapshot_stride < 1) bad.push_back("snapshot_stride must be >= 1");
  if (max_rejections < 1) bad.push_back("max_rejections must be >= 1");
  if (fixed_dt && !(*fixed_dt > 0.0)) bad.push_back("fixed dt must be positive");
  if (!bad.empty()) {
    std::string msg = "invalid flow configuration:";
    for (const auto& b : bad) msg += " " + b + ";";
    throw DomainError(msg);
  }
}

// ---------------------------------------------------------------- full 4-D

FullProblem::FullProblem(ClosedForm chi0, ClosedForm omega, std::vector<char> locus)
    : chi0_(std::move(chi0)), omega_(std::move(omega)), locus_(std::move(locus)),
      c_(c_constant(chi0_.cls(), omega_.cls())) {
  if (!(omega_.grid() == chi0_.grid())) throw DomainError("chi0 and omega on different grids");
  if (!locus_.empty() && locus_.size() != dofs()) throw DomainError("locus mask size mismatch");
}

HermitianFormField FullProblem::chi(std::span<const double> u) const {
  return chi0_.realized() + complex_hessian(field_of(chi0_.grid(), u));
}

ScalarField FullProblem::potential(std::span<const double> u) const { return field_of(chi0_.grid(), u); }

Evaluation FullProblem::rhs(std::span<const double> u, std::span<double> out) const {
  const auto x = chi(u);
  const auto& w = omega_.realized();
  Evaluation ev{kInf, 0.0, 0.0};
  double diss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Herm2 xi = x.at(i);
    const double low = xi.min_eigenvalue();
    if (locus_.empty() || !locus_[i]) ev.margin = std::min(ev.margin, low);
    if (!(low > 0.0)) {
      // Locus point where chi has degenerated; the degenerate direction of
      // omega contributes nothing to the trace.
      out[i] = c_;
      continue;
    }
    const Herm2 wi = w.at(i);
    const double det = xi.det();
    out[i] = c_ - wedge_density(xi, wi) / det;
    ev.lambda_max = std::max(ev.lambda_max, sandwich_max_eigenvalue(xi.inverse(), wi));
    diss += out[i] * out[i] * 2.0 * det;
  }
  if (!(ev.margin > 0.0)) return ev;
  ev.dissipation = 4.0 * diss / static_cast<double>(x.size());
  return ev;
}

HistoryRow FullProblem::observe(std::span<const double> u, std::span<const double> udot) const {
  const ScalarField phi = potential(u);
  const auto x = chi(u);
  const auto& w = omega_.realized();
  HistoryRow r;
  r.J = detail::j_closed(phi, x, chi0_.realized(), w, c_);
  r.I = detail::i_functional(phi, x, chi0_.realized());
  r.sup_phi = phi.sup_abs();
  r.sup_phidot = sup_abs(udot);
  r.max_phidot = *std::max_element(udot.begin(), udot.end());
  r.min_phidot = *std::min_element(udot.begin(), udot.end());
  r.margin = kInf;
  r.max_trace = -kInf;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Herm2 xi = x.at(i), wi = w.at(i);
    if (locus_.empty() || !locus_[i]) r.margin = std::min(r.margin, xi.min_eigenvalue());
    r.residual = std::max(r.residual, std::abs(2.0 * wedge_density(xi, wi) - c_ * wedge_density(xi, xi)));
    const double det = xi.det();
    if (det > 0.0 && xi.a11 > 0.0) {
      const double tr = wedge_density(xi, wi) / det;
      r.max_trace = std::max(r.max_trace, tr);
      r.trace_defect = std::max(r.trace_defect, std::abs(tr - (c_ - udot[i])));
    }
  }
  return r;
}

ScalarField flow_rhs(const ScalarField& phi, const ClosedForm& chi0, const ClosedForm& omega, double c) {
  const auto x = chi0.realized() + complex_hessian(phi);
  auto tr = trace_with(x, omega.realized());
  ScalarField out(phi.grid(), c);
  out -= tr;
  return out;
}

// ---------------------------------------------------------------- split

SplitProblem::SplitProblem(SplitForm chi0, SplitForm omega)
    : chi0_(std::move(chi0)), omega_(std::move(omega)) {
  if (!(chi0_.factor_grid() == omega_.factor_grid())) throw DomainError("chi0 and omega on different grids");
  if (!(chi0_.first.cls() > 0.0 && chi0_.second.cls() > 0.0)) throw DomainError("chi0 class must be Kaehler");
  c1_ = omega_.first.cls() / chi0_.first.cls();
  c2_ = omega_.second.cls() / chi0_.second.cls();
}

SplitField SplitProblem::split(std::span<const double> u) const {
  const std::size_t m = plane_size();
  const Grid& g = chi0_.factor_grid();
  return {field_of(g, u.subspan(0, m)), field_of(g, u.subspan(m, m))};
}

ScalarField SplitProblem::potential(std::span<const double> u) const { return assemble(split(u)); }

HermitianFormField SplitProblem::chi(std::span<const double> u) const {
  const SplitHerm x = realize(chi0_, split(u));
  const Grid t = torus_of(chi0_.factor_grid());
  return HermitianFormField(lift_first(x.a), lift_second(x.b), ScalarField(t), ScalarField(t));
}

HermitianFormField SplitProblem::omega() const {
  const Grid t = torus_of(chi0_.factor_grid());
  return HermitianFormField(lift_first(omega_.first.realized()), lift_second(omega_.second.realized()),
                            ScalarField(t), ScalarField(t));
}

Evaluation SplitProblem::rhs(std::span<const double> u, std::span<double> out) const {
  const SplitField phi = split(u);
  const SplitHerm x = realize(chi0_, phi);
  Evaluation ev{std::min(x.a.min(), x.b.min()), 0.0, 0.0};
  if (!(ev.margin > 0.0)) return ev;
  const std::size_t m = plane_size();
  const auto& w1 = omega_.first.realized();
  const auto& w2 = omega_.second.realized();
  ScalarField k1(x.a.grid()), k2(x.b.grid());
  for (std::size_t i = 0; i < m; ++i) {
    k1[i] = c1_ - w1[i] / x.a[i];
    k2[i] = c2_ - w2[i] / x.b[i];
    ev.lambda_max = std::max({ev.lambda_max, w1[i] / (x.a[i] * x.a[i]), w2[i] / (x.b[i] * x.b[i])});
    out[i] = k1[i];
    out[m + i] = k2[i];
  }
  // int (k1 + k2)^2 chi^2 with chi^2 = 2 a b, factorized over the two planes.
  ev.dissipation = 8.0 * (mean_of_product(k1 * k1, x.a) * x.b.mean() +
                          2.0 * mean_of_product(k1, x.a) * mean_of_product(k2, x.b) +
                          x.a.mean() * mean_of_product(k2 * k2, x.b));
  return ev;
}

HistoryRow SplitProblem::observe(std::span<const double> u, std::span<const double> udot) const {
  const SplitField phi = split(u);
  const SplitField v = split(udot);
  const SplitHerm x = realize(chi0_, phi);
  const SplitHerm w = realize(omega_);
  const double c = this->c();
  HistoryRow r;
  r.J = J_closed(phi, chi0_, omega_, c);
  r.I = I_functional(phi, chi0_);
  r.sup_phi = pair_sup_abs(phi.first, phi.second);
  r.sup_phidot = pair_sup_abs(v.first, v.second);
  r.max_phidot = v.max();
  r.min_phidot = v.min();
  r.margin = std::min(x.a.min(), x.b.min());
  Separable res = 2.0 * wedge_density(x, w);
  res = res - c * wedge_density(x, x);
  r.residual = res.sup_abs();
  double max1 = -kInf, max2 = -kInf, def1 = 0.0, def2 = 0.0;
  for (std::size_t i = 0; i < x.a.size(); ++i) {
    const double t1 = w.a[i] / x.a[i], t2 = w.b[i] / x.b[i];
    max1 = std::max(max1, t1);
    max2 = std::max(max2, t2);
    def1 = std::max(def1, std::abs(t1 - (c1_ - v.first[i])));
    def2 = std::max(def2, std::abs(t2 - (c2_ - v.second[i])));
  }
  r.max_trace = max1 + max2;
  r.trace_defect = def1 + def2;
  return r;
}

SplitField flow_rhs(const SplitField& phi, const SplitForm& chi0, const SplitForm& omega) {
  const SplitHerm x = realize(chi0, phi);
  if (!(x.a.min() > 0.0 && x.b.min() > 0.0)) {
    const bool first = x.a.min() <= x.b.min();
    const ScalarField& bad = first ? x.a : x.b;
    const auto it = std::min_element(bad.values().begin(), bad.values().end());
    const std::size_t idx = static_cast<std::size_t>(it - bad.values().begin());
    const auto p = bad.grid().point(idx);
    std::array<double, 4> loc{};
    loc[first ? 0 : 2] = p[0];
    loc[first ? 1 : 3] = p[1];
    throw PositivityError("chi_phi is not positive", idx, loc, *it);
  }
  const double c1 = omega.first.cls() / chi0.first.cls();
  const double c2 = omega.second.cls() / chi0.second.cls();
  SplitField out = SplitField::zero(chi0.factor_grid());
  for (std::size_t i = 0; i < x.a.size(); ++i) {
    out.first[i] = c1 - omega.first.realized()[i] / x.a[i];
    out.second[i] = c2 - omega.second.realized()[i] / x.b[i];
  }
  return out;
}

// ---------------------------------------------------------------- stepping

FlowState initial_state(const FlowProblem& problem, std::vector<double> u) {
  if (u.size() != problem.dofs()) throw DomainError("initial potential has the wrong size");
  if (!finite(u)) throw DomainError("initial potential is not finite");
  FlowState s;
  s.u = std::move(u);
  s.udot.assign(s.u.size(), 0.0);
  s.eval = problem.rhs(s.u, s.udot);
  if (!(s.eval.margin > 0.0)) {
    throw PositivityError("initial chi_phi is not positive", 0, {}, s.eval.margin);
  }
  return s;
}

double adaptive_dt(double lambda_max, int n, double dt_safety) {
  const double k = std::numbers::pi * n;
  return dt_safety / (std::max(lambda_max, 1e-300) * k * k);
}

double adaptive_dt(const FlowProblem& problem, const FlowState& state, double dt_safety) {
  return adaptive_dt(state.eval.lambda_max, problem.n(), dt_safety);
}

double step(const FlowProblem& problem, FlowState& state, double dt, int max_rejections) {
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  const std::size_t n = state.u.size();
  std::vector<double> k2(n), k3(n), k4(n), tmp(n), unew(n), knew(n);
  const auto& u = state.u;
  const auto& k1 = state.udot;
  int rejected = 0;
  for (;;) {
    auto stage = [&](const std::vector<double>& k, double h, std::vector<double>& out) {
      for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + h * k[i];
      const Evaluation e = problem.rhs(tmp, out);
      return std::pair{e, e.margin > 0.0 && finite(out)};
    };
    auto [e2, ok2] = stage(k1, 0.5 * dt, k2);
    bool ok = ok2;
    Evaluation e3{}, e4{}, en{};
    if (ok) std::tie(e3, ok) = stage(k2, 0.5 * dt, k3);
    if (ok) std::tie(e4, ok) = stage(k3, dt, k4);
    if (ok) {
      for (std::size_t i = 0; i < n; ++i) unew[i] = u[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      en = problem.rhs(unew, knew);
      ok = en.margin > 0.0 && finite(knew);
    }
    if (ok) {
      state.dissipated += dt / 6.0 * (state.eval.dissipation + 2.0 * e2.dissipation + 2.0 * e3.dissipation + e4.dissipation);
      state.u.swap(unew);
      state.udot.swap(knew);
      state.eval = en;
      state.t += dt;
      ++state.steps;
      return dt;
    }
    ++state.rejections;
    if (++rejected >= max_rejections) {
      throw StiffnessError("step rejected " + std::to_string(rejected) + " times in a row", state.t);
    }
    dt *= 0.5;
  }
}

// ---------------------------------------------------------------- evolve

namespace {

void record(const FlowProblem& problem, FlowState& s, double dt, const FlowObserver& observer) {
  HistoryRow r = problem.observe(s.u, s.udot);
  r.t = s.t;
  r.dissipated = s.dissipated;
  r.step = s.steps;
  r.dt = dt;
  s.history.push_back(r);
  if (observer) observer(problem, s);
}

void check_cone(const CohomologyClass& x, const CohomologyClass& w) {
  const ConeVerdict v = cone_condition(x, w);
  if (!v.holds()) {
    throw ConeConditionError("cone condition c[X] - [W] > 0 fails: margin " + std::to_string(v.margin),
                             v.margin);
  }
}

} // namespace

Trajectory evolve(const FlowConfig& cfg, std::shared_ptr<const FlowProblem> problem,
                  std::vector<double> u0, const FlowObserver& observer) {
  cfg.validate();
  Trajectory traj;
  traj.problem = problem;
  traj.c = problem->c();
  FlowState& s = traj.state;
  s = initial_state(*problem, std::move(u0));
  double dt = 0.0;
  record(*problem, s, dt, observer);
  traj.initial_sup_phidot = s.history.front().sup_phidot;
  for (;;) {
    if (sup_abs(s.udot) < cfg.stop_tolerance) {
      traj.converged = true;
      traj.stop_reason = "converged";
      break;
    }
    if (s.t >= cfg.max_time) {
      traj.stop_reason = "max_time";
      break;
    }
    if (s.steps >= cfg.max_steps) {
      traj.stop_reason = "max_steps";
      break;
    }
    dt = cfg.fixed_dt ? *cfg.fixed_dt : adaptive_dt(*problem, s, cfg.dt_safety);
    dt = std::min(dt, cfg.max_time - s.t);
    dt = step(*problem, s, dt, cfg.max_rejections);
    if (s.steps % static_cast<std::size_t>(cfg.snapshot_stride) == 0) record(*problem, s, dt, observer);
  }
  if (s.history.back().step != s.steps) record(*problem, s, dt, observer);
  return traj;
}

Trajectory evolve(const FlowConfig& cfg, const ClosedForm& chi0, const ClosedForm& omega0,
                  const ClosedForm& omega_hat, const ScalarField& phi0, const FlowObserver& observer,
                  std::vector<char> locus) {
  cfg.validate();
  const ClosedForm w = epsilon_form(omega0, cfg.eps, omega_hat);
  check_cone(chi0.cls(), w.cls());
  if (cfg.eps == 0.0 && positivity_margin(omega0.realized()) <= 0.0 && !cfg.degenerate_mode) {
    throw DomainError("eps = 0 with a degenerate omega_0 requires degenerate_mode");
  }
  auto problem = std::make_shared<FullProblem>(chi0, w, std::move(locus));
  return evolve(cfg, problem, {phi0.values().begin(), phi0.values().end()}, observer);
}

Trajectory evolve(const FlowConfig& cfg, const SplitForm& chi0, const SplitForm& omega0,
                  const SplitForm& omega_hat, const SplitField& phi0, const FlowObserver& observer) {
  cfg.validate();
  const SplitForm w = epsilon_form(omega0, cfg.eps, omega_hat);
  check_cone(chi0.cls(), w.cls());
  if (cfg.eps == 0.0 && std::min(omega0.first.realized().min(), omega0.second.realized().min()) <= 0.0 &&
      !cfg.degenerate_mode) {
    throw DomainError("eps = 0 with a degenerate omega_0 requires degenerate_mode");
  }
  auto problem = std::make_shared<SplitProblem>(chi0, w);
  std::vector<double> u0(phi0.first.values().begin(), phi0.first.values().end());
  u0.insert(u0.end(), phi0.second.values().begin(), phi0.second.values().end());
  return evolve(cfg, problem, std::move(u0), observer);
}

// ---------------------------------------------------------------- monitors

MonitorVerdict max_principle_monitor(const Trajectory& traj, double tolerance) {
  MonitorVerdict v;
  const auto& h = traj.state.history;
  if (h.size() < 3 && !(traj.converged && traj.state.steps == 0)) {
    v.ok = false;
    v.failures.push_back({traj.state.t, "fewer than three snapshots", static_cast<double>(h.size()), 3.0});
    return v;
  }
  const double bound = traj.c + traj.initial_sup_phidot + tolerance;
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (h[k].max_trace > bound) v.failures.push_back({h[k].t, "trace bound", h[k].max_trace, bound});
    if (k == 0) continue;
    if (h[k].max_phidot > h[k - 1].max_phidot + tolerance)
      v.failures.push_back({h[k].t, "sup phidot increased", h[k].max_phidot, h[k - 1].max_phidot});
    if (h[k].min_phidot < h[k - 1].min_phidot - tolerance)
      v.failures.push_back({h[k].t, "inf phidot decreased", h[k].min_phidot, h[k - 1].min_phidot});
  }
  v.ok = v.failures.empty();
  return v;
}

// ---------------------------------------------------------------- families

bool FamilyReport::all_ok() const {
  return std::all_of(members.begin(), members.end(), [](const FamilyMember& m) { return m.ok; });
}

namespace {

void check_eps_list(const std::vector<double>& eps) {
  if (eps.empty()) throw DomainError("empty eps list");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw DomainError("eps list entries must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw DomainError("eps list must be strictly descending");
  }
}

template <class Run>
FamilyReport run_family(const FlowConfig& tmpl, const std::vector<double>& eps_list,
                        const std::vector<char>& region, Run run) {
  check_eps_list(eps_list);
  std::vector<std::future<FamilyMember>> jobs;
  for (double eps : eps_list) {
    jobs.push_back(std::async(std::launch::async, [&, eps] {
      FamilyMember m;
      m.eps = eps;
      try {
        FlowConfig cfg = tmpl;
        cfg.eps = eps;
        m.trajectory = run(cfg);
        for (const auto& r : m.trajectory->state.history) {
          m.sup_phi = std::max(m.sup_phi, r.sup_phi);
          m.sup_phidot = std::max(m.sup_phidot, r.sup_phidot);
        }
        m.ok = m.trajectory->converged;
        if (!m.ok) m.error = "not converged: " + m.trajectory->stop_reason;
      } catch (const std::exception& e) {
        m.error = e.what();
      }
      return m;
    }));
  }
  FamilyReport rep;
  for (auto& j : jobs) rep.members.push_back(j.get());
  const FamilyMember* prev = nullptr;
  ScalarField prev_phi;
  for (const auto& m : rep.members) {
    rep.max_sup_phi = std::max(rep.max_sup_phi, m.sup_phi);
    rep.max_sup_phidot = std::max(rep.max_sup_phidot, m.sup_phidot);
    if (!m.trajectory) continue;
    ScalarField phi = m.trajectory->phi();
    if (prev) {
      const ScalarField d = phi - prev_phi;
      rep.consecutive_diff_full.push_back(d.sup_abs());
      double sr = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i)
        if (region.empty() || region[i]) sr = std::max(sr, std::abs(d[i]));
      rep.consecutive_diff_region.push_back(sr);
    }
    prev = &m;
    prev_phi = std::move(phi);
  }
  return rep;
}

} // namespace

FamilyReport epsilon_family(const FlowConfig& tmpl, const std::vector<double>& eps_list,
                            const SplitForm& chi0, const SplitForm& omega0, const SplitForm& omega_hat,
                            const SplitField& phi0, const std::vector<char>& region,
                            const std::function<FlowObserver(double)>& observer_for) {
  return run_family(tmpl, eps_list, region, [&](const FlowConfig& cfg) {
    return evolve(cfg, chi0, omega0, omega_hat, phi0, observer_for ? observer_for(cfg.eps) : FlowObserver{});
  });
}

FamilyReport epsilon_family(const FlowConfig& tmpl, const std::vector<double>& eps_list,
                            const ClosedForm& chi0, const ClosedForm& omega0, const ClosedForm& omega_hat,
                            const ScalarField& phi0, const std::vector<char>& region,
                            const std::function<FlowObserver(double)>& observer_for) {
  return run_family(tmpl, eps_list, region, [&](const FlowConfig& cfg) {
    return evolve(cfg, chi0, omega0, omega_hat, phi0, observer_for ? observer_for(cfg.eps) : FlowObserver{});
  });
}

} // namespace jflow
