#include "jflow/app.hpp"

#include "jflow/error.hpp"
#include "jflow/functionals.hpp"
#include "jflow/io.hpp"
#include "jflow/snapshot.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <functional>
#include <mutex>

namespace jflow::app {

using nlohmann::json;

namespace {

std::string now_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string eps_tag(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", eps);
  return buf;
}

json safe(double v) { return std::isfinite(v) ? json(v) : json(std::to_string(v)); }

// Torus or split realization of the configured forms.
struct Forms {
  std::optional<ClosedForm> chi0, omega0, omega_hat;
  std::optional<SplitForm> s_chi0, s_omega0, s_omega_hat;
  std::optional<DivisorModel> divisor;
};

Forms build_forms(const RunConfig& cfg, bool need_torus) {
  Forms f;
  const PresetSpec& p = cfg.preset;
  if (cfg.backend == Backend::split) {
    const Grid plane = cfg.plane_grid();
    f.s_chi0 = p.chi0.realize_split(plane);
    f.s_omega0 = p.omega0.realize_split(plane);
    f.s_omega_hat = p.omega_hat.realize_split(plane);
  }
  if (cfg.backend == Backend::full || need_torus) {
    const Grid torus = cfg.torus_grid();
    f.chi0 = p.chi0.realize(torus);
    f.omega0 = p.omega0.realize(torus);
    f.omega_hat = p.omega_hat.realize(torus);
  }
  if (p.divisor) f.divisor = p.divisor_model(cfg.torus_grid());
  return f;
}

class Recorder {
public:
  Recorder(const RunConfig& cfg, RunRecord& rec) : cfg_(cfg), rec_(rec) {}

  void verdict(std::string name, bool ok, double value, double bound, std::string detail = {}) {
    rec_.verdicts.push_back({std::move(name), ok, value, bound, std::move(detail)});
  }
  void scalar(const std::string& name, double v) { rec_.scalars[name] = v; }

  void artifact(const std::string& rel, const std::string& contents) {
    write_file_atomic(cfg_.out / rel, contents);
    rec_.artifacts.push_back(rel);
  }
  void field(const std::string& rel, Snapshot snap) {
    const auto path = cfg_.out / rel;
    std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    write_snapshot(tmp, snap);
    std::filesystem::rename(tmp, path);
    rec_.artifacts.push_back(rel);
  }
  void rows(const std::string& label, double eps, const std::vector<HistoryRow>& h) {
    for (const auto& r : h) rec_.rows.push_back({label, eps, r});
  }

private:
  const RunConfig& cfg_;
  RunRecord& rec_;
};

Snapshot potential_snapshot(const Trajectory& traj) {
  if (auto* sp = dynamic_cast<const SplitProblem*>(traj.problem.get())) {
    const SplitField phi = sp->split(traj.state.u);
    return {{phi.first, phi.second}};
  }
  return {{traj.phi()}};
}

Snapshot velocity_snapshot(const Trajectory& traj) {
  if (auto* sp = dynamic_cast<const SplitProblem*>(traj.problem.get())) {
    const SplitField v = sp->split(traj.state.udot);
    return {{v.first, v.second}};
  }
  return {{traj.phidot()}};
}

// Checks shared by `run` and each `family` member.
void flow_verdicts(Recorder& out, const RunConfig& cfg, const Trajectory& traj, const std::string& suffix) {
  const auto& h = traj.state.history;
  out.verdict("converged" + suffix, traj.converged, h.back().sup_phidot, cfg.flow.stop_tolerance, traj.stop_reason);

  const MonitorVerdict mp = max_principle_monitor(traj, cfg.diagnostics.monitor_tolerance);
  std::string detail;
  if (!mp.ok) {
    const auto& f = mp.failures.front();
    detail = f.what + " at t=" + std::to_string(f.t) + " (" + std::to_string(mp.failures.size()) + " failures)";
  }
  out.verdict("max_principle" + suffix, mp.ok, static_cast<double>(mp.failures.size()), 0.0, detail);

  const TraceVerdict tv = trace_bound_check(traj, cfg.diagnostics.trace_tolerance);
  out.verdict("trace_bound" + suffix, tv.ok, tv.max_trace, tv.bound);

  double worst_rise = 0.0;
  const double scale = std::max(1.0, std::abs(h.front().J));
  for (std::size_t k = 1; k < h.size(); ++k) worst_rise = std::max(worst_rise, h[k].J - h[k - 1].J);
  out.verdict("J_nonincreasing" + suffix, worst_rise <= 1e-10 * scale, worst_rise, 1e-10 * scale);

  const double drop = h.front().J - h.back().J;
  out.scalar("J_drop" + suffix, drop);
  out.scalar("dissipated" + suffix, traj.state.dissipated);
  double i_drift = 0.0;
  for (const auto& r : h) i_drift = std::max(i_drift, std::abs(r.I - h.front().I));
  out.scalar("I_drift" + suffix, i_drift);
  out.scalar("c" + suffix, traj.c);
  out.scalar("t_final" + suffix, traj.state.t);
  out.scalar("steps" + suffix, static_cast<double>(traj.state.steps));
  out.scalar("sup_phidot0" + suffix, traj.initial_sup_phidot);
}

FlowObserver q_observer(QMonitor& monitor, int stride) {
  return [&monitor, stride](const FlowProblem& p, const FlowState& s) {
    if ((s.history.size() - 1) % static_cast<std::size_t>(stride) != 0) return;
    monitor.observe(s.t, p.potential(s.u), p.chi(s.u));
  };
}

void q_verdict(Recorder& out, const RunConfig& cfg, const QMonitor& m, const std::string& suffix, json& report) {
  const auto& series = m.series();
  double qmax = -1e300;
  for (const auto& p : series) qmax = std::max(qmax, p.second);
  const double bound = series.empty() ? 0.0 : series.front().second + cfg.diagnostics.q_slack;
  out.verdict("q_bounded" + suffix, m.bounded(cfg.diagnostics.q_slack), qmax, bound);
  json s = json::array();
  for (const auto& [t, q] : series) s.push_back({t, q});
  report["q_series" + suffix] = s;
  report["q_c0_shift" + suffix] = m.c0_shift();
}

std::vector<char> locus_mask(const Forms& f) {
  if (!f.divisor) return {};
  std::vector<char> m(f.divisor->s2_proxy.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = f.divisor->on_locus(i);
  return m;
}

FlowConfig flow_for(const RunConfig& cfg, double eps) {
  FlowConfig f = cfg.flow;
  f.eps = eps;
  return f;
}

// ---------------------------------------------------------------- commands

void cmd_check_classes(const RunConfig& cfg, Recorder& out, json& report) {
  const CohomologyClass x{cfg.preset.chi0.cls};
  const CohomologyClass w0{cfg.preset.omega0.cls};
  const CohomologyClass wh{cfg.preset.omega_hat.cls};
  out.verdict("chi0_class_kahler", x.is_kahler(), x.m.min_eigenvalue(), 0.0);

  std::vector<double> eps{0.0};
  for (double e : cfg.eps_list)
    if (e != 0.0) eps.push_back(e);
  json cone = json::array();
  for (double e : eps) {
    const ConeVerdict v = cone_condition(x, w0 + e * wh);
    const std::string tag = e == 0.0 ? "" : "@eps=" + eps_tag(e);
    out.verdict("cone" + tag, v.holds(), v.margin, 0.0);
    out.scalar("c" + tag, v.c);
    out.scalar("margin" + tag, v.margin);
    cone.push_back({{"eps", e}, {"c", v.c}, {"margin", v.margin}, {"holds", v.holds()}});
  }
  report["cone"] = cone;
  out.scalar("c0", cone_condition(x, w0).c);

  const Forms f = build_forms(cfg, true);
  double chi_margin = 1e300;
  for (std::size_t i = 0; i < f.chi0->realized().size(); ++i)
    chi_margin = std::min(chi_margin, f.chi0->realized().at(i).min_eigenvalue());
  out.verdict("chi0_positive", chi_margin > 0.0, chi_margin, 0.0);

  const OmegaCertificate cert = f.divisor ? verify_omega0_conditions(*f.omega0, *f.divisor, *f.omega_hat)
                                          : verify_omega0_conditions(*f.omega0, *f.omega_hat);
  out.verdict(f.divisor ? "omega0_degeneracy_conditions" : "omega0_conditions", cert.ok, cert.c0,
              f.divisor ? cfg.preset.c0_certificate : 0.0, cert.message);
  if (cert.ok) out.scalar("C0", cert.c0);
  report["omega0_certificate"] = {{"ok", cert.ok}, {"C0", safe(cert.c0)}, {"message", cert.message}};
}

void cmd_run(const RunConfig& cfg, Recorder& out, json& report) {
  const double eps = cfg.eps_list.front();
  const Forms f = build_forms(cfg, false);
  std::optional<QMonitor> q;
  if (f.divisor) q.emplace(cfg.diagnostics.q, *f.divisor);
  const FlowObserver obs = q ? q_observer(*q, cfg.diagnostics.q_stride) : FlowObserver{};

  Trajectory traj =
      cfg.backend == Backend::split
          ? evolve(flow_for(cfg, eps), *f.s_chi0, *f.s_omega0, *f.s_omega_hat, cfg.initial_split(), obs)
          : evolve(flow_for(cfg, eps), *f.chi0, *f.omega0, *f.omega_hat, cfg.initial_potential(), obs,
                   locus_mask(f));
  out.rows("run", eps, traj.state.history);
  flow_verdicts(out, cfg, traj, "");
  if (q) q_verdict(out, cfg, *q, "", report);
  out.field("fields/phi.jflw", potential_snapshot(traj));
  out.field("fields/phidot.jflw", velocity_snapshot(traj));
  report["stop_reason"] = traj.stop_reason;
}

void cmd_family(const RunConfig& cfg, Recorder& out, json& report) {
  const Forms f = build_forms(cfg, false);
  std::vector<char> region;
  if (f.divisor) region = off_divisor_region(*f.divisor, cfg.diagnostics.region_threshold);

  std::map<double, QMonitor> monitors;
  if (f.divisor)
    for (double e : cfg.eps_list) monitors.emplace(e, QMonitor(cfg.diagnostics.q, *f.divisor));
  std::function<FlowObserver(double)> observer_for;
  if (!monitors.empty()) {
    observer_for = [&](double e) { return q_observer(monitors.at(e), cfg.diagnostics.q_stride); };
  }

  const FamilyReport fam =
      cfg.backend == Backend::split
          ? epsilon_family(cfg.flow, cfg.eps_list, *f.s_chi0, *f.s_omega0, *f.s_omega_hat, cfg.initial_split(),
                           region, observer_for)
          : epsilon_family(cfg.flow, cfg.eps_list, *f.chi0, *f.omega0, *f.omega_hat, cfg.initial_potential(),
                           region, observer_for);

  const UniformityBudget budget{cfg.diagnostics.sup_phi_budget, cfg.diagnostics.sup_phidot_budget,
                                cfg.diagnostics.max_ratio};
  EstimateReport est = uniformity_report(fam, budget);
  json members = json::array();
  for (const auto& m : fam.members) {
    const std::string suffix = "@eps=" + eps_tag(m.eps);
    json jm{{"eps", m.eps}, {"ok", m.ok}, {"error", m.error}, {"sup_phi", m.sup_phi}, {"sup_phidot", m.sup_phidot}};
    if (m.trajectory) {
      const Trajectory& traj = *m.trajectory;
      out.rows("eps=" + eps_tag(m.eps), m.eps, traj.state.history);
      flow_verdicts(out, cfg, traj, suffix);
      const TraceVerdict tv = trace_bound_check(traj, cfg.diagnostics.trace_tolerance);
      est.trace_bound_ok = est.trace_bound_ok && tv.ok;
      out.field("fields/phi_eps" + eps_tag(m.eps) + ".jflw", potential_snapshot(traj));
      jm["stop_reason"] = traj.stop_reason;
      jm["t_final"] = traj.state.t;
    } else {
      out.verdict("member" + suffix, false, 0.0, 0.0, m.error);
    }
    if (auto it = monitors.find(m.eps); it != monitors.end() && m.trajectory) {
      q_verdict(out, cfg, it->second, suffix, report);
      if (est.q_max_series.empty()) est.q_max_series = it->second.series();
    }
    members.push_back(jm);
  }
  out.verdict("uniform_estimates", est.uniform_ok, fam.max_sup_phi, budget.sup_phi,
              est.notes.empty() ? "" : est.notes.front());
  out.verdict("trace_bound_family", est.trace_bound_ok, 0.0, 0.0);
  out.scalar("max_sup_phi", fam.max_sup_phi);
  out.scalar("max_sup_phidot", fam.max_sup_phidot);

  json sup_phi, sup_phidot;
  for (const auto& [e, v] : est.sup_phi_by_eps) sup_phi[eps_tag(e)] = v;
  for (const auto& [e, v] : est.sup_phidot_by_eps) sup_phidot[eps_tag(e)] = v;
  report["family"] = {{"members", members},
                      {"max_sup_phi", fam.max_sup_phi},
                      {"max_sup_phidot", fam.max_sup_phidot},
                      {"consecutive_diff_full", fam.consecutive_diff_full},
                      {"consecutive_diff_region", fam.consecutive_diff_region}};
  report["estimates"] = {{"sup_phi_by_eps", sup_phi},
                         {"sup_phidot_by_eps", sup_phidot},
                         {"uniform_ok", est.uniform_ok},
                         {"trace_bound_ok", est.trace_bound_ok},
                         {"notes", est.notes}};
}

// Observed order of the Newton tail: log r_{k+1} / log r_k over the last steps.
double tail_order(const MAResult& r) {
  std::vector<double> res;
  for (const auto& it : r.iterations) res.push_back(it.residual);
  res.push_back(r.final_residual);
  for (std::size_t k = res.size(); k-- > 2;) {
    const double a = res[k - 2], b = res[k - 1], c = res[k];
    // Skip triples that reach the round-off floor.
    if (a < 1.0 && b < a && c > 1e-12 && std::log(b / a) != 0.0) {
      return std::log(c / b) / std::log(b / a);
    }
  }
  return 0.0;
}

json newton_trace(const MAResult& r) {
  json j = json::array();
  for (const auto& it : r.iterations)
    j.push_back({{"residual", it.residual}, {"step", it.step_length}, {"linear", it.linear_iterations}});
  return j;
}

void cmd_solve_ma(const RunConfig& cfg, Recorder& out, json& report) {
  std::vector<double> eps = cfg.eps_list;
  std::sort(eps.rbegin(), eps.rend());
  eps.erase(std::unique(eps.begin(), eps.end()), eps.end());
  const Forms f = build_forms(cfg, false);
  json stages = json::array();
  auto record_stage = [&](double e, double c, double residual, double crit, const std::vector<const MAResult*>& rs,
                          Snapshot snap) {
    const std::string suffix = "@eps=" + eps_tag(e);
    out.verdict("newton" + suffix, residual <= cfg.ma.newton_tol, residual, cfg.ma.newton_tol);
    out.scalar("c" + suffix, c);
    out.scalar("critical_residual" + suffix, crit);
    json js{{"eps", e}, {"c", c}, {"final_residual", residual}, {"critical_residual", crit}};
    for (std::size_t k = 0; k < rs.size(); ++k) {
      const std::string part = rs.size() > 1 ? (k == 0 ? "first" : "second") : "torus";
      out.scalar("iterations_" + part + suffix, static_cast<double>(rs[k]->iterations.size()));
      out.scalar("tail_order_" + part + suffix, tail_order(*rs[k]));
      js["newton_" + part] = newton_trace(*rs[k]);
    }
    out.field("fields/psi_eps" + eps_tag(e) + ".jflw", std::move(snap));
    stages.push_back(js);
  };
  if (cfg.backend == Backend::split) {
    const auto results = solve_ma_continuation(*f.s_chi0, *f.s_omega0, *f.s_omega_hat, eps, cfg.ma);
    for (std::size_t k = 0; k < eps.size(); ++k) {
      const SplitForm w = epsilon_form(*f.s_omega0, eps[k], *f.s_omega_hat);
      const double c = c_constant(f.s_chi0->cls(), w.cls());
      const auto& r = results[k];
      record_stage(eps[k], c, r.final_residual, critical_residual(r.psi, *f.s_chi0, w, c), {&r.first, &r.second},
                   Snapshot{{r.psi.first, r.psi.second}});
    }
  } else {
    std::optional<ScalarField> warm;
    for (double e : eps) {
      const ClosedForm w = epsilon_form(*f.omega0, e, *f.omega_hat);
      const double c = c_constant(f.chi0->cls(), w.cls());
      const MAResult r = solve_ma(build_alpha(*f.chi0, w, c), c, w, cfg.ma, warm);
      record_stage(e, c, r.final_residual, critical_residual(r.psi, *f.chi0, w, c), {&r}, Snapshot{{r.psi}});
      warm = r.psi;
    }
  }
  report["stages"] = stages;
}

ScalarField load_potential(const RunConfig& cfg) {
  const Snapshot snap = read_snapshot(*cfg.snapshot);
  if (snap.components.size() == 1 && snap.components[0].grid() == cfg.torus_grid()) return snap.components[0];
  if (snap.components.size() == 2 && snap.components[0].grid() == cfg.plane_grid()) {
    return assemble(snap.components[0], snap.components[1]);
  }
  throw FormatError("snapshot '" + cfg.snapshot->string() + "' does not hold a potential on the configured grid");
}

void cmd_functionals(const RunConfig& cfg, Recorder& out, json& report) {
  const Forms f = build_forms(cfg, true);
  const ScalarField phi = cfg.snapshot ? load_potential(cfg) : cfg.initial_potential();
  const double eps = cfg.eps_list.front();
  const ClosedForm w = epsilon_form(*f.omega0, eps, *f.omega_hat);
  const double c = c_constant(f.chi0->cls(), w.cls());
  const FunctionalReport fr = functional_report(phi, *f.chi0, w, c, cfg.path_steps);
  const bool finite = std::isfinite(fr.J) && std::isfinite(fr.I) && std::isfinite(fr.E);
  out.verdict("functionals_finite", finite, fr.J, 0.0);
  out.scalar("J", fr.J);
  out.scalar("I", fr.I);
  out.scalar("E", fr.E);
  out.scalar("c", c);
  if (fr.has_mabuchi) {
    out.scalar("M", fr.M);
    out.scalar("F", fr.F);
  }
  report["functionals"] = {{"J", fr.J}, {"I", fr.I}, {"E", fr.E}, {"has_mabuchi", fr.has_mabuchi},
                           {"M", safe(fr.M)}, {"F", safe(fr.F)}, {"path_resolution", fr.path_resolution},
                           {"notes", fr.notes}};
}

void cmd_report(const RunConfig& cfg, RunRecord& rec, json& report) {
  std::vector<std::string> warnings;
  const RunRecord src = read_record(cfg.out / "run.json", &warnings);
  rec.rows = src.rows;
  rec.scalars = src.scalars;
  rec.verdicts = src.verdicts;
  rec.notes = warnings;
  rec.verdicts.push_back({"integrity", warnings.empty(), static_cast<double>(warnings.size()), 0.0,
                          warnings.empty() ? "" : warnings.front()});
  json table = json::array();
  for (const auto& v : rec.verdicts) table.push_back({{"name", v.name}, {"ok", v.ok}, {"value", safe(v.value)}});
  report["source_command"] = src.command;
  report["source_hash"] = src.config_hash;
  report["source_exit_code"] = src.exit_code();
  report["verdicts"] = table;
  report["warnings"] = warnings;
}

} // namespace

RunRecord execute(const RunConfig& cfg, const std::string& command) {
  RunRecord rec;
  rec.command = command;
  rec.config_hash = cfg.hash();
  rec.config_path = cfg.source_path;
  rec.overrides = cfg.overrides;
  rec.seed = cfg.seed;
  rec.started = now_utc();
  Recorder out(cfg, rec);
  json report;
  report["command"] = command;
  report["config_hash"] = rec.config_hash;
  try {
    validate(cfg);
    if (command == "check-classes") cmd_check_classes(cfg, out, report);
    else if (command == "run") cmd_run(cfg, out, report);
    else if (command == "family") cmd_family(cfg, out, report);
    else if (command == "solve-ma") cmd_solve_ma(cfg, out, report);
    else if (command == "functionals") cmd_functionals(cfg, out, report);
    else if (command == "report") cmd_report(cfg, rec, report);
    else throw ConfigError({"command: unknown command '" + command + "'"});
  } catch (const ConeConditionError& e) {
    rec.errors.push_back(std::string("cone condition: ") + e.what());
  } catch (const std::exception& e) {
    rec.errors.push_back(e.what());
  }
  if (!rec.errors.empty()) report["errors"] = rec.errors;
  report["exit_code"] = rec.exit_code();
  try {
    if (command != "report" && !rec.rows.empty()) out.artifact("series.csv", series_csv(rec.rows));
    out.artifact("report.json", report.dump(2) + "\n");
    rec.finished = now_utc();
    if (command != "report") write_record(cfg.out / "run.json", rec);
  } catch (const std::exception& e) {
    rec.errors.push_back(std::string("writing artifacts: ") + e.what());
  }
  rec.finished = rec.finished.empty() ? now_utc() : rec.finished;
  return rec;
}

} // namespace jflow::app
