#include "jflow/diagnostics.hpp"

#include "jflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace jflow {

std::vector<char> off_divisor_region(const DivisorModel& div, double threshold) {
  std::vector<char> mask(div.s2_proxy.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = div.s2_proxy[i] >= threshold;
  return mask;
}

double compare_up_to_constant(const ScalarField& a, const ScalarField& b, const std::vector<char>& mask) {
  if (!(a.grid() == b.grid())) throw DomainError("compared fields live on different grids");
  if (!mask.empty() && mask.size() != a.size()) throw DomainError("mask size mismatch");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    sum += a[i] - b[i];
    ++count;
  }
  if (count == 0) throw DomainError("comparison mask is empty");
  const double mean = sum / static_cast<double>(count);
  double sup = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!mask.empty() && !mask[i]) continue;
    sup = std::max(sup, std::abs(a[i] - b[i] - mean));
  }
  return sup;
}

EstimateReport uniformity_report(const FamilyReport& family, const UniformityBudget& budget) {
  EstimateReport rep;
  const FamilyMember* prev = nullptr;
  for (const auto& m : family.members) {
    if (!m.ok) {
      rep.uniform_ok = false;
      rep.notes.push_back("eps=" + std::to_string(m.eps) + ": run failed: " + m.error);
      continue;
    }
    rep.sup_phi_by_eps[m.eps] = m.sup_phi;
    rep.sup_phidot_by_eps[m.eps] = m.sup_phidot;
    if (m.sup_phi > budget.sup_phi) {
      rep.uniform_ok = false;
      rep.notes.push_back("eps=" + std::to_string(m.eps) + ": sup|phi| " + std::to_string(m.sup_phi) +
                          " exceeds budget " + std::to_string(budget.sup_phi));
    }
    if (m.sup_phidot > budget.sup_phidot) {
      rep.uniform_ok = false;
      rep.notes.push_back("eps=" + std::to_string(m.eps) + ": sup|phidot| " + std::to_string(m.sup_phidot) +
                          " exceeds budget " + std::to_string(budget.sup_phidot));
    }
    if (prev) {
      auto ratio = [](double now, double before) { return before > 0.0 ? now / before : 1.0; };
      const double rp = ratio(m.sup_phi, prev->sup_phi);
      const double rd = ratio(m.sup_phidot, prev->sup_phidot);
      if (rp > budget.max_ratio || rd > budget.max_ratio) {
        rep.uniform_ok = false;
        rep.notes.push_back("eps=" + std::to_string(m.eps) + ": successive sup ratio " +
                            std::to_string(std::max(rp, rd)) + " exceeds " + std::to_string(budget.max_ratio));
      }
    }
    prev = &m;
  }
  return rep;
}

TraceVerdict trace_bound_check(const HermitianFormField& chi, const HermitianFormField& omega, double c,
                               double sup_phidot0, double tolerance) {
  const ScalarField tr = trace_with(chi, omega);
  TraceVerdict v;
  v.bound = c + sup_phidot0 + tolerance;
  v.max_trace = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tr.size(); ++i) {
    if (tr[i] > v.max_trace) {
      v.max_trace = tr[i];
      v.index = i;
    }
  }
  v.ok = v.max_trace <= v.bound;
  return v;
}

TraceVerdict trace_bound_check(const Trajectory& traj, double tolerance) {
  TraceVerdict v;
  v.bound = traj.c + traj.initial_sup_phidot + tolerance;
  v.max_trace = -std::numeric_limits<double>::infinity();
  for (const auto& r : traj.state.history) {
    if (r.max_trace > v.max_trace) {
      v.max_trace = r.max_trace;
      v.t = r.t;
    }
  }
  v.ok = v.max_trace <= v.bound;
  return v;
}

ProfileFit fit_power_law(const ScalarField& u, const ScalarField& s2, double band_low, double band_high) {
  if (!(u.grid() == s2.grid())) throw DomainError("profile and proxy on different grids");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (s2[i] < band_low || s2[i] > band_high) continue;
    if (!(u[i] > 0.0)) throw DomainError("profile must be positive in the fit band");
    const double x = -std::log(s2[i]);
    const double y = std::log(u[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 8) throw DomainError("too few grid points in the fit band (" + std::to_string(n) + ")");
  const double dn = static_cast<double>(n);
  const double var = sxx - sx * sx / dn;
  ProfileFit fit;
  fit.points = n;
  fit.slope = var > 0.0 ? (sxy - sx * sy / dn) / var : 0.0;
  fit.log_c = (sy - fit.slope * sx) / dn;
  fit.gamma = std::max(fit.slope, 0.0);
  return fit;
}

ProfileFit singular_profile_fit(const HermitianFormField& chi, const DivisorModel& div, double band_low,
                                double band_high) {
  return fit_power_law(chi.h11() + chi.h22(), div.s2_proxy, band_low, band_high);
}

void QMonitorConfig::validate(double beta) const {
  std::vector<std::string> bad;
  if (!(A > 1.0)) bad.push_back("A must exceed 1");
  if (!(delta > 0.0)) bad.push_back("delta must be positive");
  if (!(A * delta >= 2.0 * beta)) bad.push_back("A * delta must be >= 2 beta");
  if (!bad.empty()) throw ConfigError(bad);
}

QMonitor::QMonitor(QMonitorConfig cfg, const DivisorModel& div)
    : cfg_(std::move(cfg)), s2_(div.s2_proxy), mask_(div.s2_proxy.size()) {
  cfg_.validate(div.beta);
  std::size_t masked = 0;
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    mask_[i] = div.on_locus(i);
    masked += mask_[i] ? 1 : 0;
  }
  if (static_cast<double>(masked) > cfg_.max_mask_fraction * static_cast<double>(mask_.size())) {
    throw ConfigError({"divisor mask covers more than " + std::to_string(100.0 * cfg_.max_mask_fraction) +
                       "% of the grid; refine the grid"});
  }
}

ScalarField QMonitor::phi_tilde(const ScalarField& phi) const {
  ScalarField out(phi.grid());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = mask_[i] ? std::numeric_limits<double>::infinity() : phi[i] - cfg_.delta * std::log(s2_[i]);
  }
  return out;
}

double QMonitor::observe(double t, const ScalarField& phi, const HermitianFormField& chi) {
  if (!(phi.grid() == s2_.grid()) || !(chi.grid() == s2_.grid())) throw DomainError("q monitor grid mismatch");
  const ScalarField pt = phi_tilde(phi);
  if (!cfg_.c0_shift) {
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pt.size(); ++i)
      if (!mask_[i]) lo = std::min(lo, pt[i]);
    cfg_.c0_shift = 1.0 - lo;
  }
  const double c0 = *cfg_.c0_shift;
  double q = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pt.size(); ++i) {
    if (mask_[i]) continue;
    const double u = chi.h11()[i] + chi.h22()[i];
    if (!(u > 0.0)) throw PositivityError("tr chi is not positive", i, chi.grid().point(i), u);
    const double denom = pt[i] + c0;
    if (!(denom > 0.0)) throw DomainError("phi_tilde + C0 is not positive; increase the C0 shift");
    q = std::max(q, std::log(u) - cfg_.A * pt[i] + 1.0 / denom);
  }
  series_.emplace_back(t, q);
  return q;
}

bool QMonitor::bounded(double slack) const {
  if (series_.empty()) return true;
  const double q0 = series_.front().second;
  return std::all_of(series_.begin(), series_.end(), [&](const auto& p) { return p.second <= q0 + slack; });
}

double q_monitor(const ScalarField& phi, const HermitianFormField& chi, const DivisorModel& div,
                 QMonitorConfig& cfg) {
  QMonitor m(cfg, div);
  const double q = m.observe(0.0, phi, chi);
  cfg.c0_shift = m.c0_shift();
  return q;
}

} // namespace jflow
