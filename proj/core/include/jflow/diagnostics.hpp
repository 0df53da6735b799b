#pragma once

#include "jflow/cohomology.hpp"
#include "jflow/flow.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace jflow {

/// Points with s2_proxy >= threshold.
std::vector<char> off_divisor_region(const DivisorModel& div, double threshold = 0.1);

/// sup over the mask of |a - b - mean_mask(a - b)|. An empty mask means the
/// whole grid.
double compare_up_to_constant(const ScalarField& a, const ScalarField& b, const std::vector<char>& mask = {});

struct UniformityBudget {
  double sup_phi = 0.0;
  double sup_phidot = 0.0;
  double max_ratio = 1.1; ///< successive sups (decreasing eps) may grow at most by this factor
};

struct EstimateReport {
  std::map<double, double> sup_phi_by_eps;
  std::map<double, double> sup_phidot_by_eps;
  bool uniform_ok = true;
  bool trace_bound_ok = true;
  std::optional<double> gamma_fit;
  std::vector<std::pair<double, double>> q_max_series; ///< (t, q_max)
  std::vector<std::string> notes;

  bool ok() const { return uniform_ok && trace_bound_ok; }
};

/// Checks the family's sup|phi| and sup|phidot| against the budget and the
/// trend as eps decreases. Failed members are reported in notes and fail
/// the verdict.
EstimateReport uniformity_report(const FamilyReport& family, const UniformityBudget& budget);

struct TraceVerdict {
  bool ok = true;
  double max_trace = 0.0;
  double bound = 0.0;
  std::size_t index = 0; ///< worst grid point (field overload)
  double t = 0.0;        ///< worst snapshot (trajectory overload)
};

/// sup tr_chi omega <= c + sup_phidot0 + tolerance at one snapshot.
TraceVerdict trace_bound_check(const HermitianFormField& chi, const HermitianFormField& omega, double c,
                               double sup_phidot0, double tolerance = 1e-8);
/// Same bound at every history row of a run.
TraceVerdict trace_bound_check(const Trajectory& traj, double tolerance = 1e-8);

struct ProfileFit {
  double gamma = 0.0; ///< max(slope, 0)
  double slope = 0.0;
  double log_c = 0.0;
  std::size_t points = 0;
};

/// Least-squares fit log u = log C + slope * (-log s2) over points with s2 in
/// [band_low, band_high]. Throws DomainError with fewer than 8 points.
ProfileFit fit_power_law(const ScalarField& u, const ScalarField& s2, double band_low = 1e-3,
                         double band_high = 0.5);
/// The fit with u = tr_Id chi.
ProfileFit singular_profile_fit(const HermitianFormField& chi, const DivisorModel& div, double band_low = 1e-3,
                                double band_high = 0.5);

struct QMonitorConfig {
  double A = 2.0;
  double delta = 1.0;
  /// Fixed at the first evaluation when unset: 1 - min(phi_tilde).
  std::optional<double> c0_shift;
  double max_mask_fraction = 0.01;

  /// A > 1, delta > 0 and A delta >= 2 beta.
  void validate(double beta) const;
};

/// Tracks Q = log u - A phi_tilde + 1 / (phi_tilde + C0) with
/// phi_tilde = phi - delta log s2, u = tr_Id chi, over points with
/// s2 >= 1e-12.
class QMonitor {
public:
  QMonitor(QMonitorConfig cfg, const DivisorModel& div);

  /// Returns the sup of Q over the unmasked points and appends (t, q_max).
  double observe(double t, const ScalarField& phi, const HermitianFormField& chi);
  /// phi_tilde for the given potential (masked points set to +inf).
  ScalarField phi_tilde(const ScalarField& phi) const;

  const std::vector<std::pair<double, double>>& series() const { return series_; }
  double c0_shift() const { return cfg_.c0_shift.value_or(0.0); }
  /// q_max(t) <= q_max(0) + slack for every recorded t.
  bool bounded(double slack = 1.0) const;

private:
  QMonitorConfig cfg_;
  ScalarField s2_;
  std::vector<char> mask_;
  std::vector<std::pair<double, double>> series_;
};

/// One-shot form of QMonitor::observe.
double q_monitor(const ScalarField& phi, const HermitianFormField& chi, const DivisorModel& div,
                 QMonitorConfig& cfg);

} // namespace jflow
