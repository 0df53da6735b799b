#pragma once

#include "jflow/cohomology.hpp"
#include "jflow/split.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace jflow {

struct FlowConfig {
  double eps = 0.0;
  double dt_safety = 0.2;
  double stop_tolerance = 1e-9; ///< on sup |rhs|
  double max_time = 10.0;
  int snapshot_stride = 100;    ///< accepted steps between history rows
  /// Required for eps == 0 when omega_0 is not positive definite.
  bool degenerate_mode = false;
  int max_rejections = 20;
  std::size_t max_steps = 50'000'000;
  /// Overrides the adaptive rule when set.
  std::optional<double> fixed_dt;

  /// Throws DomainError on invalid values.
  void validate() const;
};

/// One row per snapshot. The first seven columns are the exported series.
struct HistoryRow {
  double t = 0.0;
  double sup_phi = 0.0;
  double sup_phidot = 0.0;
  double J = 0.0;
  double I = 0.0;
  double margin = 0.0;
  double residual = 0.0;  ///< sup |2 chi^omega - c chi^2| (density form)
  double max_phidot = 0.0;
  double min_phidot = 0.0;
  double max_trace = 0.0; ///< sup tr_chi omega
  double trace_defect = 0.0;
  double dissipated = 0.0; ///< int_0^t int phidot^2 chi^2 dt, accumulated with the RK4 weights
  std::size_t step = 0;
  double dt = 0.0;

  bool operator==(const HistoryRow&) const = default;
};

/// Pointwise quantities at a potential, as computed by a FlowProblem.
struct Evaluation {
  double margin = 0.0;     ///< smallest eigenvalue of chi off the divisor locus
  double lambda_max = 0.0; ///< largest eigenvalue of chi^-1 omega chi^-1
  double dissipation = 0.0;
};

/// A discretized J-flow: state vector u, velocity c - tr_{chi_u} omega.
class FlowProblem {
public:
  virtual ~FlowProblem() = default;

  virtual std::size_t dofs() const = 0;
  virtual int n() const = 0;
  virtual double c() const = 0;

  /// Writes the velocity into `out` unless the margin is <= 0, in which case
  /// `out` is left unspecified and only the margin is meaningful.
  virtual Evaluation rhs(std::span<const double> u, std::span<double> out) const = 0;
  virtual HistoryRow observe(std::span<const double> u, std::span<const double> udot) const = 0;

  /// Torus representations, for diagnostics.
  virtual ScalarField potential(std::span<const double> u) const = 0;
  virtual ScalarField velocity(std::span<const double> udot) const = 0;
  virtual HermitianFormField chi(std::span<const double> u) const = 0;
  virtual HermitianFormField omega() const = 0;
};

/// Full 4-D backend.
class FullProblem final : public FlowProblem {
public:
  /// `locus` marks points excluded from the positivity margin (may be empty).
  FullProblem(ClosedForm chi0, ClosedForm omega, std::vector<char> locus = {});

  std::size_t dofs() const override { return chi0_.grid().size(); }
  int n() const override { return chi0_.grid().n(); }
  double c() const override { return c_; }
  Evaluation rhs(std::span<const double> u, std::span<double> out) const override;
  HistoryRow observe(std::span<const double> u, std::span<const double> udot) const override;
  ScalarField potential(std::span<const double> u) const override;
  ScalarField velocity(std::span<const double> udot) const override { return potential(udot); }
  HermitianFormField chi(std::span<const double> u) const override;
  HermitianFormField omega() const override { return omega_.realized(); }

  const ClosedForm& chi0() const { return chi0_; }

private:
  ClosedForm chi0_;
  ClosedForm omega_;
  std::vector<char> locus_;
  double c_;
};

/// Product backend: u = (phi1 on plane, phi2 on plane).
class SplitProblem final : public FlowProblem {
public:
  SplitProblem(SplitForm chi0, SplitForm omega);

  std::size_t dofs() const override { return 2 * plane_size(); }
  int n() const override { return chi0_.factor_grid().n(); }
  double c() const override { return c1_ + c2_; }
  double c1() const { return c1_; }
  double c2() const { return c2_; }
  Evaluation rhs(std::span<const double> u, std::span<double> out) const override;
  HistoryRow observe(std::span<const double> u, std::span<const double> udot) const override;
  ScalarField potential(std::span<const double> u) const override;
  ScalarField velocity(std::span<const double> udot) const override { return potential(udot); }
  HermitianFormField chi(std::span<const double> u) const override;
  HermitianFormField omega() const override;

  SplitField split(std::span<const double> u) const;

private:
  std::size_t plane_size() const { return chi0_.factor_grid().size(); }

  SplitForm chi0_;
  SplitForm omega_;
  double c1_, c2_;
};

/// c - tr_{chi_phi} omega. Throws PositivityError where chi_phi is not
/// positive definite.
ScalarField flow_rhs(const ScalarField& phi, const ClosedForm& chi0, const ClosedForm& omega, double c);
/// Per-factor velocities c1 - omega1 / chi1 and c2 - omega2 / chi2, with
/// c1 = mean(omega1) / [chi0]_11 and c2 likewise.
SplitField flow_rhs(const SplitField& phi, const SplitForm& chi0, const SplitForm& omega);

struct FlowState {
  std::vector<double> u;
  std::vector<double> udot;
  Evaluation eval;
  double t = 0.0;
  double dissipated = 0.0;
  std::size_t steps = 0;
  std::size_t rejections = 0;
  std::vector<HistoryRow> history;
};

/// Velocity and evaluation at u; throws PositivityError if chi_u <= 0.
FlowState initial_state(const FlowProblem& problem, std::vector<double> u);

/// dt_safety / (lambda_max (pi N)^2).
double adaptive_dt(double lambda_max, int n, double dt_safety);
double adaptive_dt(const FlowProblem& problem, const FlowState& state, double dt_safety);

/// One RK4 step attempted with dt. A step whose stages or end point leave
/// the positive cone is rejected and retried with dt/2, at most
/// max_rejections times. Returns the dt actually taken.
double step(const FlowProblem& problem, FlowState& state, double dt, int max_rejections = 20);

struct Trajectory {
  FlowState state;
  bool converged = false;
  std::string stop_reason;
  double c = 0.0;
  double initial_sup_phidot = 0.0;
  std::shared_ptr<const FlowProblem> problem;

  ScalarField phi() const { return problem->potential(state.u); }
  ScalarField phidot() const { return problem->velocity(state.udot); }
  HermitianFormField chi() const { return problem->chi(state.u); }
};

/// Called at every history row.
using FlowObserver = std::function<void(const FlowProblem&, const FlowState&)>;

/// Runs until sup |rhs| < stop_tolerance or t >= max_time. Throws
/// ConeConditionError if c [X] - [omega_eps] is not positive and
/// StiffnessError after too many rejections.
Trajectory evolve(const FlowConfig& cfg, const ClosedForm& chi0, const ClosedForm& omega0,
                  const ClosedForm& omega_hat, const ScalarField& phi0,
                  const FlowObserver& observer = {}, std::vector<char> locus = {});
Trajectory evolve(const FlowConfig& cfg, const SplitForm& chi0, const SplitForm& omega0,
                  const SplitForm& omega_hat, const SplitField& phi0,
                  const FlowObserver& observer = {});
/// Drives an already constructed problem.
Trajectory evolve(const FlowConfig& cfg, std::shared_ptr<const FlowProblem> problem,
                  std::vector<double> u0, const FlowObserver& observer = {});

struct MonitorFailure {
  double t;
  std::string what;
  double value;
  double bound;
};

struct MonitorVerdict {
  bool ok = true;
  std::vector<MonitorFailure> failures;
};

/// sup phidot nonincreasing and inf phidot nondecreasing across rows (with
/// `tolerance` slack per row), and tr_chi omega <= c + sup|phidot(0)| + tolerance
/// at every row. Needs at least three rows unless the run stopped at once.
MonitorVerdict max_principle_monitor(const Trajectory& traj, double tolerance = 1e-8);

/// Member of an epsilon family.
struct FamilyMember {
  double eps = 0.0;
  bool ok = false;
  std::string error;
  std::optional<Trajectory> trajectory;
  double sup_phi = 0.0;    ///< sup over time of sup|phi|
  double sup_phidot = 0.0; ///< sup over time of sup|phidot|
};

struct FamilyReport {
  std::vector<FamilyMember> members;
  double max_sup_phi = 0.0;
  double max_sup_phidot = 0.0;
  /// sup |phi_{eps_k} - phi_{eps_{k+1}}| for consecutive successful members.
  std::vector<double> consecutive_diff_full;
  std::vector<double> consecutive_diff_region;
  bool all_ok() const;
};

/// Runs one flow per eps (concurrently) from the same phi0. `region` marks
/// the off-divisor comparison set on the torus grid (empty: whole grid).
FamilyReport epsilon_family(const FlowConfig& tmpl, const std::vector<double>& eps_list,
                            const SplitForm& chi0, const SplitForm& omega0,
                            const SplitForm& omega_hat, const SplitField& phi0,
                            const std::vector<char>& region = {},
                            const std::function<FlowObserver(double)>& observer_for = {});
FamilyReport epsilon_family(const FlowConfig& tmpl, const std::vector<double>& eps_list,
                            const ClosedForm& chi0, const ClosedForm& omega0,
                            const ClosedForm& omega_hat, const ScalarField& phi0,
                            const std::vector<char>& region = {},
                            const std::function<FlowObserver(double)>& observer_for = {});

} // namespace jflow
