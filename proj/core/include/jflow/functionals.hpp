#pragma once

#include "jflow/cohomology.hpp"
#include "jflow/separable.hpp"
#include "jflow/split.hpp"

#include <string>
#include <vector>

namespace jflow {

// Energy functionals on potentials phi with chi_phi = chi_0 + d d^c phi.
// All integrals use the torus convention (4 * mean of the top-form density).

namespace detail {

/// int phi (chi_phi ^ omega + chi_0 ^ omega) - (c/3) int phi (chi_phi^2 + chi_phi ^ chi_0 + chi_0^2)
template <class Scalar, class Form>
double j_closed(const Scalar& phi, const Form& chi_phi, const Form& chi0, const Form& omega, double c) {
  const auto mixed = wedge_density(chi_phi, omega) + wedge_density(chi0, omega);
  const auto cubic = wedge_density(chi_phi, chi_phi) + wedge_density(chi_phi, chi0) + wedge_density(chi0, chi0);
  return integrate(phi * mixed) - (c / 3.0) * integrate(phi * cubic);
}

template <class Scalar, class Form>
double i_functional(const Scalar& phi, const Form& chi_phi, const Form& chi0) {
  const auto cubic = wedge_density(chi_phi, chi_phi) + wedge_density(chi_phi, chi0) + wedge_density(chi0, chi0);
  return integrate(phi * cubic) / 3.0;
}

/// int v (2 chi_phi ^ omega - c chi_phi^2): the derivative of J along v.
template <class Scalar, class Form>
double j_gradient(const Scalar& v, const Form& chi_phi, const Form& omega, double c) {
  return integrate(v * (2.0 * wedge_density(chi_phi, omega) - c * wedge_density(chi_phi, chi_phi)));
}

/// int phidot^2 chi_phi^2: minus the rate of change of J along the flow.
template <class Scalar, class Form>
double dissipation(const Scalar& phidot, const Form& chi_phi) {
  return integrate(phidot * phidot * wedge_density(chi_phi, chi_phi));
}

} // namespace detail

// --- torus (full 4-D) forms ---

double J_closed(const ScalarField& phi, const ClosedForm& chi0, const ClosedForm& omega, double c);

enum class PathKind { linear, quadratic };

/// int_0^1 int phidot_s (2 chi_s ^ omega - c chi_s^2) ds along s phi (linear)
/// or s^2 phi (quadratic), composite Simpson with `steps` intervals,
/// Richardson-extrapolated against steps/2. steps must be even and >= 8.
double J_path(const ScalarField& phi, const ClosedForm& chi0, const ClosedForm& omega, double c,
              int steps, PathKind kind = PathKind::linear);

/// int v (2 chi_phi ^ omega - c chi_phi^2).
double J_gradient(const ScalarField& phi, const ScalarField& v, const ClosedForm& chi0,
                  const ClosedForm& omega, double c);

struct GradientCheck {
  double finite_difference;
  double analytic;
  double relative_error; ///< |fd - analytic| / max(|analytic|, scale); see scale
  double scale;
};

/// Central difference of J_closed with step h against J_gradient. The
/// relative error is taken against max(|analytic|, |J(phi)|, 1e-300).
GradientCheck J_gradient_check(const ScalarField& phi, const ScalarField& v, const ClosedForm& chi0,
                               const ClosedForm& omega, double c, double h = 1e-4);

double I_functional(const ScalarField& phi, const ClosedForm& chi0);

/// sqrt(-1) int d phi ^ dbar phi ^ (chi_0 + chi_phi).
double E_aubin_yau(const ScalarField& phi, const ClosedForm& chi0);

double dissipation(const ScalarField& phidot, const HermitianFormField& chi_phi);

/// R = tr_chi Ric(chi), Ric = -d d^c log(chi^2 / 2). Throws PositivityError
/// unless chi > 0.
ScalarField scalar_curvature(const HermitianFormField& chi);
/// int R chi^2 / int chi^2.
double average_scalar_curvature(const HermitianFormField& chi);

/// -int_0^1 int phidot_s (R_s - Rbar) chi_s^2 ds along the linear path,
/// Simpson + Richardson as in J_path.
double mabuchi_path(const ScalarField& phi, const ClosedForm& chi0, int steps);

struct FunctionalReport {
  double J = 0.0;
  double I = 0.0;
  double E = 0.0;
  double M = 0.0;
  double F = 0.0;
  int path_resolution = 0;
  bool has_mabuchi = false;
  std::vector<std::string> notes;
};

/// Evaluates J, I, E and, when the whole linear path stays positive, the
/// Mabuchi energy and F = M - J on the same path resolution.
FunctionalReport functional_report(const ScalarField& phi, const ClosedForm& chi0,
                                   const ClosedForm& omega, double c, int steps = 16);

// --- split (product) forms ---

SplitHerm realize(const SplitForm& f);
/// chi_0 + d d^c phi for a split potential.
SplitHerm realize(const SplitForm& chi0, const SplitField& phi);
Separable as_separable(const SplitField& f);

double J_closed(const SplitField& phi, const SplitForm& chi0, const SplitForm& omega, double c);
double I_functional(const SplitField& phi, const SplitForm& chi0);
double E_aubin_yau(const SplitField& phi, const SplitForm& chi0);
double dissipation(const SplitField& phidot, const SplitHerm& chi_phi);

} // namespace jflow
