#include "jflow/functionals.hpp"

#include "jflow/error.hpp"
#include "jflow/spectral.hpp"

#include <cmath>
#include <functional>

namespace jflow {

namespace {

void check_steps(int steps) {
  if (steps < 8 || steps % 2 != 0) throw DomainError("path resolution must be even and >= 8");
}

// Simpson on `steps` and `steps/2` intervals, combined to cancel the h^4 term.
// Integrand values on the coarse nodes are shared with the fine pass.
double simpson_richardson(const std::function<double(double)>& g, int steps) {
  std::vector<double> v(steps + 1);
  for (int k = 0; k <= steps; ++k) v[k] = g(static_cast<double>(k) / steps);
  auto rule = [&](int stride) {
    const int m = steps / stride;
    const double h = 1.0 / m;
    double sum = v[0] + v[steps];
    for (int k = 1; k < m; ++k) sum += (k % 2 ? 4.0 : 2.0) * v[k * stride];
    return sum * h / 3.0;
  };
  const double fine = rule(1);
  if ((steps / 2) % 2 != 0) return fine;
  const double coarse = rule(2);
  return fine + (fine - coarse) / 15.0;
}

// d phi/dz_j d phi/dz_k conj, the components of i dphi ^ dbar phi.
HermitianFormField gradient_form(const ScalarField& phi) {
  auto d = spectral_for(phi.grid()).dz(phi);
  HermitianFormField g(phi.grid());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const std::complex<double> p1{d[0].first[i], d[0].second[i]};
    const std::complex<double> p2{d[1].first[i], d[1].second[i]};
    g.set(i, {std::norm(p1), std::norm(p2), p1 * std::conj(p2)});
  }
  return g;
}

ScalarField gradient_density(const ScalarField& plane_phi) {
  auto d = spectral_for(plane_phi.grid()).dz(plane_phi);
  return d[0].first * d[0].first + d[0].second * d[0].second;
}

} // namespace

double J_closed(const ScalarField& phi, const ClosedForm& chi0, const ClosedForm& omega, double c) {
  const auto chi_phi = chi0.realized() + complex_hessian(phi);
  return detail::j_closed(phi, chi_phi, chi0.realized(), omega.realized(), c);
}

double J_path(const ScalarField& phi, const ClosedForm& chi0, const ClosedForm& omega, double c,
              int steps, PathKind kind) {
  check_steps(steps);
  const auto h = complex_hessian(phi);
  const auto& w = omega.realized();
  // Along phi_s = a(s) phi: velocity a'(s) phi, chi_s = chi0 + a(s) ddc phi.
  return simpson_richardson(
      [&](double s) {
        const double a = kind == PathKind::linear ? s : s * s;
        const double da = kind == PathKind::linear ? 1.0 : 2.0 * s;
        if (da == 0.0) return 0.0;
        const auto chi_s = chi0.realized() + a * h;
        return da * detail::j_gradient(phi, chi_s, w, c);
      },
      steps);
}

double J_gradient(const ScalarField& phi, const ScalarField& v, const ClosedForm& chi0,
                  const ClosedForm& omega, double c) {
  const auto chi_phi = chi0.realized() + complex_hessian(phi);
  return detail::j_gradient(v, chi_phi, omega.realized(), c);
}

GradientCheck J_gradient_check(const ScalarField& phi, const ScalarField& v, const ClosedForm& chi0,
                               const ClosedForm& omega, double c, double h) {
  if (!(h > 0.0)) throw DomainError("finite-difference step must be positive");
  ScalarField plus = phi, minus = phi;
  ScalarField hv = h * v;
  plus += hv;
  minus -= hv;
  GradientCheck out{};
  out.finite_difference =
      (J_closed(plus, chi0, omega, c) - J_closed(minus, chi0, omega, c)) / (2.0 * h);
  out.analytic = J_gradient(phi, v, chi0, omega, c);
  out.scale = std::max({std::abs(out.analytic), std::abs(J_closed(phi, chi0, omega, c)), 1e-300});
  out.relative_error = std::abs(out.finite_difference - out.analytic) / out.scale;
  return out;
}

double I_functional(const ScalarField& phi, const ClosedForm& chi0) {
  const auto chi_phi = chi0.realized() + complex_hessian(phi);
  return detail::i_functional(phi, chi_phi, chi0.realized());
}

double E_aubin_yau(const ScalarField& phi, const ClosedForm& chi0) {
  const auto sum = chi0.realized() + chi0.realized() + complex_hessian(phi);
  return integrate(wedge_density(gradient_form(phi), sum));
}

double dissipation(const ScalarField& phidot, const HermitianFormField& chi_phi) {
  return detail::dissipation(phidot, chi_phi);
}

ScalarField scalar_curvature(const HermitianFormField& chi) {
  require_positive(chi, "scalar curvature needs a positive form");
  ScalarField log_det(chi.grid());
  for (std::size_t i = 0; i < chi.size(); ++i) log_det[i] = std::log(chi.at(i).det());
  return trace_with(chi, -1.0 * complex_hessian(log_det));
}

double average_scalar_curvature(const HermitianFormField& chi) {
  const auto vol = wedge_density(chi, chi);
  return integrate(scalar_curvature(chi) * vol) / integrate(vol);
}

double mabuchi_path(const ScalarField& phi, const ClosedForm& chi0, int steps) {
  check_steps(steps);
  const auto h = complex_hessian(phi);
  return -simpson_richardson(
      [&](double s) {
        const auto chi_s = chi0.realized() + s * h;
        const auto vol = wedge_density(chi_s, chi_s);
        ScalarField r = scalar_curvature(chi_s);
        const double rbar = integrate(r * vol) / integrate(vol);
        r += -rbar;
        return integrate(phi * r * vol);
      },
      steps);
}

FunctionalReport functional_report(const ScalarField& phi, const ClosedForm& chi0,
                                   const ClosedForm& omega, double c, int steps) {
  check_steps(steps);
  FunctionalReport rep;
  rep.J = J_closed(phi, chi0, omega, c);
  rep.I = I_functional(phi, chi0);
  rep.E = E_aubin_yau(phi, chi0);
  rep.path_resolution = steps;

  // chi_s is affine in s, so its smallest eigenvalue is concave along the
  // path and positivity at both ends covers the whole segment.
  const auto chi_phi = chi0.realized() + complex_hessian(phi);
  if (positivity_margin(chi0.realized()) > 0.0 && positivity_margin(chi_phi) > 0.0) {
    rep.M = mabuchi_path(phi, chi0, steps);
    rep.F = rep.M - rep.J;
    rep.has_mabuchi = true;
    rep.notes.push_back("J closed form; M by Simpson-Richardson on the linear path");
  } else {
    rep.notes.push_back("path leaves the positive cone; M and F not reported");
  }
  return rep;
}

SplitHerm realize(const SplitForm& f) { return {f.first.realized(), f.second.realized()}; }

SplitHerm realize(const SplitForm& chi0, const SplitField& phi) {
  return {chi0.first.realized() + ddbar(phi.first), chi0.second.realized() + ddbar(phi.second)};
}

Separable as_separable(const SplitField& f) {
  return Separable::first(f.first) + Separable::second(f.second);
}

double J_closed(const SplitField& phi, const SplitForm& chi0, const SplitForm& omega, double c) {
  return detail::j_closed(as_separable(phi), realize(chi0, phi), realize(chi0), realize(omega), c);
}

double I_functional(const SplitField& phi, const SplitForm& chi0) {
  return detail::i_functional(as_separable(phi), realize(chi0, phi), realize(chi0));
}

double E_aubin_yau(const SplitField& phi, const SplitForm& chi0) {
  // The gradient form has an off-diagonal entry, but the other factor is
  // diagonal so only the diagonal entries enter the wedge density.
  const SplitHerm g{gradient_density(phi.first), gradient_density(phi.second)};
  return integrate(wedge_density(g, realize(chi0) + realize(chi0, phi)));
}

double dissipation(const SplitField& phidot, const SplitHerm& chi_phi) {
  return detail::dissipation(as_separable(phidot), chi_phi);
}

} // namespace jflow
