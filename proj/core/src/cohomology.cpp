#include "jflow/cohomology.hpp"

#include "jflow/error.hpp"
#include "jflow/spectral.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace jflow {

CohomologyClass operator+(const CohomologyClass& a, const CohomologyClass& b) { return {a.m + b.m}; }
CohomologyClass operator-(const CohomologyClass& a, const CohomologyClass& b) { return {a.m - b.m}; }
CohomologyClass operator*(double s, const CohomologyClass& a) { return {s * a.m}; }

ClosedForm::ClosedForm(CohomologyClass cls, ScalarField potential)
    : cls_(cls), potential_(std::move(potential)), realized_(complex_hessian(potential_)) {
  realized_ += cls_.m;
}

ClosedForm ClosedForm::constant(const Grid& grid, CohomologyClass cls) {
  return ClosedForm(cls, ScalarField(grid));
}

ClosedForm operator+(const ClosedForm& a, const ClosedForm& b) {
  return ClosedForm(a.cls() + b.cls(), a.potential() + b.potential());
}

ClosedForm operator-(const ClosedForm& a, const ClosedForm& b) {
  return ClosedForm(a.cls() - b.cls(), a.potential() - b.potential());
}

ClosedForm operator*(double s, const ClosedForm& a) {
  return ClosedForm(s * a.cls(), s * a.potential());
}

double divisor_proxy(double x1, double y1) {
  const double sx = std::sin(std::numbers::pi * x1);
  const double sy = std::sin(std::numbers::pi * y1);
  return sx * sx + sy * sy;
}

double class_pairing(const CohomologyClass& a, const CohomologyClass& b) {
  return 4.0 * wedge_density(a.m, b.m);
}

double c_constant(const CohomologyClass& x, const CohomologyClass& w) {
  if (!x.is_kahler()) throw DomainError("c_constant: X must be a Kaehler (positive definite) class");
  return 2.0 * class_pairing(x, w) / class_pairing(x, x);
}

ConeVerdict cone_condition(const CohomologyClass& x, const CohomologyClass& w) {
  const double c = c_constant(x, w);
  return {c, (c * x.m - w.m).min_eigenvalue()};
}

ClosedForm epsilon_form(const ClosedForm& omega0, double eps, const ClosedForm& omega_hat) {
  if (!(eps >= 0.0)) throw DomainError("epsilon_form: eps must be >= 0");
  if (eps == 0.0) return omega0;
  return omega0 + eps * omega_hat;
}

namespace {

OmegaCertificate scan(const HermitianFormField& omega0, const HermitianFormField* reduced,
                      const ScalarField* s2, double beta, double rho,
                      const HermitianFormField& omega_hat) {
  // inverse C0 is the largest t with omega0 >= t s2^beta omega_hat and
  // reduced >= t omega_hat everywhere.
  double t = std::numeric_limits<double>::infinity();
  OmegaCertificate cert;
  cert.beta = beta;
  cert.rho = rho;
  const Grid& g = omega0.grid();
  auto fail = [&](int which, std::size_t i, double value, const char* text) {
    cert.ok = false;
    cert.violated_inequality = which;
    cert.index = i;
    cert.location = g.point(i);
    cert.value = value;
    std::ostringstream msg;
    msg << text << " at point " << i << ", generalized eigenvalue " << value;
    cert.message = msg.str();
    return cert;
  };
  std::size_t worst2 = 0;
  double worst2_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < omega0.size(); ++i) {
    const Herm2 hat = omega_hat.at(i);
    if (!(hat.min_eigenvalue() > 0.0)) return fail(0, i, hat.min_eigenvalue(), "omega_hat not Kaehler");
    const double lam1 = generalized_eigenvalues(hat, omega0.at(i)).first;
    if (s2) {
      const double w = std::pow((*s2)[i], beta);
      if (w > 0.0) {
        t = std::min(t, lam1 / w);
      } else if (lam1 < -1e-12) {
        return fail(1, i, lam1, "omega0 negative on the divisor");
      }
    }
    const double lam2 = generalized_eigenvalues(hat, reduced->at(i)).first;
    if (lam2 < worst2_value) {
      worst2_value = lam2;
      worst2 = i;
    }
    t = std::min(t, lam2);
  }
  if (!(worst2_value > 0.0)) {
    return fail(2, worst2, worst2_value, "omega0 - rho R_H is not bounded below by omega_hat / C0");
  }
  if (!(t > 0.0)) {
    // Only the first inequality can be responsible here.
    for (std::size_t i = 0; i < omega0.size(); ++i) {
      const double lam1 = generalized_eigenvalues(omega_hat.at(i), omega0.at(i)).first;
      if (lam1 <= 0.0 && (*s2)[i] > 0.0) {
        return fail(1, i, lam1, "omega0 is not bounded below by s^{2 beta} omega_hat / C0");
      }
    }
  }
  cert.ok = true;
  cert.c0 = 1.0 / t;
  return cert;
}

} // namespace

OmegaCertificate verify_omega0_conditions(const ClosedForm& omega0, const DivisorModel& div,
                                          const ClosedForm& omega_hat) {
  const HermitianFormField reduced = omega0.realized() - div.rho * div.r_h.realized();
  return scan(omega0.realized(), &reduced, &div.s2_proxy, div.beta, div.rho, omega_hat.realized());
}

OmegaCertificate verify_omega0_conditions(const ClosedForm& omega0, const ClosedForm& omega_hat) {
  return scan(omega0.realized(), &omega0.realized(), nullptr, 0.0, 0.0, omega_hat.realized());
}

} // namespace jflow
