#pragma once

#include "jflow/cohomology.hpp"
#include "jflow/field.hpp"

namespace jflow {

// Product (split) data on T^4 = T^2 x T^2: potentials phi1(z1) + phi2(z2)
// and diagonal forms diag(a(z1), b(z2)). Each factor lives on a plane grid;
// torus quantities are assembled only on request.

/// One diagonal entry of a split closed form: cls + d^2/dz dzbar potential.
class FactorForm {
public:
  FactorForm(double cls, ScalarField potential);

  double cls() const { return cls_; }
  const ScalarField& potential() const { return potential_; }
  const ScalarField& realized() const { return realized_; }
  const Grid& grid() const { return potential_.grid(); }

private:
  double cls_;
  ScalarField potential_;
  ScalarField realized_;
};

FactorForm operator+(const FactorForm& a, const FactorForm& b);
FactorForm operator*(double s, const FactorForm& a);

/// diag(first(z1), second(z2)).
struct SplitForm {
  FactorForm first;
  FactorForm second;

  CohomologyClass cls() const { return {Herm2::diag(first.cls(), second.cls())}; }
  const Grid& factor_grid() const { return first.grid(); }
};

SplitForm operator+(const SplitForm& a, const SplitForm& b);
SplitForm operator*(double s, const SplitForm& a);
SplitForm epsilon_form(const SplitForm& omega0, double eps, const SplitForm& omega_hat);

/// first(z1) + second(z2).
struct SplitField {
  ScalarField first;
  ScalarField second;

  static SplitField zero(const Grid& plane) { return {ScalarField(plane), ScalarField(plane)}; }
  const Grid& factor_grid() const { return first.grid(); }

  double max() const { return first.max() + second.max(); }
  double min() const { return first.min() + second.min(); }
  double sup_abs() const;
  /// Mean over T^4.
  double mean() const { return first.mean() + second.mean(); }
};

SplitField operator+(const SplitField& a, const SplitField& b);
SplitField operator-(const SplitField& a, const SplitField& b);
SplitField operator*(double s, const SplitField& a);

Grid torus_of(const Grid& plane);
ScalarField assemble(const SplitField& f);
ScalarField assemble(const ScalarField& first, const ScalarField& second);
ClosedForm assemble(const SplitForm& f);

/// Broadcast a z1-only (or z2-only) plane field to the torus.
ScalarField lift_first(const ScalarField& plane);
ScalarField lift_second(const ScalarField& plane);

} // namespace jflow
