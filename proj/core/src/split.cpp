#include "jflow/split.hpp"

#include "jflow/error.hpp"
#include "jflow/spectral.hpp"

#include <cmath>

namespace jflow {

FactorForm::FactorForm(double cls, ScalarField potential)
    : cls_(cls), potential_(std::move(potential)), realized_(ddbar(potential_)) {
  realized_ += cls_;
}

FactorForm operator+(const FactorForm& a, const FactorForm& b) {
  return FactorForm(a.cls() + b.cls(), a.potential() + b.potential());
}

FactorForm operator*(double s, const FactorForm& a) {
  return FactorForm(s * a.cls(), s * a.potential());
}

SplitForm operator+(const SplitForm& a, const SplitForm& b) {
  return {a.first + b.first, a.second + b.second};
}

SplitForm operator*(double s, const SplitForm& a) { return {s * a.first, s * a.second}; }

SplitForm epsilon_form(const SplitForm& omega0, double eps, const SplitForm& omega_hat) {
  if (!(eps >= 0.0)) throw DomainError("epsilon_form: eps must be >= 0");
  if (eps == 0.0) return omega0;
  return omega0 + eps * omega_hat;
}

double SplitField::sup_abs() const { return std::max(std::abs(max()), std::abs(min())); }

SplitField operator+(const SplitField& a, const SplitField& b) {
  return {a.first + b.first, a.second + b.second};
}

SplitField operator-(const SplitField& a, const SplitField& b) {
  return {a.first - b.first, a.second - b.second};
}

SplitField operator*(double s, const SplitField& a) { return {s * a.first, s * a.second}; }

Grid torus_of(const Grid& plane) {
  if (plane.complex_dim() != 1) throw DomainError("torus_of expects a plane grid");
  const auto& o = plane.offsets();
  return Grid::torus(plane.n(), {o[0], o[1], o[0], o[1]});
}

ScalarField assemble(const ScalarField& first, const ScalarField& second) {
  if (!(first.grid() == second.grid())) throw DomainError("split factors on different grids");
  const Grid torus = torus_of(first.grid());
  const std::size_t m = first.size();
  ScalarField out(torus);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] = first[i] + second[j];
  return out;
}

ScalarField assemble(const SplitField& f) { return assemble(f.first, f.second); }

ScalarField lift_first(const ScalarField& plane) {
  return assemble(plane, ScalarField(plane.grid()));
}

ScalarField lift_second(const ScalarField& plane) {
  return assemble(ScalarField(plane.grid()), plane);
}

ClosedForm assemble(const SplitForm& f) {
  return ClosedForm(f.cls(), assemble(f.first.potential(), f.second.potential()));
}

} // namespace jflow
