#include "jflow/presets.hpp"

#include "jflow/error.hpp"

#include <cmath>
#include <numbers>

namespace jflow {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kPi2 = kPi * kPi;
} // namespace

double FourierMode::operator()(const std::array<double, 4>& p) const {
  const double arg = 2.0 * kPi * (k[0] * p[0] + k[1] * p[1] + k[2] * p[2] + k[3] * p[3]);
  return amplitude * (cosine ? std::cos(arg) : std::sin(arg));
}

bool FormSpec::is_split() const {
  if (cls.a12 != std::complex<double>{}) return false;
  for (const auto& m : potential) {
    if (!m.first_factor_only() && !m.second_factor_only()) return false;
  }
  return true;
}

ScalarField FormSpec::potential_on(const Grid& grid) const {
  return ScalarField::sample(grid, [&](const std::array<double, 4>& p) {
    double v = 0.0;
    for (const auto& m : potential) v += m(p);
    return v;
  });
}

ClosedForm FormSpec::realize(const Grid& torus) const {
  return ClosedForm({cls}, potential_on(torus));
}

SplitForm FormSpec::realize_split(const Grid& plane) const {
  if (!is_split()) throw DomainError("form is not product-structured; use the full backend");
  FormSpec first{Herm2::diag(cls.a11, 0.0), {}}, second{Herm2::diag(cls.a22, 0.0), {}};
  for (const auto& m : potential) {
    if (m.first_factor_only()) {
      first.potential.push_back(m);
    } else {
      FourierMode moved = m;
      moved.k = {m.k[2], m.k[3], 0, 0};
      second.potential.push_back(moved);
    }
  }
  return {FactorForm(cls.a11, first.potential_on(plane)),
          FactorForm(cls.a22, second.potential_on(plane))};
}

FormSpec PresetSpec::r_h() const {
  FormSpec out{Herm2::diag(1.0, 0.0), {}};
  for (auto m : omega0.potential) {
    m.amplitude /= rho;
    out.potential.push_back(m);
  }
  return out;
}

DivisorModel PresetSpec::divisor_model(const Grid& torus) const {
  ScalarField s2 = ScalarField::sample(
      torus, [](const std::array<double, 4>& p) { return divisor_proxy(p[0], p[1]); });
  return DivisorModel{std::move(s2), beta, rho, r_h().realize(torus)};
}

double smooth_profile(double x1) { return 1.0 + 0.5 * std::sin(2.0 * kPi * x1); }

double degenerate_profile(double x1, double y1) { return divisor_proxy(x1, y1); }

std::vector<std::string> preset_names() {
  return {"identity", "smooth_split", "degenerate_split", "nonsplit_perturbed"};
}

PresetSpec preset(const std::string& name) {
  const FormSpec id{Herm2::identity(), {}};
  if (name == "identity") return {name, id, id, id};
  if (name == "smooth_split") {
    // omega_0 = diag(1 + sin(2 pi x1)/2, 1): d^2u/dz dzbar = sin(2 pi x1)/2.
    FormSpec omega0{Herm2::identity(), {{-1.0 / (2.0 * kPi2), false, {1, 0, 0, 0}}}};
    return {name, id, omega0, id};
  }
  if (name == "degenerate_split" || name == "nonsplit_perturbed") {
    // omega_0 = diag(sin^2(pi x1) + sin^2(pi y1), 1): d^2u/dz dzbar = f - 1.
    FormSpec omega0{Herm2::identity(),
                    {{1.0 / (2.0 * kPi2), true, {1, 0, 0, 0}}, {1.0 / (2.0 * kPi2), true, {0, 1, 0, 0}}}};
    PresetSpec p{name, id, omega0, id, true, 1.0, 0.5, 2.0};
    if (name == "nonsplit_perturbed") p.chi0.potential.push_back({0.05, true, {1, 0, 1, 0}});
    return p;
  }
  throw DomainError("unknown preset '" + name + "'");
}

} // namespace jflow
