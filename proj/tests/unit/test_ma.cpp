#include "doctest.h"
#include "oracle.hpp"

#include "jflow/diagnostics.hpp"
#include "jflow/error.hpp"
#include "jflow/flow.hpp"
#include "jflow/ma.hpp"
#include "jflow/presets.hpp"
#include "jflow/split.hpp"

#include <cmath>

using namespace jflow;

namespace {

ScalarField sample(const Grid& g, const std::function<double(const std::array<double, 4>&)>& f) {
  return ScalarField::sample(g, f);
}

// Largest k with r_{k+1} / r_k^2 taken over the last three residuals above
// the round-off floor.
double tail_constant(const std::vector<NewtonRecord>& it, double final_residual) {
  std::vector<double> r;
  for (const auto& rec : it) r.push_back(rec.residual);
  r.push_back(final_residual);
  double worst = 0.0;
  int used = 0;
  for (std::size_t k = r.size() - 1; k >= 1 && used < 2; --k) {
    if (r[k] < 1e-13) continue;
    worst = std::max(worst, r[k] / (r[k - 1] * r[k - 1]));
    ++used;
  }
  return worst;
}

} // namespace

TEST_CASE("build_alpha examples") {
  const Grid g = Grid::torus(8);
  SUBCASE("identity") {
    const auto id = ClosedForm::constant(g, {Herm2::identity()});
    const auto a = build_alpha(id, id, 2.0);
    CHECK(a.cls().m.a11 == doctest::Approx(1));
    CHECK(a.cls().m.a22 == doctest::Approx(1));
    CHECK(class_pairing(a.cls(), a.cls()) == doctest::Approx(8));
  }
  SUBCASE("degenerate preset at eps 0") {
    const auto p = preset("degenerate_split");
    const auto a = build_alpha(p.chi0.realize(g), p.omega0.realize(g), 2.0);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto x = g.point(i);
      const Herm2 h = a.realized().at(i);
      err = std::max({err, std::abs(h.a11 - (2.0 - oracle::s2(x[0], x[1]))), std::abs(h.a22 - 1.0), std::abs(h.a12)});
    }
    CHECK(err < 1e-12);
  }
  SUBCASE("class identity at eps 0.1") {
    const auto p = preset("degenerate_split");
    const auto w = epsilon_form(p.omega0.realize(g), 0.1, p.omega_hat.realize(g));
    const auto a = build_alpha(p.chi0.realize(g), w, 2.2);
    CHECK(class_pairing(a.cls(), a.cls()) == doctest::Approx(8 * 1.1 * 1.1).epsilon(1e-10));
    CHECK_THROWS_AS(build_alpha(p.chi0.realize(g), w, 2.0), DomainError);
  }
  SUBCASE("cone failure") {
    const auto id = ClosedForm::constant(g, {Herm2::identity()});
    const auto w = ClosedForm::constant(g, {Herm2::diag(2.0, -0.5)});
    CHECK_THROWS_AS(build_alpha(id, w, 1.5), ConeConditionError);
  }
}

TEST_CASE("solve_ma on the identity") {
  const Grid g = Grid::torus(8);
  const auto id = ClosedForm::constant(g, {Herm2::identity()});
  const auto r = solve_ma(id, 2.0, id, MASolverConfig{});
  CHECK(r.psi.sup_abs() < 1e-14);
  CHECK(r.final_residual < 1e-14);
}

TEST_CASE("solve_ma on the smooth split data, 4-D") {
  const Grid g = Grid::torus(8);
  const auto p = preset("smooth_split");
  const auto chi0 = p.chi0.realize(g), w = p.omega0.realize(g);
  const double c = c_constant(chi0.cls(), w.cls());
  const auto alpha = build_alpha(chi0, w, c);
  MASolverConfig cfg;
  const auto r = solve_ma(alpha, c, w, cfg);
  CHECK(r.final_residual <= cfg.newton_tol);
  CHECK(r.iterations.size() <= 8);
  CHECK(tail_constant(r.iterations, r.final_residual) < 100.0);
  // chi_psi = chi0 + dd^c psi solves the critical equation
  CHECK(critical_residual(r.psi, chi0, w, c) <= 10 * cfg.newton_tol);
  const auto star = sample(g, [](const auto& x) { return oracle::phi_star_smooth(x[0]); });
  CHECK(compare_up_to_constant(r.psi, star) < 1e-8);

  // gauge consistency: a different start lands on the same psi up to a constant
  const auto start = sample(g, [](const auto& x) { return 0.01 * std::cos(2 * oracle::pi * (x[1] + x[2])); });
  const auto r2 = solve_ma(alpha, c, w, cfg, start);
  CHECK(compare_up_to_constant(r.psi, r2.psi) < 1e-10);
}

TEST_CASE("split solve_ma at N = 32") {
  const Grid pl = Grid::plane(32);
  const auto p = preset("smooth_split");
  const auto chi0 = p.chi0.realize_split(pl), w = p.omega0.realize_split(pl);
  const auto alpha = build_alpha(chi0, w, 2.0);
  const auto r = solve_ma(alpha, 2.0, w, MASolverConfig{});
  CHECK(r.final_residual <= 1e-10);
  CHECK(r.first.iterations.size() <= 8);
  CHECK(tail_constant(r.first.iterations, r.first.final_residual) < 100.0);
  const auto star = sample(pl, [](const auto& x) { return oracle::phi_star_smooth(x[0]); });
  CHECK(compare_up_to_constant(r.psi.first, star) < 1e-8);
  CHECK(r.psi.second.sup_abs() < 1e-12);
}

TEST_CASE("continuation on the degenerate preset") {
  const Grid pl = Grid::plane(16);
  const auto p = preset("degenerate_split");
  const std::vector<double> eps{0.2, 0.1, 0.05};
  const auto stages = solve_ma_continuation(p.chi0.realize_split(pl), p.omega0.realize_split(pl),
                                            p.omega_hat.realize_split(pl), eps, MASolverConfig{});
  REQUIRE(stages.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(stages[k].final_residual <= 1e-10);
    const auto want = sample(pl, [&](const auto& x) { return oracle::phi_star_degenerate(x[0], x[1]) / (1 + eps[k]); });
    CHECK(compare_up_to_constant(stages[k].psi.first, want) < 1e-8);
  }
}

TEST_CASE("critical_residual examples") {
  const Grid g = Grid::torus(8);
  const auto id = ClosedForm::constant(g, {Herm2::identity()});
  CHECK(critical_residual(ScalarField(g), id, id, 2.0) < 1e-15);
  const auto p = preset("degenerate_split");
  const auto chi0 = p.chi0.realize(g), w0 = p.omega0.realize(g);
  CHECK(critical_residual(ScalarField(g), chi0, w0, 2.0) == doctest::Approx(2.0).epsilon(1e-12));
  const auto star = sample(g, [](const auto& x) { return oracle::phi_star_degenerate(x[0], x[1]); });
  CHECK(critical_residual(star, chi0, w0, 2.0) <= 1e-10);
}

TEST_CASE("poisson_solve examples") {
  const Grid pl = Grid::plane(16);
  const Grid g = Grid::torus(8);
  const double pi2 = oracle::pi * oracle::pi;
  auto src = sample(g, [](const auto& x) { return std::sin(2 * oracle::pi * x[0]); });
  auto u = poisson_solve(src);
  CHECK((u - sample(g, [&](const auto& x) { return -std::sin(2 * oracle::pi * x[0]) / pi2; })).sup_abs() < 1e-14);
  CHECK(poisson_solve(ScalarField(g)).sup_abs() == 0.0);
  src = sample(pl, [](const auto& x) { return -0.5 * std::cos(2 * oracle::pi * x[0]) - 0.5 * std::cos(2 * oracle::pi * x[1]); });
  u = poisson_solve(src);
  CHECK((u - sample(pl, [](const auto& x) { return oracle::phi_star_degenerate(x[0], x[1]); })).sup_abs() < 1e-14);
  CHECK_THROWS_AS(poisson_solve(ScalarField(g, 1.0)), DomainError);
}

TEST_CASE("split_critical examples") {
  const Grid pl = Grid::plane(16);
  const CohomologyClass id{Herm2::identity()};
  const auto one = ScalarField(pl, 1.0);
  SUBCASE("smooth profile") {
    const auto f = sample(pl, [](const auto& x) { return jflow::smooth_profile(x[0]); });
    const auto sc = split_critical(f, one, id);
    CHECK(sc.c1 == doctest::Approx(1));
    CHECK(sc.c2 == doctest::Approx(1));
    const auto star = sample(pl, [](const auto& x) { return oracle::phi_star_smooth(x[0]); });
    CHECK((sc.phi.first - star).sup_abs() < 1e-14);
    CHECK(sc.phi.second.sup_abs() == 0.0);
    const auto p = preset("smooth_split");
    CHECK(critical_residual(sc.phi, p.chi0.realize_split(pl), p.omega0.realize_split(pl), sc.c1 + sc.c2) <= 1e-10);
    CHECK(sc.c1 + sc.c2 == doctest::Approx(c_constant(id, id)).epsilon(1e-12));
  }
  SUBCASE("degenerate profile") {
    const auto f = sample(pl, [](const auto& x) { return jflow::degenerate_profile(x[0], x[1]); });
    const auto sc = split_critical(f, one, id);
    const auto star = sample(pl, [](const auto& x) { return oracle::phi_star_degenerate(x[0], x[1]); });
    CHECK((sc.phi.first - star).sup_abs() < 1e-14);
    CHECK(sc.phi.first.sup_abs() <= 1.0 / oracle::pi / oracle::pi + 1e-14);
  }
  SUBCASE("constant profiles") {
    const auto sc = split_critical(one, one, id);
    CHECK(sc.phi.first.sup_abs() == 0.0);
    CHECK(sc.phi.second.sup_abs() == 0.0);
  }
  SUBCASE("zero mean is rejected") {
    CHECK_THROWS_AS(split_critical(ScalarField(pl), one, id), DomainError);
  }
}

TEST_CASE("solver config validation") {
  MASolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.newton_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
}
