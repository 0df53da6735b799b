#include "doctest.h"
#include "oracle.hpp"

#include "jflow/cohomology.hpp"
#include "jflow/error.hpp"
#include "jflow/presets.hpp"
#include "jflow/spectral.hpp"

#include <cmath>
#include <random>

using namespace jflow;

namespace {

Herm2 to_herm(const oracle::H2& h) { return {h.a11, h.a22, h.a12}; }
oracle::H2 to_h2(const Herm2& h) { return {h.a11, h.a22, h.a12}; }

ScalarField mode_field(const Grid& g, const oracle::Mode& m) {
  return ScalarField::sample(g, [&](const auto& p) { return oracle::mode_value(m, p); });
}

double hessian_error(const Grid& g, const oracle::Mode& m) {
  const HermitianFormField h = complex_hessian(mode_field(g, m));
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const oracle::H2 want = oracle::mode_hessian(m, g.point(i));
    const Herm2 got = h.at(i);
    err = std::max({err, std::abs(got.a11 - want.a11), std::abs(got.a22 - want.a22), std::abs(got.a12 - want.a12)});
  }
  return err;
}

HermitianFormField random_form(const Grid& g, std::mt19937_64& rng, bool positive) {
  HermitianFormField f(g);
  for (std::size_t i = 0; i < g.size(); ++i)
    f.set(i, to_herm(positive ? oracle::random_positive(rng) : oracle::random_hermitian(rng)));
  return f;
}

} // namespace

TEST_CASE("grid layout and coordinates") {
  const Grid g = Grid::torus(4);
  CHECK(g.size() == 256);
  CHECK(g.spacing() == doctest::Approx(0.25));
  const auto mi = g.multi_index(1);
  CHECK(mi[3] == 1);
  CHECK(mi[0] == 0);
  CHECK(g.coordinate(64, 0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(Grid::torus(5), DomainError);
  CHECK_THROWS_AS(Grid::torus(2), DomainError);
  const Grid p = Grid::plane(6);
  CHECK(p.size() == 36);
  CHECK(p.complex_dim() == 1);
}

TEST_CASE("complex_hessian examples") {
  const Grid g = Grid::torus(8);
  SUBCASE("zero") {
    const auto h = complex_hessian(ScalarField(g));
    CHECK(positivity_margin(h) == 0.0);
    CHECK(h.h11().sup_abs() == 0.0);
    CHECK(h.h12_im().sup_abs() == 0.0);
  }
  SUBCASE("single direction") {
    const auto phi = mode_field(g, {0.1, true, {1, 0, 0, 0}});
    const auto h = complex_hessian(phi);
    const double pi2 = oracle::pi * oracle::pi;
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(h.h11()[i] + pi2 * phi[i]));
    CHECK(err < 1e-12);
    CHECK(h.h22().sup_abs() < 1e-12);
    CHECK(h.h12_re().sup_abs() < 1e-12);
    CHECK(h.h12_im().sup_abs() < 1e-12);
  }
  SUBCASE("diagonal mode fills every component") {
    const auto phi = mode_field(g, {0.1, true, {1, 0, 1, 0}});
    const auto h = complex_hessian(phi);
    const double pi2 = oracle::pi * oracle::pi;
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      err = std::max({err, std::abs(h.h11()[i] + pi2 * phi[i]), std::abs(h.h22()[i] + pi2 * phi[i]),
                      std::abs(h.h12_re()[i] + pi2 * phi[i])});
    }
    CHECK(err < 1e-12);
    CHECK(h.h12_im().sup_abs() < 1e-12);
  }
  SUBCASE("non-finite input") {
    ScalarField bad(g);
    bad[3] = std::nan("");
    CHECK_THROWS_AS(complex_hessian(bad), DomainError);
  }
}

TEST_CASE("complex_hessian matches analytic derivatives of single modes") {
  const Grid g = Grid::torus(8, {0.013, 0.0, 0.021, 0.007});
  const std::array<std::array<int, 4>, 6> ks{{{1, 0, 0, 0}, {0, 2, 0, 0}, {1, 1, 0, 0}, {0, 0, 1, 3}, {1, -2, 3, 1}, {2, 1, -1, 2}}};
  for (const auto& k : ks) {
    for (bool cosine : {true, false}) {
      CAPTURE(k[0]);
      CAPTURE(k[3]);
      CHECK(hessian_error(g, {0.3, cosine, k}) < 1e-12);
    }
  }
}

TEST_CASE("plane ddbar of single modes") {
  const Grid g = Grid::plane(16);
  const auto f = ScalarField::sample(g, [](const auto& p) { return std::cos(2 * oracle::pi * (p[0] + 2 * p[1])); });
  const auto d = ddbar(f);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(d[i] + oracle::pi * oracle::pi * 5.0 * f[i]));
  CHECK(err < 1e-11);
}

TEST_CASE("wedge_density examples") {
  const Grid g = Grid::torus(4);
  const HermitianFormField id(g, Herm2::identity());
  CHECK(wedge_density(id, id).min() == 2.0);
  CHECK(wedge_density(id, id).max() == 2.0);
  CHECK(wedge_density(Herm2::diag(2, 3), Herm2::diag(5, 7)) == doctest::Approx(2 * 7 + 3 * 5));
  const Herm2 a{1.0, 1.0, {0.0, 0.5}};
  CHECK(wedge_density(a, a) == doctest::Approx(1.5));
  std::mt19937_64 rng(7);
  for (int t = 0; t < 200; ++t) {
    const auto x = oracle::random_hermitian(rng), y = oracle::random_hermitian(rng);
    CHECK(wedge_density(to_herm(x), to_herm(y)) == doctest::Approx(oracle::wedge(x, y)).epsilon(1e-13));
  }
}

TEST_CASE("trace_with examples and convention") {
  const Grid g = Grid::torus(4);
  const HermitianFormField id(g, Herm2::identity());
  const auto tr = trace_with(id, HermitianFormField(g, Herm2::diag(3, 4)));
  CHECK(tr.min() == doctest::Approx(7));
  CHECK(tr.max() == doctest::Approx(7));
  const HermitianFormField d24(g, Herm2::diag(2, 4));
  CHECK(trace_with(d24, d24).max() == doctest::Approx(2.0));

  std::mt19937_64 rng(11);
  const auto a = random_form(g, rng, true);
  const auto b = random_form(g, rng, false);
  const auto t = trace_with(a, b);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto ai = to_h2(a.at(i)), bi = to_h2(b.at(i));
    err = std::max(err, std::abs(t[i] - 2.0 * oracle::wedge(ai, bi) / oracle::wedge(ai, ai)) / (1.0 + std::abs(t[i])));
  }
  CHECK(err < 1e-13);

  HermitianFormField bad(g, Herm2::identity());
  bad.set(17, Herm2::diag(-1, 1));
  try {
    (void)trace_with(bad, id);
    FAIL("expected a positivity error");
  } catch (const PositivityError& e) {
    CHECK(e.index == 17);
    CHECK(e.margin == doctest::Approx(-1.0));
  }
}

TEST_CASE("generalized_eigenvalues examples") {
  auto ev = generalized_eigenvalues(Herm2::identity(), Herm2::diag(3, 5));
  CHECK(ev.first == doctest::Approx(3));
  CHECK(ev.second == doctest::Approx(5));
  ev = generalized_eigenvalues(Herm2::diag(2, 2), Herm2::identity());
  CHECK(ev.first == doctest::Approx(0.5));
  CHECK(ev.second == doctest::Approx(0.5));
  ev = generalized_eigenvalues(Herm2::identity(), Herm2{2, 2, {1, 0}});
  CHECK(ev.first == doctest::Approx(1));
  CHECK(ev.second == doctest::Approx(3));
}

TEST_CASE("generalized eigenvalue product is the determinant ratio") {
  const Grid g = Grid::torus(4);
  std::mt19937_64 rng(3);
  const auto a = random_form(g, rng, true);
  const auto b = random_form(g, rng, false);
  const auto [lo, hi] = generalized_eigenvalues(a, b);
  double err = 0.0, order = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto ai = to_h2(a.at(i)), bi = to_h2(b.at(i));
    err = std::max(err, std::abs(lo[i] * hi[i] - oracle::wedge(bi, bi) / oracle::wedge(ai, ai)));
    const auto [olo, ohi] = oracle::gen_eig(ai, bi);
    order = std::max({order, std::abs(lo[i] - olo), std::abs(hi[i] - ohi)});
    CHECK(lo[i] <= hi[i]);
  }
  CHECK(err < 1e-12);
  CHECK(order < 1e-10);
}

TEST_CASE("integrate examples") {
  const Grid g = Grid::torus(8);
  CHECK(integrate(ScalarField(g, 1.0)) == doctest::Approx(4.0));
  const auto c = ScalarField::sample(g, [](const auto& p) { return std::cos(2 * oracle::pi * p[0]); });
  CHECK(std::abs(integrate(c)) < 1e-14);
  const HermitianFormField id(g, Herm2::identity());
  CHECK(integrate(wedge_density(id, id)) == doctest::Approx(8.0));
}

TEST_CASE("positivity_margin examples") {
  const Grid g = Grid::torus(8);
  CHECK(positivity_margin(HermitianFormField(g, Herm2::identity())) == doctest::Approx(1.0));
  CHECK(positivity_margin(HermitianFormField(g, Herm2::diag(-1, 1))) == doctest::Approx(-1.0));
  HermitianFormField f(g, Herm2::identity());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto p = g.point(i);
    f.set(i, Herm2::diag(oracle::s2(p[0], p[1]), 1.0));
  }
  const auto at = positivity_margin_at(f);
  CHECK(at.margin == 0.0);
  CHECK(oracle::s2(g.point(at.index)[0], g.point(at.index)[1]) == 0.0);
  CHECK_THROWS_AS(require_positive(f, "test form"), PositivityError);
  CHECK_NOTHROW(require_positive(HermitianFormField(g, Herm2::identity()), "identity"));
}

TEST_CASE("exactness: dd^c phi integrates to zero against closed forms") {
  const Grid g = Grid::torus(8);
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  ScalarField phi(g), p(g);
  for (int m = 0; m < 6; ++m) {
    std::uniform_int_distribution<int> k(-3, 3);
    const oracle::Mode a{u(rng), m % 2 == 0, {k(rng), k(rng), k(rng), k(rng)}};
    const oracle::Mode b{u(rng), m % 2 == 1, {k(rng), k(rng), k(rng), k(rng)}};
    phi += ScalarField::sample(g, [&](const auto& x) { return oracle::mode_value(a, x); });
    p += ScalarField::sample(g, [&](const auto& x) { return oracle::mode_value(b, x); });
  }
  const ClosedForm beta({Herm2{1.3, 0.7, {0.2, -0.1}}}, p);
  CHECK(std::abs(integrate(wedge_density(complex_hessian(phi), beta.realized()))) < 1e-10);
  CHECK(std::abs(integrate(wedge_density(complex_hessian(phi), complex_hessian(phi)))) < 1e-10);
}

TEST_CASE("null modes are invisible to dd^c") {
  const Grid g = Grid::torus(8);
  // Nyquist along x1 only: cos(pi N x1) alternates sign between grid points.
  const auto nyq = ScalarField::sample(g, [](const auto& p) { return std::cos(2 * oracle::pi * 4 * p[0]); });
  CHECK(complex_hessian(nyq).h11().sup_abs() < 1e-12);
  CHECK(remove_null_modes(nyq).sup_abs() < 1e-12);
  const auto smooth = ScalarField::sample(g, [](const auto& p) { return 2.0 + std::sin(2 * oracle::pi * p[1]); });
  CHECK((remove_null_modes(smooth) - smooth).sup_abs() < 1e-13);
}
