#include "doctest.h"
#include "oracle.hpp"

#include "jflow/cohomology.hpp"
#include "jflow/error.hpp"
#include "jflow/presets.hpp"

#include <random>

using namespace jflow;

namespace {

CohomologyClass cls(double a, double b, double re = 0.0, double im = 0.0) { return {Herm2{a, b, {re, im}}}; }

ScalarField random_potential(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  std::uniform_int_distribution<int> k(-2, 2);
  ScalarField out(g);
  for (int m = 0; m < 5; ++m) {
    const oracle::Mode mode{u(rng), m % 2 == 0, {k(rng), k(rng), k(rng), k(rng)}};
    out += ScalarField::sample(g, [&](const auto& p) { return oracle::mode_value(mode, p); });
  }
  return out;
}

} // namespace

TEST_CASE("class_pairing examples") {
  CHECK(class_pairing(cls(1, 1), cls(1, 1)) == doctest::Approx(8));
  CHECK(class_pairing(cls(2, 3), cls(5, 7)) == doctest::Approx(4 * (2 * 7 + 3 * 5)));
  const double eps = 0.1;
  CHECK(class_pairing(cls(1, 1), cls(1 + eps, 1 + eps)) == doctest::Approx(8 * (1 + eps)));
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const auto a = oracle::random_hermitian(rng), b = oracle::random_hermitian(rng);
    CHECK(class_pairing({{a.a11, a.a22, a.a12}}, {{b.a11, b.a22, b.a12}}) ==
          doctest::Approx(oracle::pairing(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("c_constant examples") {
  CHECK(c_constant(cls(1.3, 0.4, 0.1, 0.2), cls(1.3, 0.4, 0.1, 0.2)) == doctest::Approx(2));
  CHECK(c_constant(cls(1, 1), cls(1, 0)) == doctest::Approx(1));
  CHECK(c_constant(cls(1, 1), cls(1.1, 1.1)) == doctest::Approx(2.2));
  CHECK_THROWS_AS(c_constant(cls(1, -1), cls(1, 1)), DomainError);
  CHECK_THROWS_AS(c_constant(cls(1, 0), cls(1, 1)), DomainError);
}

TEST_CASE("c_constant is scale covariant") {
  const auto x = cls(1.2, 0.8, 0.1, -0.3), w = cls(0.5, 1.7, 0.2, 0.0);
  for (double lambda : {0.5, 2.0, 7.0})
    CHECK(c_constant(lambda * x, w) == doctest::Approx(c_constant(x, w) / lambda).epsilon(1e-13));
}

TEST_CASE("cone_condition examples") {
  auto v = cone_condition(cls(1, 1), cls(1, 1));
  CHECK(v.c == doctest::Approx(2));
  CHECK(v.margin == doctest::Approx(1));
  CHECK(v.holds());
  v = cone_condition(cls(1, 1), cls(1, 0));
  CHECK(v.c == doctest::Approx(1));
  CHECK(std::abs(v.margin) < 1e-15);
  CHECK_FALSE(v.holds());
  v = cone_condition(cls(1, 1), cls(2, -0.5));
  CHECK(v.c == doctest::Approx(1.5));
  CHECK(v.margin == doctest::Approx(-0.5));
  CHECK_FALSE(v.holds());
  // degenerate preset class
  v = cone_condition({preset("degenerate_split").chi0.cls}, {preset("degenerate_split").omega0.cls});
  CHECK(v.margin == doctest::Approx(1));
}

TEST_CASE("cone verdict ignores the potential representative") {
  const Grid g = Grid::torus(4);
  const auto x = cls(1, 2);
  const ClosedForm a(x, random_potential(g, 1));
  const ClosedForm b(x, 3.0 * random_potential(g, 2));
  CHECK(cone_condition(a.cls(), cls(1, 1)).holds() == cone_condition(b.cls(), cls(1, 1)).holds());
  CHECK(cone_condition(2.0 * a.cls(), cls(1, 1)).holds() == cone_condition(a.cls(), cls(1, 1)).holds());
}

TEST_CASE("realized forms carry their class") {
  const Grid g = Grid::torus(8);
  const ClosedForm f(cls(1.5, 0.5, 0.2, -0.1), random_potential(g, 9));
  const Herm2 m = f.realized().mean();
  CHECK(m.a11 == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(m.a22 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(m.a12 - std::complex<double>(0.2, -0.1)) < 1e-12);
}

TEST_CASE("pairing equals the integral of any representatives") {
  const Grid g = Grid::torus(8);
  const auto a = cls(1.2, 0.9, 0.1, 0.3), b = cls(0.7, 1.4, -0.2, 0.05);
  const ClosedForm fa(a, random_potential(g, 21)), fb(b, random_potential(g, 22));
  CHECK(integrate(wedge_density(fa.realized(), fb.realized())) ==
        doctest::Approx(class_pairing(a, b)).epsilon(1e-10));
}

TEST_CASE("epsilon_form") {
  const Grid g = Grid::torus(8);
  const auto p = preset("degenerate_split");
  const ClosedForm w0 = p.omega0.realize(g), wh = p.omega_hat.realize(g);
  const ClosedForm same = epsilon_form(w0, 0.0, wh);
  CHECK((same.realized().h11() - w0.realized().h11()).sup_abs() == 0.0);

  const ClosedForm w = epsilon_form(w0, 0.1, wh);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.point(i);
    const Herm2 h = w.realized().at(i);
    err = std::max({err, std::abs(h.a11 - oracle::s2(x[0], x[1]) - 0.1), std::abs(h.a22 - 1.1), std::abs(h.a12)});
  }
  CHECK(err < 1e-12);

  // class affine in eps
  const auto c = [&](double e) { return epsilon_form(w0, e, wh).cls().m; };
  CHECK((c(0.3).a11 - c(0.1).a11) == doctest::Approx(2 * (c(0.2).a11 - c(0.1).a11)));
}

TEST_CASE("verify_omega0_conditions") {
  const Grid g = Grid::torus(8);
  SUBCASE("degenerate preset certificate") {
    const auto p = preset("degenerate_split");
    const auto cert = verify_omega0_conditions(p.omega0.realize(g), p.divisor_model(g), p.omega_hat.realize(g));
    CHECK(cert.ok);
    CHECK(cert.c0 == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(cert.beta == 1.0);
    CHECK(cert.rho == 0.5);
  }
  SUBCASE("Kaehler omega") {
    const ClosedForm id = ClosedForm::constant(g, cls(1, 1));
    const auto cert = verify_omega0_conditions(id, id);
    CHECK(cert.ok);
    CHECK(cert.c0 == doctest::Approx(1.0));
  }
  SUBCASE("rho too large") {
    auto p = preset("degenerate_split");
    p.rho = 2.0;
    const auto div = p.divisor_model(g);
    const auto cert = verify_omega0_conditions(p.omega0.realize(g), div, p.omega_hat.realize(g));
    CHECK_FALSE(cert.ok);
    CHECK(cert.violated_inequality == 2);
    CHECK_FALSE(cert.message.empty());
  }
}

TEST_CASE("divisor model") {
  const Grid g = Grid::torus(8);
  const auto div = preset("degenerate_split").divisor_model(g);
  std::size_t on = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(div.s2_proxy[i] >= 0.0);
    const auto x = g.point(i);
    CHECK(div.on_locus(i) == (x[0] == 0.0 && x[1] == 0.0));
    on += div.on_locus(i) ? 1 : 0;
  }
  CHECK(on == 64);
  // R_H represents diag(1, 0)
  const Herm2 r = div.r_h.cls().m;
  CHECK(r.a11 == doctest::Approx(1.0));
  CHECK(std::abs(r.a22) < 1e-14);
}
