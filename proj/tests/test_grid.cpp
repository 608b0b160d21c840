#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "diffwave/grid.hpp"

using namespace diffwave;

TEST_CASE("grid construction and invariants") {
  auto g = HalfLineGrid::make(10.0, 100);
  CHECK(g.dx == Catch::Approx(0.1));
  CHECK(g.x(0) == Catch::Approx(0.05));
  CHECK(g.x(99) == Catch::Approx(9.95));
  CHECK(g.dx * g.cells == Catch::Approx(g.length));
  CHECK_THROWS_AS(HalfLineGrid::make(-1.0, 100), std::invalid_argument);
  CHECK_THROWS_AS(HalfLineGrid::make(1.0, 4), std::invalid_argument);
}

TEST_CASE("ddx is exact on constants and linears") {
  auto g = HalfLineGrid::make(5.0, 64);
  Field c = Field::sample(g, [](double) { return 3.7; });
  Field dc = ddx(c);
  for (int j = 0; j < g.cells; ++j) CHECK(dc[j] == 0.0);

  Field x = Field::sample(g, [](double x) { return x; });
  Field dx_f = ddx(x);
  for (int j = 0; j < g.cells; ++j) CHECK(dx_f[j] == Catch::Approx(1.0).margin(1e-13));
}

TEST_CASE("ddx is linear") {
  auto g = HalfLineGrid::make(3.0, 48);
  Field a = Field::sample(g, [](double x) { return std::sin(x); });
  Field b = Field::sample(g, [](double x) { return x * x; });
  Field lhs = ddx(a + 2.0 * b);
  Field rhs = ddx(a) + 2.0 * ddx(b);
  for (int j = 0; j < g.cells; ++j) CHECK(lhs[j] == Catch::Approx(rhs[j]).margin(1e-12));
}

TEST_CASE("ddx converges at second order on sin") {
  auto err = [](int n) {
    auto g = HalfLineGrid::make(2.0 * M_PI, n);
    Field f = Field::sample(g, [](double x) { return std::sin(x); });
    Field d = ddx(f);
    double worst = 0.0;
    for (int j = 0; j < n; ++j) worst = std::max(worst, std::abs(d[j] - std::cos(g.x(j))));
    return worst;
  };
  const double e1 = err(512), e2 = err(1024);
  CHECK(e1 / e2 > 3.6);
  CHECK(e2 < 5e-5);
}

TEST_CASE("ghost-based boundary rules") {
  auto g = HalfLineGrid::make(4.0, 128);
  // even extension of cos(x) across the wall keeps second order at x=0
  Field f = Field::sample(g, [](double x) { return std::cos(x); });
  Field d = ddx(f, BoundaryRule{EndRule::even, 0.0, EndRule::one_sided, 0.0});
  CHECK(d[0] == Catch::Approx(-std::sin(g.x(0))).margin(1e-3));
  // odd extension of sin
  Field s = Field::sample(g, [](double x) { return std::sin(x); });
  Field ds = ddx(s, BoundaryRule{EndRule::odd, 0.0, EndRule::one_sided, 0.0});
  CHECK(ds[0] == Catch::Approx(std::cos(g.x(0))).margin(1e-3));
}

TEST_CASE("quadrature closed forms") {
  auto g = HalfLineGrid::make(2.0, 128);
  Field one = Field::sample(g, [](double) { return 1.0; });
  CHECK(integrate(one) == Catch::Approx(2.0).epsilon(1e-14));

  auto g2 = HalfLineGrid::make(30.0, 4096);
  Field e = Field::sample(g2, [](double x) { return std::exp(-x); });
  CHECK(integrate(e) == Catch::Approx(1.0).margin(1e-6));

  // indicator of half the domain
  Field ind = Field::sample(g, [](double x) { return x < 1.0 ? 1.0 : 0.0; });
  CHECK(integrate(ind) == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("tail integrals") {
  auto g = HalfLineGrid::make(8.0, 256);
  Field zero(g);
  CHECK(integrate_tail(zero, 3.0) == 0.0);

  Field e = Field::sample(g, [](double x) { return std::exp(-x); });
  CHECK(integrate_tail(e, 2.0) == Catch::Approx(std::exp(-2.0)).margin(1e-3));
  CHECK(integrate_tail(e, 9.0) == 0.0);

  // tail_integrals agrees with integrate_tail at every center
  Field tails = tail_integrals(e);
  for (int j = 0; j < g.cells; j += 17)
    CHECK(tails[j] == Catch::Approx(integrate_tail(e, g.x(j))).margin(1e-14));
}

TEST_CASE("cumulative plus tail equals total") {
  auto g = HalfLineGrid::make(6.0, 192);
  Field f = Field::sample(g, [](double x) { return std::cos(x) + 0.2 * x; });
  const double total = integrate(f);
  Field cum = cumulative_integrals(f);
  Field tail = tail_integrals(f);
  for (int j = 0; j < g.cells; ++j)
    CHECK(cum[j] + tail[j] == Catch::Approx(total).margin(1e-12));
}

TEST_CASE("norms closed forms and oracle summation") {
  auto g = HalfLineGrid::make(2.0, 200);
  Field one = Field::sample(g, [](double) { return 1.0; });
  Norms n = norms(one);
  CHECK(n.l1 == Catch::Approx(2.0).epsilon(1e-14));
  CHECK(n.l2 == Catch::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(n.linf == 1.0);

  Field ind = Field::sample(g, [](double x) { return x < 1.0 ? 1.0 : 0.0; });
  CHECK(norms(ind).l1 == Catch::Approx(1.0).epsilon(1e-14));

  // independent double-precision summation oracle on a random field
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Field r(g);
  for (auto& v : r.values) v = dist(rng);
  long double acc = 0.0L;
  for (double v : r.values) acc += static_cast<long double>(v) * v;
  acc *= static_cast<long double>(g.dx);
  CHECK(norms(r).l2 * norms(r).l2 == Catch::Approx(static_cast<double>(acc)).epsilon(1e-13));
}

TEST_CASE("quadrature of ddx telescopes to boundary values") {
  auto g = HalfLineGrid::make(3.0, 1024);
  Field f = Field::sample(g, [](double x) { return std::exp(-x) * std::sin(2.0 * x); });
  const double lhs = integrate(ddx(f));
  const double rhs = (std::exp(-3.0) * std::sin(6.0)) - 0.0;
  CHECK(lhs == Catch::Approx(rhs).margin(1e-4));
}

TEST_CASE("tail negligibility flag") {
  auto g = HalfLineGrid::make(40.0, 512);
  Field ok = Field::sample(g, [](double x) { return std::exp(-x); });
  CHECK(tail_negligible(ok));
  Field bad = Field::sample(g, [](double x) { return 1.0 / (1.0 + x); });
  CHECK(!tail_negligible(bad));
}

TEST_CASE("state field invariant checks") {
  auto g = HalfLineGrid::make(1.0, 16);
  Field v = Field::sample(g, [](double) { return 1.0; });
  Field u(g);
  StateField s(v, u);
  CHECK(s.grid() == g);
  auto g2 = HalfLineGrid::make(2.0, 16);
  Field u2(g2);
  CHECK_THROWS_AS(StateField(v, u2), std::invalid_argument);
}
