#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "diffwave/closure.hpp"
#include "diffwave/profiles.hpp"
#include "diffwave/solver.hpp"

using namespace diffwave;

namespace {

// finite-difference Jacobian of the flux F(v,u) = (-u, p(v) - g(u) f(v)),
// spectral radius via the quadratic characteristic polynomial
template <class Model>
double fd_jacobian_radius(const Model& m, double v, double u) {
  const double h = 1e-6;
  auto Fv = [&](double, double uu) { return -uu; };
  auto Fu = [&](double vv, double uu) { return m.p(vv) - m.g(uu) * m.f(vv); };
  const double a11 = (Fv(v + h, u) - Fv(v - h, u)) / (2 * h);
  const double a12 = (Fv(v, u + h) - Fv(v, u - h)) / (2 * h);
  const double a21 = (Fu(v + h, u) - Fu(v - h, u)) / (2 * h);
  const double a22 = (Fu(v, u + h) - Fu(v, u - h)) / (2 * h);
  const double tr = a11 + a22, det = a11 * a22 - a12 * a21;
  const double disc = std::sqrt(std::max(tr * tr - 4.0 * det, 0.0));
  return 0.5 * (std::abs(tr) + disc);
}

StateField uniform_state(const HalfLineGrid& g, double v, double u) {
  return {Field::sample(g, [=](double) { return v; }),
          Field::sample(g, [=](double) { return u; })};
}

Scenario base_scenario(const HalfLineGrid& g) {
  Scenario sc;
  sc.model = m1_model_spec();
  sc.grid = g;
  sc.v_plus = 1.0;
  sc.u_plus = 0.0;
  sc.v0 = Field::sample(g, [](double) { return 1.0; });
  sc.u0 = Field(g);
  return sc;
}

}  // namespace

TEST_CASE("max wave speed") {
  auto g = HalfLineGrid::make(1.0, 8);
  M1Model m1;
  CHECK(max_wave_speed(uniform_state(g, 1.0, 0.0), m1) ==
        Catch::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-14));

  ModelSpec gl = gamma_law_model(1.0);
  CHECK(max_wave_speed(uniform_state(g, 2.0, 0.0), gl) == Catch::Approx(0.5).epsilon(1e-12));

  // oracle: numerically differentiated flux Jacobian at (v, u) = (1, 0.5)
  const double oracle = fd_jacobian_radius(m1, 1.0, 0.5);
  CHECK(max_wave_speed(uniform_state(g, 1.0, 0.5), m1) == Catch::Approx(oracle).margin(1e-6));

  Field bad_v = Field::sample(g, [](double) { return -1.0; });
  CHECK_THROWS_AS(max_wave_speed(StateField{bad_v, Field(g)}, m1), std::domain_error);
}

TEST_CASE("equilibrium state is exactly stationary") {
  auto g = HalfLineGrid::make(20.0, 64);
  Scenario sc = base_scenario(g);
  sc.t_end = 50.0;
  sc.snapshot_times = {10.0, 50.0};
  Trajectory traj = run(sc, M1Model{});
  REQUIRE(traj.snapshots.size() == 3);
  for (const auto& s : traj.snapshots)
    for (int j = 0; j < g.cells; ++j) {
      CHECK(s.v[j] == 1.0);
      CHECK(s.u[j] == 0.0);
    }
}

TEST_CASE("uniform far-field state follows the exact damping ODE") {
  auto g = HalfLineGrid::make(100.0, 512);
  Scenario sc = base_scenario(g);
  sc.u_plus = 0.3;
  sc.v0 = Field::sample(g, [](double) { return 1.0; });
  sc.u0 = Field::sample(g, [](double) { return 0.3; });
  sc.t_end = 20.0;
  sc.snapshot_times = {5.0, 20.0};
  Trajectory traj = run(sc, M1Model{});
  REQUIRE(traj.snapshots.size() == 3);
  // middle of the domain: wall signals travel at most ~0.6 t from x = 0
  const int mid = g.cells / 2;
  for (std::size_t i = 1; i < traj.snapshots.size(); ++i) {
    const double t = traj.times[i];
    CHECK(traj.snapshots[i].u[mid] == Catch::Approx(0.3 * std::exp(-t)).margin(1e-12));
    CHECK(traj.snapshots[i].v[mid] == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("mass changes exactly by the boundary flux budget (16-cell run)") {
  auto g = HalfLineGrid::make(8.0, 16);
  Scenario sc = base_scenario(g);
  sc.u_plus = 0.1;
  sc.v0 = Field::sample(g, [](double x) {
    const double s = (x - 4.0) / 0.8;
    return 1.0 + 0.2 * std::exp(-s * s);
  });
  sc.u0 = Field::sample(g, [](double x) {
    const double s = (x - 4.0) / 0.8;
    return 0.1 - 0.05 * std::exp(-s * s);
  });
  sc.t_end = 2.0;
  Trajectory traj = run(sc, M1Model{});
  const double mass_end = traj.diagnostics.back().mass;
  CHECK(std::abs(mass_end - traj.initial_mass - traj.flux_budget) <= 1e-12 * traj.initial_mass);
}

TEST_CASE("mass drift over ten thousand steps stays at rounding level") {
  auto g = HalfLineGrid::make(30.0, 64);
  Scenario sc = base_scenario(g);
  sc.v0 = Field::sample(g, [](double x) {
    const double s = (x - 8.0) / 2.0;
    return 1.0 + 0.05 * std::exp(-s * s);
  });
  sc.t_end = 2000.0;  // ~ 9k steps at this resolution
  Trajectory traj = run(sc, M1Model{});
  CHECK(traj.steps > 5000);
  const double drift =
      std::abs(traj.diagnostics.back().mass - traj.initial_mass - traj.flux_budget);
  CHECK(drift <= 1e-10 * traj.initial_mass);
}

TEST_CASE("second-order convergence on a smooth pulse") {
  auto error_vs_reference = [](int n) {
    const double t_end = 5.0, L = 40.0;
    auto solve = [&](int cells) {
      auto g = HalfLineGrid::make(L, cells);
      Scenario sc = base_scenario(g);
      sc.v0 = Field::sample(g, [](double x) {
        const double s = (x - 10.0) / 2.0;
        return 1.0 + 0.01 * std::exp(-s * s);
      });
      sc.t_end = t_end;
      sc.snapshot_times = {t_end};
      return run(sc, M1Model{});
    };
    Trajectory coarse = solve(n);
    Trajectory fine = solve(2048);
    // restrict the reference by block-averaging cell values
    const int ratio = 2048 / n;
    double err2 = 0.0;
    const auto& vc = coarse.snapshots.back().v;
    const auto& vf = fine.snapshots.back().v;
    for (int j = 0; j < n; ++j) {
      double avg = 0.0;
      for (int a = 0; a < ratio; ++a) avg += vf[j * ratio + a];
      avg /= ratio;
      const double d = vc[j] - avg;
      err2 += d * d;
    }
    return std::sqrt(err2 * (L / n));
  };
  const double e1 = error_vs_reference(128);
  const double e2 = error_vs_reference(256);
  CHECK(e1 / e2 >= 3.5);
}

TEST_CASE("far field stays on the decay curve before signals arrive") {
  auto g = HalfLineGrid::make(60.0, 512);
  Scenario sc = base_scenario(g);
  sc.u_plus = 0.02;
  Field m0 = bump_m0(g, 2.0);
  Field cum = cumulative_integrals(m0);
  sc.v0 = Field::sample(g, [](double x) {
    const double s = (x - 6.0) / 1.0;
    return 1.0 + 0.01 * std::exp(-s * s);
  });
  sc.u0 = 0.02 * cum;
  sc.t_end = 5.0;
  sc.snapshot_times = {5.0};
  Trajectory traj = run(sc, M1Model{});
  const int probe = g.cells - 6;  // x = L - 5 dx - dx/2 side of the wall
  const double expected = 0.02 * std::exp(-5.0);
  CHECK(std::abs(traj.snapshots.back().u[probe] - expected) <= 1e-6);
  // predicted arrival time of the fastest characteristic
  const double speed = max_wave_speed(traj.snapshots.back(), M1Model{});
  CHECK(5.0 < (g.x(probe) - 10.0) / speed);
}

TEST_CASE("solver guards") {
  auto g = HalfLineGrid::make(8.0, 32);
  M1Model m1;

  SECTION("CFL violation") {
    StateField s = uniform_state(g, 1.0, 0.0);
    const double dx = g.dx;
    const double dt_bad = 10.0 * dx;  // far beyond cfl 0.45 at speed ~0.58
    CHECK_THROWS_AS(step(s, dt_bad, 0.0, m1, 1.0, 0.0), SolverError);
  }

  SECTION("admissibility loss aborts instead of clamping") {
    ModelSpec tight = gamma_law_model(1.4);
    tight.admissible = {-1e-9, 1e-9};
    StateField s{Field::sample(g, [](double x) {
                   const double r = (x - 4.0) / 1.0;
                   return 1.0 + 0.2 * std::exp(-r * r);
                 }),
                 Field(g)};
    // one admissible step: the pressure gradient immediately produces |u| > 1e-9
    const double dt = 0.2 * g.dx / max_wave_speed(s, tight);
    CHECK_THROWS_AS(step(s, dt, 0.0, tight, 1.0, 0.0), SolverError);
  }

  SECTION("vacuum detection") {
    // strong colliding jump at the admissibility edge drains v below zero
    Field v = Field::sample(g, [](double) { return 0.02; });
    Field u = Field::sample(g, [](double x) { return x < 4.0 ? 0.9 : -0.9; });
    StateField s{v, u};
    bool threw = false;
    double dt = 0.4 * g.dx / max_wave_speed(s, m1);
    try {
      StateField cur = s;
      for (int i = 0; i < 50; ++i) cur = step(cur, dt, i * dt, m1, 0.02, 0.0);
    } catch (const SolverError&) {
      threw = true;
    }
    CHECK(threw);
  }

  SECTION("scenario validation") {
    Scenario sc = base_scenario(g);
    sc.v0[3] = -0.5;
    CHECK_THROWS_AS(run(sc, M1Model{}), std::invalid_argument);

    Scenario sc2 = base_scenario(g);
    sc2.u0 = Field::sample(g, [](double) { return 0.5; });  // tail misses u_plus = 0
    CHECK_THROWS_AS(run(sc2, M1Model{}), std::invalid_argument);
  }
}

TEST_CASE("t_end = 0 yields only the initial snapshot") {
  auto g = HalfLineGrid::make(10.0, 32);
  Scenario sc = base_scenario(g);
  sc.t_end = 0.0;
  Trajectory traj = run(sc, M1Model{});
  CHECK(traj.snapshots.size() == 1);
  CHECK(traj.times == std::vector<double>{0.0});
}

TEST_CASE("runs are deterministic") {
  auto g = HalfLineGrid::make(30.0, 128);
  Scenario sc = base_scenario(g);
  sc.u_plus = 0.05;
  Field cum = cumulative_integrals(bump_m0(g, 2.0));
  sc.v0 = Field::sample(g, [](double x) {
    const double s = (x - 8.0) / 1.5;
    return 1.0 + 0.02 * std::exp(-s * s);
  });
  sc.u0 = 0.05 * cum;
  sc.t_end = 3.0;
  sc.snapshot_times = {1.0, 3.0};
  Trajectory a = run(sc, M1Model{});
  Trajectory b = run(sc, M1Model{});
  REQUIRE(a.snapshots.size() == b.snapshots.size());
  for (std::size_t i = 0; i < a.snapshots.size(); ++i)
    for (int j = 0; j < g.cells; ++j) {
      CHECK(a.snapshots[i].v[j] == b.snapshots[i].v[j]);
      CHECK(a.snapshots[i].u[j] == b.snapshots[i].u[j]);
    }
}

TEST_CASE("diagnostics mass agrees with snapshot quadrature") {
  auto g = HalfLineGrid::make(30.0, 128);
  Scenario sc = base_scenario(g);
  sc.v0 = Field::sample(g, [](double x) {
    const double s = (x - 8.0) / 1.5;
    return 1.0 + 0.02 * std::exp(-s * s);
  });
  sc.t_end = 4.0;
  sc.snapshot_times = {2.0, 4.0};
  Trajectory traj = run(sc, M1Model{});
  for (std::size_t i = 1; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    double diag_mass = 0.0;
    for (const auto& d : traj.diagnostics)
      if (d.t == t) diag_mass = d.mass;
    CHECK(diag_mass == Catch::Approx(integrate(traj.snapshots[i].v)).epsilon(1e-13));
  }
}
