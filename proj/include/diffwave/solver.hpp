#pragma once

// Time integration of the damped p-system IBVP on the truncated half line:
//   v_t - u_x = 0,
//   u_t + p(v)_x = -alpha u + (g(u) f(v))_x,
//   u(0,t) = 0,  (v,u) -> (v_plus, u_plus e^{-alpha t}) as x -> infinity.
//
// Strang splitting: half-step exact damping, full Kurganov-Tadmor central
// step for the flux part, half-step damping. The damping is linear in u, so
// the relaxation factor e^{-alpha dt/2} integrates it exactly and the long
// (1+t) decay carries no splitting stiffness error.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffwave/closure.hpp"
#include "diffwave/grid.hpp"

namespace diffwave {

struct SolverError : std::runtime_error {
  double t;
  SolverError(const std::string& what, double t_) : std::runtime_error(what), t(t_) {}
};

namespace detail {
inline double minmod3(double a, double b, double c) {
  if (a > 0.0 && b > 0.0 && c > 0.0) return std::min(std::min(a, b), c);
  if (a < 0.0 && b < 0.0 && c < 0.0) return std::max(std::max(a, b), c);
  return 0.0;
}

/// Spectral radius of the flux Jacobian [[0,-1],[p'-g f', -g' f]].
template <class Model>
inline double local_speed(const Model& m, double v, double u) {
  const double A = m.dp(v) - m.g(u) * m.df(v);
  const double B = -m.dg(u) * m.f(v);
  const double disc = B * B - 4.0 * A;
  return 0.5 * (std::abs(B) + std::sqrt(std::max(disc, 0.0)));
}
}  // namespace detail

/// Max over cells of the characteristic speed bound used by the CFL
/// condition: sqrt(-p'(v)) at rest, plus the (g f) Jacobian contribution.
template <class Model>
inline double max_wave_speed(const StateField& state, const Model& model) {
  double s = 0.0;
  for (int j = 0; j < state.v.size(); ++j) {
    if (!(state.v[j] > 0.0)) throw std::domain_error("max_wave_speed: vacuum");
    s = std::max(s, detail::local_speed(model, state.v[j], state.u[j]));
  }
  return s;
}

/// Kurganov-Tadmor stepper with preallocated workspace. Cells live at padded
/// indices [2, n+2); two ghost cells per side carry the wall reflection
/// (u odd, v even) and the far-field Dirichlet state.
template <class Model>
class PSystemStepper {
 public:
  PSystemStepper(const HalfLineGrid& grid, const Model& model, double v_plus, double cfl,
                 double limiter_theta = 1.5)
      : grid_(grid),
        model_(model),
        v_plus_(v_plus),
        cfl_(cfl),
        theta_(limiter_theta),
        n_(grid.cells),
        v_(n_ + 4),
        u_(n_ + 4),
        v1_(n_ + 4),
        u1_(n_ + 4),
        sv_(n_ + 4),
        su_(n_ + 4),
        lv_(n_),
        lu_(n_),
        hv_(n_ + 1),
        hu_(n_ + 1) {}

  /// One Strang step from t to t+dt. The far-field ghost during the
  /// hyperbolic substep is frozen at u_plus e^{-alpha (t + dt/2)}, which is
  /// exactly the value the uniform far state holds between the two damping
  /// half-steps; the far field therefore stays spatially uniform to rounding.
  void step(std::vector<double>& v, std::vector<double>& u, double t, double dt,
            double u_plus) {
    const double alpha = model_.alpha();
    if (!(dt > 0.0)) throw SolverError("step: dt must be positive", t);
    const double speed = interior_max_speed(v, u);
    if (dt > cfl_ * grid_.dx / speed * (1.0 + 1e-12))
      throw SolverError("step: CFL violation (dt too large)", t);

    const double damp = std::exp(-0.5 * alpha * dt);
    for (double& x : u) x *= damp;
    const double u_far = u_plus * std::exp(-alpha * (t + 0.5 * dt));

    // Heun / SSP-RK2 for the hyperbolic substep.
    std::copy(v.begin(), v.end(), v_.begin() + 2);
    std::copy(u.begin(), u.end(), u_.begin() + 2);
    rhs(v_, u_, u_far, t);
    for (int j = 0; j < n_; ++j) {
      v1_[j + 2] = v_[j + 2] + dt * lv_[j];
      u1_[j + 2] = u_[j + 2] + dt * lu_[j];
    }
    rhs(v1_, u1_, u_far, t);
    for (int j = 0; j < n_; ++j) {
      v[j] = 0.5 * (v_[j + 2] + v1_[j + 2] + dt * lv_[j]);
      u[j] = 0.5 * (u_[j + 2] + u1_[j + 2] + dt * lu_[j]);
    }
    flux_budget_ += 0.5 * dt * (stage_influx_[0] + stage_influx_[1]);

    for (double& x : u) x *= damp;

    const Interval adm = model_.admissible_u();
    for (int j = 0; j < n_; ++j) {
      if (!(v[j] > 0.0)) throw SolverError("step: vacuum (v <= 0)", t + dt);
      if (!adm.contains(u[j]))
        throw SolverError("step: u left the admissible interval", t + dt);
    }
  }

  double cfl_dt(const std::vector<double>& v, const std::vector<double>& u) const {
    return cfl_ * grid_.dx / interior_max_speed(v, u);
  }

  /// Time-integrated net v-influx through the two boundaries; the discrete
  /// mass satisfies mass(t) = mass(0) + budget up to rounding.
  double flux_budget() const { return flux_budget_; }

 private:
  double interior_max_speed(const std::vector<double>& v, const std::vector<double>& u) const {
    double s = 0.0;
    for (int j = 0; j < n_; ++j) {
      if (!(v[j] > 0.0)) throw SolverError("max_wave_speed: vacuum", 0.0);
      s = std::max(s, detail::local_speed(model_, v[j], u[j]));
    }
    return s;
  }

  // Semi-discrete KT right-hand side; also records the boundary v-fluxes of
  // the current stage for the mass budget.
  void rhs(std::vector<double>& pv, std::vector<double>& pu, double u_far, double t) {
    // ghosts: left wall reflection, right Dirichlet far field
    pv[1] = pv[2];
    pv[0] = pv[3];
    pu[1] = -pu[2];
    pu[0] = -pu[3];
    pv[n_ + 2] = pv[n_ + 3] = v_plus_;
    pu[n_ + 2] = pu[n_ + 3] = u_far;

    for (int i = 1; i <= n_ + 2; ++i) {
      sv_[i] = detail::minmod3(theta_ * (pv[i] - pv[i - 1]), 0.5 * (pv[i + 1] - pv[i - 1]),
                               theta_ * (pv[i + 1] - pv[i]));
      su_[i] = detail::minmod3(theta_ * (pu[i] - pu[i - 1]), 0.5 * (pu[i + 1] - pu[i - 1]),
                               theta_ * (pu[i + 1] - pu[i]));
    }
    for (int i = 0; i <= n_; ++i) {
      const int c = i + 1;  // padded index of the cell left of interface i
      const double vl = pv[c] + 0.5 * sv_[c];
      const double ul = pu[c] + 0.5 * su_[c];
      const double vr = pv[c + 1] - 0.5 * sv_[c + 1];
      const double ur = pu[c + 1] - 0.5 * su_[c + 1];
      if (!(vl > 0.0 && vr > 0.0))
        throw SolverError("step: vacuum at a cell interface", t);
      const double a =
          std::max(detail::local_speed(model_, vl, ul), detail::local_speed(model_, vr, ur));
      const double fvl = -ul, fvr = -ur;
      double ful, fur;
      if constexpr (Model::has_gf) {
        ful = model_.p(vl) - model_.g(ul) * model_.f(vl);
        fur = model_.p(vr) - model_.g(ur) * model_.f(vr);
      } else {
        ful = model_.p(vl);
        fur = model_.p(vr);
      }
      hv_[i] = 0.5 * (fvl + fvr) - 0.5 * a * (vr - vl);
      hu_[i] = 0.5 * (ful + fur) - 0.5 * a * (ur - ul);
    }
    const double inv_dx = 1.0 / grid_.dx;
    for (int j = 0; j < n_; ++j) {
      lv_[j] = -(hv_[j + 1] - hv_[j]) * inv_dx;
      lu_[j] = -(hu_[j + 1] - hu_[j]) * inv_dx;
    }
    stage_influx_[stage_flip_] = hv_[0] - hv_[n_];
    stage_flip_ = 1 - stage_flip_;
  }

  HalfLineGrid grid_;
  Model model_;
  double v_plus_;
  double cfl_;
  double theta_;
  int n_;
  std::vector<double> v_, u_, v1_, u1_, sv_, su_;
  std::vector<double> lv_, lu_, hv_, hu_;
  double flux_budget_ = 0.0;
  double stage_influx_[2] = {0.0, 0.0};
  int stage_flip_ = 0;
};

/// Single Strang step on a StateField (convenience wrapper over the stepper).
template <class Model>
inline StateField step(const StateField& state, double dt, double t, const Model& model,
                       double v_plus, double u_plus, double cfl = 0.45) {
  PSystemStepper<Model> stepper(state.grid(), model, v_plus, cfl);
  StateField out = state;
  stepper.step(out.v.values, out.u.values, t, dt, u_plus);
  return out;
}

// ---- scenarios and trajectories -------------------------------------------------

struct Scenario {
  ModelSpec model;
  HalfLineGrid grid;
  Field v0, u0;
  double v_plus = 1.0;
  double u_plus = 0.0;
  double t_end = 0.0;
  double cfl = 0.45;
  std::vector<double> snapshot_times;
  double limiter_theta = 1.5;
  /// Early-time step ramp dt <= ramp_dt0 e^{alpha t / 3}, active while the
  /// far field still moves: keeps the splitting error in the boundary flux
  /// budget below the zero-mass tolerance. Unused when u_plus = 0.
  double ramp_dt0 = 1e-3;
  double tail_rel_tol = 1e-6;

  void validate() const {
    if (!(v0.grid == grid) || !(u0.grid == grid))
      throw std::invalid_argument("scenario: initial data grid mismatch");
    const Interval adm = model.admissible_u();
    for (int j = 0; j < grid.cells; ++j) {
      if (!(v0[j] > 0.0)) throw std::invalid_argument("scenario: v0 must be positive");
      if (!adm.contains(u0[j]))
        throw std::invalid_argument("scenario: u0 outside the admissible interval");
    }
    const int last = grid.cells - 1;
    const double vscale = std::max(std::abs(v_plus), norm_linf(v0));
    const double uscale = std::max(std::abs(u_plus), std::max(norm_linf(u0), 1e-30));
    if (std::abs(v0[last] - v_plus) > tail_rel_tol * vscale ||
        std::abs(u0[last] - u_plus) > tail_rel_tol * uscale)
      throw std::invalid_argument("scenario: initial data do not reach (v_plus, u_plus) at x = L");
  }
};

struct StepDiagnostics {
  double t;
  double dt;
  double mass;
  double max_speed;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<StateField> snapshots;
  std::vector<StepDiagnostics> diagnostics;
  double initial_mass = 0.0;
  double flux_budget = 0.0;
  long steps = 0;

  const StateField& at(std::size_t i) const { return snapshots[i]; }
};

/// Integrate the scenario to t_end, storing snapshots at the requested times
/// (plus t = 0). Deterministic for identical inputs.
template <class Model>
inline Trajectory run(const Scenario& scenario, const Model& model) {
  scenario.validate();
  for (std::size_t i = 1; i < scenario.snapshot_times.size(); ++i)
    if (!(scenario.snapshot_times[i] > scenario.snapshot_times[i - 1]))
      throw std::invalid_argument("scenario: snapshot times must increase");

  Trajectory traj;
  std::vector<double> v = scenario.v0.values;
  std::vector<double> u = scenario.u0.values;
  const HalfLineGrid& grid = scenario.grid;

  auto store = [&](double t) {
    StateField s;
    s.v = Field(grid);
    s.v.values = v;
    s.u = Field(grid);
    s.u.values = u;
    traj.times.push_back(t);
    traj.snapshots.push_back(std::move(s));
  };

  store(0.0);
  traj.initial_mass = integrate(scenario.v0);

  PSystemStepper<Model> stepper(grid, model, scenario.v_plus, scenario.cfl,
                                scenario.limiter_theta);
  std::size_t next_snap = 0;
  while (next_snap < scenario.snapshot_times.size() &&
         scenario.snapshot_times[next_snap] <= 0.0)
    ++next_snap;

  const double alpha = model.alpha();
  double t = 0.0;
  while (t < scenario.t_end) {
    double dt = stepper.cfl_dt(v, u);
    if (scenario.u_plus != 0.0 && scenario.ramp_dt0 > 0.0)
      dt = std::min(dt, scenario.ramp_dt0 * std::exp(alpha * t / 3.0));
    double target = scenario.t_end;
    if (next_snap < scenario.snapshot_times.size())
      target = std::min(target, scenario.snapshot_times[next_snap]);
    bool hit = false;
    if (t + dt >= target * (1.0 - 1e-14)) {
      dt = target - t;
      hit = true;
    }
    if (!(dt > 0.0)) throw SolverError("run: time step underflow", t);
    stepper.step(v, u, t, dt, scenario.u_plus);
    t = hit ? target : t + dt;

    double mass = 0.0;
    for (double x : v) mass += x;
    mass *= grid.dx;
    double speed = 0.0;
    for (int j = 0; j < grid.cells; ++j)
      speed = std::max(speed, detail::local_speed(model, v[j], u[j]));
    traj.diagnostics.push_back({t, dt, mass, speed});
    ++traj.steps;

    if (hit && next_snap < scenario.snapshot_times.size() &&
        target == scenario.snapshot_times[next_snap]) {
      store(t);
      ++next_snap;
    }
  }
  traj.flux_budget = stepper.flux_budget();
  return traj;
}

inline Trajectory run(const Scenario& scenario) { return run(scenario, scenario.model); }

}  // namespace diffwave
