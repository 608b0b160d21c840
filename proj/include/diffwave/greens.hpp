#pragma once

// Half-line Dirichlet heat kernel with diffusivity D = -p'(v_plus): image
// construction, Lp norm scaling of the whole-line kernel, the initial-data
// propagator J1 of the Duhamel representation, and the residual of the
// linearized parabolic form around v_plus.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "diffwave/decay.hpp"
#include "diffwave/grid.hpp"
#include "diffwave/perturbation.hpp"

namespace diffwave {

/// G(x,t;y) = (4 pi D t)^{-1/2} (e^{-(x-y)^2/4Dt} - e^{-(x+y)^2/4Dt}).
/// Vanishes on the wall, symmetric in (x, y), nonnegative in the quadrant.
struct HeatKernel {
  double diffusivity;

  explicit HeatKernel(double D) : diffusivity(D) {
    if (!(D > 0.0)) throw std::invalid_argument("HeatKernel: diffusivity must be positive");
  }

  double operator()(double x, double t, double y) const {
    if (!(t > 0.0)) throw std::domain_error("heat kernel: t must be positive");
    if (x < 0.0 || y < 0.0) throw std::domain_error("heat kernel: x, y must be nonnegative");
    const double s = 4.0 * diffusivity * t;
    const double dm = x - y, dp = x + y;
    return (std::exp(-dm * dm / s) - std::exp(-dp * dp / s)) / std::sqrt(M_PI * s);
  }

  /// int_0^inf G(x,t;y) dy = erf(x / (2 sqrt(D t))).
  double mass(double x, double t) const {
    return std::erf(x / (2.0 * std::sqrt(diffusivity * t)));
  }

  /// J1-style propagation of grid data, trapezoid-free midpoint quadrature
  /// with an analytic erf tail correction using the far-field constancy of
  /// the data. t = 0 returns the data unchanged (semigroup identity).
  Field propagate(const Field& data, double t) const {
    if (t < 0.0) throw std::domain_error("propagate: t must be nonnegative");
    if (t == 0.0) return data;
    const int n = data.size();
    const double dx = data.grid.dx;
    const double L = data.grid.length;
    const double far = data[n - 1];
    const double s = std::sqrt(4.0 * diffusivity * t);
    // quadrature only over the support of the data
    int j_lo = 0, j_hi = n - 1;
    while (j_lo < n && data[j_lo] == 0.0) ++j_lo;
    while (j_hi >= 0 && data[j_hi] == 0.0) --j_hi;
    Field out(data.grid);
    for (int i = 0; i < n; ++i) {
      const double x = data.grid.x(i);
      double acc = 0.0;
      for (int j = j_lo; j <= j_hi; ++j) acc += (*this)(x, t, data.grid.x(j)) * data[j];
      acc *= dx;
      acc += 0.5 * far * (std::erf((L + x) / s) - std::erf((L - x) / s));
      out[i] = acc;
    }
    return out;
  }
};

inline HeatKernel heat_kernel_for(double p_deriv_at_vplus) {
  return HeatKernel(-p_deriv_at_vplus);
}

// ---- kernel norm scaling -----------------------------------------------------

namespace detail {
/// Physicists' Hermite polynomial H_m.
inline double hermite(int m, double xi) {
  double h0 = 1.0, h1 = 2.0 * xi;
  if (m == 0) return h0;
  for (int i = 1; i < m; ++i) {
    const double h2 = 2.0 * xi * h1 - 2.0 * i * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}
}  // namespace detail

/// Lp(R) norm of dx^k dt^j of the whole-line kernel
/// G0(x,t) = (4 pi D t)^{-1/2} e^{-x^2/4Dt}. Since G0 solves the heat
/// equation, dt^j reduces to D^j dx^{2j}, and spatial derivatives are
/// Hermite-weighted Gaussians evaluated by wide quadrature.
inline double whole_line_kernel_norm(double D, int k, int j, double p, double t) {
  if (!(t > 0.0)) throw std::domain_error("kernel norm: t must be positive");
  const int m = k + 2 * j;
  const double root = std::sqrt(4.0 * D * t);
  const double amp = std::pow(D, j) * std::pow(root, -m) / std::sqrt(M_PI * root * root);
  const double xi_max = 12.0;
  const int nq = 24001;
  const double dxi = 2.0 * xi_max / (nq - 1);
  if (std::isinf(p)) {
    double best = 0.0;
    for (int i = 0; i < nq; ++i) {
      const double xi = -xi_max + i * dxi;
      best = std::max(best, std::abs(detail::hermite(m, xi)) * std::exp(-xi * xi));
    }
    return amp * best;
  }
  double acc = 0.0;
  for (int i = 0; i < nq; ++i) {
    const double xi = -xi_max + i * dxi;
    acc += std::pow(std::abs(amp * detail::hermite(m, xi) * std::exp(-xi * xi)), p);
  }
  acc *= dxi * root;  // dx = root * dxi
  return std::pow(acc, 1.0 / p);
}

/// Fit the time exponent of ||dx^k dt^j G(t)||_{Lp} and compare with the
/// predicted -(1/2)(1-1/p) - k/2 - j.
inline DecayFit kernel_norm_scaling(double D, int k, int j, double p,
                                    const std::vector<double>& times,
                                    double tolerance = 0.02) {
  if (k + 2 * j > 4) throw std::invalid_argument("kernel_norm_scaling: derivative order too high");
  TimeSeries series;
  for (double t : times) series.push_back({t, whole_line_kernel_norm(D, k, j, p, t)});
  FitWindow window{series.front().t, series.back().t};
  const double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
  DecayFit fit = fit_exponent(series, window, "kernel(k=" + std::to_string(k) +
                                                  ",j=" + std::to_string(j) + ")");
  fit.expected_exponent = -0.5 * (1.0 - inv_p) - 0.5 * k - j;
  fit.tolerance = tolerance;
  fit.verdict = std::abs(fit.fitted_exponent - fit.expected_exponent) <= tolerance
                    ? Verdict::pass
                    : Verdict::fail;
  return fit;
}

// ---- linearized parabolic residual ---------------------------------------------

/// Residual of V_t + p'(v_plus) V_xx = -V_tt + F1 + F2 + [(p'(v_plus) -
/// p'(vbar)) V_x]_x (with the alpha V_t weight of the unnormalized system);
/// an exact identity for the continuum solution, so the discrete value
/// converges to zero at scheme order.
template <class Model>
inline Field linearized_residual(const PerturbationSeries& series, std::size_t i,
                                 const ProfileBundle& prof, const Model& model,
                                 double v_plus) {
  const auto& s = series.snaps.at(i);
  if (!s.V_t || !s.V_tt)
    throw std::invalid_argument("linearized_residual: V_t, V_tt need neighbor snapshots");
  const double dpp = model.dp(v_plus);
  Field q(s.V.grid);
  for (int j = 0; j < q.size(); ++j) q[j] = (dpp - model.dp(prof.vbar[j])) * s.V_x[j];
  Field q_x = ddx(q);
  Field out(s.V.grid);
  const double alpha = model.alpha();
  for (int j = 0; j < out.size(); ++j)
    out[j] = alpha * (*s.V_t)[j] + dpp * s.V_xx[j] + (*s.V_tt)[j] - s.F1[j] - s.F2[j] - q_x[j];
  return out;
}

}  // namespace diffwave
