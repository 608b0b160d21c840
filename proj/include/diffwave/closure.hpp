#pragma once

// M1 closure algebra and the coefficient laws of the damped p-system
// v_t - u_x = 0,  u_t + p(v)_x = -alpha u + (g(u) f(v))_x.

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace diffwave {

/// Eddington factor chi(u) = (3 + 4u^2) / (5 + 2 sqrt(4 - 3u^2)).
/// Monotone in |u| with chi(0) = 1/3 (diffusion) and chi(1) = 1 (free
/// streaming). The square root is real up to |u| = 2/sqrt(3), but the model
/// is only meaningful for |u| <= 1, which we enforce.
inline double eddington_chi(double u) {
  if (!(std::abs(u) <= 1.0)) throw std::domain_error("eddington_chi: |u| > 1");
  return (3.0 + 4.0 * u * u) / (5.0 + 2.0 * std::sqrt(4.0 - 3.0 * u * u));
}

/// 1D radiative pressure chi(u) * rho. In one dimension u (x) u / |u|^2 = 1,
/// so the tensor of the closure collapses and the u -> 0 singularity is
/// removable.
inline double radiative_pressure_1d(double rho, double u) {
  if (!(rho >= 0.0)) throw std::domain_error("radiative_pressure_1d: rho < 0");
  return eddington_chi(u) * rho;
}

/// Flux factor g(u) = u^2 sqrt(4 - 3u^2) / (2 + sqrt(4 - 3u^2)).
inline double m1_g(double u) {
  if (!(std::abs(u) <= 1.0)) throw std::domain_error("m1_g: |u| > 1");
  const double s = std::sqrt(4.0 - 3.0 * u * u);
  return u * u * s / (2.0 + s);
}

/// dg/du; vanishes at u = 0 together with g.
inline double m1_g_deriv(double u) {
  if (!(std::abs(u) <= 1.0)) throw std::domain_error("m1_g_deriv: |u| > 1");
  const double s = std::sqrt(4.0 - 3.0 * u * u);
  const double sp = -3.0 * u / s;
  return (2.0 * u * s + u * u * sp) / (2.0 + s) -
         u * u * s * sp / ((2.0 + s) * (2.0 + s));
}

inline double m1_f(double v) {
  if (!(v > 0.0)) throw std::domain_error("m1_f: vacuum (v <= 0)");
  return 1.0 / v;
}

inline double m1_p(double v) {
  if (!(v > 0.0)) throw std::domain_error("m1_p: vacuum (v <= 0)");
  return 1.0 / (3.0 * v);
}

/// |chi(u) rho - (rho/3 + 2 rho u^2 / (2 + sqrt(4 - 3u^2)))|.
/// Analytically zero: the Eulerian flux split equals the closure form.
inline double closure_identity_residual(double rho, double u) {
  if (!(rho >= 0.0)) throw std::domain_error("closure_identity_residual: rho < 0");
  const double s = std::sqrt(4.0 - 3.0 * u * u);
  const double split = rho / 3.0 + 2.0 * rho * u * u / (2.0 + s);
  return std::abs(eddington_chi(u) * rho - split);
}

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool contains(double x) const { return x >= lo && x <= hi; }
};

// ---- concrete models (hot path) ---------------------------------------------
//
// The time steppers are templated on a Model type providing inline
// coefficient laws; the type-erased ModelSpec below satisfies the same
// interface for generic/plumbing use.

/// M1 moment closure in Lagrangian coordinates:
/// p(v) = 1/(3v), f(v) = 1/v, g as above, damping alpha (= opacity sigma).
struct M1Model {
  double alpha_ = 1.0;

  static constexpr bool has_gf = true;
  double p(double v) const { return 1.0 / (3.0 * v); }
  double dp(double v) const { return -1.0 / (3.0 * v * v); }
  double g(double u) const {
    const double s = std::sqrt(4.0 - 3.0 * u * u);
    return u * u * s / (2.0 + s);
  }
  double dg(double u) const {
    const double s = std::sqrt(4.0 - 3.0 * u * u);
    const double sp = -3.0 * u / s;
    return (2.0 * u * s + u * u * sp) / (2.0 + s) -
           u * u * s * sp / ((2.0 + s) * (2.0 + s));
  }
  double f(double v) const { return 1.0 / v; }
  double df(double v) const { return -1.0 / (v * v); }
  double alpha() const { return alpha_; }
  Interval admissible_u() const { return {-1.0, 1.0}; }
  std::string name() const { return "m1"; }
};

/// Gamma-law pressure p(v) = v^-gamma with no (g f) flux: the damped
/// compressible Euler p-system.
struct GammaLawModel {
  double gamma_ = 1.4;
  double alpha_ = 1.0;

  static constexpr bool has_gf = false;
  double p(double v) const { return std::pow(v, -gamma_); }
  double dp(double v) const { return -gamma_ * std::pow(v, -gamma_ - 1.0); }
  double g(double) const { return 0.0; }
  double dg(double) const { return 0.0; }
  double f(double) const { return 0.0; }
  double df(double) const { return 0.0; }
  double alpha() const { return alpha_; }
  Interval admissible_u() const { return {}; }
  std::string name() const { return "gamma-law"; }
};

// ---- type-erased model -------------------------------------------------------

using ScalarMap = std::function<double(double)>;

/// Coefficient bundle for the general system. Construct through
/// make_model_spec (or the m1/gamma-law factories) so the structural
/// assumptions p' < 0, g(0) = g'(0) = 0 are checked up front.
struct ModelSpec {
  ScalarMap pressure;
  ScalarMap pressure_deriv;
  double damping = 1.0;
  ScalarMap flux_g;
  ScalarMap flux_g_deriv;
  ScalarMap flux_f;
  ScalarMap flux_f_deriv;  // optional; finite difference of flux_f when absent
  Interval admissible = {};
  std::string label = "custom";
  bool gf_active = true;

  static constexpr bool has_gf = true;  // resolved via gf_active at runtime
  double p(double v) const { return pressure(v); }
  double dp(double v) const { return pressure_deriv(v); }
  double g(double u) const { return gf_active ? flux_g(u) : 0.0; }
  double dg(double u) const { return gf_active ? flux_g_deriv(u) : 0.0; }
  double f(double v) const { return gf_active ? flux_f(v) : 0.0; }
  double df(double v) const {
    if (!gf_active) return 0.0;
    if (flux_f_deriv) return flux_f_deriv(v);
    const double h = 1e-5 * std::max(std::abs(v), 1.0);
    return (flux_f(v + h) - flux_f(v - h)) / (2.0 * h);
  }
  double alpha() const { return damping; }
  Interval admissible_u() const { return admissible; }
  std::string name() const { return label; }
};

namespace detail {
inline void validate_model(const ModelSpec& m) {
  if (!(m.damping > 0.0)) throw std::invalid_argument("model: damping must be positive");
  for (int i = 0; i <= 100; ++i) {
    const double v = 0.1 + (10.0 - 0.1) * i / 100.0;
    if (!(m.pressure_deriv(v) < 0.0))
      throw std::invalid_argument("model: p'(v) must be negative on (0, inf)");
  }
  if (m.gf_active) {
    if (std::abs(m.flux_g(0.0)) > 1e-14)
      throw std::invalid_argument("model: g(0) must vanish");
    if (std::abs(m.flux_g_deriv(0.0)) > 1e-14)
      throw std::invalid_argument("model: g'(0) must vanish");
  }
}
}  // namespace detail

inline ModelSpec make_model_spec(ModelSpec m) {
  detail::validate_model(m);
  return m;
}

inline ModelSpec m1_model_spec(double alpha = 1.0) {
  ModelSpec m;
  m.pressure = [](double v) { return m1_p(v); };
  m.pressure_deriv = [](double v) { return -1.0 / (3.0 * v * v); };
  m.damping = alpha;
  m.flux_g = [](double u) { return m1_g(u); };
  m.flux_g_deriv = [](double u) { return m1_g_deriv(u); };
  m.flux_f = [](double v) { return m1_f(v); };
  m.flux_f_deriv = [](double v) { return -1.0 / (v * v); };
  m.admissible = {-1.0, 1.0};
  m.label = "m1";
  return make_model_spec(std::move(m));
}

/// Generic family p(v) = v^-gamma satisfying p' < 0; the (g f) flux is off.
inline ModelSpec gamma_law_model(double gamma, double alpha = 1.0) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma_law_model: gamma must be positive");
  ModelSpec m;
  m.pressure = [gamma](double v) {
    if (!(v > 0.0)) throw std::domain_error("gamma-law: vacuum (v <= 0)");
    return std::pow(v, -gamma);
  };
  m.pressure_deriv = [gamma](double v) {
    if (!(v > 0.0)) throw std::domain_error("gamma-law: vacuum (v <= 0)");
    return -gamma * std::pow(v, -gamma - 1.0);
  };
  m.damping = alpha;
  m.flux_g = [](double) { return 0.0; };
  m.flux_g_deriv = [](double) { return 0.0; };
  m.flux_f = [](double) { return 0.0; };
  m.flux_f_deriv = [](double) { return 0.0; };
  m.admissible = {};
  m.label = "gamma-law";
  m.gf_active = false;
  return make_model_spec(std::move(m));
}

}  // namespace diffwave
