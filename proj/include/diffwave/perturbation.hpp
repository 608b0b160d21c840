#pragma once

// Perturbation variables around the asymptotic ansatz:
//   V(x,t) = -int_x^inf (v - vbar - vhat) dy,   z = u - ubar - uhat,
// the forcings F1, F2 of the reformulated equation, Sobolev norms, and the
// time-weighted monitor N(t).

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "diffwave/closure.hpp"
#include "diffwave/decay.hpp"
#include "diffwave/grid.hpp"
#include "diffwave/profiles.hpp"

namespace diffwave {

struct PerturbationSnapshot {
  double t = 0.0;
  Field V, z;
  Field V_x, V_xx, V_xxx;
  Field z_x, z_xx;
  Field F1, F2;
  // attached by make_perturbation_series where neighbor snapshots exist
  std::optional<Field> z_t, z_xt, z_tt, V_t, V_tt;
};

namespace detail {
inline BoundaryRule even_flat(double far = 0.0) {
  return BoundaryRule{EndRule::even, 0.0, EndRule::value, far};
}
inline BoundaryRule odd_flat(double far = 0.0) {
  return BoundaryRule{EndRule::odd, 0.0, EndRule::value, far};
}
}  // namespace detail

/// F1 = (1/alpha) p(vbar)_xt - (p(V_x+vbar+vhat) - p(vbar) - p'(vbar) V_x)_x.
template <class Model>
inline Field eval_F1(const Field& V_x, const ProfileBundle& prof, const Model& model) {
  const double alpha = model.alpha();
  const int n = V_x.size();
  // p(vbar)_xt = d/dx (p'(vbar) vbar_t); even across the wall, flat far field.
  Field pt(V_x.grid);
  for (int j = 0; j < n; ++j) pt[j] = model.dp(prof.vbar[j]) * prof.vbar_t[j];
  Field p_xt = ddx(pt, detail::even_flat(0.0));

  Field q(V_x.grid);
  for (int j = 0; j < n; ++j) {
    const double vfull = V_x[j] + prof.vbar[j] + prof.vhat[j];
    if (!(vfull > 0.0)) throw std::domain_error("eval_F1: vacuum in V_x + vbar + vhat");
    q[j] = model.p(vfull) - model.p(prof.vbar[j]) - model.dp(prof.vbar[j]) * V_x[j];
  }
  Field q_x = ddx(q);
  Field out(V_x.grid);
  for (int j = 0; j < n; ++j) out[j] = p_xt[j] / alpha - q_x[j];
  return out;
}

/// F2 = (g(z+ubar+uhat) f(V_x+vbar+vhat))_x, evaluated in the stated direct
/// form. V_t is replaced by z through the first reformulated equation.
template <class Model>
inline Field eval_F2(const Field& V_x, const Field& z, const ProfileBundle& prof,
                     const Model& model) {
  Field gf(V_x.grid);
  for (int j = 0; j < V_x.size(); ++j) {
    const double u = z[j] + prof.ubar[j] + prof.uhat[j];
    const double v = V_x[j] + prof.vbar[j] + prof.vhat[j];
    gf[j] = model.g(u) * model.f(v);
  }
  return ddx(gf);
}

/// Chain-rule expansion of F2 used as a cross-check:
/// g' f (z_x - (1/alpha) p(vbar)_xx + vhat_t) + g f' (V_xx + vbar_x + vhat_x).
template <class Model>
inline Field eval_F2_expanded(const Field& V_x, const Field& V_xx, const Field& z,
                              const Field& z_x, const ProfileBundle& prof,
                              const Model& model) {
  const double alpha = model.alpha();
  const int n = V_x.size();
  Field pbar(V_x.grid);
  for (int j = 0; j < n; ++j) pbar[j] = model.p(prof.vbar[j]);
  Field pbar_x = ddx(pbar, detail::even_flat(model.p(prof.vbar[n - 1])));
  Field pbar_xx = ddx(pbar_x, detail::odd_flat(0.0));
  Field vhat_x = ddx(prof.vhat);

  Field out(V_x.grid);
  for (int j = 0; j < n; ++j) {
    const double u = z[j] + prof.ubar[j] + prof.uhat[j];
    const double v = V_x[j] + prof.vbar[j] + prof.vhat[j];
    const double vhat_t = -alpha * prof.vhat[j];
    out[j] = model.dg(u) * model.f(v) * (z_x[j] - pbar_xx[j] / alpha + vhat_t) +
             model.g(u) * model.df(v) * (V_xx[j] + prof.vbar_x[j] + vhat_x[j]);
  }
  return out;
}

/// Assemble a snapshot from given (V, z) fields: spatial derivatives by
/// repeated second-order differencing, F1/F2 pointwise.
template <class Model>
inline PerturbationSnapshot perturbation_from_Vz(double t, Field V, Field z,
                                                 const ProfileBundle& prof,
                                                 const Model& model) {
  PerturbationSnapshot s;
  s.t = t;
  s.V = std::move(V);
  s.z = std::move(z);
  s.V_x = ddx(s.V);
  s.V_xx = ddx(s.V_x);
  s.V_xxx = ddx(s.V_xx);
  s.z_x = ddx(s.z);
  s.z_xx = ddx(s.z_x);
  s.F1 = eval_F1(s.V_x, prof, model);
  s.F2 = eval_F2(s.V_x, s.z, prof, model);
  return s;
}

/// V by tail quadrature of v - vbar - vhat, z pointwise. Errors out when the
/// residual mass has not decayed at the truncation edge.
template <class Model>
inline PerturbationSnapshot build_perturbation(const StateField& state,
                                               const ProfileBundle& prof, const Model& model,
                                               double tail_rel_tol = 1e-6) {
  Field d = state.v - prof.vbar - prof.vhat;
  if (!tail_negligible(d, tail_rel_tol))
    throw std::runtime_error("build_perturbation: tail tolerance violated at x = L");
  Field V = -1.0 * tail_integrals(d);
  Field z = state.u - prof.ubar - prof.uhat;
  return perturbation_from_Vz(prof.t, std::move(V), std::move(z), prof, model);
}

/// Excess-mass diagnostic: integral of (v - vbar - vhat) over the grid.
/// Zero at t = 0 by the delta0 matching and conserved by the boundary
/// conditions thereafter.
inline double zero_mass_check(const StateField& state, const ProfileBundle& prof) {
  return integrate(state.v - prof.vbar - prof.vhat);
}

/// ||f||_inf <= sqrt(2) ||f||^(1/2) ||f_x||^(1/2) in discrete norms.
inline bool sobolev_inequality_check(const Field& f) {
  const Norms nf = norms(f);
  const double rhs = std::sqrt(2.0) * std::sqrt(nf.l2 * norm_l2(ddx(f)));
  return nf.linf <= rhs * (1.0 + 1e-9) + 1e-300;
}

// ---- series-level operations ---------------------------------------------------

struct PerturbationSeries {
  std::vector<PerturbationSnapshot> snaps;
};

namespace detail {
/// Three-point nonuniform first/second derivative weights at the middle node.
struct Stencil3 {
  double w0[3];  // first derivative
  double w1[3];  // second derivative
};
inline Stencil3 stencil3(double t0, double t1, double t2) {
  const double h1 = t1 - t0, h2 = t2 - t1;
  Stencil3 s;
  s.w0[0] = -h2 / (h1 * (h1 + h2));
  s.w0[1] = (h2 - h1) / (h1 * h2);
  s.w0[2] = h1 / (h2 * (h1 + h2));
  s.w1[0] = 2.0 / (h1 * (h1 + h2));
  s.w1[1] = -2.0 / (h1 * h2);
  s.w1[2] = 2.0 / (h2 * (h1 + h2));
  return s;
}
inline Field combine3(const Field& a, const Field& b, const Field& c, const double w[3]) {
  Field out(a.grid);
  for (int j = 0; j < a.size(); ++j) out[j] = w[0] * a[j] + w[1] * b[j] + w[2] * c[j];
  return out;
}
}  // namespace detail

/// Attach dt / dt^2 fields at interior snapshot times by centered nonuniform
/// differencing; endpoint snapshots keep no time-derivative fields.
inline PerturbationSeries make_perturbation_series(std::vector<PerturbationSnapshot> snaps) {
  for (std::size_t i = 1; i < snaps.size(); ++i)
    if (!(snaps[i].t > snaps[i - 1].t))
      throw std::invalid_argument("perturbation series: times must increase");
  PerturbationSeries series{std::move(snaps)};
  auto& s = series.snaps;
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    const auto st = detail::stencil3(s[i - 1].t, s[i].t, s[i + 1].t);
    s[i].z_t = detail::combine3(s[i - 1].z, s[i].z, s[i + 1].z, st.w0);
    s[i].z_tt = detail::combine3(s[i - 1].z, s[i].z, s[i + 1].z, st.w1);
    s[i].z_xt = ddx(*s[i].z_t);
    s[i].V_t = detail::combine3(s[i - 1].V, s[i].V, s[i + 1].V, st.w0);
    s[i].V_tt = detail::combine3(s[i - 1].V, s[i].V, s[i + 1].V, st.w1);
  }
  return series;
}

/// Residual of the reformulated momentum equation
///   z_t + (p'(vbar) V_x)_x + alpha z - F1 - F2,
/// an exact identity for the continuum solution.
template <class Model>
inline Field reformulation_residual(const PerturbationSeries& series, std::size_t i,
                                    const ProfileBundle& prof, const Model& model) {
  const auto& s = series.snaps.at(i);
  if (!s.z_t) throw std::invalid_argument("reformulation_residual: z_t needs neighbors");
  Field pv(s.V.grid);
  for (int j = 0; j < pv.size(); ++j) pv[j] = model.dp(prof.vbar[j]) * s.V_x[j];
  Field pv_x = ddx(pv);
  Field out(s.V.grid);
  const double alpha = model.alpha();
  for (int j = 0; j < out.size(); ++j)
    out[j] = (*s.z_t)[j] + pv_x[j] + alpha * s.z[j] - s.F1[j] - s.F2[j];
  return out;
}

struct NormSeries {
  std::map<std::string, TimeSeries> by_name;

  const TimeSeries& at(const std::string& name) const {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw std::out_of_range("norm series: no series '" + name + "'");
    return it->second;
  }
};

inline std::string norm_name(NormKind norm, const std::string& q, int k, int j) {
  std::string name = to_string(norm) + "(";
  for (int a = 0; a < j; ++a) name += "dt ";
  for (int a = 0; a < k; ++a) name += "dx ";
  return name + q + ")";
}

/// All theorem-referenced L2 norms per time plus the running-sup monitor
/// N(t) with its (1+t)^k, (1+t)^{k+2}, (1+t)^{k+4} weights.
inline NormSeries norm_series(const PerturbationSeries& series) {
  if (series.snaps.size() < 3)
    throw std::invalid_argument("norm_series: need at least 3 snapshots");
  NormSeries out;
  auto push = [&](const std::string& name, double t, double value) {
    out.by_name[name].push_back({t, value});
  };
  double running_sup = 0.0;
  for (const auto& s : series.snaps) {
    const double t = s.t;
    const double nV = norm_l2(s.V), nVx = norm_l2(s.V_x), nVxx = norm_l2(s.V_xx),
                 nVxxx = norm_l2(s.V_xxx);
    const double nz = norm_l2(s.z), nzx = norm_l2(s.z_x), nzxx = norm_l2(s.z_xx);
    push(norm_name(NormKind::l2, "V", 0, 0), t, nV);
    push(norm_name(NormKind::l2, "V", 1, 0), t, nVx);
    push(norm_name(NormKind::l2, "V", 2, 0), t, nVxx);
    push(norm_name(NormKind::l2, "V", 3, 0), t, nVxxx);
    push(norm_name(NormKind::l2, "z", 0, 0), t, nz);
    push(norm_name(NormKind::l2, "z", 1, 0), t, nzx);
    push(norm_name(NormKind::l2, "z", 2, 0), t, nzxx);
    if (s.z_t) {
      const double nzt = norm_l2(*s.z_t), nzxt = norm_l2(*s.z_xt), nztt = norm_l2(*s.z_tt);
      push(norm_name(NormKind::l2, "z", 0, 1), t, nzt);
      push(norm_name(NormKind::l2, "z", 1, 1), t, nzxt);
      push(norm_name(NormKind::l2, "z", 0, 2), t, nztt);
      const double w = 1.0 + t;
      double sum = 0.0;
      sum += nV * nV;
      sum += w * nVx * nVx;
      sum += w * w * nVxx * nVxx;
      sum += w * w * w * nVxxx * nVxxx;
      sum += w * w * (nz * nz);
      sum += w * w * w * (nzx * nzx);
      sum += w * w * w * w * (nzxx * nzxx);
      sum += w * w * w * w * (nzt * nzt);
      sum += w * w * w * w * w * (nzxt * nzxt);
      running_sup = std::max(running_sup, sum);
      push("N(t)", t, running_sup);
    }
  }
  return out;
}

}  // namespace diffwave
