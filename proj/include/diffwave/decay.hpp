#pragma once

// Power-law decay fits in log-log coordinates and the expected-exponent
// tables used to judge them.

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "diffwave/grid.hpp"

namespace diffwave {

struct TimeSample {
  double t;
  double value;
};
using TimeSeries = std::vector<TimeSample>;

struct FitWindow {
  double t_min = 0.0;
  double t_max = 0.0;
};

/// Default window: the last `decades` decades of the run.
inline FitWindow default_window(double t_end, double decades = 1.5) {
  return {t_end * std::pow(10.0, -decades), t_end};
}

enum class Verdict { pass, fail, degenerate };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    default: return "degenerate";
  }
}

struct DecayFit {
  std::string quantity;
  FitWindow window;
  double fitted_exponent = 0.0;
  double log_amplitude = 0.0;
  double r_squared = 0.0;
  double expected_exponent = 0.0;
  double tolerance = 0.0;
  Verdict verdict = Verdict::degenerate;
  int samples = 0;
  // Ungated quantities (higher derivatives, noise-limited at desk scale) are
  // reported with an honest verdict but do not bind an overall pass.
  bool gated = true;

  bool passed() const { return verdict != Verdict::fail; }
};

/// Ordinary least squares of log(value) against log(1+t) over the window.
/// The regression abscissa is log(1+t), matching the (1+t) weights of the
/// rate statements being tested.
inline DecayFit fit_exponent(const TimeSeries& series, const FitWindow& window,
                             const std::string& quantity = "") {
  std::vector<double> xs, ys;
  double prev = -std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    if (s.t < prev) throw std::invalid_argument("fit_exponent: times must increase");
    prev = s.t;
    if (s.t < window.t_min || s.t > window.t_max) continue;
    if (!(s.value > 0.0))
      throw std::invalid_argument("fit_exponent: nonpositive value inside window");
    xs.push_back(std::log1p(s.t));
    ys.push_back(std::log(s.value));
  }
  const int n = static_cast<int>(xs.size());
  if (n < 8) throw std::invalid_argument("fit_exponent: fewer than 8 samples in window");

  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_exponent: degenerate abscissa");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e = ys[i] - (intercept + slope * xs[i]);
    ss_res += e * e;
  }
  DecayFit fit;
  fit.quantity = quantity;
  fit.window = window;
  fit.fitted_exponent = slope;
  fit.log_amplitude = intercept;
  // a series indistinguishable from its mean (rounding-level variance) is a
  // perfect fit by the zero-slope line
  const double syy_floor = 1e-20 * n * (my * my + 1.0);
  fit.r_squared = syy > syy_floor ? 1.0 - ss_res / syy : 1.0;
  fit.samples = n;
  return fit;
}

// ---- theorem tables ----------------------------------------------------------

enum class NormKind { l1, l2, linf };

inline std::string to_string(NormKind k) {
  switch (k) {
    case NormKind::l1: return "L1";
    case NormKind::l2: return "L2";
    default: return "Linf";
  }
}

/// One row of an expected-rate table. Power-law entries carry the exponent of
/// (1+t); exponential entries (the correction pair) carry the e^{-rate t}
/// rate instead.
struct TableEntry {
  std::string quantity;  // "V", "z", "vbar", "vhat", "uhat"
  int k = 0;             // spatial derivative order
  int j = 0;             // time derivative order
  NormKind norm = NormKind::l2;
  double exponent = 0.0;
  bool exponential = false;
  double exp_rate = 0.0;
  bool gated = false;  // binds the overall verdict at desk scale
};

struct TheoremTable {
  std::string id;
  std::vector<TableEntry> entries;

  const TableEntry* find(const std::string& q, int k, int j, NormKind norm) const {
    for (const auto& e : entries)
      if (e.quantity == q && e.k == k && e.j == j && e.norm == norm) return &e;
    return nullptr;
  }
};

/// Expected decay exponents as printed in the rate statements.
///   thm1:           ||dx^k V|| ~ -k/2 (1<=k<=3), ||dx^k dt^j z|| ~ -k/2-j-1,
///                   ||dt^2 z|| ~ -5/2
///   thm2_improved:  ||dx^k V|| ~ -k/2-1/4 (0<=k<=3), z ~ -k/2-j-5/4,
///                   ||dt^2 z|| ~ -11/4
///   thm2_faster:    ||dx^k V|| ~ -k/2-3/4, z ~ -k/2-j-7/4, ||dt^2 z|| ~ -13/4
///   lemma2.1:       dbar = vbar - v_plus: L2 ~ -(4j+2k+1)/4, L1 ~ -(2j+k)/2,
///                   Linf ~ -(2j+k+1)/2
///   lemma2.2:       vhat and dx uhat decay like e^{-alpha t} in every Lp
inline TheoremTable theorem_table(const std::string& id, double alpha = 1.0) {
  TheoremTable table;
  table.id = id;
  // desk-scale gates: low derivative orders; higher ones are reported only
  auto add_V = [&](int k, double e) {
    table.entries.push_back({"V", k, 0, NormKind::l2, e, false, 0.0, k <= 1});
  };
  auto add_z = [&](int k, int j, double e) {
    table.entries.push_back({"z", k, j, NormKind::l2, e, false, 0.0, k == 0 && j == 0});
  };
  if (id == "thm1") {
    for (int k = 1; k <= 3; ++k) add_V(k, -0.5 * k);
    for (int j = 0; j <= 1; ++j)
      for (int k = 0; k + j <= 2; ++k) add_z(k, j, -0.5 * k - j - 1.0);
    add_z(0, 2, -2.5);
  } else if (id == "thm2_improved") {
    for (int k = 0; k <= 3; ++k) add_V(k, -0.5 * k - 0.25);
    for (int j = 0; j <= 1; ++j)
      for (int k = 0; k + j <= 2; ++k) add_z(k, j, -0.5 * k - j - 1.25);
    add_z(0, 2, -2.75);
  } else if (id == "thm2_faster") {
    for (int k = 0; k <= 3; ++k) add_V(k, -0.5 * k - 0.75);
    for (int j = 0; j <= 1; ++j)
      for (int k = 0; k + j <= 2; ++k) add_z(k, j, -0.5 * k - j - 1.75);
    add_z(0, 2, -3.25);
  } else if (id == "lemma2.1") {
    for (int j = 0; j <= 1; ++j)
      for (int k = 0; k <= 2; ++k) {
        const bool g2 = j == 0 && k <= 1;
        const bool gi = j == 0 && k == 0;
        table.entries.push_back(
            {"vbar", k, j, NormKind::l2, -(4.0 * j + 2.0 * k + 1.0) / 4.0, false, 0.0, g2});
        table.entries.push_back(
            {"vbar", k, j, NormKind::l1, -(2.0 * j + k) / 2.0, false, 0.0, false});
        table.entries.push_back(
            {"vbar", k, j, NormKind::linf, -(2.0 * j + k + 1.0) / 2.0, false, 0.0, gi});
      }
  } else if (id == "lemma2.2") {
    for (NormKind n : {NormKind::l1, NormKind::l2, NormKind::linf}) {
      table.entries.push_back({"vhat", 0, 0, n, 0.0, true, alpha, true});
      table.entries.push_back({"uhat", 1, 0, n, 0.0, true, alpha, true});
    }
  } else {
    throw std::invalid_argument("theorem_table: unknown id '" + id + "'");
  }
  return table;
}

// ---- hypothesis checks --------------------------------------------------------

/// Numerical proxies for the integrability hypotheses: true integrability is
/// not decidable on a truncated grid, so we ask that |f| <= C x^{-1-eps}
/// beyond a calibration band that starts past the bulk of the field's mass.
struct IntegrabilityProxy {
  double eps = 0.5;
  double c_slack = 1.15;
  double mass_fraction = 0.999;  // bulk radius used to anchor the band
};

/// Smallest x containing the given fraction of the discrete L1 mass.
inline double mass_radius(const Field& f, double fraction) {
  double total = 0.0;
  for (double v : f.values) total += std::abs(v);
  if (total == 0.0) return 0.0;
  double run = 0.0;
  for (int j = 0; j < f.size(); ++j) {
    run += std::abs(f[j]);
    if (run >= fraction * total) return f.grid.x(j);
  }
  return f.grid.length;
}

inline bool l1_tail_proxy(const Field& f, const IntegrabilityProxy& proxy = {}) {
  const double L = f.grid.length;
  const double r = mass_radius(f, proxy.mass_fraction);
  if (r == 0.0) return true;  // zero field
  // When the bulk radius sits inside the grid, calibrate just past it; a
  // radius pinned at the truncation edge means the field never decayed, and
  // the band moves to mid-grid where the weighted growth is visible.
  const double x_star = r <= 0.8 * L ? std::max(0.1 * L, 1.05 * r) : 0.5 * L;
  const double band_hi = x_star + 0.125 * (L - x_star);
  double c = 0.0;
  for (int j = 0; j < f.size(); ++j) {
    const double x = f.grid.x(j);
    if (x >= x_star && x <= band_hi)
      c = std::max(c, std::abs(f[j]) * std::pow(x, 1.0 + proxy.eps));
  }
  // absolute floor so fields that vanish beyond the band are not tripped up
  // by rounding noise
  const double floor = 1e-10 * norm_linf(f) * std::pow(x_star, 1.0 + proxy.eps);
  const double bound = std::max(proxy.c_slack * c, floor);
  for (int j = 0; j < f.size(); ++j) {
    const double x = f.grid.x(j);
    if (x > band_hi && std::abs(f[j]) * std::pow(x, 1.0 + proxy.eps) > bound) return false;
  }
  return true;
}

struct HypothesisFlags {
  bool u_plus_zero = false;
  bool l1_data = false;        // V0 + z0/alpha in L1 (tail proxy)
  bool zero_mass_w = false;    // integral of V0 + z0/alpha vanishes
  double w_mass = 0.0;
  bool w0_l1 = false;          // W0 in L1 (tail proxy)

  bool applicable(const std::string& theorem_id) const {
    if (theorem_id == "thm1") return true;
    if (theorem_id == "thm2_improved") return l1_data;
    if (theorem_id == "thm2_faster") return u_plus_zero && l1_data && zero_mass_w && w0_l1;
    return true;
  }
};

/// Evaluate the data hypotheses of the improved/faster rate statements on the
/// discrete initial perturbation.
inline HypothesisFlags hypothesis_check(const Field& V0, const Field& z0, double u_plus,
                                        double alpha, double zero_mass_tol = 1e-8,
                                        const IntegrabilityProxy& proxy = {}) {
  require_same_grid(V0, z0);
  HypothesisFlags flags;
  flags.u_plus_zero = (u_plus == 0.0);
  Field q = V0 + (1.0 / alpha) * z0;
  flags.l1_data = l1_tail_proxy(q, proxy);
  flags.w_mass = integrate(q);
  flags.zero_mass_w = std::abs(flags.w_mass) <= zero_mass_tol;
  Field w0 = cumulative_integrals(q);
  flags.w0_l1 = l1_tail_proxy(w0, proxy);
  return flags;
}

// ---- reports -------------------------------------------------------------------

/// One fit per table entry; pass iff |fitted - expected| <= tolerance.
/// Series with nonpositive values (e.g. an equilibrium run) yield degenerate
/// rows instead of errors.
inline std::vector<DecayFit> decay_report(
    const std::map<std::string, TimeSeries>& series_by_name, const TheoremTable& table,
    const FitWindow& window, double tolerance,
    double transient_skip_fraction = 0.1) {
  std::vector<DecayFit> fits;
  for (const auto& entry : table.entries) {
    std::string name = to_string(entry.norm) + "(";
    for (int j = 0; j < entry.j; ++j) name += "dt ";
    for (int k = 0; k < entry.k; ++k) name += "dx ";
    name += entry.quantity + ")";
    auto it = series_by_name.find(name);
    if (it == series_by_name.end()) continue;

    // Discard the first fraction of in-window samples to damp transients.
    TimeSeries trimmed;
    for (const auto& s : it->second)
      if (s.t >= window.t_min && s.t <= window.t_max) trimmed.push_back(s);
    const int skip = static_cast<int>(trimmed.size() * transient_skip_fraction);
    if (skip > 0) trimmed.erase(trimmed.begin(), trimmed.begin() + skip);

    DecayFit fit;
    fit.quantity = name;
    fit.window = window;
    fit.expected_exponent = entry.exponent;
    fit.tolerance = tolerance;
    try {
      fit = fit_exponent(trimmed, {0.0, std::numeric_limits<double>::infinity()}, name);
      fit.window = window;
      fit.expected_exponent = entry.exponent;
      fit.tolerance = tolerance;
      fit.verdict = std::abs(fit.fitted_exponent - fit.expected_exponent) <= tolerance
                        ? Verdict::pass
                        : Verdict::fail;
    } catch (const std::invalid_argument&) {
      fit.verdict = Verdict::degenerate;
    }
    fit.gated = entry.gated;
    fits.push_back(fit);
  }
  return fits;
}

}  // namespace diffwave
