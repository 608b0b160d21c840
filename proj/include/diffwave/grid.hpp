#pragma once

// Truncated half-line discretization: cell-centered uniform grid on [0, L],
// discrete fields, second-order derivatives, quadrature and Lebesgue norms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace diffwave {

/// Uniform cell-centered grid on [0, L]: x_j = (j + 1/2) dx, j = 0..N-1.
struct HalfLineGrid {
  double length = 0.0;
  int cells = 0;
  double dx = 0.0;

  static HalfLineGrid make(double length, int cells) {
    if (!(length > 0.0)) throw std::invalid_argument("grid: length must be positive");
    if (cells < 8) throw std::invalid_argument("grid: need at least 8 cells");
    return HalfLineGrid{length, cells, length / cells};
  }

  double x(int j) const { return (j + 0.5) * dx; }
  bool operator==(const HalfLineGrid& o) const {
    return length == o.length && cells == o.cells;
  }
};

/// One scalar value per cell.
struct Field {
  HalfLineGrid grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(const HalfLineGrid& g, double fill = 0.0)
      : grid(g), values(static_cast<std::size_t>(g.cells), fill) {}

  static Field sample(const HalfLineGrid& g, const std::function<double(double)>& f) {
    Field out(g);
    for (int j = 0; j < g.cells; ++j) out.values[j] = f(g.x(j));
    return out;
  }

  int size() const { return grid.cells; }
  double& operator[](int j) { return values[j]; }
  double operator[](int j) const { return values[j]; }

  bool all_finite() const {
    for (double v : values)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline void require_same_grid(const Field& a, const Field& b) {
  if (!(a.grid == b.grid)) throw std::invalid_argument("fields live on different grids");
}

// ---- pointwise algebra ----------------------------------------------------

inline Field operator+(const Field& a, const Field& b) {
  require_same_grid(a, b);
  Field out = a;
  for (int j = 0; j < a.size(); ++j) out[j] += b[j];
  return out;
}

inline Field operator-(const Field& a, const Field& b) {
  require_same_grid(a, b);
  Field out = a;
  for (int j = 0; j < a.size(); ++j) out[j] -= b[j];
  return out;
}

inline Field operator*(double c, const Field& a) {
  Field out = a;
  for (double& v : out.values) v *= c;
  return out;
}

inline Field pointwise(const Field& a, const std::function<double(double)>& f) {
  Field out = a;
  for (double& v : out.values) v = f(v);
  return out;
}

// ---- derivatives -----------------------------------------------------------

/// Ghost-cell rule for one end of the grid.
///   one_sided : no ghost, second-order biased stencil at the wall
///   even      : mirror reflection f(-x) = f(x)
///   odd       : antisymmetric reflection f(-x) = -f(x)
///   value     : constant Dirichlet extension
enum class EndRule { one_sided, even, odd, value };

struct BoundaryRule {
  EndRule left = EndRule::one_sided;
  double left_value = 0.0;
  EndRule right = EndRule::one_sided;
  double right_value = 0.0;
};

namespace detail {
inline double ghost_left(const Field& f, const BoundaryRule& r) {
  switch (r.left) {
    case EndRule::even: return f[0];
    case EndRule::odd: return -f[0];
    case EndRule::value: return r.left_value;
    default: return 0.0;
  }
}
inline double ghost_right(const Field& f, const BoundaryRule& r) {
  const int n = f.size();
  switch (r.right) {
    case EndRule::even: return f[n - 1];
    case EndRule::odd: return -f[n - 1];
    case EndRule::value: return r.right_value;
    default: return 0.0;
  }
}
}  // namespace detail

/// Second-order first derivative: central in the interior, one-sided or
/// ghost-based stencils at the two ends.
inline Field ddx(const Field& f, const BoundaryRule& rule = {}) {
  const int n = f.size();
  if (n < 4) throw std::invalid_argument("ddx: need at least 4 cells");
  const double dx = f.grid.dx;
  Field out(f.grid);
  for (int j = 1; j < n - 1; ++j) out[j] = (f[j + 1] - f[j - 1]) / (2.0 * dx);
  // one-sided stencils grouped as differences so constants map to exact zero
  if (rule.left == EndRule::one_sided)
    out[0] = (3.0 * (f[1] - f[0]) - (f[2] - f[1])) / (2.0 * dx);
  else
    out[0] = (f[1] - detail::ghost_left(f, rule)) / (2.0 * dx);
  if (rule.right == EndRule::one_sided)
    out[n - 1] = (3.0 * (f[n - 1] - f[n - 2]) - (f[n - 2] - f[n - 3])) / (2.0 * dx);
  else
    out[n - 1] = (detail::ghost_right(f, rule) - f[n - 2]) / (2.0 * dx);
  return out;
}

// ---- quadrature ------------------------------------------------------------

/// Composite midpoint rule over [0, L].
inline double integrate(const Field& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s * f.grid.dx;
}

/// Tail integral from x to L under the piecewise-constant (cell average)
/// interpretation; values beyond L are assumed zero.
inline double integrate_tail(const Field& f, double from_x) {
  const double dx = f.grid.dx;
  const int n = f.size();
  if (from_x >= f.grid.length) return 0.0;
  if (from_x < 0.0) from_x = 0.0;
  int jc = static_cast<int>(from_x / dx);
  if (jc >= n) jc = n - 1;
  double s = f[jc] * ((jc + 1) * dx - from_x);
  for (int j = jc + 1; j < n; ++j) s += f[j] * dx;
  return s;
}

/// Tail integrals evaluated at every cell center in one sweep; entry j equals
/// integrate_tail(f, x_j).
inline Field tail_integrals(const Field& f) {
  const int n = f.size();
  const double dx = f.grid.dx;
  Field out(f.grid);
  double run = 0.0;
  for (int j = n - 1; j >= 0; --j) {
    out[j] = run + 0.5 * dx * f[j];
    run += dx * f[j];
  }
  return out;
}

/// Cumulative integral from 0 to each cell center; entry j approximates
/// the integral of f over [0, x_j].
inline Field cumulative_integrals(const Field& f) {
  const int n = f.size();
  const double dx = f.grid.dx;
  Field out(f.grid);
  double run = 0.0;  // integral over full cells [0, j*dx)
  for (int j = 0; j < n; ++j) {
    out[j] = run + 0.5 * dx * f[j];
    run += dx * f[j];
  }
  return out;
}

// ---- norms -----------------------------------------------------------------

struct Norms {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
};

inline Norms norms(const Field& f) {
  const double dx = f.grid.dx;
  double s1 = 0.0, s2 = 0.0, sm = 0.0;
  for (double v : f.values) {
    const double a = std::abs(v);
    s1 += a;
    s2 += v * v;
    sm = std::max(sm, a);
  }
  return Norms{s1 * dx, std::sqrt(s2 * dx), sm};
}

inline double norm_l2(const Field& f) { return norms(f).l2; }
inline double norm_l1(const Field& f) { return norms(f).l1; }
inline double norm_linf(const Field& f) { return norms(f).linf; }

/// True when the rightmost cell value is negligible relative to the field
/// maximum (default 1e-8 relative), so tail quadrature may treat f as zero
/// beyond L.
inline bool tail_negligible(const Field& f, double rel_tol = 1e-8) {
  const double m = norm_linf(f);
  return std::abs(f[f.size() - 1]) <= rel_tol * m;
}

// ---- state -----------------------------------------------------------------

/// Lagrangian state (specific volume, velocity / normalized flux).
struct StateField {
  Field v;
  Field u;

  StateField() = default;
  StateField(Field v_, Field u_) : v(std::move(v_)), u(std::move(u_)) {
    require_same_grid(v, u);
  }
  const HalfLineGrid& grid() const { return v.grid; }
};

}  // namespace diffwave
