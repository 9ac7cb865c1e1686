#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "rayleigh/errors.hpp"
#include "rayleigh/ode.hpp"
#include "rayleigh/path.hpp"
#include "rayleigh/profile.hpp"

namespace rayleigh {

struct SpectralParams {
  double alpha = 1.0;
  cplx c{0.0, 0.0};
  cplx lambda() const { return cplx(0, -1) * alpha * c; }
};

enum class Normalization { DecayingUnitTail, WronskianPartner, Local, Raw };

inline std::string to_string(Normalization n) {
  switch (n) {
    case Normalization::DecayingUnitTail: return "decaying-unit-tail";
    case Normalization::WronskianPartner: return "wronskian-partner";
    case Normalization::Local: return "local";
    case Normalization::Raw: return "raw";
  }
  return "unknown";
}

struct ModeSolution {
  SpectralParams params;
  std::vector<double> grid;
  std::vector<cplx> psi;
  std::vector<cplx> dpsi;
  Normalization normalization = Normalization::Raw;
};

struct ModeBasis {
  ModeSolution psi_minus;
  ModeSolution psi_plus;
  cplx wronskian{1.0, 0.0};
  double anchor = 0.0;  // height where psi_plus vanishes
};

struct SolverOptions {
  double rtol = 1e-11;
  double tol_extr = 1e-6;        // excluded radius around real extremal velocities
  double real_axis_eps = 1e-3;   // base height of the Im c ladder used for real c
  double anchor = -1.0;          // psi_plus anchor; negative selects the default
  std::size_t grid_nodes = 2000;
  std::size_t grid_cap = 100000;
  // Analytic profiles with Im c below this threshold are integrated along a
  // complex y-path that passes each critical layer on the side selected by
  // the limit Im c -> 0+; the ladder above is then only used for tabulated data.
  double path_im_threshold = 1e-2;
  double detour_radius = 0.2;
  double touch = 1e-8;
};

namespace detail {

// Heights where U crosses the real velocity v, by scan plus bracketing refinement.
inline std::vector<double> crossings(const ShearProfile& p, double v, double y_hi) {
  std::vector<double> out;
  const int n = 4000;
  double ya = 0.0, fa = p.U(0.0) - v;
  for (int i = 1; i <= n; ++i) {
    double yb = y_hi * i / n;
    double fb = p.U(yb) - v;
    if (fa == 0.0) {
      out.push_back(ya);
    } else if (fa * fb < 0) {
      std::function<double(double)> f = [&](double y) { return p.U(y) - v; };
      out.push_back(brent_root(f, ya, yb, 1e-15));
    }
    ya = yb;
    fa = fb;
  }
  return out;
}

inline double far_field_start(const ShearProfile& p, cplx c) {
  if (p.is_window()) return p.y_max();
  double y = p.y_max();
  if (std::abs(c - p.u_plus()) < 1e-3) y += 10.0 / p.tail_rate();
  return y;
}

// First-order tail data for the decaying solution at y = Y: psi = e^{-a y}(1 + d),
// where d solves d'' - 2 a d' = q with q ~ q(Y) e^{-b (y - Y)}.
inline CState<2> tail_data(const ShearProfile& p, double alpha, cplx c, double Y) {
  auto s = p.eval(Y);
  cplx denom = s.u - c;
  double e = std::exp(-alpha * Y);
  if (p.is_window()) return {cplx(e), cplx(-alpha * e)};
  if (std::abs(denom) < 1e-12) throw TailError("c coincides with the far-field velocity U+");
  cplx q = s.u2 / denom;
  if (std::abs(q) > 1e-6 * std::max(alpha * alpha, 1e-3))
    throw TailError("far-field coefficient U''/(U - c) is not small at y_max; c too close to U+");
  double b = p.tail_rate();
  cplx d = q / (b * (b + 2 * alpha));
  return {e * (1.0 + d), e * (-alpha * (1.0 + d) - b * d)};
}

inline void check_extremal(const ShearProfile& p, cplx c, double tol_extr) {
  if (c.imag() != 0.0) return;
  for (auto& l : p.extremal_layers())
    if (std::abs(c.real() - l.c_extr) < tol_extr)
      throw ExtremalVelocityError("real c at an extremal velocity: the dispersion relation does not extend there");
}

// Homogeneous Rayleigh system psi'' = (alpha^2 + U''/(U-c)) psi at complex y.
struct HomogeneousRhs {
  const ShearProfile* p;
  double a2;
  cplx c;
  void operator()(const CState<2>& s, CState<2>& d, cplx y) const {
    auto e = p->eval(y);
    d[0] = s[1];
    d[1] = (a2 + e.u2 / (e.u - c)) * s[0];
  }
};

inline bool needs_ladder(const ShearProfile& p, cplx c) { return c.imag() == 0.0 && !p.analytic(); }

// Integration path for a given c: detours around the real critical layers of
// Re c when the profile can be continued off the real axis.
inline PathIntegrator make_path(const ShearProfile& p, cplx c, const SolverOptions& opt) {
  std::vector<Detour> det;
  if (p.analytic() && c.imag() < opt.path_im_threshold) {
    double y_hi = far_field_start(p, c);
    auto yc = crossings(p, c.real(), y_hi);
    for (std::size_t i = 0; i < yc.size(); ++i) {
      double r = opt.detour_radius;
      if (i > 0) r = std::min(r, 0.45 * (yc[i] - yc[i - 1]));
      if (i + 1 < yc.size()) r = std::min(r, 0.45 * (yc[i + 1] - yc[i]));
      if (yc[i] > 0) r = std::min(r, 0.9 * yc[i]);
      else r = std::min(r, 0.45 * (yc.size() > 1 ? yc[1] : opt.detour_radius / 0.45));
      double u1 = p.U1(yc[i]);
      if (u1 == 0.0) continue;
      det.push_back({yc[i], r, u1 > 0 ? -1.0 : 1.0});
    }
  }
  return PathIntegrator(det, opt.rtol, opt.touch);
}

// Values on `grid` of the solution started from data x0 at y0; integrates in
// both directions when y0 is interior to the grid.
template <std::size_t N, class Rhs>
void shoot_n(const PathIntegrator& path, const Rhs& rhs, double y0, CState<N> x0, const std::vector<double>& grid,
             std::vector<CState<N>>& out) {
  out.assign(grid.size(), CState<N>{});
  std::vector<double> up, down;
  std::vector<std::size_t> iu, id;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid[i] >= y0) {
      up.push_back(grid[i]);
      iu.push_back(i);
    }
  for (std::size_t i = grid.size(); i-- > 0;)
    if (grid[i] < y0) {
      down.push_back(grid[i]);
      id.push_back(i);
    }
  path.run<N>(rhs, x0, y0, up, [&](std::size_t k, const CState<N>& s) { out[iu[k]] = s; });
  path.run<N>(rhs, x0, y0, down, [&](std::size_t k, const CState<N>& s) { out[id[k]] = s; });
}

inline void shoot(const ShearProfile& p, double alpha, cplx c, double y0, CState<2> x0,
                  const std::vector<double>& grid, std::vector<cplx>& psi, std::vector<cplx>& dpsi,
                  const SolverOptions& opt) {
  HomogeneousRhs rhs{&p, alpha * alpha, c};
  std::vector<CState<2>> out;
  shoot_n<2>(make_path(p, c, opt), rhs, y0, x0, grid, out);
  psi.resize(grid.size());
  dpsi.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    psi[i] = out[i][0];
    dpsi[i] = out[i][1];
  }
}

// Limit Im c -> 0+ from the ladder eps, eps/2, eps/4 assuming
// f(eps) = L + a eps + b eps log(eps), which is the structure of Rayleigh
// solutions near a simple critical layer.
inline cplx ladder_limit(const std::array<cplx, 3>& f, double eps) {
  double e[3] = {eps, eps / 2, eps / 4};
  // Solve the 3x3 system by Cramer's rule on [1, e, e log e].
  double m[3][3];
  for (int i = 0; i < 3; ++i) {
    m[i][0] = 1.0;
    m[i][1] = e[i];
    m[i][2] = e[i] * std::log(e[i]);
  }
  auto det3 = [](double a[3][3]) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  };
  double det = det3(m);
  // Coefficient of each f_i in L is the cofactor of the first column.
  double w[3];
  for (int i = 0; i < 3; ++i) {
    double mm[3][3];
    for (int r = 0; r < 3; ++r)
      for (int k = 0; k < 3; ++k) mm[r][k] = m[r][k];
    for (int r = 0; r < 3; ++r) mm[r][0] = (r == i) ? 1.0 : 0.0;
    w[i] = det3(mm) / det;
  }
  return w[0] * f[0] + w[1] * f[1] + w[2] * f[2];
}

}  // namespace detail

// Node density grows like (dist(y, y_c)^2 + |Im c|)^{-1/2} around every
// critical layer of Re c, on top of a uniform background.
inline std::vector<double> graded_grid(const ShearProfile& p, cplx c, std::size_t n, double y_hi = -1.0,
                                       std::size_t cap = 100000) {
  if (y_hi <= 0) y_hi = p.y_max();
  n = std::clamp<std::size_t>(n, 16, cap);
  std::vector<double> yc = detail::crossings(p, c.real(), y_hi);
  const std::size_t m = 20 * n;
  std::vector<double> cum(m + 1, 0.0);
  double floor2 = std::abs(c.imag()) + 1e-6;
  auto density = [&](double y) {
    double d = 1.0 / y_hi;
    for (double z : yc) d += 0.05 / std::sqrt((y - z) * (y - z) + floor2);
    return d;
  };
  double h = y_hi / m;
  for (std::size_t i = 1; i <= m; ++i) cum[i] = cum[i - 1] + 0.5 * h * (density((i - 1) * h) + density(i * h));
  std::vector<double> g(n);
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double target = cum[m] * double(i) / double(n - 1);
    while (j < m && cum[j + 1] < target) ++j;
    double t = (cum[j + 1] > cum[j]) ? (target - cum[j]) / (cum[j + 1] - cum[j]) : 0.0;
    g[i] = std::min(y_hi, (j + std::clamp(t, 0.0, 1.0)) * h);
  }
  g.front() = 0.0;
  g.back() = y_hi;
  for (std::size_t i = 1; i < n; ++i)
    if (g[i] <= g[i - 1]) g[i] = std::nextafter(g[i - 1], 1e300);
  return g;
}

inline std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + (hi - lo) * double(i) / double(n - 1);
  return g;
}

// General initial-value solve of the homogeneous Rayleigh equation. Requires Im c > 0
// or a c with no critical layer on the grid.
inline ModeSolution solve_ivp(const ShearProfile& p, SpectralParams sp, double y0, cplx psi0, cplx dpsi0,
                              const std::vector<double>& grid, const SolverOptions& opt = {}) {
  if (!(sp.alpha >= 0)) throw ValidationError("alpha must be non-negative");
  ModeSolution m;
  m.params = sp;
  m.grid = grid;
  m.normalization = Normalization::Raw;
  detail::shoot(p, sp.alpha, sp.c, y0, {psi0, dpsi0}, grid, m.psi, m.dpsi, opt);
  return m;
}

namespace detail {

inline void minus_on_grid(const ShearProfile& p, double alpha, cplx c, const std::vector<double>& grid,
                          std::vector<cplx>& psi, std::vector<cplx>& dpsi, const SolverOptions& opt) {
  double Y = far_field_start(p, c);
  CState<2> x0 = tail_data(p, alpha, c, Y);
  shoot(p, alpha, c, Y, x0, grid, psi, dpsi, opt);
}

template <class F>
void on_ladder(const ShearProfile& p, cplx c, double eps, F&& solve_at, std::vector<cplx>& psi,
               std::vector<cplx>& dpsi) {
  if (!needs_ladder(p, c)) {
    solve_at(c, psi, dpsi);
    return;
  }
  std::array<std::vector<cplx>, 3> ps, ds;
  for (int k = 0; k < 3; ++k) solve_at(cplx(c.real(), eps / double(1 << k)), ps[k], ds[k]);
  psi.resize(ps[0].size());
  dpsi.resize(ps[0].size());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    psi[i] = ladder_limit({ps[0][i], ps[1][i], ps[2][i]}, eps);
    dpsi[i] = ladder_limit({ds[0][i], ds[1][i], ds[2][i]}, eps);
  }
}

}  // namespace detail

// Decaying solution with unit coefficient on e^{-alpha y}.
inline ModeSolution solve_minus(const ShearProfile& p, SpectralParams sp, const std::vector<double>& grid,
                                const SolverOptions& opt = {}) {
  if (!(sp.alpha > 0)) throw ValidationError("alpha must be positive");
  if (sp.c.imag() < 0) throw ValidationError("Im c must be non-negative");
  detail::check_extremal(p, sp.c, opt.tol_extr);
  ModeSolution m;
  m.params = sp;
  m.grid = grid;
  m.normalization = Normalization::DecayingUnitTail;
  detail::on_ladder(
      p, sp.c, opt.real_axis_eps,
      [&](cplx c, std::vector<cplx>& ps, std::vector<cplx>& ds) {
        detail::minus_on_grid(p, sp.alpha, c, grid, ps, ds, opt);
      },
      m.psi, m.dpsi);
  return m;
}

inline ModeSolution solve_minus(const ShearProfile& p, SpectralParams sp, const SolverOptions& opt = {}) {
  return solve_minus(p, sp, graded_grid(p, sp.c, opt.grid_nodes, -1.0, opt.grid_cap), opt);
}

// Default anchor for the Wronskian partner: left of every extremal layer so
// that the partner inherits the localization of the decaying solution.
inline double default_anchor(const ShearProfile& p) {
  if (p.extremal_layers().empty()) return std::min(0.5, 0.5 * p.y_max());
  double ymin = p.extremal_layers().front().y_extr;
  for (auto& l : p.extremal_layers()) ymin = std::min(ymin, l.y_extr);
  return 0.4 * ymin;
}

namespace detail {

inline void plus_on_grid(const ShearProfile& p, double alpha, cplx c, double anchor, const std::vector<double>& grid,
                         std::vector<cplx>& psi, std::vector<cplx>& dpsi, const SolverOptions& opt) {
  std::vector<cplx> a, da;
  minus_on_grid(p, alpha, c, {anchor}, a, da, opt);
  if (std::abs(a[0]) == 0.0) throw QuadratureError("decaying solution vanishes at the anchor");
  // psi_plus(anchor) = 0 and psi_plus' psi_minus - psi_minus' psi_plus = 1.
  shoot(p, alpha, c, anchor, {cplx(0), 1.0 / a[0]}, grid, psi, dpsi, opt);
}

}  // namespace detail

// Partner of psi_minus with unit Wronskian, vanishing at the anchor height.
inline ModeBasis solve_plus(const ShearProfile& p, const ModeSolution& psi_minus, const SolverOptions& opt = {}) {
  const auto& sp = psi_minus.params;
  double anchor = opt.anchor >= 0 ? opt.anchor : default_anchor(p);
  // Move the anchor off an (unlikely) near-zero of psi_minus.
  for (int tries = 0;; ++tries) {
    std::vector<cplx> a, da;
    detail::on_ladder(
        p, sp.c, opt.real_axis_eps,
        [&](cplx c, std::vector<cplx>& ps, std::vector<cplx>& ds) {
          detail::minus_on_grid(p, sp.alpha, c, {anchor}, ps, ds, opt);
        },
        a, da);
    double scale = 0.0;
    for (auto& v : psi_minus.psi) scale = std::max(scale, std::abs(v));
    if (std::abs(a[0]) > 1e-8 * scale) break;
    if (tries > 8) throw QuadratureError("decaying solution vanishes near every candidate anchor");
    anchor *= 1.1;
  }
  ModeBasis b;
  b.psi_minus = psi_minus;
  b.anchor = anchor;
  b.psi_plus.params = sp;
  b.psi_plus.grid = psi_minus.grid;
  b.psi_plus.normalization = Normalization::WronskianPartner;
  detail::on_ladder(
      p, sp.c, opt.real_axis_eps,
      [&](cplx c, std::vector<cplx>& ps, std::vector<cplx>& ds) {
        detail::plus_on_grid(p, sp.alpha, c, anchor, psi_minus.grid, ps, ds, opt);
      },
      b.psi_plus.psi, b.psi_plus.dpsi);
  // Report the Wronskian at the middle node, where neither solution is tiny.
  std::size_t i = psi_minus.grid.size() / 2;
  b.wronskian = b.psi_plus.dpsi[i] * psi_minus.psi[i] - psi_minus.dpsi[i] * b.psi_plus.psi[i];
  return b;
}

inline ModeBasis solve_basis(const ShearProfile& p, SpectralParams sp, const std::vector<double>& grid,
                             const SolverOptions& opt = {}) {
  return solve_plus(p, solve_minus(p, sp, grid, opt), opt);
}

// psi_plus' psi_minus - psi_minus' psi_plus on every node.
inline std::vector<cplx> wronskian_profile(const ModeBasis& b) {
  std::vector<cplx> w(b.psi_minus.grid.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = b.psi_plus.dpsi[i] * b.psi_minus.psi[i] - b.psi_minus.dpsi[i] * b.psi_plus.psi[i];
  return w;
}

// Independent route to the partner: psi_minus(y) * int_{anchor}^y psi_minus^{-2},
// by cumulative Hermite quadrature (exact for cubics) on the grid of psi_minus.
// Only meaningful on grids fine enough to resolve psi_minus.
inline std::vector<cplx> partner_by_quadrature(const ModeSolution& psi_minus, double anchor) {
  const auto& g = psi_minus.grid;
  const std::size_t n = g.size();
  std::vector<cplx> f(n), df(n), cum(n, cplx(0));
  for (std::size_t i = 0; i < n; ++i) {
    cplx v = psi_minus.psi[i];
    if (std::abs(v) == 0.0) throw QuadratureError("decaying solution vanishes on the quadrature path");
    f[i] = 1.0 / (v * v);
    df[i] = -2.0 * psi_minus.dpsi[i] / (v * v * v);
  }
  for (std::size_t i = 1; i < n; ++i) {
    double h = g[i] - g[i - 1];
    cum[i] = cum[i - 1] + 0.5 * h * (f[i - 1] + f[i]) + h * h / 12.0 * (df[i - 1] - df[i]);
  }
  // Value of the cumulative integral at the anchor by Hermite interpolation.
  auto it = std::upper_bound(g.begin(), g.end(), anchor);
  std::size_t j = std::clamp<std::size_t>(static_cast<std::size_t>(it - g.begin()), 1, n - 1) - 1;
  double h = g[j + 1] - g[j];
  double t = (anchor - g[j]) / h;
  // Integral of the cubic Hermite interpolant of f from g[j] to anchor.
  double H0 = t - t * t * t + t * t * t * t / 2;
  double H1 = t * t / 2 - 2 * t * t * t / 3 + t * t * t * t / 4;
  double H2 = t * t * t - t * t * t * t / 2;
  double H3 = -t * t * t / 3 + t * t * t * t / 4;
  cplx at = cum[j] + h * (H0 * f[j] + h * H1 * df[j] + H2 * f[j + 1] + h * H3 * df[j + 1]);
  std::vector<cplx> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = psi_minus.psi[i] * (cum[i] - at);
  return out;
}

// Dispersion relation D(alpha, c) = psi_minus(0).
inline cplx dispersion_value(const ShearProfile& p, double alpha, cplx c, const SolverOptions& opt = {}) {
  auto m = solve_minus(p, {alpha, c}, std::vector<double>{0.0}, opt);
  return m.psi[0];
}

// Closed form of the second alpha = 0 solution for U = y^2:
// -y/(2 sqrt c) + (y^2 - c)/(4c) log((y + sqrt c)/(y - sqrt c)), principal branches.
inline cplx explicit_psi2_parabola(double y, cplx c) {
  if (c.imag() == 0.0 && c.real() >= 0.0) throw BranchError("c on the branch cut [0, inf)");
  cplx s = std::sqrt(c);
  cplx w = (y + s) / (y - s);
  if (w.real() < 0 && std::abs(w.imag()) <= 1e-14 * std::abs(w))
    throw BranchError("log argument on the negative real axis");
  return -y / (2.0 * s) + (y * y - c) / (4.0 * c) * std::log(w);
}

}  // namespace rayleigh
