#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "rayleigh/errors.hpp"
#include "rayleigh/parallel.hpp"
#include "rayleigh/rayleigh_solver.hpp"
#include "rayleigh/singular_quadrature.hpp"

namespace rayleigh {

// G(x, y) such that psi(y) = int_0^inf G(x, y) f(x) dx solves
// (U - c)(psi'' - alpha^2 psi) - U'' psi = f with psi(0) = 0, psi decaying.
// Rows are x nodes, columns are y nodes.
struct GreensKernel {
  SpectralParams params;
  std::vector<double> xgrid, ygrid;
  Eigen::MatrixXcd g_int, g_b;
  ModeBasis basis;           // on the merged grid below
  std::vector<double> merged;
  cplx dispersion{0, 0};     // D = psi_minus(0)
  cplx psi_plus_at_zero{0, 0};
  std::vector<double> critical;  // real critical layers of a real c

  cplx operator()(std::size_t ix, std::size_t iy) const { return g_int(ix, iy) + g_b(ix, iy); }

  // Values of the basis at a merged-grid height.
  std::size_t index(double y) const {
    auto it = std::lower_bound(merged.begin(), merged.end(), y);
    if (it == merged.end() || *it != y) throw ValidationError("height not on the kernel grid");
    return static_cast<std::size_t>(it - merged.begin());
  }
};

namespace detail {

inline std::vector<double> merge_grids(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  a.push_back(0.0);
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

}  // namespace detail

inline GreensKernel assemble_greens(const ShearProfile& p, SpectralParams sp, const std::vector<double>& xgrid,
                                    const std::vector<double>& ygrid, const SolverOptions& opt = {},
                                    double tol_eig = 1e-10, unsigned threads = 0) {
  if (sp.c.imag() < 0) throw ValidationError("Im c must be non-negative");
  GreensKernel k;
  k.params = sp;
  k.xgrid = xgrid;
  k.ygrid = ygrid;
  if (sp.c.imag() == 0.0) k.critical = detail::crossings(p, sp.c.real(), p.y_max());
  k.merged = detail::merge_grids(detail::merge_grids(xgrid, ygrid), k.critical);
  k.basis = solve_basis(p, sp, k.merged, opt);
  k.dispersion = k.basis.psi_minus.psi[0];
  if (std::abs(k.dispersion) < tol_eig) throw EigenvalueError("c is an eigenvalue: D(alpha, c) vanishes");
  k.psi_plus_at_zero = k.basis.psi_plus.psi[0];
  const auto& pm = k.basis.psi_minus.psi;
  const auto& pp = k.basis.psi_plus.psi;
  std::vector<std::size_t> ix(xgrid.size()), iy(ygrid.size());
  for (std::size_t i = 0; i < xgrid.size(); ++i) ix[i] = k.index(xgrid[i]);
  for (std::size_t j = 0; j < ygrid.size(); ++j) iy[j] = k.index(ygrid[j]);
  const cplx bcoef = k.psi_plus_at_zero / k.dispersion;
  auto cols = parallel_map<std::pair<Eigen::VectorXcd, Eigen::VectorXcd>>(
      xgrid.size(),
      [&](std::size_t i) {
        Eigen::VectorXcd gi(ygrid.size()), gb(ygrid.size());
        cplx inv = 1.0 / (p.U(xgrid[i]) - sp.c);
        for (std::size_t j = 0; j < ygrid.size(); ++j) {
          std::size_t a = ix[i], b = iy[j];
          gi[j] = (xgrid[i] <= ygrid[j] ? -pm[b] * pp[a] : -pm[a] * pp[b]) * inv;
          gb[j] = bcoef * pm[a] * pm[b] * inv;
        }
        return std::make_pair(gi, gb);
      },
      threads);
  k.g_int.resize(xgrid.size(), ygrid.size());
  k.g_b.resize(xgrid.size(), ygrid.size());
  for (std::size_t i = 0; i < xgrid.size(); ++i) {
    k.g_int.row(i) = cols[i].first.transpose();
    k.g_b.row(i) = cols[i].second.transpose();
  }
  return k;
}

// Jump of d/dx G(x, y) across x = y, from the x > y side minus the x < y side.
inline cplx kernel_dx_jump(const ShearProfile& p, const GreensKernel& k, double y) {
  std::size_t i = k.index(y);
  const auto& b = k.basis;
  cplx w = b.psi_plus.dpsi[i] * b.psi_minus.psi[i] - b.psi_minus.dpsi[i] * b.psi_plus.psi[i];
  return w / (p.U(y) - k.params.c);
}

namespace detail {

// Cubic interpolation of samples (x, f) at a point.
inline cplx interp_cubic(const std::vector<double>& x, const std::vector<cplx>& f, double y) {
  const std::size_t n = x.size();
  auto it = std::upper_bound(x.begin(), x.end(), y);
  std::size_t i = std::clamp<std::size_t>(static_cast<std::size_t>(it - x.begin()), 1, n - 1) - 1;
  std::size_t s = (i == 0) ? 0 : std::min(i - 1, n - 4);
  cplx out = 0;
  for (std::size_t j = s; j < s + 4; ++j) {
    double l = 1;
    for (std::size_t m = s; m < s + 4; ++m)
      if (m != j) l *= (y - x[m]) / (x[j] - x[m]);
    out += l * f[j];
  }
  return out;
}

// int_a^b dx / (x - yk - i0 s): the boundary value of log(x - yk) seen from
// the side of the pole selected by Im c -> 0+.
inline cplx log_pole_primitive(double a, double b, double yk, double s) {
  auto L = [&](double x) { return cplx(std::log(std::abs(x - yk)), x < yk ? -s * std::numbers::pi : 0.0); };
  return L(b) - L(a);
}

}  // namespace detail

// psi(y) = int G(x, y) f(x) dx for forcing samples on the kernel x grid.
// The factored form -[psi_-(y) int_0^y psi_+ g + psi_+(y) int_y^inf psi_- g]
// + (psi_+(0)/D) psi_-(y) int_0^inf psi_- g, g = f/(U - c), is integrated with
// cumulative cubic rules. For real c the simple poles at critical layers are
// subtracted and integrated exactly with their Plemelj branch.
inline std::vector<cplx> apply_greens(const ShearProfile& p, const GreensKernel& k, const std::vector<cplx>& forcing) {
  const auto& x = k.xgrid;
  if (forcing.size() != x.size()) throw ValidationError("forcing must be sampled on the kernel x grid");
  if (x.size() < 4) throw ValidationError("kernel x grid too small");
  const cplx c = k.params.c;
  const auto& b = k.basis;
  std::vector<cplx> hp(x.size()), hm(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::size_t a = k.index(x[i]);
    cplx g = forcing[i] / (p.U(x[i]) - c);
    hp[i] = b.psi_plus.psi[a] * g;
    hm[i] = b.psi_minus.psi[a] * g;
  }
  struct Pole {
    double y, sgn;
    cplx rp, rm;
  };
  std::vector<Pole> poles;
  for (double yk : k.critical) {
    if (yk < x.front() || yk > x.back()) continue;
    double u1 = p.U1(yk);
    std::size_t a = k.index(yk);
    cplx fk = detail::interp_cubic(x, forcing, yk);
    poles.push_back({yk, u1 > 0 ? 1.0 : -1.0, b.psi_plus.psi[a] * fk / u1, b.psi_minus.psi[a] * fk / u1});
  }
  for (auto& q : poles) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      double d = x[i] - q.y;
      if (std::abs(d) < 1e-12 * std::max(1.0, std::abs(q.y))) continue;
      hp[i] -= q.rp / d;
      hm[i] -= q.rm / d;
    }
  }
  // Nodes sitting on a pole carry the average of their neighbours.
  for (auto& q : poles)
    for (std::size_t i = 0; i < x.size(); ++i)
      if (std::abs(x[i] - q.y) < 1e-12 * std::max(1.0, std::abs(q.y))) {
        std::size_t l = i > 0 ? i - 1 : i + 1, r = i + 1 < x.size() ? i + 1 : i - 1;
        hp[i] = 0.5 * (hp[l] + hp[r]);
        hm[i] = 0.5 * (hm[l] + hm[r]);
      }
  CumulativeCubic Cp(x, hp), Cm(x, hm);
  auto Ap = [&](double y) {
    cplx v = Cp.at(y) - Cp.at(0.0);
    for (auto& q : poles) v += q.rp * detail::log_pole_primitive(0.0, y, q.y, q.sgn);
    return v;
  };
  auto Bm = [&](double y) {
    cplx v = Cm.total() - Cm.at(y);
    for (auto& q : poles) v += q.rm * detail::log_pole_primitive(y, x.back(), q.y, q.sgn);
    return v;
  };
  const cplx B0 = Bm(0.0);
  const cplx bcoef = k.psi_plus_at_zero / k.dispersion;
  std::vector<cplx> out(k.ygrid.size());
  for (std::size_t j = 0; j < k.ygrid.size(); ++j) {
    double y = k.ygrid[j];
    std::size_t a = k.index(y);
    cplx pm = b.psi_minus.psi[a], pp = b.psi_plus.psi[a];
    out[j] = -(pm * Ap(y) + pp * Bm(y)) + bcoef * pm * B0;
  }
  return out;
}

// Forcing given on the complex y plane, so that real-axis limits can be taken
// by deforming the integration path.
using ComplexForcing = std::function<cplx(cplx)>;

// Resolvent solution split into the interior and boundary parts.
struct ResolventResult {
  cplx c{0, 0};
  std::vector<double> grid;
  std::vector<cplx> psi, dpsi;
  std::vector<cplx> psi_int, dpsi_int;
  std::vector<cplx> psi_b, dpsi_b;
  cplx dispersion{0, 0};
  double anchor = 0;
};

struct ResolventOptions {
  bool split = true;      // also compute psi_int/psi_b (needs the psi_plus anchor)
  double anchor = -1.0;   // negative: default_anchor
  double tol_eig = 1e-12;
};

namespace detail {

// Forced system along a path: [phi, phi', accumulator] with
// accumulator' = sign * phi f/(U - c).
struct ForcedRhs {
  const ShearProfile* p;
  const ComplexForcing* f;
  double a2;
  cplx c;
  double sign;
  void operator()(const CState<3>& s, CState<3>& d, cplx y) const {
    auto e = p->eval(y);
    cplx inv = 1.0 / (e.u - c);
    d[0] = s[1];
    d[1] = (a2 + e.u2 * inv) * s[0];
    d[2] = sign * s[0] * (*f)(y) * inv;
  }
};

inline ResolventResult resolvent_at(const ShearProfile& p, double alpha, cplx c, const ComplexForcing& f,
                                    const std::vector<double>& grid, const SolverOptions& opt,
                                    const ResolventOptions& ro) {
  ResolventResult r;
  r.c = c;
  r.grid = grid;
  r.anchor = ro.anchor >= 0 ? ro.anchor : default_anchor(p);
  std::vector<double> pts = grid;
  pts.push_back(0.0);
  if (ro.split) pts.push_back(r.anchor);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  auto at = [&](double y) { return static_cast<std::size_t>(std::lower_bound(pts.begin(), pts.end(), y) - pts.begin()); };

  PathIntegrator path = make_path(p, c, opt);
  if (ro.split && c.imag() == 0.0 && std::abs(p.U(r.anchor) - c.real()) < 1e-8)
    throw NumericError("the psi_plus anchor sits on a critical layer of this real c");

  // Inward pass: psi_minus and B(y) = int_y^inf psi_minus f/(U - c).
  const double Y = far_field_start(p, c);
  CState<2> tail = tail_data(p, alpha, c, Y);
  std::vector<double> down(pts.rbegin(), pts.rend());
  std::vector<CState<3>> in(pts.size());
  ForcedRhs rin{&p, &f, alpha * alpha, c, -1.0};
  path.run<3>(rin, CState<3>{tail[0], tail[1], cplx(0)}, Y, down,
              [&](std::size_t k, const CState<3>& s) { in[pts.size() - 1 - k] = s; });
  // Outward pass: psi_w (psi_w(0) = 0, psi_w'(0) = 1) and A(y) = int_0^y psi_w f/(U - c).
  std::vector<CState<3>> out(pts.size());
  ForcedRhs rout{&p, &f, alpha * alpha, c, 1.0};
  std::vector<double> up(pts.begin() + 1, pts.end());
  out[0] = {cplx(0), cplx(1), cplx(0)};
  path.run<3>(rout, out[0], 0.0, up, [&](std::size_t k, const CState<3>& s) { out[k + 1] = s; });

  const cplx D = in[0][0];
  r.dispersion = D;
  if (std::abs(D) < ro.tol_eig) throw EigenvalueError("c is an eigenvalue: D(alpha, c) vanishes");
  const cplx B0 = in[0][2];
  cplx m = 0;
  if (ro.split) {
    std::size_t ia = at(r.anchor);
    m = -out[ia][0] / (D * in[ia][0]);
  }
  const std::size_t n = grid.size();
  r.psi.resize(n);
  r.dpsi.resize(n);
  if (ro.split) {
    r.psi_int.resize(n);
    r.dpsi_int.resize(n);
    r.psi_b.resize(n);
    r.dpsi_b.resize(n);
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t i = at(grid[j]);
    cplx pm = in[i][0], dpm = in[i][1], B = in[i][2];
    cplx pw = out[i][0], dpw = out[i][1], A = out[i][2];
    r.psi[j] = -(pm * A + pw * B) / D;
    r.dpsi[j] = -(dpm * A + dpw * B) / D;
    if (ro.split) {
      // psi_plus = psi_w/D + m psi_minus, with unit Wronskian and psi_plus(anchor) = 0.
      cplx pp = pw / D + m * pm, dpp = dpw / D + m * dpm;
      cplx Ap = A / D + m * (B0 - B);
      r.psi_int[j] = -(pm * Ap + pp * B);
      r.dpsi_int[j] = -(dpm * Ap + dpp * B);
      // psi_plus(0) / D = m.
      r.psi_b[j] = m * pm * B0;
      r.dpsi_b[j] = m * dpm * B0;
    }
  }
  return r;
}

}  // namespace detail

// Solution of Ray psi = f with psi(0) = 0 and psi decaying. Real c on an
// analytic profile uses the deformed path; on tabulated data the Im c ladder.
inline ResolventResult resolvent(const ShearProfile& p, double alpha, cplx c, const ComplexForcing& f,
                                 const std::vector<double>& grid, const SolverOptions& opt = {},
                                 const ResolventOptions& ro = {}) {
  if (!(alpha > 0)) throw ValidationError("alpha must be positive");
  if (c.imag() < 0) throw ValidationError("Im c must be non-negative");
  detail::check_extremal(p, c, opt.tol_extr);
  if (!detail::needs_ladder(p, c)) return detail::resolvent_at(p, alpha, c, f, grid, opt, ro);
  const double eps = opt.real_axis_eps;
  std::array<ResolventResult, 3> rs;
  for (int k = 0; k < 3; ++k) rs[k] = detail::resolvent_at(p, alpha, cplx(c.real(), eps / double(1 << k)), f, grid, opt, ro);
  ResolventResult r = rs[0];
  r.c = c;
  auto lim = [&](auto member) {
    auto& dst = r.*member;
    for (std::size_t i = 0; i < dst.size(); ++i)
      dst[i] = detail::ladder_limit({(rs[0].*member)[i], (rs[1].*member)[i], (rs[2].*member)[i]}, eps);
  };
  for (auto mem : {&ResolventResult::psi, &ResolventResult::dpsi, &ResolventResult::psi_int,
                   &ResolventResult::dpsi_int, &ResolventResult::psi_b, &ResolventResult::dpsi_b})
    lim(mem);
  r.dispersion = detail::ladder_limit({rs[0].dispersion, rs[1].dispersion, rs[2].dispersion}, eps);
  return r;
}

}  // namespace rayleigh
