#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "rayleigh/parallel.hpp"
#include "rayleigh/rayleigh_solver.hpp"

namespace rayleigh {

struct DispersionSample {
  SpectralParams params;
  cplx value;
  cplx dvalue;
};

struct DiscreteEigenvalue {
  cplx c;
  cplx residue_weight;  // 1 / dD/dc at the root
};

struct EmbeddedEigenvalue {
  double c;
  bool simple;
};

struct SpectrumReport {
  double alpha = 0;
  std::vector<DiscreteEigenvalue> discrete;
  std::vector<EmbeddedEigenvalue> embedded;
  double range_lo = 0, range_hi = 0;
  std::vector<bool> a3_ok;  // one flag per extremal velocity
  bool a4_ok = true;
  int winding = 0;          // argument-principle count over the search box
  std::string interpolation_order;

  bool audit_ok() const {
    return a4_ok && std::all_of(a3_ok.begin(), a3_ok.end(), [](bool b) { return b; });
  }
};

struct SearchBox {
  double re_lo, re_hi, im_lo, im_hi;
};

struct SpectrumOptions {
  SolverOptions solver;
  double im_floor = 1e-3;
  double tol_eig_rel = 1e-9;     // relative to the |D| scale
  double a3_floor_rel = 1e-4;
  double simple_floor_rel = 1e-4;
  double tol_embed_rel = 1e-3;   // |D| below this fraction of the scale flags a candidate
  double fd_step = 1e-6;
  std::size_t embed_scan = 400;
  int max_depth = 6;
  unsigned threads = 0;
};

inline cplx dispersion_at(const ShearProfile& p, double alpha, cplx c, const SolverOptions& opt = {}) {
  return dispersion_value(p, alpha, c, opt);
}

// D and a central difference in c. Near the real axis D is only C^1, so the
// derivative is taken along the real direction.
inline DispersionSample dispersion(const ShearProfile& p, double alpha, cplx c, const SolverOptions& opt = {},
                                   double h = 1e-6) {
  DispersionSample s;
  s.params = {alpha, c};
  s.value = dispersion_at(p, alpha, c, opt);
  s.dvalue = (dispersion_at(p, alpha, c + h, opt) - dispersion_at(p, alpha, c - h, opt)) / (2 * h);
  return s;
}

// Typical |D| used to make the tolerances relative.
inline double dispersion_scale(const ShearProfile& p, double alpha, const SolverOptions& opt = {}) {
  double w = std::max(p.range_hi() - p.range_lo(), 1e-3);
  cplx c(0.5 * (p.range_lo() + p.range_hi()), 0.5 * w);
  return std::max(std::abs(dispersion_at(p, alpha, c, opt)), 1e-300);
}

namespace detail {

// Phase increment of D along the straight segment a -> b, refined until each
// sub-step turns by less than pi/4.
inline double phase_along(const ShearProfile& p, double alpha, cplx a, cplx b, cplx Da, cplx Db,
                          const SolverOptions& opt, double safety, int depth = 0) {
  double dphi = std::arg(Db / Da);
  if (std::abs(Da) < safety || std::abs(Db) < safety)
    throw BoundaryZeroError("dispersion relation vanishes on a cell boundary");
  if (std::abs(dphi) < std::numbers::pi / 4 || depth > 24) return dphi;
  cplx m = 0.5 * (a + b);
  cplx Dm = dispersion_at(p, alpha, m, opt);
  return phase_along(p, alpha, a, m, Da, Dm, opt, safety, depth + 1) +
         phase_along(p, alpha, m, b, Dm, Db, opt, safety, depth + 1);
}

inline int winding_number(const ShearProfile& p, double alpha, const SearchBox& b, const SolverOptions& opt,
                          double safety, int per_side = 16) {
  std::vector<cplx> pts;
  auto side = [&](cplx s, cplx e) {
    for (int k = 0; k < per_side; ++k) pts.push_back(s + (e - s) * (double(k) / per_side));
  };
  cplx c00(b.re_lo, b.im_lo), c10(b.re_hi, b.im_lo), c11(b.re_hi, b.im_hi), c01(b.re_lo, b.im_hi);
  side(c00, c10);
  side(c10, c11);
  side(c11, c01);
  side(c01, c00);
  std::vector<cplx> D(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) D[i] = dispersion_at(p, alpha, pts[i], opt);
  double total = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::size_t j = (i + 1) % pts.size();
    total += phase_along(p, alpha, pts[i], pts[j], D[i], D[j], opt, safety);
  }
  return static_cast<int>(std::lround(total / (2 * std::numbers::pi)));
}

inline cplx newton_root(const ShearProfile& p, double alpha, cplx c0, const SolverOptions& opt, double tol,
                        double h, const SearchBox& box) {
  cplx c = c0;
  for (int it = 0; it < 60; ++it) {
    cplx D = dispersion_at(p, alpha, c, opt);
    if (std::abs(D) < tol) return c;
    cplx dD = (dispersion_at(p, alpha, c + h, opt) - dispersion_at(p, alpha, c - h, opt)) / (2 * h);
    cplx step = D / dD;
    double lam = 1.0;
    // Damping: accept the first step that decreases |D| and stays in the box.
    for (int k = 0; k < 30; ++k) {
      cplx cn = c - lam * step;
      bool inside = cn.real() >= box.re_lo && cn.real() <= box.re_hi && cn.imag() >= box.im_lo && cn.imag() <= box.im_hi;
      if (inside && std::abs(dispersion_at(p, alpha, cn, opt)) < std::abs(D)) {
        c = cn;
        break;
      }
      lam *= 0.5;
      if (k == 29) throw NumericError("Newton iteration on the dispersion relation stalled");
    }
  }
  if (std::abs(dispersion_at(p, alpha, c, opt)) < tol) return c;
  throw NumericError("Newton iteration on the dispersion relation did not converge");
}

}  // namespace detail

// Zeros of D inside the box by recursive argument-principle bisection, then
// damped Newton on each isolated zero.
inline SpectrumReport find_discrete_spectrum(const ShearProfile& p, double alpha, const SearchBox& box,
                                             const SpectrumOptions& so = {}) {
  if (!(alpha > 0)) throw ValidationError("alpha must be positive");
  if (!(box.im_lo >= so.im_floor) || !(so.im_floor > 0))
    throw ValidationError("search box must stay above im_floor > 0");
  if (!(box.re_hi > box.re_lo) || !(box.im_hi > box.im_lo)) throw ValidationError("empty search box");
  const double scale = dispersion_scale(p, alpha, so.solver);
  const double safety = 1e-12 * scale;
  SpectrumReport rep;
  rep.alpha = alpha;
  rep.range_lo = p.range_lo();
  rep.range_hi = p.range_hi();
  rep.interpolation_order = p.interpolation_order();
  rep.winding = detail::winding_number(p, alpha, box, so.solver, safety);

  struct Cell {
    SearchBox b;
    int count;
    int depth;
  };
  std::vector<Cell> todo{{box, rep.winding, 0}}, leaves;
  while (!todo.empty()) {
    std::vector<Cell> next;
    std::vector<SearchBox> kids;
    std::vector<int> depth;
    for (auto& cell : todo) {
      if (cell.count == 0) continue;
      if (cell.count == 1 && cell.depth >= 3) {
        leaves.push_back(cell);
        continue;
      }
      if (cell.depth >= so.max_depth) {
        leaves.push_back(cell);
        continue;
      }
      double xm = 0.5 * (cell.b.re_lo + cell.b.re_hi) + 0.0137 * (cell.b.re_hi - cell.b.re_lo);
      double ym = 0.5 * (cell.b.im_lo + cell.b.im_hi) + 0.0113 * (cell.b.im_hi - cell.b.im_lo);
      kids.push_back({cell.b.re_lo, xm, cell.b.im_lo, ym});
      kids.push_back({xm, cell.b.re_hi, cell.b.im_lo, ym});
      kids.push_back({cell.b.re_lo, xm, ym, cell.b.im_hi});
      kids.push_back({xm, cell.b.re_hi, ym, cell.b.im_hi});
      for (int k = 0; k < 4; ++k) depth.push_back(cell.depth + 1);
    }
    auto counts = parallel_map<int>(
        kids.size(), [&](std::size_t i) { return detail::winding_number(p, alpha, kids[i], so.solver, safety); },
        so.threads);
    for (std::size_t i = 0; i < kids.size(); ++i) next.push_back({kids[i], counts[i], depth[i]});
    todo.swap(next);
  }
  const double tol = so.tol_eig_rel * scale;
  auto roots = parallel_map<DiscreteEigenvalue>(
      leaves.size(),
      [&](std::size_t i) {
        const auto& b = leaves[i].b;
        cplx c0(0.5 * (b.re_lo + b.re_hi), 0.5 * (b.im_lo + b.im_hi));
        cplx r = detail::newton_root(p, alpha, c0, so.solver, tol, so.fd_step, box);
        auto s = dispersion(p, alpha, r, so.solver, so.fd_step);
        return DiscreteEigenvalue{r, 1.0 / s.dvalue};
      },
      so.threads);
  std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
    return a.c.real() != b.c.real() ? a.c.real() < b.c.real() : a.c.imag() < b.c.imag();
  });
  rep.discrete = roots;
  return rep;
}

struct EmbeddedScan {
  std::vector<double> c;
  std::vector<cplx> D;
};

// |D(c + i0)| on a uniform scan of the range, skipping neighbourhoods of the
// extremal velocities.
inline EmbeddedScan scan_real_axis(const ShearProfile& p, double alpha, const SpectrumOptions& so) {
  const double lo = p.range_lo(), hi = p.range_hi();
  const double w = hi - lo;
  const double margin = 1e-3 * w;
  const double excl = 10 * so.solver.tol_extr;
  std::vector<double> cs;
  for (std::size_t i = 0; i < so.embed_scan; ++i) {
    double c = lo + margin + (w - 2 * margin) * double(i) / double(so.embed_scan - 1);
    bool near = false;
    for (auto& l : p.extremal_layers()) near = near || std::abs(c - l.c_extr) < excl;
    if (!near) cs.push_back(c);
  }
  EmbeddedScan s;
  s.c = cs;
  s.D = parallel_map<cplx>(
      cs.size(), [&](std::size_t i) { return dispersion_at(p, alpha, cplx(cs[i], 0.0), so.solver); }, so.threads);
  return s;
}

inline std::vector<EmbeddedEigenvalue> find_embedded(const ShearProfile& p, double alpha, const SpectrumOptions& so = {},
                                                     bool throw_on_nonsimple = true) {
  std::vector<EmbeddedEigenvalue> out;
  if (!(so.tol_embed_rel > 0)) return out;
  const double scale = dispersion_scale(p, alpha, so.solver);
  const double thresh = so.tol_embed_rel * scale;
  auto s = scan_real_axis(p, alpha, so);
  for (std::size_t i = 1; i + 1 < s.c.size(); ++i) {
    double a = std::abs(s.D[i - 1]), b = std::abs(s.D[i]), c = std::abs(s.D[i + 1]);
    if (!(b <= a && b <= c && b < thresh)) continue;
    // Secant on D restricted to the real axis.
    double x0 = s.c[i - 1], x1 = s.c[i + 1];
    cplx f0 = s.D[i - 1], f1 = s.D[i + 1];
    double x = s.c[i];
    for (int it = 0; it < 50; ++it) {
      cplx d = (f1 - f0) / (x1 - x0);
      double xn = x1 - (f1 / d).real();
      if (!(std::isfinite(xn))) break;
      x0 = x1;
      f0 = f1;
      x1 = xn;
      f1 = dispersion_at(p, alpha, cplx(x1, 0.0), so.solver);
      x = x1;
      if (std::abs(x1 - x0) < 1e-13) break;
    }
    cplx Dx = dispersion_at(p, alpha, cplx(x, 0.0), so.solver);
    if (std::abs(Dx) > thresh) continue;
    auto ds = dispersion(p, alpha, cplx(x, 0.0), so.solver, so.fd_step);
    bool simple = std::abs(ds.dvalue) > so.simple_floor_rel * scale;
    if (!simple && throw_on_nonsimple) throw NonSimpleError("embedded eigenvalue is not simple");
    out.push_back({x, simple});
  }
  return out;
}

// (A3): |D| bounded away from zero around every extremal velocity.
inline std::vector<bool> audit_a3(const ShearProfile& p, double alpha, const SpectrumOptions& so = {}) {
  const double scale = dispersion_scale(p, alpha, so.solver);
  std::vector<bool> ok;
  for (auto& l : p.extremal_layers()) {
    double m = 1e300;
    for (int k = -10; k <= 10; ++k) {
      if (k == 0) continue;
      double dc = 1e-3 * k;
      cplx D = dispersion_at(p, alpha, cplx(l.c_extr + dc, 0.0), so.solver);
      m = std::min(m, std::abs(D));
    }
    ok.push_back(m > so.a3_floor_rel * scale);
  }
  return ok;
}

inline SpectrumReport compute_spectrum(const ShearProfile& p, double alpha, const SearchBox& box,
                                       const SpectrumOptions& so = {}) {
  SpectrumReport rep = find_discrete_spectrum(p, alpha, box, so);
  try {
    rep.embedded = find_embedded(p, alpha, so, false);
  } catch (const TailError&) {
    rep.embedded.clear();
  }
  rep.a4_ok = std::all_of(rep.embedded.begin(), rep.embedded.end(), [](auto& e) { return e.simple; });
  rep.a3_ok = audit_a3(p, alpha, so);
  return rep;
}

}  // namespace rayleigh
