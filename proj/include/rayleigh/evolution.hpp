#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "rayleigh/errors.hpp"
#include "rayleigh/greens.hpp"
#include "rayleigh/parallel.hpp"
#include "rayleigh/spectrum.hpp"

namespace rayleigh {

// Fourier mode in x of the initial vorticity. omega0 must accept complex
// heights: real-axis limits are taken by deforming the y path.
struct InitialData {
  double alpha = 1.0;
  std::function<cplx(cplx)> omega0;
  std::string label;

  // Right-hand side of the Rayleigh problem whose solution is psi_c.
  cplx forcing(cplx y) const { return cplx(0, 1.0 / alpha) * omega0(y); }
};

inline InitialData gaussian_datum(double alpha, double center, double width, cplx amplitude = 1.0) {
  InitialData d;
  d.alpha = alpha;
  d.omega0 = [=](cplx y) {
    cplx s = (y - center) / width;
    return amplitude * std::exp(-s * s);
  };
  d.label = "gaussian";
  return d;
}

// Measured exponential decay rate of |omega0| over the upper half of the
// domain; throws if the datum does not decay.
inline double validate_initial_data(const ShearProfile& p, const InitialData& d) {
  if (!d.omega0) throw ValidationError("initial vorticity is missing");
  if (!(d.alpha > 0)) throw ValidationError("alpha must be positive");
  double ymax = p.y_max();
  double peak = 0;
  for (int i = 0; i <= 2000; ++i) peak = std::max(peak, std::abs(d.omega0(cplx(ymax * i / 2000.0, 0))));
  if (!(peak > 0)) return std::numeric_limits<double>::infinity();
  double a = std::abs(d.omega0(cplx(0.5 * ymax, 0))), b = std::abs(d.omega0(cplx(ymax, 0)));
  if (b > 1e-8 * peak) throw ValidationError("initial vorticity does not decay by y_max");
  if (b == 0.0 || a == 0.0) return std::numeric_limits<double>::infinity();
  double kappa = std::log(a / b) / (0.5 * ymax);
  if (!(kappa > 0)) throw ValidationError("initial vorticity is not exponentially decaying");
  return kappa;
}

struct ContourSpec {
  double A = 2.0;            // horizontal segment runs over [-A, A]
  double eps = 1e-2;         // height of the horizontal segment
  double panel = 1.0;        // panel width near the range, in units of eps
  double ray_s0 = 1e-3;      // first ray panel; later panels double
  double ray_s_max = 1e3;    // beyond this the ray uses s = s_max/u
  double max_panel = 0.25;   // cap on panel width along the segment (e^{-i alpha c t} oscillates)
  double kappa = 1.0;        // large-c subtraction pole at c = -i kappa
  bool eps_check = true;     // repeat at eps/2 and report the difference
};

inline ContourSpec default_contour(const ShearProfile& p, double alpha, double t_max) {
  ContourSpec s;
  s.A = std::max(2.0 * p.max_abs_u(), 0.5);
  s.eps = std::min(1e-2, 1.0 / (alpha * std::max(t_max, 1e-12)));
  s.max_panel = std::min(0.25, 2.0 / (alpha * std::max(t_max, 1e-12)));
  return s;
}

struct ContourNode {
  cplx c;
  cplx w;  // weight of dc, orientation included
};

namespace detail {

// Gauss-Legendre rule on [a, b].
inline void gauss_panel(double a, double b, const std::function<void(double, double)>& add) {
  using G = boost::math::quadrature::gauss<double, 8>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  double m = 0.5 * (a + b), h = 0.5 * (b - a);
  for (std::size_t i = 0; i < x.size(); ++i) {
    add(m + h * x[i], h * w[i]);
    if (x[i] != 0) add(m - h * x[i], h * w[i]);
  }
}

// Nodes in s for int_0^inf g(s) ds along a ray.
inline std::vector<std::pair<double, double>> ray_rule(const ContourSpec& s) {
  std::vector<std::pair<double, double>> out;
  auto add = [&](double x, double w) { out.emplace_back(x, w); };
  gauss_panel(0.0, s.ray_s0, add);
  for (double a = s.ray_s0; a < s.ray_s_max; a *= 2) gauss_panel(a, std::min(2 * a, s.ray_s_max), add);
  // Tail: s = s_max/u, ds = s_max/u^2 du, u in (0, 1].
  gauss_panel(0.0, 1.0, [&](double u, double w) { out.emplace_back(s.ray_s_max / u, w * s.ray_s_max / (u * u)); });
  return out;
}

}  // namespace detail

// Gamma_1: up the line Re c = -A from -i inf to -A + i eps; Gamma_2: along
// Im c = eps from -A to A; Gamma_3: down Re c = A. The loop is oriented so
// that psi(t) = (alpha/2pi) int e^{-i alpha c t} psi_c dc.
inline std::vector<ContourNode> contour_nodes(const ShearProfile& p, const ContourSpec& s) {
  if (!(s.eps > 0)) throw ValidationError("contour height must be positive");
  if (s.A < p.max_abs_u()) throw ValidationError("contour half-width does not cover the range");
  std::vector<ContourNode> out;
  const double A = s.A, e = s.eps;
  for (auto [x, w] : detail::ray_rule(s)) out.push_back({cplx(-A, e - x), cplx(0, 1) * w});
  // Horizontal segment: panels of width panel*eps over the range, growing geometrically outside.
  const double lo = p.range_lo() - 4 * e, hi = p.range_hi() + 4 * e;
  const double hw = s.panel * e;
  std::vector<double> cuts;
  for (double a = -A; a < lo;) {
    cuts.push_back(a);
    double step = std::min(std::max(hw, 0.3 * (lo - a)), std::max(hw, s.max_panel));
    a = std::min(lo, a + step);
    if (a >= lo) break;
  }
  int n = std::max(1, static_cast<int>(std::ceil((hi - lo) / hw)));
  for (int k = 0; k < n; ++k) cuts.push_back(lo + (hi - lo) * k / n);
  for (double a = hi; a < A;) {
    cuts.push_back(a);
    double step = std::min(0.3 * (a - hi) + hw, std::max(hw, s.max_panel));
    a = std::min(A, a + step);
  }
  cuts.push_back(A);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
    detail::gauss_panel(cuts[k], cuts[k + 1], [&](double x, double w) { out.push_back({cplx(x, e), cplx(w)}); });
  for (auto [x, w] : detail::ray_rule(s)) out.push_back({cplx(A, e - x), cplx(0, -1) * w});
  return out;
}

// One eigenvalue contribution psi(t, y) = amplitude(y) e^{-i alpha c t}.
struct ModeTerm {
  cplx c;
  bool embedded = false;
  bool crossed = false;  // above the horizontal segment: not contained in the contour integral
  std::vector<cplx> psi, dpsi, omega;
};

struct EvolutionField {
  std::string method;
  double alpha = 1.0;
  std::vector<double> times;
  std::vector<double> ygrid;
  std::vector<std::vector<cplx>> psi, dpsi, omega;     // [time][y]
  std::vector<std::vector<cplx>> psi_int, dpsi_int;    // interior part of the decaying field (contour only)
  std::vector<ModeTerm> modes;
  std::vector<std::vector<cplx>> decay_psi, decay_dpsi, decay_omega;
  double eps = 0;
  double eps_consistency = 0;  // max relative change of omega between eps and eps/2
};

namespace detail {

// Limits of -c psi_c as c -> infinity: (d^2 - alpha^2)^{-1} f with psi(0) = 0,
// plus its interior part for the given anchor. Fine uniform grid, then cubic
// interpolation to the output heights.
struct LargeC {
  std::vector<cplx> phi, dphi, phi_int, dphi_int;
};

inline LargeC large_c_limit(const ShearProfile& p, const InitialData& d, const std::vector<double>& ygrid,
                            double anchor) {
  const double a = d.alpha;
  const double Y = p.y_max();
  const std::size_t n = 30001;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = Y * double(i) / double(n - 1);
  // psi_minus = e^{-a y}, psi_w = sinh(a y)/a, D = 1; psi_plus = psi_w + m psi_minus.
  const double m = -std::sinh(a * anchor) / a / std::exp(-a * anchor);
  std::vector<cplx> hw(n), hm(n);
  for (std::size_t i = 0; i < n; ++i) {
    cplx f = d.forcing(cplx(x[i], 0));
    hw[i] = std::sinh(a * x[i]) / a * f;
    hm[i] = std::exp(-a * x[i]) * f;
  }
  CumulativeCubic Cw(x, hw), Cm(x, hm);
  const cplx B0 = Cm.total();
  LargeC out;
  for (double y : ygrid) {
    cplx A = Cw.at(y), B = Cm.total() - Cm.at(y);
    double pm = std::exp(-a * y), dpm = -a * pm;
    double pw = std::sinh(a * y) / a, dpw = std::cosh(a * y);
    double pp = pw + m * pm, dpp = dpw + m * dpm;
    cplx Ap = A + m * (B0 - B);
    out.phi.push_back(-(pm * A + pw * B));
    out.dphi.push_back(-(dpm * A + dpw * B));
    out.phi_int.push_back(-(pm * Ap + pp * B));
    out.dphi_int.push_back(-(dpm * Ap + dpp * B));
  }
  return out;
}

struct NodeValues {
  std::vector<cplx> psi, dpsi, psi_int, dpsi_int;
};

inline NodeValues node_values(const ShearProfile& p, const InitialData& d, cplx c, const std::vector<double>& ygrid,
                              const SolverOptions& opt, double anchor) {
  ComplexForcing f = [&](cplx y) { return d.forcing(y); };
  ResolventOptions ro;
  ro.anchor = anchor;
  ro.tol_eig = 0.0;
  auto r = resolvent_at(p, d.alpha, c, f, ygrid, opt, ro);
  return {r.psi, r.dpsi, r.psi_int, r.dpsi_int};
}

// Contour integral at one eps for all times.
inline void contour_pass(const ShearProfile& p, const InitialData& d, const ContourSpec& s,
                         const std::vector<double>& times, const std::vector<double>& ygrid, const SolverOptions& opt,
                         double anchor, const LargeC& big, unsigned threads, EvolutionField& out) {
  auto nodes = contour_nodes(p, s);
  auto vals = parallel_map<NodeValues>(
      nodes.size(), [&](std::size_t j) { return node_values(p, d, nodes[j].c, ygrid, opt, anchor); }, threads);
  const double a = d.alpha;
  const cplx cs(0, -s.kappa);
  const std::size_t ny = ygrid.size();
  std::vector<double> U(ny), U2(ny);
  for (std::size_t i = 0; i < ny; ++i) {
    auto e = p.eval(ygrid[i]);
    U[i] = e.u;
    U2[i] = e.u2;
  }
  out.psi.assign(times.size(), std::vector<cplx>(ny));
  out.dpsi = out.psi;
  out.omega = out.psi;
  out.psi_int = out.psi;
  out.dpsi_int = out.psi;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    const cplx exact = cplx(0, a) * std::exp(-a * s.kappa * t);
    for (std::size_t i = 0; i < ny; ++i) {
      out.psi[k][i] = exact * big.phi[i];
      out.dpsi[k][i] = exact * big.dphi[i];
      out.psi_int[k][i] = exact * big.phi_int[i];
      out.dpsi_int[k][i] = exact * big.dphi_int[i];
      out.omega[k][i] = d.omega0(cplx(ygrid[i], 0)) * std::exp(cplx(0, -a * U[i] * t));
    }
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      const cplx c = nodes[j].c;
      const cplx e = std::exp(cplx(0, -a) * c * t);
      if (e == 0.0) continue;
      const cplx w = a / (2 * std::numbers::pi) * nodes[j].w * e;
      const cplx sub = 1.0 / (c - cs);
      const auto& v = vals[j];
      for (std::size_t i = 0; i < ny; ++i) {
        out.psi[k][i] += w * (v.psi[i] + big.phi[i] * sub);
        out.dpsi[k][i] += w * (v.dpsi[i] + big.dphi[i] * sub);
        out.psi_int[k][i] += w * (v.psi_int[i] + big.phi_int[i] * sub);
        out.dpsi_int[k][i] += w * (v.dpsi_int[i] + big.dphi_int[i] * sub);
        out.omega[k][i] += w * (-U2[i] * v.psi[i] / (U[i] - c));
      }
    }
  }
}

inline double max_rel_diff(const std::vector<std::vector<cplx>>& a, const std::vector<std::vector<cplx>>& b) {
  double num = 0, den = 0;
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t i = 0; i < a[k].size(); ++i) {
      num = std::max(num, std::abs(a[k][i] - b[k][i]));
      den = std::max(den, std::abs(b[k][i]));
    }
  return den > 0 ? num / den : num;
}

}  // namespace detail

// Residue term of an eigenvalue c_k: the contour picks up
// -i alpha e^{-i alpha c_k t} N(c_k, y) / D'(c_k), with N = D psi_c.
inline ModeTerm mode_term(const ShearProfile& p, const InitialData& d, cplx ck, cplx residue_weight,
                          const std::vector<double>& ygrid, const SolverOptions& opt = {}) {
  ComplexForcing f = [&](cplx y) { return d.forcing(y); };
  ResolventOptions ro;
  ro.split = false;
  ro.tol_eig = 0.0;
  auto r = detail::resolvent_at(p, d.alpha, ck, f, ygrid, opt, ro);
  ModeTerm m;
  m.c = ck;
  const cplx amp = cplx(0, -d.alpha) * residue_weight * r.dispersion;
  for (std::size_t i = 0; i < ygrid.size(); ++i) {
    auto e = p.eval(ygrid[i]);
    // N solves the homogeneous equation at c_k, so omega = -U'' N/(U - c_k).
    m.psi.push_back(amp * r.psi[i]);
    m.dpsi.push_back(amp * r.dpsi[i]);
    m.omega.push_back(-e.u2 * amp * r.psi[i] / (e.u - ck));
  }
  return m;
}

struct EvolutionOptions {
  SolverOptions solver;
  double anchor = -1.0;
  unsigned threads = 0;
};

// Modal field at time t from the stored amplitudes.
inline cplx mode_value(const ModeTerm& m, double alpha, double t, const std::vector<cplx>& amp, std::size_t i) {
  return amp[i] * std::exp(cplx(0, -alpha) * m.c * t);
}

// Fills decay_* = field - modes.
inline EvolutionField split_modes(EvolutionField f) {
  f.decay_psi = f.psi;
  f.decay_dpsi = f.dpsi;
  f.decay_omega = f.omega;
  for (const auto& m : f.modes)
    for (std::size_t k = 0; k < f.times.size(); ++k)
      for (std::size_t i = 0; i < f.ygrid.size(); ++i) {
        f.decay_psi[k][i] -= mode_value(m, f.alpha, f.times[k], m.psi, i);
        f.decay_dpsi[k][i] -= mode_value(m, f.alpha, f.times[k], m.dpsi, i);
        f.decay_omega[k][i] -= mode_value(m, f.alpha, f.times[k], m.omega, i);
      }
  return f;
}

// Attaches residue terms for the eigenvalues of `report` and splits the field.
inline EvolutionField split_modes(EvolutionField f, const ShearProfile& p, const InitialData& d,
                                  const SpectrumReport& report, const SolverOptions& opt = {}) {
  if (f.modes.empty()) {
    for (const auto& e : report.discrete) f.modes.push_back(mode_term(p, d, e.c, e.residue_weight, f.ygrid, opt));
  }
  return split_modes(std::move(f));
}

inline EvolutionField evolve_contour(const ShearProfile& p, const InitialData& d, const ContourSpec& spec,
                                     const std::vector<double>& times, const std::vector<double>& ygrid,
                                     const SpectrumReport* report = nullptr, const EvolutionOptions& eo = {}) {
  validate_initial_data(p, d);
  if (times.empty()) throw ValidationError("no output times");
  for (double t : times)
    if (!(t >= 0)) throw ValidationError("times must be non-negative");
  const double anchor = eo.anchor >= 0 ? eo.anchor : default_anchor(p);
  EvolutionField out;
  out.method = "contour";
  out.alpha = d.alpha;
  out.times = times;
  out.ygrid = ygrid;
  out.eps = spec.eps;

  // Eigenvalues: those above the segment are crossed when the contour is
  // lowered and enter as residues; none may sit on it.
  std::vector<ModeTerm> modes;
  if (report) {
    const double spacing = spec.panel * spec.eps / 4;
    for (const auto& e : report->discrete) {
      if (std::abs(e.c.real()) <= spec.A && std::abs(e.c.imag() - spec.eps) < 2 * spacing)
        throw ContourEigenvalueError("eigenvalue lies on the contour; change eps");
      if (spec.eps_check && std::abs(e.c.imag() - 0.5 * spec.eps) < spacing)
        throw ContourEigenvalueError("eigenvalue lies on the eps/2 contour; change eps");
      if (e.c.imag() > spec.eps * 0.5 && e.c.imag() < spec.eps)
        throw ContourEigenvalueError("eigenvalue between the eps and eps/2 contours; change eps");
      ModeTerm m = mode_term(p, d, e.c, e.residue_weight, ygrid, eo.solver);
      m.crossed = e.c.imag() > spec.eps;
      modes.push_back(std::move(m));
    }
    for (const auto& e : report->embedded) {
      if (!e.simple) continue;
      cplx w = 1.0 / dispersion(p, d.alpha, cplx(e.c, 0), eo.solver).dvalue;
      ModeTerm m = mode_term(p, d, cplx(e.c, 0), w, ygrid, eo.solver);
      m.embedded = true;
      modes.push_back(std::move(m));
    }
  }

  auto big = detail::large_c_limit(p, d, ygrid, anchor);
  detail::contour_pass(p, d, spec, times, ygrid, eo.solver, anchor, big, eo.threads, out);
  if (spec.eps_check) {
    ContourSpec half = spec;
    half.eps = 0.5 * spec.eps;
    EvolutionField second = out;
    detail::contour_pass(p, d, half, times, ygrid, eo.solver, anchor, big, eo.threads, second);
    out.eps_consistency = detail::max_rel_diff(out.omega, second.omega);
  }
  // Crossed modes are outside the contour integral.
  for (const auto& m : modes) {
    if (!m.crossed) continue;
    for (std::size_t k = 0; k < times.size(); ++k)
      for (std::size_t i = 0; i < ygrid.size(); ++i) {
        out.psi[k][i] += mode_value(m, d.alpha, times[k], m.psi, i);
        out.dpsi[k][i] += mode_value(m, d.alpha, times[k], m.dpsi, i);
        out.omega[k][i] += mode_value(m, d.alpha, times[k], m.omega, i);
      }
  }
  out.modes = std::move(modes);
  return split_modes(std::move(out));
}

struct DirectOptions {
  double y_top = -1.0;       // computational domain [0, y_top]; negative: min(y_max, 20)
  std::size_t nodes = 8001;
};

// Classical RK4 on d omega/dt = -i alpha U omega - i alpha U'' psi with
// (d^2 - alpha^2) psi = -omega, psi(0) = 0, psi' = -alpha psi at y_top.
inline EvolutionField evolve_direct(const ShearProfile& p, const InitialData& d, const std::vector<double>& times,
                                    double dt, const std::vector<double>& ygrid, const DirectOptions& o = {}) {
  validate_initial_data(p, d);
  if (times.empty()) throw ValidationError("no output times");
  const double a = d.alpha;
  if (!(dt > 0) || dt > 0.5 / (a * p.max_abs_u())) throw StepError("dt violates 0.5/(alpha max|U|)");
  const double L = o.y_top > 0 ? o.y_top : std::min(p.y_max(), 20.0);
  const std::size_t n = o.nodes;
  const double h = L / double(n - 1);
  std::vector<double> y(n), U(n), U2(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = h * double(i);
    auto e = p.eval(y[i]);
    U[i] = e.u;
    U2[i] = e.u2;
  }
  // Unknowns psi_1..psi_{n-1}; the last row uses a ghost node for the Robin condition.
  const std::size_t m = n - 1;
  const double diag = -2.0 / (h * h) - a * a, off = 1.0 / (h * h);
  std::vector<double> lower(m, off), dia(m, diag), upper(m, off);
  lower[m - 1] = 2 * off;
  dia[m - 1] = diag - 2 * off * h * a;
  // Thomas factorisation, reused every stage.
  std::vector<double> cp(m), dp_scale(m);
  cp[0] = upper[0] / dia[0];
  dp_scale[0] = dia[0];
  for (std::size_t i = 1; i < m; ++i) {
    dp_scale[i] = dia[i] - lower[i] * cp[i - 1];
    cp[i] = upper[i] / dp_scale[i];
  }
  auto solve_psi = [&](const std::vector<cplx>& w, std::vector<cplx>& psi) {
    std::vector<cplx> r(m);
    r[0] = -w[1] / dp_scale[0];
    for (std::size_t i = 1; i < m; ++i) r[i] = (-w[i + 1] - lower[i] * r[i - 1]) / dp_scale[i];
    for (std::size_t i = m - 1; i-- > 0;) r[i] -= cp[i] * r[i + 1];
    psi.assign(n, cplx(0));
    for (std::size_t i = 0; i < m; ++i) psi[i + 1] = r[i];
  };
  auto rhs = [&](const std::vector<cplx>& w, std::vector<cplx>& out) {
    std::vector<cplx> psi;
    solve_psi(w, psi);
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = cplx(0, -a) * (U[i] * w[i] + U2[i] * psi[i]);
  };
  std::vector<cplx> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = d.omega0(cplx(y[i], 0));

  EvolutionField f;
  f.method = "direct";
  f.alpha = a;
  f.times = times;
  f.ygrid = ygrid;
  auto record = [&]() {
    std::vector<cplx> psi;
    solve_psi(w, psi);
    std::vector<cplx> dpsi(n);
    dpsi[0] = (-3.0 * psi[0] + 4.0 * psi[1] - psi[2]) / (2 * h);
    for (std::size_t i = 1; i + 1 < n; ++i) dpsi[i] = (psi[i + 1] - psi[i - 1]) / (2 * h);
    dpsi[n - 1] = -a * psi[n - 1];
    std::vector<cplx> P, DP, W;
    for (double yy : ygrid) {
      if (yy > L) {
        P.push_back(0.0);
        DP.push_back(0.0);
        W.push_back(0.0);
        continue;
      }
      P.push_back(detail::interp_cubic(y, psi, yy));
      DP.push_back(detail::interp_cubic(y, dpsi, yy));
      W.push_back(detail::interp_cubic(y, w, yy));
    }
    f.psi.push_back(P);
    f.dpsi.push_back(DP);
    f.omega.push_back(W);
  };
  if (!std::is_sorted(times.begin(), times.end())) throw ValidationError("times must be increasing");
  double t = 0;
  std::vector<cplx> k1, k2, k3, k4, tmp(n);
  for (double target : times) {
    if (target < 0) throw ValidationError("times must be non-negative");
    while (t < target - 1e-12) {
      double step = std::min(dt, target - t);
      rhs(w, k1);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = w[i] + 0.5 * step * k1[i];
      rhs(tmp, k2);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = w[i] + 0.5 * step * k2[i];
      rhs(tmp, k3);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = w[i] + step * k3[i];
      rhs(tmp, k4);
      for (std::size_t i = 0; i < n; ++i) w[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      t += step;
    }
    record();
  }
  return split_modes(std::move(f));
}

}  // namespace rayleigh
