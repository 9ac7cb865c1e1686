#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "rayleigh/chebyshev.hpp"
#include "rayleigh/errors.hpp"
#include "rayleigh/rayleigh_solver.hpp"

namespace rayleigh {

// Rescaled frame around an extremal layer. Heights are shifted to y_extr and
// velocities to c_extr, then divided by U''(y_extr)/2 so the local profile is
// a unit upward parabola. c_off below is the rescaled offset.
struct ExtremalFrame {
  double y_extr = 0, c_extr = 0;
  double scale = 1;       // U''(y_extr)/2
  cplx c_off{0, 0};       // (c - c_extr)/scale
  bool alternate = false; // Re c_off < 0: parabola -Re c_off + v^2 without real zeros
  double beta_coef = 1;
  cplx z_minus{-1, 0}, z_plus{1, 0};
  cplx z1{1, 0}, z2{-1, 0};

  std::array<cplx, 4> P(cplx v) const {
    cplx q = (v - z1) * (v - z2);
    return {cplx(1), v, q, v * q};
  }
};

inline ExtremalFrame extremal_frame(const ShearProfile& p, std::size_t l, cplx c, double window = 0.2) {
  if (l >= p.extremal_layers().size()) throw ValidationError("extremal index out of range");
  const auto& L = p.extremal_layers()[l];
  ExtremalFrame f;
  f.y_extr = L.y_extr;
  f.c_extr = L.c_extr;
  f.scale = 0.5 * L.us2_at_extr;
  f.c_off = (c - L.c_extr) / f.scale;
  if (std::abs(f.c_off) > window) throw WindowError("c is outside the extremal window");
  double rc = f.c_off.real();
  double ic = f.c_off.imag();
  if (rc > 0) {
    // Heights on both sides where the rescaled profile reaches Re c_off.
    std::function<double(double)> g = [&](double eta) { return (p.U(L.y_extr + eta) - L.c_extr) / f.scale - rc; };
    double reach = std::min(1.0, std::sqrt(rc) * 8.0 + 1e-3);
    double lo_lim = -std::min(reach, L.y_extr);
    if (g(reach) < 0 || g(lo_lim) < 0) throw WindowError("parabola roots not found inside the window");
    double em = detail::brent_root(g, lo_lim, 0.0, 1e-15);
    double ep = detail::brent_root(g, 0.0, reach, 1e-15);
    double s = std::sqrt(rc);
    f.z_minus = em / s;
    f.z_plus = ep / s;
    f.beta_coef = 0.25 * std::norm(f.z_plus - f.z_minus);
    cplx m = 0.5 * (f.z_minus + f.z_plus);
    cplx h = 0.5 * (f.z_plus - f.z_minus);
    cplx disc = std::sqrt(h * h + cplx(0, ic) / (f.beta_coef * rc));
    f.z1 = m + disc;
    f.z2 = m - disc;
  } else {
    // theta(v) = -Re c_off + v^2, rescaled by |Re c_off|: zeros at +-i.
    f.alternate = true;
    double a = std::max(-rc, 1e-300);
    f.z_minus = cplx(0, -1);
    f.z_plus = cplx(0, 1);
    f.beta_coef = 1.0;
    cplx disc = std::sqrt(cplx(-1, 0) + cplx(0, ic) / a);
    f.z1 = disc;
    f.z2 = -disc;
  }
  return f;
}

// Primitives of P_j(v) / ((v - z1)^2 (v - z2)^2).
inline std::array<cplx, 4> eval_J_primitives(const ExtremalFrame& f, cplx v) {
  const cplx z1 = f.z1, z2 = f.z2;
  if (std::abs(v - z1) < 1e-14 || std::abs(v - z2) < 1e-14) throw PoleError("J primitives evaluated at a pole");
  cplx d = z2 - z1;
  cplx lg = std::log((v - z1) / (v - z2));
  cplx J0 = 2.0 / (d * d * d) * lg - 1.0 / (d * d) * (1.0 / (v - z1) + 1.0 / (v - z2));
  cplx J1 = (z1 + z2) / (d * d * d) * lg - 1.0 / (d * d) * (z1 / (v - z1) + z2 / (v - z2));
  cplx J2 = 1.0 / (z1 - z2) * lg;
  cplx J3 = 1.0 / (z1 - z2) * (z1 * std::log(v - z1) - z2 * std::log(v - z2));
  return {J0, J1, J2, J3};
}

struct LocalIterationReport {
  std::vector<double> residuals;  // sup-norm change per sweep
  double max_ratio = 0.0;         // largest residual ratio observed
  int iterations = 0;
};

// Local basis on [center - halfwidth, center + halfwidth] built from the
// alpha = 0 pair (U - c, (U - c) int du/(U - c)^2) and the fixed point
// psi = psi0 + alpha^2 G psi, with G the alpha = 0 Green operator pinned at
// the center. Wronskian of the pair is 1 by construction.
inline ModeBasis local_iteration_solution(const ShearProfile& p, SpectralParams sp, double center, double halfwidth,
                                          LocalIterationReport* report = nullptr, int cheb_order = 128) {
  if (!(halfwidth > 0)) throw ValidationError("halfwidth must be positive");
  ChebyshevWindow w(center - halfwidth, center + halfwidth, cheb_order);
  const auto& y = w.nodes();
  const std::size_t n = y.size();
  std::vector<cplx> p1(n), inv2(n);
  for (std::size_t k = 0; k < n; ++k) {
    p1[k] = p.U(y[k]) - sp.c;
    inv2[k] = 1.0 / (p1[k] * p1[k]);
  }
  auto I = w.primitive(inv2, center);
  std::vector<cplx> p2(n);
  for (std::size_t k = 0; k < n; ++k) p2[k] = p1[k] * I[k];

  const double a2 = sp.alpha * sp.alpha;
  auto G = [&](const std::vector<cplx>& h) {
    std::vector<cplx> t1(n), t2(n);
    for (std::size_t k = 0; k < n; ++k) {
      t1[k] = p1[k] * h[k];
      t2[k] = p2[k] * h[k];
    }
    auto A = w.primitive(t1, center);
    auto B = w.primitive(t2, center);
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = p2[k] * A[k] - p1[k] * B[k];
    return out;
  };

  std::array<std::vector<cplx>, 2> cur = {p1, p2};
  const std::array<std::vector<cplx>, 2> base = {p1, p2};
  LocalIterationReport rep;
  double prev = -1.0;
  double scale = 0.0;
  for (auto& v : p1) scale = std::max(scale, std::abs(v));
  for (auto& v : p2) scale = std::max(scale, std::abs(v));
  for (int it = 0; it < 200; ++it) {
    double r = 0.0;
    std::array<std::vector<cplx>, 2> next;
    for (int s = 0; s < 2; ++s) {
      auto g = G(cur[s]);
      next[s].resize(n);
      for (std::size_t k = 0; k < n; ++k) {
        next[s][k] = base[s][k] + a2 * g[k];
        r = std::max(r, std::abs(next[s][k] - cur[s][k]));
      }
    }
    cur = next;
    rep.residuals.push_back(r);
    rep.iterations = it + 1;
    if (prev > 0 && r > 1e-13 * scale) {
      double ratio = r / prev;
      rep.max_ratio = std::max(rep.max_ratio, ratio);
      if (ratio > 0.5) throw NoContractionError("local iteration residual did not halve");
    }
    if (r <= 1e-14 * scale) break;
    prev = r;
  }
  if (report) *report = rep;

  // Derivatives from the Chebyshev representation.
  auto deriv = [&](const std::vector<cplx>& f) {
    auto c = w.coefficients(f);
    const int N = w.order();
    std::vector<cplx> d(N + 2, cplx(0));
    for (int j = N; j >= 1; --j) d[j - 1] = (j + 1 <= N ? d[j + 1] : cplx(0)) + 2.0 * double(j) * c[j];
    d[0] *= 0.5;
    d.resize(N + 1);
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = ChebyshevWindow::clenshaw(d, w.to_t(y[k])) * (2.0 / (2 * halfwidth));
    return out;
  };

  ModeBasis b;
  b.anchor = center;
  for (int s = 0; s < 2; ++s) {
    ModeSolution& m = s == 0 ? b.psi_minus : b.psi_plus;
    m.params = sp;
    m.grid = y;
    m.psi = cur[s];
    m.dpsi = deriv(cur[s]);
    m.normalization = Normalization::Local;
  }
  std::size_t mid = n / 2;
  b.wronskian = b.psi_minus.psi[mid] * b.psi_plus.dpsi[mid] - b.psi_minus.dpsi[mid] * b.psi_plus.psi[mid];
  return b;
}

// Wronskian of the local pair normalised at y_extr +- sigma: Psi_- has data
// (1, 0) at y_extr + sigma, Psi_+ has data (1, 0) at y_extr - sigma.
inline cplx local_pair_wronskian(const ShearProfile& p, std::size_t l, SpectralParams sp, double sigma,
                                 const SolverOptions& opt = {}) {
  const auto& L = p.extremal_layers().at(l);
  std::vector<double> at{L.y_extr};
  auto m = solve_ivp(p, sp, L.y_extr + sigma, 1.0, 0.0, at, opt);
  auto q = solve_ivp(p, sp, L.y_extr - sigma, 1.0, 0.0, at, opt);
  return q.dpsi[0] * m.psi[0] - m.dpsi[0] * q.psi[0];
}

}  // namespace rayleigh
