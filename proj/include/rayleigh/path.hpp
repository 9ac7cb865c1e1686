#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "rayleigh/errors.hpp"
#include "rayleigh/ode.hpp"

namespace rayleigh {

// A rectangular excursion of the integration path into the complex y-plane
// around a real critical point. side = -1 runs below the axis, +1 above.
struct Detour {
  double center;
  double radius;
  double side;
};

// Integrates x' = rhs(x, y) along a piecewise-linear path in the complex y
// plane. Between real output points the path follows the real axis, except
// inside a detour where it runs at height side*radius; outputs inside a detour
// are reached by a short vertical spur. An output that coincides with a
// detour centre is evaluated at distance `touch` from it on the detour side.
class PathIntegrator {
 public:
  PathIntegrator(std::vector<Detour> detours, double rtol, double touch = 1e-8)
      : detours_(std::move(detours)), rtol_(rtol), touch_(touch) {
    std::sort(detours_.begin(), detours_.end(), [](auto& a, auto& b) { return a.center < b.center; });
  }

  double level(double x) const {
    for (auto& d : detours_)
      if (std::abs(x - d.center) < d.radius) return d.side * d.radius;
    return 0.0;
  }

  template <std::size_t N, class Rhs, class Obs>
  void run(Rhs&& rhs, CState<N> x, double y0, const std::vector<double>& outs, Obs&& obs) const {
    if (outs.empty()) return;
    double dt = 1e-3;
    cplx z(y0, 0.0);
    if (level(y0) != 0.0) {
      if (near_center(y0)) throw NumericError("integration cannot start at a critical point");
      cplx to(y0, level(y0));
      advance<N>(rhs, x, z, to, dt);
      z = to;
    }
    for (std::size_t k = 0; k < outs.size(); ++k) {
      march<N>(rhs, x, z, outs[k], dt);
      double lv = level(outs[k]);
      if (lv == 0.0) {
        obs(k, x);
      } else {
        CState<N> xs = x;
        double dts = dt;
        cplx top(outs[k], 0.0);
        for (auto& d : detours_)
          if (std::abs(outs[k] - d.center) <= touch_ * std::max(1.0, std::abs(d.center)))
            top = cplx(d.center, d.side * touch_);
        advance<N>(rhs, xs, z, top, dts);
        obs(k, xs);
      }
    }
  }

 private:
  bool near_center(double x) const {
    for (auto& d : detours_)
      if (std::abs(x - d.center) <= touch_ * std::max(1.0, std::abs(d.center))) return true;
    return false;
  }

  // Horizontal travel at the path level from z to the real abscissa xt,
  // with vertical moves at detour edges.
  template <std::size_t N, class Rhs>
  void march(Rhs& rhs, CState<N>& x, cplx& z, double xt, double& dt) const {
    const double xs = z.real();
    const double dir = xt >= xs ? 1.0 : -1.0;
    std::vector<double> edges;
    for (auto& d : detours_) {
      for (double e : {d.center - d.radius, d.center + d.radius})
        if ((e - xs) * dir > 0 && (xt - e) * dir > 0) edges.push_back(e);
    }
    std::sort(edges.begin(), edges.end(), [dir](double a, double b) { return (a - b) * dir < 0; });
    for (double e : edges) {
      cplx a(e, z.imag());
      advance<N>(rhs, x, z, a, dt);
      z = a;
      // Level just past the edge in the travel direction.
      double after = level(e + dir * 1e-14 * std::max(1.0, std::abs(e)));
      cplx b(e, after);
      advance<N>(rhs, x, z, b, dt);
      z = b;
    }
    cplx end(xt, level(xt));
    advance<N>(rhs, x, z, end, dt);
    z = end;
  }

  template <std::size_t N, class Rhs>
  void advance(Rhs& rhs, CState<N>& x, cplx from, cplx to, double& dt) const {
    namespace ode = boost::numeric::odeint;
    const double L = std::abs(to - from);
    if (L == 0.0) return;
    const cplx u = (to - from) / L;
    auto sys = [&](const CState<N>& s, CState<N>& d, double t) {
      rhs(s, d, from + u * t);
      for (auto& v : d) v *= u;
    };
    auto stepper = make_stepper<N>(rtol_);
    double t = 0.0;
    dt = std::min(std::abs(dt), L);
    int fails = 0;
    while (t < L) {
      double h = std::min(dt, L - t);
      double t_try = t;
      auto res = stepper.try_step(sys, x, t_try, h);
      if (res == ode::success) {
        fails = 0;
        bool last = (t_try >= L * (1 - 1e-15)) || (L - t_try) < 1e-15 * std::max(1.0, L);
        t = last ? L : t_try;
        dt = h;
      } else {
        dt = h;
        if (++fails > 400 || dt < 1e-15 * std::max(1.0, L)) throw NumericError("path integration step size underflow");
      }
    }
  }

  std::vector<Detour> detours_;
  double rtol_;
  double touch_;
};

}  // namespace rayleigh
