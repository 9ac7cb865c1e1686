#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rayleigh/errors.hpp"

namespace rayleigh {

using cplx = std::complex<double>;
using ComplexFn = std::function<cplx(double)>;

enum class SingularKind { PlemeljPole, PrincipalValue, LogBranch, OscillatoryPole };

// A compactly supported integrand on [lo, hi] with a marked singular point.
struct SingularRule {
  SingularKind kind = SingularKind::PlemeljPole;
  double lo = 0, hi = 0;
  double pole = 0;
  double t = 0;
};

namespace detail {

// Adaptive Gauss-Kronrod; integrands oscillating like e^{i freq x} are first
// cut into panels of half a period.
inline cplx gk(const ComplexFn& f, double a, double b, double freq = 0.0, double tol = 1e-13) {
  if (b <= a) return 0.0;
  int panels = std::max(1, static_cast<int>(std::ceil((b - a) * std::abs(freq) / std::numbers::pi)));
  cplx out = 0;
  for (int k = 0; k < panels; ++k) {
    double x0 = a + (b - a) * k / panels, x1 = a + (b - a) * (k + 1) / panels;
    double err = 0;
    out += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, x0, x1, 10, tol, &err);
  }
  return out;
}

inline void check_support(double lo, double hi, double pole, double h) {
  if (!(hi > lo)) throw SupportError("empty support");
  if (pole < lo + h || pole > hi - h) throw SupportError("pole outside the support (with margin)");
}

}  // namespace detail

// PV int_lo^hi phi(x)/(x - pole) dx. Pairs x = pole +- s so the integrand is
// (phi(pole+s) - phi(pole-s))/s, smooth in s. The short piece [0, h] next to
// the pole gets a 2-point Gauss rule, which never evaluates the quotient at
// s = 0. phi is taken as 0 outside [lo, hi].
inline cplx principal_value(const ComplexFn& phi, double lo, double hi, double pole, double h_rel = 1e-3,
                            double freq = 0.0) {
  // The excision shrinks with the oscillation rate so that the neglected
  // cubic term h^3 phi''' stays small.
  double scale = std::min(hi - lo, 1.0);
  if (freq != 0.0) scale = std::min(scale, 1.0 / std::abs(freq));
  const double h = h_rel * scale;
  detail::check_support(lo, hi, pole, h);
  auto ph = [&](double x) -> cplx { return (x < lo || x > hi) ? cplx(0) : phi(x); };
  double R = std::max(pole - lo, hi - pole);
  ComplexFn pair = [&](double s) { return (ph(pole + s) - ph(pole - s)) / s; };
  const double g = 0.5 / std::sqrt(3.0);
  cplx near = 0.5 * h * (pair(h * (0.5 - g)) + pair(h * (0.5 + g)));
  // Split at the nearer end of the support, where the paired integrand has a kink.
  double knee = std::min(pole - lo, hi - pole);
  return near + detail::gk(pair, h, knee, freq) + detail::gk(pair, knee, R, freq);
}

// lim_{eps->0+} int phi(x)/(x - pole - i eps) dx = i pi phi(pole) + PV.
inline cplx plemelj_integral(const ComplexFn& phi, double lo, double hi, double pole, double freq = 0.0) {
  return cplx(0, std::numbers::pi) * phi(pole) + principal_value(phi, lo, hi, pole, 1e-3, freq);
}

// lim_{eps->0+} int phi(x) e^{ixt}/(x - pole - i eps) dx.
inline cplx oscillatory_pole_integral(const ComplexFn& phi, double lo, double hi, double pole, double t) {
  ComplexFn g = [&](double x) { return phi(x) * std::exp(cplx(0, x * t)); };
  return plemelj_integral(g, lo, hi, pole, t);
}

// The part left after removing the leading 2 i pi phi(pole) e^{i pole t}.
inline cplx oscillatory_pole_remainder(const ComplexFn& phi, double lo, double hi, double pole, double t) {
  return oscillatory_pole_integral(phi, lo, hi, pole, t) -
         cplx(0, 2 * std::numbers::pi) * phi(pole) * std::exp(cplx(0, pole * t));
}

namespace detail {

// int_lo^hi g(x) w(x - b) dx for a weight with an integrable endpoint
// singularity at b. Each side is cut into half-period pieces; on the piece
// touching b the substitution x = b +- u^2 removes the singularity.
template <class W>
cplx branch_integral(const ComplexFn& g, double lo, double hi, double b, double freq, W&& w) {
  ComplexFn plain = [&](double x) { return g(x) * w(x - b); };
  cplx out = 0;
  auto side = [&](double len, double dir) {
    if (len <= 0) return;
    int pieces = std::max(1, static_cast<int>(std::ceil(len * std::max(1.0, std::abs(freq)) / std::numbers::pi)));
    double first = len / pieces;
    ComplexFn sub = [&](double u) {
      double x = b + dir * u * u;
      return 2.0 * u * g(x) * w(x - b);
    };
    out += gk(sub, 0.0, std::sqrt(first));
    if (dir > 0) out += gk(plain, b + first, b + len, freq);
    else out += gk(plain, b - len, b - first, freq);
  };
  side(b - lo, -1.0);
  side(hi - b, 1.0);
  return out;
}

}  // namespace detail

// lim_{eps->0+} int phi(x) e^{ixt} log(x - b - i eps) dx. Principal log: for
// x < b the boundary value is log|x - b| - i pi.
inline cplx log_branch_integral(const ComplexFn& phi, double lo, double hi, double b, double t) {
  detail::check_support(lo, hi, b, 0.0);
  ComplexFn g = [&](double x) { return phi(x) * std::exp(cplx(0, x * t)); };
  return detail::branch_integral(g, lo, hi, b, t, [](double s) {
    return s < 0 ? cplx(std::log(-s), -std::numbers::pi) : cplx(std::log(s), 0.0);
  });
}

// lim_{eps->0+} int phi(x) e^{ixt} (x - b - i eps) log(x - b - i eps) dx.
inline cplx zlogz_integral(const ComplexFn& phi, double lo, double hi, double b, double t) {
  detail::check_support(lo, hi, b, 0.0);
  ComplexFn g = [&](double x) { return phi(x) * std::exp(cplx(0, x * t)); };
  return detail::branch_integral(g, lo, hi, b, t, [](double s) {
    if (s == 0.0) return cplx(0);
    return s < 0 ? s * cplx(std::log(-s), -std::numbers::pi) : cplx(s * std::log(s), 0.0);
  });
}

// Cumulative integral of sampled data, exact for cubics: on every interval the
// integrand is replaced by the cubic through the four nearest nodes.
class CumulativeCubic {
 public:
  CumulativeCubic(std::vector<double> x, std::vector<cplx> f) : x_(std::move(x)), f_(std::move(f)) {
    if (x_.size() != f_.size() || x_.size() < 4) throw ValidationError("cumulative quadrature needs >= 4 samples");
    cum_.assign(x_.size(), cplx(0));
    for (std::size_t i = 0; i + 1 < x_.size(); ++i) cum_[i + 1] = cum_[i] + partial(i, x_[i + 1]);
  }

  // int_{x_0}^{y} f.
  cplx at(double y) const {
    if (y <= x_.front()) return partial(0, y);
    auto it = std::upper_bound(x_.begin(), x_.end(), y);
    std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - x_.begin()), x_.size() - 1) - 1;
    return cum_[i] + partial(i, y);
  }
  const std::vector<cplx>& nodes_cumulative() const { return cum_; }
  cplx total() const { return cum_.back(); }

 private:
  // int_{x_i}^{y} of the local cubic, for y in (or near) [x_i, x_{i+1}].
  cplx partial(std::size_t i, double y) const {
    const std::size_t n = x_.size();
    std::size_t s = (i == 0) ? 0 : std::min(i - 1, n - 4);
    double a = x_[i];
    cplx out = 0;
    for (std::size_t j = s; j < s + 4; ++j) {
      // Lagrange basis l_j as a polynomial in (x - a), integrated from a to y.
      double c[4] = {1, 0, 0, 0};
      double denom = 1;
      for (std::size_t k = s; k < s + 4; ++k) {
        if (k == j) continue;
        double r = x_[k] - a;
        // multiply c by (u - r)
        for (int d = 3; d >= 1; --d) c[d] = c[d - 1] - r * c[d];
        c[0] = -r * c[0];
        denom *= x_[j] - x_[k];
      }
      double u = y - a, integral = 0, up = u;
      for (int d = 0; d < 4; ++d) {
        integral += c[d] * up / (d + 1);
        up *= u;
      }
      out += f_[j] * (integral / denom);
    }
    return out;
  }

  std::vector<double> x_;
  std::vector<cplx> f_;
  std::vector<cplx> cum_;
};

}  // namespace rayleigh
