#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace rayleigh {

// Chebyshev-Lobatto representation on [a, b]. Only what the local iteration
// needs: nodes, and the matrix that maps nodal values of f to nodal values of
// the primitive of f vanishing at a chosen point.
class ChebyshevWindow {
 public:
  ChebyshevWindow(double a, double b, int n) : a_(a), b_(b), n_(n) {
    x_.resize(n + 1);
    for (int k = 0; k <= n; ++k) x_[k] = 0.5 * (a + b) - 0.5 * (b - a) * std::cos(std::numbers::pi * k / n);
  }

  const std::vector<double>& nodes() const { return x_; }
  int order() const { return n_; }

  // Coefficients c_j of f = sum c_j T_j(t), t in [-1, 1], from nodal values.
  template <class T>
  std::vector<T> coefficients(const std::vector<T>& f) const {
    const int n = n_;
    std::vector<T> c(n + 1, T(0));
    for (int j = 0; j <= n; ++j) {
      T s(0);
      for (int k = 0; k <= n; ++k) {
        // Node k sits at t = -cos(pi k/n), so T_j(t) = (-1)^j cos(pi j k/n).
        double w = (k == 0 || k == n) ? 0.5 : 1.0;
        s += w * f[k] * std::cos(std::numbers::pi * j * k / n);
      }
      double sign = (j % 2 == 0) ? 1.0 : -1.0;
      c[j] = sign * s * (2.0 / n);
    }
    c[0] *= 0.5;
    c[n] *= 0.5;
    return c;
  }

  template <class T>
  static T clenshaw(const std::vector<T>& c, double t) {
    T b1(0), b2(0);
    for (std::size_t j = c.size(); j-- > 1;) {
      T b0 = c[j] + 2.0 * t * b1 - b2;
      b2 = b1;
      b1 = b0;
    }
    return c[0] + t * b1 - b2;
  }

  template <class T>
  T evaluate(const std::vector<T>& f, double y) const {
    return clenshaw(coefficients(f), to_t(y));
  }

  // Nodal values of int_{y0}^{y} f.
  template <class T>
  std::vector<T> primitive(const std::vector<T>& f, double y0) const {
    auto c = coefficients(f);
    const int n = n_;
    std::vector<T> p(n + 2, T(0));
    // int T_0 = T_1, int T_1 = T_2/4, int T_j = T_{j+1}/(2(j+1)) - T_{j-1}/(2(j-1)).
    p[1] += c[0];
    if (n >= 1) p[2] += c[1] / 4.0;
    for (int j = 2; j <= n; ++j) {
      p[j + 1] += c[j] / (2.0 * (j + 1));
      p[j - 1] -= c[j] / (2.0 * (j - 1));
    }
    double half = 0.5 * (b_ - a_);
    for (auto& v : p) v *= half;
    T ref = clenshaw(p, to_t(y0));
    std::vector<T> out(n + 1);
    for (int k = 0; k <= n; ++k) out[k] = clenshaw(p, to_t(x_[k])) - ref;
    return out;
  }

  double to_t(double y) const { return (2.0 * y - a_ - b_) / (b_ - a_); }

 private:
  double a_, b_;
  int n_;
  std::vector<double> x_;
};

}  // namespace rayleigh
