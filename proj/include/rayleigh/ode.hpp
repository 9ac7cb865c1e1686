#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "rayleigh/errors.hpp"

namespace rayleigh {

using cplx = std::complex<double>;

template <std::size_t N>
using CState = std::array<cplx, N>;

// Component-wise relative error test in which a component whose own scale is
// negligible (an accumulator that starts at zero, say) is measured against a
// small fraction of the largest component instead of the absolute floor.
struct StateScaledChecker {
  using value_type = double;
  using algebra_type = boost::numeric::odeint::array_algebra;
  using operations_type = boost::numeric::odeint::default_operations;
  double eps_abs = 1e-300;
  double eps_rel = 1e-11;
  double share = 1e-8;

  template <class Algebra, class State, class Deriv, class Err, class Time>
  double error(Algebra&, const State& x, const Deriv& dxdt, Err& err, Time dt) const {
    const double h = std::abs(dt);
    double big = 0;
    for (std::size_t i = 0; i < x.size(); ++i) big = std::max(big, std::abs(x[i]) + h * std::abs(dxdt[i]));
    double e = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double scale = std::max(std::abs(x[i]) + h * std::abs(dxdt[i]), share * big);
      e = std::max(e, std::abs(err[i]) / (eps_abs + eps_rel * scale));
    }
    return e;
  }
};

template <std::size_t N>
auto make_stepper(double rtol) {
  namespace ode = boost::numeric::odeint;
  using Stepper = ode::runge_kutta_fehlberg78<CState<N>>;
  return ode::controlled_runge_kutta<Stepper, StateScaledChecker>(StateScaledChecker{1e-300, rtol, 1e-8});
}

// Integrates x' = rhs(x, y) from y0 through the monotone list `ys` (all on the
// same side of y0) with an embedded Runge-Kutta-Fehlberg 7(8) pair and calls
// obs(index, state) at every requested point. The step is chosen by the error
// controller only, so it shrinks automatically in front of a near-singular
// coefficient such as U''/(U - c) at a critical layer.
template <std::size_t N, class Rhs, class Obs>
void integrate_through(Rhs&& rhs, CState<N> x, double y0, const std::vector<double>& ys, double rtol,
                       Obs&& obs) {
  namespace ode = boost::numeric::odeint;
  if (ys.empty()) return;
  std::vector<double> times;
  times.reserve(ys.size() + 1);
  times.push_back(y0);
  times.insert(times.end(), ys.begin(), ys.end());
  const double dir = ys.back() >= y0 ? 1.0 : -1.0;
  auto stepper = make_stepper<N>(rtol);
  std::size_t k = 0;
  auto system = [&rhs](const CState<N>& s, CState<N>& d, double y) { rhs(s, d, y); };
  auto observer = [&](const CState<N>& s, double) {
    if (k > 0) obs(k - 1, s);
    ++k;
  };
  try {
    ode::integrate_times(stepper, system, x, times.begin(), times.end(), dir * 1e-3, observer);
  } catch (const ode::step_adjustment_error& e) {
    throw NumericError(std::string("ODE step control failed: ") + e.what());
  } catch (const ode::no_progress_error& e) {
    throw NumericError(std::string("ODE made no progress: ") + e.what());
  }
}

}  // namespace rayleigh
