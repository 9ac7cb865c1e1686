#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "rayleigh/errors.hpp"

namespace rayleigh {

enum class ProfileKind {
  Exp,             // U+ (1 - e^{-y})
  Jet,             // y e^{-y}
  LinearWindow,    // slope * y, U'' = 0
  ParabolaWindow,  // y^2, used only on a finite window away from y = 0
  Tanh,            // tanh((y - yi)/delta) + tanh(yi/delta)
  Tabulated,
};

inline std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::Exp: return "builtin-exp";
    case ProfileKind::Jet: return "builtin-jet";
    case ProfileKind::LinearWindow: return "builtin-linear-window";
    case ProfileKind::ParabolaWindow: return "builtin-parabola-window";
    case ProfileKind::Tanh: return "builtin-tanh";
    case ProfileKind::Tabulated: return "tabulated";
  }
  return "unknown";
}

inline ProfileKind parse_profile_kind(const std::string& s) {
  if (s == "builtin-exp") return ProfileKind::Exp;
  if (s == "builtin-jet") return ProfileKind::Jet;
  if (s == "builtin-linear-window") return ProfileKind::LinearWindow;
  if (s == "builtin-parabola-window") return ProfileKind::ParabolaWindow;
  if (s == "builtin-tanh") return ProfileKind::Tanh;
  if (s == "tabulated") return ProfileKind::Tabulated;
  throw ValidationError("unknown profile kind '" + s + "'");
}

struct ProfileSpec {
  ProfileKind kind = ProfileKind::Exp;
  std::map<std::string, double> params;
  std::optional<std::string> table_path;

  double param(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
};

struct ProfileTolerances {
  double tol_root = 1e-10;
  double tol_nondeg = 1e-6;
};

struct ExtremalLayer {
  double y_extr;
  double c_extr;
  double us2_at_extr;
};

struct ProfileSample {
  double u, u1, u2;
};

struct ProfileSampleC {
  std::complex<double> u, u1, u2;
};

// Quintic Hermite interpolation through (U, U', U'') at the table nodes.
// Matching value, slope and curvature at every node makes the interpolant C^2.
class QuinticHermiteTable {
 public:
  QuinticHermiteTable() = default;
  QuinticHermiteTable(std::vector<double> y, std::vector<double> u,
                      std::vector<double> u1, std::vector<double> u2)
      : y_(std::move(y)), u_(std::move(u)), u1_(std::move(u1)), u2_(std::move(u2)) {}

  static QuinticHermiteTable from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open profile table '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty profile table");
    std::string header;
    for (char ch : line)
      if (!std::isspace(static_cast<unsigned char>(ch))) header.push_back(ch);
    if (header != "y,U,U1,U2")
      throw ValidationError("profile table header must be 'y,U,U1,U2'");
    std::vector<double> y, u, u1, u2;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream ss(line);
      double a, b, c, d;
      if (!(ss >> a >> b >> c >> d)) throw ValidationError("malformed profile table row: " + line);
      y.push_back(a);
      u.push_back(b);
      u1.push_back(c);
      u2.push_back(d);
    }
    if (y.size() < 2) throw ValidationError("profile table needs at least two rows");
    if (y.front() != 0.0) throw ValidationError("profile table must start at y = 0");
    for (std::size_t i = 1; i < y.size(); ++i)
      if (!(y[i] > y[i - 1])) throw ValidationError("profile table y must be strictly increasing");
    return QuinticHermiteTable(y, u, u1, u2);
  }

  double y_last() const { return y_.back(); }
  const std::vector<double>& nodes() const { return y_; }

  ProfileSample eval(double y) const {
    if (y >= y_.back()) {
      return {u_.back(), 0.0, 0.0};
    }
    if (y <= 0.0) y = 0.0;
    auto it = std::upper_bound(y_.begin(), y_.end(), y);
    std::size_t i = static_cast<std::size_t>(it - y_.begin()) - 1;
    double h = y_[i + 1] - y_[i];
    double t = (y - y_[i]) / h;
    double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    // Standard quintic Hermite basis on [0,1].
    double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
    double h1 = t - 6 * t3 + 8 * t4 - 3 * t5;
    double h2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5);
    double h3 = 0.5 * (t3 - 2 * t4 + t5);
    double h4 = -4 * t3 + 7 * t4 - 3 * t5;
    double h5 = 10 * t3 - 15 * t4 + 6 * t5;
    double d0 = -30 * t2 + 60 * t3 - 30 * t4;
    double d1 = 1 - 18 * t2 + 32 * t3 - 15 * t4;
    double d2 = 0.5 * (2 * t - 9 * t2 + 12 * t3 - 5 * t4);
    double d3 = 0.5 * (3 * t2 - 8 * t3 + 5 * t4);
    double d4 = -12 * t2 + 28 * t3 - 15 * t4;
    double d5 = -d0;
    double s0 = -60 * t + 180 * t2 - 120 * t3;
    double s1 = -36 * t + 96 * t2 - 60 * t3;
    double s2 = 0.5 * (2 - 18 * t + 36 * t2 - 20 * t3);
    double s3 = 0.5 * (6 * t - 24 * t2 + 20 * t3);
    double s4 = -24 * t + 84 * t2 - 60 * t3;
    double s5 = -s0;
    const double a0 = u_[i], a1 = u1_[i] * h, a2 = u2_[i] * h * h;
    const double b0 = u_[i + 1], b1 = u1_[i + 1] * h, b2 = u2_[i + 1] * h * h;
    double v = a0 * h0 + a1 * h1 + a2 * h2 + b2 * h3 + b1 * h4 + b0 * h5;
    double dv = a0 * d0 + a1 * d1 + a2 * d2 + b2 * d3 + b1 * d4 + b0 * d5;
    double sv = a0 * s0 + a1 * s1 + a2 * s2 + b2 * s3 + b1 * s4 + b0 * s5;
    return {v, dv / h, sv / (h * h)};
  }

 private:
  std::vector<double> y_, u_, u1_, u2_;
};

class ShearProfile {
 public:
  ProfileKind kind() const { return kind_; }
  double u_plus() const { return u_plus_; }
  double tail_rate() const { return tail_rate_; }
  double y_max() const { return y_max_; }
  bool is_window() const { return window_; }
  const std::vector<ExtremalLayer>& extremal_layers() const { return layers_; }
  double range_lo() const { return range_lo_; }
  double range_hi() const { return range_hi_; }
  double max_abs_u() const { return std::max(std::abs(range_lo_), std::abs(range_hi_)); }
  const ProfileTolerances& tolerances() const { return tol_; }
  // Smoothness actually available to the solver: builtins are analytic,
  // tabulated data goes through a C^2 quintic interpolant.
  std::string interpolation_order() const {
    return kind_ == ProfileKind::Tabulated ? "C2-quintic-hermite" : "analytic";
  }

  ProfileSample eval(double y) const {
    switch (kind_) {
      case ProfileKind::Exp: {
        double e = std::exp(-y);
        return {p0_ * (1 - e), p0_ * e, -p0_ * e};
      }
      case ProfileKind::Jet: {
        double e = std::exp(-y);
        return {y * e, (1 - y) * e, (y - 2) * e};
      }
      case ProfileKind::LinearWindow:
        return {p0_ * y, p0_, 0.0};
      case ProfileKind::ParabolaWindow:
        return {y * y, 2 * y, 2.0};
      case ProfileKind::Tanh: {
        double s = (y - p0_) / p1_;
        double th = std::tanh(s);
        double ch = std::cosh(s), sech2 = 1.0 / (ch * ch);
        return {th + std::tanh(p0_ / p1_), sech2 / p1_, -2 * th * sech2 / (p1_ * p1_)};
      }
      case ProfileKind::Tabulated:
        return table_.eval(y);
    }
    return {0, 0, 0};
  }

  // Builtin profiles are entire (or meromorphic far from the real axis), so
  // they can be evaluated along complex integration paths.
  bool analytic() const { return kind_ != ProfileKind::Tabulated; }

  ProfileSampleC eval(std::complex<double> y) const {
    using C = std::complex<double>;
    if (y.imag() == 0.0 || !analytic()) {
      auto s = eval(y.real());
      return {s.u, s.u1, s.u2};
    }
    switch (kind_) {
      case ProfileKind::Exp: {
        C e = std::exp(-y);
        return {p0_ * (1.0 - e), p0_ * e, -p0_ * e};
      }
      case ProfileKind::Jet: {
        C e = std::exp(-y);
        return {y * e, (1.0 - y) * e, (y - 2.0) * e};
      }
      case ProfileKind::LinearWindow:
        return {p0_ * y, C(p0_), C(0.0)};
      case ProfileKind::ParabolaWindow:
        return {y * y, 2.0 * y, C(2.0)};
      case ProfileKind::Tanh: {
        C th = std::tanh((y - p0_) / p1_);
        C ch = std::cosh((y - p0_) / p1_), sech2 = 1.0 / (ch * ch);
        return {th + std::tanh(p0_ / p1_), sech2 / p1_, -2.0 * th * sech2 / (p1_ * p1_)};
      }
      case ProfileKind::Tabulated:
        break;
    }
    return {0.0, 0.0, 0.0};
  }

  double U(double y) const { return eval(y).u; }
  double U1(double y) const { return eval(y).u1; }
  double U2(double y) const { return eval(y).u2; }

  // Deterministic sample table on a uniform grid, used for fingerprinting and checks.
  std::vector<ProfileSample> sample_table(std::size_t n) const {
    std::vector<ProfileSample> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = eval(y_max_ * double(i) / double(n - 1));
    return out;
  }

  const ProfileSpec& spec() const { return spec_; }

 private:
  friend ShearProfile build_profile(const ProfileSpec&, double, const ProfileTolerances&);

  ProfileKind kind_ = ProfileKind::Exp;
  ProfileSpec spec_;
  double p0_ = 1.0, p1_ = 1.0;
  QuinticHermiteTable table_;
  double u_plus_ = 0.0;
  double tail_rate_ = 1.0;
  double y_max_ = 30.0;
  bool window_ = false;
  double range_lo_ = 0.0, range_hi_ = 0.0;
  std::vector<ExtremalLayer> layers_;
  ProfileTolerances tol_;
};

namespace detail {

inline double brent_root(const std::function<double(double)>& f, double a, double b, double tol) {
  boost::uintmax_t it = 200;
  auto stop = [tol](double x, double y) { return std::abs(x - y) <= tol; };
  double fa = f(a), fb = f(b);
  if (fa == 0) return a;
  if (fb == 0) return b;
  auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, stop, it);
  return 0.5 * (r.first + r.second);
}

}  // namespace detail

inline ShearProfile build_profile(const ProfileSpec& spec, double y_max = 30.0,
                                  const ProfileTolerances& tol = {}) {
  if (!(y_max > 0)) throw ValidationError("y_max must be positive");
  if (!(tol.tol_root > 0) || !(tol.tol_nondeg > 0)) throw ValidationError("tolerances must be positive");

  ShearProfile p;
  p.kind_ = spec.kind;
  p.spec_ = spec;
  p.y_max_ = y_max;
  p.tol_ = tol;

  switch (spec.kind) {
    case ProfileKind::Exp:
      p.p0_ = spec.param("u_plus", 1.0);
      if (p.p0_ == 0) throw ValidationError("builtin-exp needs u_plus != 0");
      p.u_plus_ = p.p0_;
      p.tail_rate_ = 1.0;
      break;
    case ProfileKind::Jet:
      p.u_plus_ = 0.0;
      p.tail_rate_ = 1.0;
      break;
    case ProfileKind::LinearWindow:
      p.p0_ = spec.param("slope", 1.0);
      if (p.p0_ == 0) throw ValidationError("builtin-linear-window needs slope != 0");
      p.window_ = true;
      p.u_plus_ = p.p0_ * y_max;
      p.tail_rate_ = 1.0;
      break;
    case ProfileKind::ParabolaWindow:
      p.window_ = true;
      p.u_plus_ = y_max * y_max;
      p.tail_rate_ = 1.0;
      break;
    case ProfileKind::Tanh:
      p.p0_ = spec.param("y_i", 1.0);
      p.p1_ = spec.param("delta", 0.5);
      if (!(p.p1_ > 0)) throw ValidationError("builtin-tanh needs delta > 0");
      p.u_plus_ = 1.0 + std::tanh(p.p0_ / p.p1_);
      p.tail_rate_ = 2.0 / p.p1_;
      break;
    case ProfileKind::Tabulated: {
      if (!spec.table_path) throw ValidationError("tabulated profile needs a table path");
      p.table_ = QuinticHermiteTable::from_csv(*spec.table_path);
      p.u_plus_ = p.table_.eval(p.table_.y_last()).u;
      p.tail_rate_ = spec.param("tail_rate", 1.0);
      if (p.table_.y_last() < y_max) p.y_max_ = std::min(y_max, p.table_.y_last());
      break;
    }
  }
  p.tail_rate_ = spec.param("tail_rate", p.tail_rate_);
  if (!(p.tail_rate_ > 0)) throw ValidationError("tail_rate must be positive");

  // Dense deterministic scan used by the range, tail and extremum checks.
  const std::size_t n_scan = 30001;
  std::vector<double> ys(n_scan);
  std::vector<ProfileSample> ss(n_scan);
  for (std::size_t i = 0; i < n_scan; ++i) {
    ys[i] = p.y_max_ * double(i) / double(n_scan - 1);
    ss[i] = p.eval(ys[i]);
  }
  p.range_lo_ = p.range_hi_ = ss[0].u;
  for (auto& s : ss) {
    p.range_lo_ = std::min(p.range_lo_, s.u);
    p.range_hi_ = std::max(p.range_hi_, s.u);
  }
  if (!p.window_) {
    const double u_scale = std::max(1.0, std::abs(p.range_hi_ - p.range_lo_));
    if (std::abs(ss[0].u) > tol.tol_root * u_scale) throw ValidationError("profile must satisfy U(0) = 0");
    if (std::abs(ss[0].u1) <= tol.tol_root * u_scale) throw ValidationError("profile must satisfy U'(0) != 0");
    if (std::exp(-p.tail_rate_ * p.y_max_) >= 1e-10)
      throw ValidationError("y_max too small for the tail rate: need exp(-rate*y_max) < 1e-10");
    double cmax = 0.0;
    for (std::size_t i = 0; i < n_scan; ++i) {
      double w = std::exp(p.tail_rate_ * ys[i]);
      cmax = std::max({cmax, std::abs(ss[i].u - p.u_plus_) * w, std::abs(ss[i].u2) * w});
    }
    if (!(cmax < 1e8 * u_scale)) throw ValidationError("profile does not converge exponentially to U+");
  }

  // Past this index the profile sits within tol_root of U+ with a flat
  // slope; sign flips of U' there are interpolation noise, not extrema.
  std::size_t flat = n_scan;
  if (!p.window_) {
    const double eps = tol.tol_root * std::max(1.0, std::abs(p.range_hi_ - p.range_lo_));
    while (flat > 1 && std::abs(ss[flat - 1].u - p.u_plus_) <= eps && std::abs(ss[flat - 1].u1) <= eps) --flat;
  }

  // Extremal layers: sign changes of U' on the open interval.
  std::function<double(double)> d1 = [&p](double y) { return p.eval(y).u1; };
  for (std::size_t i = 1; i + 1 < std::min(flat, n_scan); ++i) {
    double a = ss[i].u1, b = ss[i + 1].u1;
    bool flips = (a < 0 && b > 0) || (a > 0 && b < 0) || (b == 0 && i + 2 < n_scan);
    if (!flips) continue;
    double y0 = detail::brent_root(d1, ys[i], ys[i + 1], 1e-15);
    auto s = p.eval(y0);
    if (std::abs(s.u2) <= tol.tol_nondeg)
      throw DegenerateExtremumError("degenerate extremum at y = " + std::to_string(y0));
    p.layers_.push_back({y0, s.u, s.u2});
    if (b == 0) ++i;
  }
  // Tangential zeros of U' (no sign change) are degenerate by definition.
  for (std::size_t i = 1; i + 1 < std::min(flat, n_scan); ++i) {
    double a = std::abs(ss[i - 1].u1), b = std::abs(ss[i].u1), c = std::abs(ss[i + 1].u1);
    if (b < a && b < c && b < tol.tol_root) {
      bool known = std::any_of(p.layers_.begin(), p.layers_.end(),
                               [&](const ExtremalLayer& l) { return std::abs(l.y_extr - ys[i]) < 2 * p.y_max_ / n_scan; });
      if (!known) throw DegenerateExtremumError("U' touches zero without changing sign at y = " + std::to_string(ys[i]));
    }
  }
  for (std::size_t i = 0; i < p.layers_.size(); ++i)
    for (std::size_t j = i + 1; j < p.layers_.size(); ++j)
      if (std::abs(p.layers_[i].c_extr - p.layers_[j].c_extr) < tol.tol_root * std::max(1.0, std::abs(p.layers_[i].c_extr)))
        throw DuplicateExtremalVelocityError("two extremal layers share the velocity " +
                                             std::to_string(p.layers_[i].c_extr));
  return p;
}

inline ShearProfile builtin_profile(ProfileKind kind, std::map<std::string, double> params = {},
                                    double y_max = 30.0) {
  ProfileSpec s;
  s.kind = kind;
  s.params = std::move(params);
  return build_profile(s, y_max);
}

// Height where U = c_real inside the bracket, by a bracketing solve.
inline double critical_layer(const ShearProfile& p, double c_real, double lo, double hi) {
  if (!(hi > lo)) throw ValidationError("critical_layer: empty bracket");
  const int n = 512;
  int sign = 0;
  for (int i = 0; i <= n; ++i) {
    double d = p.U1(lo + (hi - lo) * i / n);
    int s = (d > 0) - (d < 0);
    if (s == 0) continue;
    if (sign != 0 && s != sign) throw MultiRootError("U' changes sign inside the bracket");
    sign = s;
  }
  double fa = p.U(lo) - c_real, fb = p.U(hi) - c_real;
  double tol = p.tolerances().tol_root;
  if (std::abs(fa) < tol) return lo;
  if (std::abs(fb) < tol) return hi;
  if (fa * fb > 0) throw NoRootError("velocity " + std::to_string(c_real) + " not attained on the bracket");
  std::function<double(double)> f = [&](double y) { return p.U(y) - c_real; };
  return detail::brent_root(f, lo, hi, 1e-15);
}

}  // namespace rayleigh
