#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "rayleigh/errors.hpp"
#include "rayleigh/evolution.hpp"
#include "rayleigh/greens.hpp"
#include "rayleigh/parallel.hpp"

namespace rayleigh {

// Logarithmic weight of the pointwise bounds near an extremal layer.
inline double theta_weight(double x) {
  double a = std::abs(x);
  if (a > 1.0) return 1.0;
  if (a == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 - std::log(a);
}

struct PowerFit {
  double exponent = 0;
  double intercept = 0;
  double r2 = 0;
  std::size_t samples = 0;
};

// Least squares of log y against log x.
inline PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("power-law fit needs matching samples");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw NumericError("power-law fit needs positive data");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  const double n = double(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0) throw NumericError("power-law fit needs distinct abscissae");
  PowerFit f;
  f.exponent = sxy / sxx;
  f.intercept = my - f.exponent * mx;
  f.r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  f.samples = lx.size();
  return f;
}

struct LayerDiagnostics {
  double y_extr = 0;
  double abs_at_extr = 0;
  double max_abs = 0;
  double fit_exponent = 0;
  double fit_r2 = 0;
  double zeta_b_exponent = 0;
  double zeta_b_r2 = 0;
};

struct DepletionProfile {
  double alpha = 1;
  std::vector<double> ygrid;
  // Long-time profile of omega e^{i alpha U t}: the full resolvent at c = U(y).
  std::vector<cplx> omega_inf;
  // Interior and boundary parts of the same quantity.
  std::vector<cplx> zeta_int, zeta_b;
  std::vector<LayerDiagnostics> layers;
};

struct DepletionOptions {
  SolverOptions solver;
  double anchor = -1.0;
  double band = 1e-3;                  // nodes closer than this to y_extr are interpolated
  double fit_lo = 1e-2, fit_hi = 1e-1; // distance window of the local fit
  std::size_t fit_points = 10;         // per side
  unsigned threads = 0;
};

namespace detail {

struct DiagonalValue {
  cplx full, interior, boundary;
};

// omega0 - i alpha U''(y) psi_c(y) at c = U(y), with c approached from above.
inline DiagonalValue diagonal_value(const ShearProfile& p, const InitialData& d, double y, double anchor,
                                    const SolverOptions& opt) {
  const cplx w0 = d.omega0(cplx(y, 0));
  if (y == 0.0) return {w0, w0, 0.0};
  auto e = p.eval(y);
  ComplexForcing f = [&](cplx x) { return d.forcing(x); };
  ResolventOptions ro;
  ro.anchor = anchor;
  // The anchor must not be a critical point of this c.
  if (std::abs(p.U(ro.anchor) - e.u) < 1e-6) ro.anchor *= 1.1;
  auto r = resolvent(p, d.alpha, cplx(e.u, 0), f, {y}, opt, ro);
  const cplx k = cplx(0, -d.alpha) * e.u2;
  return {w0 + k * r.psi[0], w0 + k * r.psi_int[0], k * r.psi_b[0]};
}

inline DiagonalValue lagrange(const std::array<double, 4>& x, const std::array<DiagonalValue, 4>& v, double y) {
  DiagonalValue out{0.0, 0.0, 0.0};
  for (int j = 0; j < 4; ++j) {
    double l = 1;
    for (int k = 0; k < 4; ++k)
      if (k != j) l *= (y - x[k]) / (x[j] - x[k]);
    out.full += l * v[j].full;
    out.interior += l * v[j].interior;
    out.boundary += l * v[j].boundary;
  }
  return out;
}

// Extremal velocities are excluded from the real-axis extension, so the
// values in a small band around y_extr come from the cubic through
// y_extr +- band, y_extr +- 2 band.
struct ExtremalBand {
  double y_extr;
  std::array<double, 4> x;
  std::array<DiagonalValue, 4> v;
  double half() const { return x[2] - y_extr; }
};

inline std::vector<ExtremalBand> extremal_bands(const ShearProfile& p, const InitialData& d, double anchor,
                                                const DepletionOptions& o) {
  std::vector<ExtremalBand> out;
  for (const auto& l : p.extremal_layers()) {
    // The band must also clear the excluded velocity radius tol_extr.
    const double b = std::max(o.band, 2.0 * std::sqrt(2.0 * o.solver.tol_extr / std::abs(l.us2_at_extr)));
    if (!(b > 0) || l.y_extr - 2 * b <= 0 || l.y_extr + 2 * b >= p.y_max())
      throw ExtremalWindowError("interpolation band around y_extr leaves the domain");
    for (const auto& other : p.extremal_layers())
      if (&other != &l && std::abs(other.y_extr - l.y_extr) < 4 * b)
        throw ExtremalWindowError("interpolation band covers two extremal layers");
    ExtremalBand eb;
    eb.y_extr = l.y_extr;
    eb.x = {l.y_extr - 2 * b, l.y_extr - b, l.y_extr + b, l.y_extr + 2 * b};
    for (int j = 0; j < 4; ++j) eb.v[j] = diagonal_value(p, d, eb.x[j], anchor, o.solver);
    out.push_back(eb);
  }
  return out;
}

}  // namespace detail

// Limiting vorticity profile omega_inf(y) = lim omega(t, y) e^{i alpha U(y) t}
// together with its interior and boundary parts, and per-layer diagnostics.
inline DepletionProfile compute_omega_inf(const ShearProfile& p, const InitialData& d, const std::vector<double>& ygrid,
                                          const DepletionOptions& o = {}) {
  validate_initial_data(p, d);
  const double anchor = o.anchor >= 0 ? o.anchor : default_anchor(p);
  auto bands = detail::extremal_bands(p, d, anchor, o);
  auto value = [&](double y) -> detail::DiagonalValue {
    for (const auto& b : bands)
      if (std::abs(y - b.y_extr) < b.half()) return detail::lagrange(b.x, b.v, y);
    return detail::diagonal_value(p, d, y, anchor, o.solver);
  };

  DepletionProfile out;
  out.alpha = d.alpha;
  out.ygrid = ygrid;
  auto vals = parallel_map<detail::DiagonalValue>(ygrid.size(), [&](std::size_t i) { return value(ygrid[i]); }, o.threads);
  for (const auto& v : vals) {
    out.omega_inf.push_back(v.full);
    out.zeta_int.push_back(v.interior);
    out.zeta_b.push_back(v.boundary);
  }
  double global_max = 0;
  for (const auto& w : out.omega_inf) global_max = std::max(global_max, std::abs(w));

  // Local power law of |omega_inf| and |zeta_b| on both sides of every layer,
  // sampled at log-spaced offsets independent of the output grid.
  for (const auto& b : bands) {
    LayerDiagnostics ld;
    ld.y_extr = b.y_extr;
    ld.abs_at_extr = std::abs(detail::lagrange(b.x, b.v, b.y_extr).full);
    ld.max_abs = global_max;
    std::vector<double> offs;
    for (std::size_t k = 0; k < o.fit_points; ++k)
      offs.push_back(o.fit_lo * std::pow(o.fit_hi / o.fit_lo, double(k) / double(o.fit_points - 1)));
    std::vector<double> ys;
    for (double s : offs) {
      if (b.y_extr - s > 0) ys.push_back(b.y_extr - s);
      ys.push_back(b.y_extr + s);
    }
    auto vs = parallel_map<detail::DiagonalValue>(ys.size(), [&](std::size_t i) { return value(ys[i]); }, o.threads);
    std::vector<double> dist, a_full, a_b;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      dist.push_back(std::abs(ys[i] - b.y_extr));
      a_full.push_back(std::abs(vs[i].full));
      a_b.push_back(std::abs(vs[i].boundary));
    }
    // A vanishing datum leaves nothing to fit: exponents stay 0 with r2 = 0.
    if (std::all_of(a_full.begin(), a_full.end(), [](double v) { return v > 0; })) {
      auto ff = fit_power_law(dist, a_full);
      ld.fit_exponent = ff.exponent;
      ld.fit_r2 = ff.r2;
    }
    if (std::all_of(a_b.begin(), a_b.end(), [](double v) { return v > 0; })) {
      auto fb = fit_power_law(dist, a_b);
      ld.zeta_b_exponent = fb.exponent;
      ld.zeta_b_r2 = fb.r2;
    }
    out.layers.push_back(ld);
  }
  return out;
}

// Boundary part i alpha U'' psi^b at c = U(y) (sign as in omega_inf). Audits
// that D stays away from zero at the extremal velocities first.
inline std::vector<cplx> depletion_boundary_part(const ShearProfile& p, const InitialData& d,
                                                 const std::vector<double>& ygrid, const DepletionOptions& o = {},
                                                 double a3_floor_rel = 1e-4) {
  if (!p.extremal_layers().empty()) {
    SpectrumOptions so;
    so.solver = o.solver;
    so.a3_floor_rel = a3_floor_rel;
    auto ok = audit_a3(p, d.alpha, so);
    for (bool b : ok)
      if (!b) throw A3ViolationError("dispersion relation nearly vanishes near an extremal velocity");
  }
  return compute_omega_inf(p, d, ygrid, o).zeta_b;
}

// Long-time profile read off a time series: mean of omega e^{i alpha U t} over
// the stored times inside [t_lo, t_hi].
inline std::vector<cplx> omega_inf_from_field(const ShearProfile& p, const EvolutionField& f, double t_lo, double t_hi) {
  std::vector<cplx> out(f.ygrid.size(), cplx(0));
  std::size_t count = 0;
  for (std::size_t k = 0; k < f.times.size(); ++k) {
    double t = f.times[k];
    if (t < t_lo || t > t_hi) continue;
    ++count;
    for (std::size_t i = 0; i < f.ygrid.size(); ++i)
      out[i] += f.omega[k][i] * std::exp(cplx(0, f.alpha * p.U(f.ygrid[i]) * t));
  }
  if (count == 0) throw ValidationError("no stored times in the averaging window");
  for (auto& v : out) v /= double(count);
  return out;
}

enum class DecayQuantity { Psi, Dpsi, PsiInt, OmegaRemainder };

inline std::string to_string(DecayQuantity q) {
  switch (q) {
    case DecayQuantity::Psi: return "psi";
    case DecayQuantity::Dpsi: return "dpsi";
    case DecayQuantity::PsiInt: return "psi_int";
    case DecayQuantity::OmegaRemainder: return "omega_remainder";
  }
  return "unknown";
}

inline DecayQuantity parse_decay_quantity(const std::string& s) {
  if (s == "psi") return DecayQuantity::Psi;
  if (s == "dpsi") return DecayQuantity::Dpsi;
  if (s == "psi_int") return DecayQuantity::PsiInt;
  if (s == "omega_remainder") return DecayQuantity::OmegaRemainder;
  throw ValidationError("unknown decay quantity '" + s + "'");
}

struct DecayFit {
  double t_lo = 0, t_hi = 0;
  DecayQuantity quantity = DecayQuantity::Psi;
  double exponent = 0;
  double r2 = 0;
  std::vector<double> times;
  std::vector<double> norms;
};

// Theta weight of the nearest extremal layer; 1 for monotone profiles.
inline double layer_weight(const ShearProfile& p, double y) {
  if (p.extremal_layers().empty()) return 1.0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& l : p.extremal_layers()) best = std::min(best, std::abs(y - l.y_extr));
  return theta_weight(best);
}

// sup_y |q(t, y)| / Theta per stored time.
inline std::vector<double> weighted_sup(const ShearProfile& p, const EvolutionField& f, DecayQuantity q,
                                        const std::vector<cplx>* omega_inf = nullptr) {
  const std::vector<std::vector<cplx>>* src = nullptr;
  switch (q) {
    case DecayQuantity::Psi: src = &f.decay_psi; break;
    case DecayQuantity::Dpsi: src = &f.decay_dpsi; break;
    case DecayQuantity::PsiInt: src = &f.psi_int; break;
    case DecayQuantity::OmegaRemainder:
      if (!omega_inf || omega_inf->size() != f.ygrid.size())
        throw ValidationError("omega_remainder needs omega_inf on the field grid");
      src = &f.decay_omega;
      break;
  }
  if (src->size() != f.times.size()) throw ValidationError("field does not carry the requested quantity");
  std::vector<double> out;
  for (std::size_t k = 0; k < f.times.size(); ++k) {
    double s = 0;
    for (std::size_t i = 0; i < f.ygrid.size(); ++i) {
      cplx v = (*src)[k][i];
      if (q == DecayQuantity::OmegaRemainder)
        v = v * std::exp(cplx(0, f.alpha * p.U(f.ygrid[i]) * f.times[k])) - (*omega_inf)[i];
      double w = layer_weight(p, f.ygrid[i]);
      if (std::isinf(w)) continue;
      s = std::max(s, std::abs(v) / w);
    }
    out.push_back(s);
  }
  return out;
}

// Power law of the weighted sup norm against alpha t over the window.
inline DecayFit fit_decay(const ShearProfile& p, const EvolutionField& f, DecayQuantity q, double t_lo, double t_hi,
                          const std::vector<cplx>* omega_inf = nullptr, double min_r2 = 0.95) {
  auto norms = weighted_sup(p, f, q, omega_inf);
  DecayFit fit;
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  fit.quantity = q;
  std::vector<double> at;
  for (std::size_t k = 0; k < f.times.size(); ++k) {
    if (f.times[k] < t_lo || f.times[k] > t_hi) continue;
    fit.times.push_back(f.times[k]);
    fit.norms.push_back(norms[k]);
    at.push_back(f.alpha * f.times[k]);
  }
  if (fit.times.size() < 8) throw ValidationError("decay fit needs at least 8 times inside the window");
  auto pf = fit_power_law(at, fit.norms);
  fit.exponent = pf.exponent;
  fit.r2 = pf.r2;
  if (fit.r2 < min_r2) throw PoorFitError("decay fit r2 = " + std::to_string(fit.r2) + " below threshold");
  return fit;
}

inline std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  std::vector<double> out;
  for (std::size_t k = 0; k < n; ++k) out.push_back(lo * std::pow(hi / lo, n == 1 ? 0.0 : double(k) / double(n - 1)));
  return out;
}

}  // namespace rayleigh
