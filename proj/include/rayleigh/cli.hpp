#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rayleigh/config.hpp"
#include "rayleigh/depletion.hpp"
#include "rayleigh/evolution.hpp"
#include "rayleigh/greens.hpp"
#include "rayleigh/io.hpp"
#include "rayleigh/spectrum.hpp"

namespace rayleigh::cli {

enum ExitCode { kOk = 0, kConfig = 1, kAudit = 2, kNumeric = 3 };

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> k = {
      "alpha", "threads",
      "profile.kind", "profile.u_plus", "profile.slope", "profile.y_i", "profile.delta", "profile.tail_rate",
      "profile.table",
      "numerics.y_max", "numerics.tol_root", "numerics.tol_nondeg", "numerics.rtol", "numerics.tol_extr",
      "numerics.real_axis_eps", "numerics.grid_nodes", "numerics.anchor",
      "data.kind", "data.center", "data.width", "data.amp_re", "data.amp_im",
      "spectrum.re_lo", "spectrum.re_hi", "spectrum.im_floor", "spectrum.im_lo", "spectrum.im_hi",
      "spectrum.embed_scan", "spectrum.tol_embed", "spectrum.max_depth",
      "mode.c_re", "mode.c_im", "mode.nodes",
      "kernel.c_re", "kernel.c_im", "kernel.nodes", "kernel.y_hi",
      "evolve.method", "evolve.times", "evolve.y_lo", "evolve.y_hi", "evolve.y_count", "evolve.dt",
      "evolve.direct_nodes", "evolve.direct_y_top", "evolve.modes",
      "contour.A", "contour.eps", "contour.panel", "contour.max_panel", "contour.eps_check",
      "depletion.y_lo", "depletion.y_hi", "depletion.y_count", "depletion.band", "depletion.fit_lo",
      "depletion.fit_hi", "depletion.fit_points",
      "decayfit.source", "decayfit.quantity", "decayfit.t_lo", "decayfit.t_hi", "decayfit.t_count",
      "decayfit.min_r2", "decayfit.synthetic_amp", "decayfit.synthetic_exponent",
  };
  return k;
}

struct Run {
  Config cfg;
  std::filesystem::path out;
  unsigned threads = 0;
};

inline ShearProfile make_profile(const Config& c) {
  ProfileSpec s;
  s.kind = parse_profile_kind(c.str("profile.kind"));
  for (const char* key : {"u_plus", "slope", "y_i", "delta", "tail_rate"}) {
    std::string full = std::string("profile.") + key;
    if (c.has(full)) s.params[key] = c.num(full);
  }
  if (c.has("profile.table")) s.table_path = c.str("profile.table");
  ProfileTolerances tol;
  tol.tol_root = c.positive("numerics.tol_root", tol.tol_root);
  tol.tol_nondeg = c.positive("numerics.tol_nondeg", tol.tol_nondeg);
  return build_profile(s, c.positive("numerics.y_max", 30.0), tol);
}

inline SolverOptions make_solver(const Config& c) {
  SolverOptions o;
  o.rtol = c.positive("numerics.rtol", o.rtol);
  o.tol_extr = c.positive("numerics.tol_extr", o.tol_extr);
  o.real_axis_eps = c.positive("numerics.real_axis_eps", o.real_axis_eps);
  o.grid_nodes = static_cast<std::size_t>(c.integer("numerics.grid_nodes", long(o.grid_nodes)));
  if (o.grid_nodes < 4) throw ValidationError("numerics.grid_nodes must be at least 4");
  o.anchor = c.num("numerics.anchor", o.anchor);
  return o;
}

inline double alpha_of(const Config& c) {
  double a = c.num("alpha");
  if (!(a > 0)) throw ValidationError("alpha must be positive");
  return a;
}

inline InitialData make_data(const Config& c, double alpha) {
  std::string kind = c.str("data.kind", "gaussian");
  if (kind == "zero") {
    InitialData d;
    d.alpha = alpha;
    d.omega0 = [](cplx) { return cplx(0); };
    d.label = "zero";
    return d;
  }
  if (kind != "gaussian") throw ValidationError("data.kind must be gaussian or zero");
  double w = c.positive("data.width", 0.5);
  return gaussian_datum(alpha, c.num("data.center", 0.7), w, cplx(c.num("data.amp_re", 1.0), c.num("data.amp_im", 0.0)));
}

inline std::vector<double> grid_of(const Config& c, const std::string& sec, double lo, double hi, long n) {
  double a = c.num(sec + ".y_lo", lo), b = c.num(sec + ".y_hi", hi);
  long m = c.integer(sec + ".y_count", n);
  if (!(a >= 0) || !(b > a) || m < 4) throw ValidationError(sec + ": need 0 <= y_lo < y_hi and y_count >= 4");
  return uniform_grid(a, b, static_cast<std::size_t>(m));
}

inline SpectrumOptions make_spectrum_options(const Run& r) {
  const Config& c = r.cfg;
  SpectrumOptions so;
  so.solver = make_solver(c);
  so.im_floor = c.num("spectrum.im_floor", so.im_floor);
  if (!(so.im_floor > 0)) throw ValidationError("spectrum.im_floor must be positive");
  so.embed_scan = static_cast<std::size_t>(c.integer("spectrum.embed_scan", long(so.embed_scan)));
  so.tol_embed_rel = c.num("spectrum.tol_embed", so.tol_embed_rel);
  if (so.tol_embed_rel < 0) throw ValidationError("spectrum.tol_embed must be non-negative");
  so.max_depth = int(c.integer("spectrum.max_depth", so.max_depth));
  so.threads = r.threads;
  return so;
}

inline SearchBox make_box(const Config& c, const ShearProfile& p, const SpectrumOptions& so) {
  double w = std::max(p.range_hi() - p.range_lo(), 0.1);
  SearchBox b;
  b.re_lo = c.num("spectrum.re_lo", p.range_lo() - 0.5 * w);
  b.re_hi = c.num("spectrum.re_hi", p.range_hi() + 0.5 * w);
  b.im_lo = c.num("spectrum.im_lo", so.im_floor);
  b.im_hi = c.num("spectrum.im_hi", 1.0);
  return b;
}

inline int cmd_spectrum(const Run& r) {
  const Config& c = r.cfg;
  auto p = make_profile(c);
  double alpha = alpha_of(c);
  auto so = make_spectrum_options(r);
  auto rep = compute_spectrum(p, alpha, make_box(c, p, so), so);
  rep.range_lo = p.range_lo();
  rep.range_hi = p.range_hi();
  rep.interpolation_order = p.interpolation_order();
  io::write_file(r.out / "spectrum.json", io::dump(io::spectrum_json(rep)));
  if (c.has("mode.c_re")) {
    cplx cm(c.num("mode.c_re"), c.num("mode.c_im", 0.0));
    auto grid = uniform_grid(0.0, p.y_max(), std::size_t(c.integer("mode.nodes", 301)));
    auto basis = solve_basis(p, {alpha, cm}, grid, so.solver);
    io::write_file(r.out / "mode_minus.csv", io::mode_solution_csv(basis.psi_minus));
    io::write_file(r.out / "mode_plus.csv", io::mode_solution_csv(basis.psi_plus));
  }
  if (c.has("kernel.c_re")) {
    cplx ck(c.num("kernel.c_re"), c.num("kernel.c_im", 0.0));
    auto grid = uniform_grid(0.0, c.positive("kernel.y_hi", 5.0), std::size_t(c.integer("kernel.nodes", 41)));
    auto k = assemble_greens(p, {alpha, ck}, grid, grid, so.solver, 1e-10, r.threads);
    io::write_file(r.out / "kernel.csv", io::kernel_csv(k));
  }
  if (!rep.audit_ok()) {
    std::cerr << "assumption audit failed (a3/a4 flags in spectrum.json)\n";
    return kAudit;
  }
  return kOk;
}

inline std::vector<double> times_of(const Config& c) {
  if (!c.has("evolve.times")) throw ValidationError("evolve.times is required");
  auto t = c.list("evolve.times");
  if (t.empty()) throw ValidationError("evolve.times is empty");
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] < 0 || (i > 0 && !(t[i] > t[i - 1]))) throw ValidationError("evolve.times must be increasing and >= 0");
  return t;
}

inline ContourSpec make_contour(const Config& c, const ShearProfile& p, double alpha, double t_max) {
  ContourSpec s = default_contour(p, alpha, t_max);
  s.A = c.positive("contour.A", s.A);
  s.eps = c.positive("contour.eps", s.eps);
  s.panel = c.positive("contour.panel", s.panel);
  s.max_panel = c.positive("contour.max_panel", s.max_panel);
  s.eps_check = c.flag("contour.eps_check", true);
  if (s.A < 2 * p.max_abs_u()) throw ValidationError("contour.A must be at least 2 max|U|");
  return s;
}

inline EvolutionField run_contour(const Run& r, const ShearProfile& p, const InitialData& d,
                                  const std::vector<double>& times, const std::vector<double>& grid) {
  const Config& c = r.cfg;
  auto spec = make_contour(c, p, d.alpha, times.back());
  EvolutionOptions eo;
  eo.solver = make_solver(c);
  eo.threads = r.threads;
  eo.anchor = eo.solver.anchor;
  SpectrumReport rep;
  const SpectrumReport* prep = nullptr;
  if (c.flag("evolve.modes", true)) {
    auto so = make_spectrum_options(r);
    rep = compute_spectrum(p, d.alpha, make_box(c, p, so), so);
    prep = &rep;
  }
  return evolve_contour(p, d, spec, times, grid, prep, eo);
}

inline EvolutionField run_direct(const Run& r, const ShearProfile& p, const InitialData& d,
                                 const std::vector<double>& times, const std::vector<double>& grid) {
  const Config& c = r.cfg;
  DirectOptions o;
  o.nodes = static_cast<std::size_t>(c.integer("evolve.direct_nodes", long(o.nodes)));
  if (o.nodes < 8) throw ValidationError("evolve.direct_nodes must be at least 8");
  o.y_top = c.num("evolve.direct_y_top", o.y_top);
  double dt = c.positive("evolve.dt", 0.01);
  return evolve_direct(p, d, times, dt, grid, o);
}

inline int cmd_evolve(const Run& r) {
  const Config& c = r.cfg;
  auto p = make_profile(c);
  double alpha = alpha_of(c);
  auto d = make_data(c, alpha);
  auto times = times_of(c);
  auto grid = grid_of(c, "evolve", 0.0, 10.0, 201);
  std::string method = c.str("evolve.method", "contour");
  if (method != "contour" && method != "direct" && method != "both")
    throw ValidationError("evolve.method must be contour, direct or both");
  if (method == "contour") {
    io::write_file(r.out / "field.csv", io::field_csv(run_contour(r, p, d, times, grid)));
  } else if (method == "direct") {
    io::write_file(r.out / "field.csv", io::field_csv(run_direct(r, p, d, times, grid)));
  } else {
    auto fc = run_contour(r, p, d, times, grid);
    auto fd = run_direct(r, p, d, times, grid);
    io::write_file(r.out / "field_contour.csv", io::field_csv(fc));
    io::write_file(r.out / "field_direct.csv", io::field_csv(fd));
    io::Json j;
    j["schema"] = "evolve-comparison";
    j["schema_version"] = io::kSchemaVersion;
    j["max_rel_diff_omega"] = detail::max_rel_diff(fc.omega, fd.omega);
    j["max_rel_diff_psi"] = detail::max_rel_diff(fc.psi, fd.psi);
    j["eps_consistency"] = fc.eps_consistency;
    j["times"] = times;
    io::write_file(r.out / "comparison.json", io::dump(j));
  }
  return kOk;
}

inline int cmd_depletion(const Run& r) {
  const Config& c = r.cfg;
  auto p = make_profile(c);
  double alpha = alpha_of(c);
  auto d = make_data(c, alpha);
  auto grid = grid_of(c, "depletion", 0.0, 4.0, 201);
  DepletionOptions o;
  o.solver = make_solver(c);
  o.anchor = o.solver.anchor;
  o.band = c.positive("depletion.band", o.band);
  o.fit_lo = c.positive("depletion.fit_lo", o.fit_lo);
  o.fit_hi = c.positive("depletion.fit_hi", o.fit_hi);
  o.fit_points = static_cast<std::size_t>(c.integer("depletion.fit_points", long(o.fit_points)));
  if (!(o.fit_hi > o.fit_lo) || o.fit_points < 2) throw ValidationError("depletion fit window is empty");
  o.threads = r.threads;
  auto dp = compute_omega_inf(p, d, grid, o);
  io::write_file(r.out / "depletion.csv", io::depletion_csv(dp));
  io::write_file(r.out / "depletion.json", io::dump(io::depletion_json(dp)));
  return kOk;
}

inline int cmd_decayfit(const Run& r) {
  const Config& c = r.cfg;
  double t_lo = c.positive("decayfit.t_lo", 20.0), t_hi = c.positive("decayfit.t_hi", 200.0);
  long n = c.integer("decayfit.t_count", 8);
  if (!(t_hi > t_lo) || n < 2) throw ValidationError("decayfit window is empty");
  double min_r2 = c.num("decayfit.min_r2", 0.95);
  auto times = log_spaced(t_lo, t_hi, std::size_t(n));
  std::string source = c.str("decayfit.source", "contour");
  DecayFit fit;
  if (source == "synthetic") {
    // A t^{-p} series fed through the same fitting path.
    double a = c.num("decayfit.synthetic_amp", 1.0), e = c.num("decayfit.synthetic_exponent", -2.0);
    std::vector<double> at, v;
    for (double t : times) {
      at.push_back(t);
      v.push_back(a * std::pow(t, e));
    }
    auto pf = fit_power_law(at, v);
    fit.t_lo = t_lo;
    fit.t_hi = t_hi;
    fit.times = times;
    fit.norms = v;
    fit.exponent = pf.exponent;
    fit.r2 = pf.r2;
    if (fit.r2 < min_r2) throw PoorFitError("decay fit r2 below threshold");
  } else if (source == "contour") {
    auto p = make_profile(c);
    double alpha = alpha_of(c);
    auto d = make_data(c, alpha);
    auto grid = grid_of(c, "evolve", 0.0, 10.0, 201);
    auto q = parse_decay_quantity(c.str("decayfit.quantity", "psi"));
    auto f = run_contour(r, p, d, times, grid);
    std::vector<cplx> winf;
    if (q == DecayQuantity::OmegaRemainder) {
      DepletionOptions o;
      o.solver = make_solver(c);
      o.anchor = o.solver.anchor;
      o.threads = r.threads;
      winf = compute_omega_inf(p, d, grid, o).omega_inf;
    }
    fit = fit_decay(p, f, q, t_lo, t_hi, winf.empty() ? nullptr : &winf, min_r2);
  } else {
    throw ValidationError("decayfit.source must be contour or synthetic");
  }
  io::write_file(r.out / "decayfit.json", io::dump(io::decay_fit_json(fit)));
  return kOk;
}

// Parses arguments, runs one subcommand and maps failures onto exit codes.
inline int main(int argc, char** argv) {
  CLI::App app{"Rayleigh shear-flow solver: spectrum, evolution, depletion and decay fits"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";
  int threads = 0;
  std::string which;
  for (const char* name : {"spectrum", "evolve", "depletion", "decayfit"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "flat key = value config file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads (RAYLEIGH_MAX_THREADS caps it)")->check(CLI::NonNegativeNumber);
    sub->callback([&which, name] { which = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }
  try {
    Run r{Config::load(config_path, known_keys()), out_dir, 0};
    long cfg_threads = r.cfg.integer("threads", 0);
    if (cfg_threads < 0) throw ValidationError("threads must be non-negative");
    r.threads = resolve_threads(threads > 0 ? unsigned(threads) : unsigned(cfg_threads));
    if (which == "spectrum") return cmd_spectrum(r);
    if (which == "evolve") return cmd_evolve(r);
    if (which == "depletion") return cmd_depletion(r);
    return cmd_decayfit(r);
  } catch (const ContourEigenvalueError& e) {
    std::cerr << "error: " << e.what() << "\n"
              << "hint: move contour.eps away from the eigenvalue's imaginary part (or set it well above/below)\n";
    return kNumeric;
  } catch (const ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const AuditError& e) {
    std::cerr << "audit failure: " << e.what() << "\n";
    return kAudit;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  }
}

}  // namespace rayleigh::cli
