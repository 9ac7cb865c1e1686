#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "rayleigh/depletion.hpp"
#include "rayleigh/evolution.hpp"
#include "rayleigh/greens.hpp"
#include "rayleigh/spectrum.hpp"

namespace rayleigh::io {

inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::ordered_json;

// Round-trip text for a double, independent of locale and thread count.
inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string header(const std::string& schema) {
  return "# schema: " + schema + "/" + std::to_string(kSchemaVersion) + "\n";
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write '" + path.string() + "'");
  f << text;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline std::string mode_solution_csv(const ModeSolution& m) {
  std::string s = header("mode-solution");
  s += "# alpha: " + num(m.params.alpha) + "\n";
  s += "# c: " + num(m.params.c.real()) + " " + num(m.params.c.imag()) + "\n";
  s += "# normalization: " + to_string(m.normalization) + "\n";
  s += "y,re_psi,im_psi,re_dpsi,im_dpsi\n";
  for (std::size_t i = 0; i < m.grid.size(); ++i)
    s += num(m.grid[i]) + "," + num(m.psi[i].real()) + "," + num(m.psi[i].imag()) + "," + num(m.dpsi[i].real()) +
         "," + num(m.dpsi[i].imag()) + "\n";
  return s;
}

inline Json spectrum_json(const SpectrumReport& r) {
  Json j;
  j["schema"] = "spectrum-report";
  j["schema_version"] = kSchemaVersion;
  j["alpha"] = r.alpha;
  j["discrete"] = Json::array();
  for (const auto& e : r.discrete)
    j["discrete"].push_back({{"re", e.c.real()},
                             {"im", e.c.imag()},
                             {"residue_re", e.residue_weight.real()},
                             {"residue_im", e.residue_weight.imag()}});
  j["embedded"] = Json::array();
  for (const auto& e : r.embedded) j["embedded"].push_back({{"c", e.c}, {"simple", e.simple}});
  j["range"] = {{"lo", r.range_lo}, {"hi", r.range_hi}};
  bool a3 = std::all_of(r.a3_ok.begin(), r.a3_ok.end(), [](bool b) { return b; });
  j["flags"] = {{"a3", a3}, {"a4", r.a4_ok}};
  j["a3_per_layer"] = r.a3_ok;
  j["winding"] = r.winding;
  j["interpolation_order"] = r.interpolation_order;
  return j;
}

inline std::string kernel_csv(const GreensKernel& k) {
  std::string s = header("greens-kernel");
  s += "# alpha: " + num(k.params.alpha) + "\n";
  s += "# c: " + num(k.params.c.real()) + " " + num(k.params.c.imag()) + "\n";
  s += "x,y,re_gint,im_gint,re_gb,im_gb\n";
  for (std::size_t i = 0; i < k.xgrid.size(); ++i)
    for (std::size_t j = 0; j < k.ygrid.size(); ++j) {
      cplx a = k.g_int(i, j), b = k.g_b(i, j);
      s += num(k.xgrid[i]) + "," + num(k.ygrid[j]) + "," + num(a.real()) + "," + num(a.imag()) + "," +
           num(b.real()) + "," + num(b.imag()) + "\n";
    }
  return s;
}

inline std::string field_csv(const EvolutionField& f) {
  std::string s = header("evolution-field");
  s += "# method: " + f.method + "\n";
  s += "# alpha: " + num(f.alpha) + "\n";
  s += "t,y,re_psi,im_psi,re_dpsi,im_dpsi,re_omega,im_omega,part\n";
  auto block = [&](const std::vector<std::vector<cplx>>& P, const std::vector<std::vector<cplx>>& DP,
                   const std::vector<std::vector<cplx>>& W, const char* part) {
    for (std::size_t k = 0; k < f.times.size(); ++k)
      for (std::size_t i = 0; i < f.ygrid.size(); ++i)
        s += num(f.times[k]) + "," + num(f.ygrid[i]) + "," + num(P[k][i].real()) + "," + num(P[k][i].imag()) + "," +
             num(DP[k][i].real()) + "," + num(DP[k][i].imag()) + "," + num(W[k][i].real()) + "," +
             num(W[k][i].imag()) + "," + part + "\n";
  };
  block(f.psi, f.dpsi, f.omega, "full");
  if (!f.modes.empty()) {
    std::vector<std::vector<cplx>> P(f.times.size()), DP(f.times.size()), W(f.times.size());
    for (std::size_t k = 0; k < f.times.size(); ++k)
      for (std::size_t i = 0; i < f.ygrid.size(); ++i) {
        P[k].push_back(f.psi[k][i] - f.decay_psi[k][i]);
        DP[k].push_back(f.dpsi[k][i] - f.decay_dpsi[k][i]);
        W[k].push_back(f.omega[k][i] - f.decay_omega[k][i]);
      }
    block(P, DP, W, "modes");
  }
  block(f.decay_psi, f.decay_dpsi, f.decay_omega, "decay");
  return s;
}

inline std::string depletion_csv(const DepletionProfile& d) {
  std::string s = header("depletion-profile");
  s += "# alpha: " + num(d.alpha) + "\n";
  s += "y,re_omega_inf,im_omega_inf,abs_omega_inf\n";
  for (std::size_t i = 0; i < d.ygrid.size(); ++i)
    s += num(d.ygrid[i]) + "," + num(d.omega_inf[i].real()) + "," + num(d.omega_inf[i].imag()) + "," +
         num(std::abs(d.omega_inf[i])) + "\n";
  return s;
}

inline Json depletion_json(const DepletionProfile& d) {
  Json j;
  j["schema"] = "depletion-diagnostics";
  j["schema_version"] = kSchemaVersion;
  j["alpha"] = d.alpha;
  j["layers"] = Json::array();
  for (const auto& l : d.layers)
    j["layers"].push_back({{"y_extr", l.y_extr},
                           {"abs_at_extr", l.abs_at_extr},
                           {"fit_exponent", l.fit_exponent},
                           {"fit_r2", l.fit_r2},
                           {"max_abs", l.max_abs},
                           {"zeta_b_exponent", l.zeta_b_exponent},
                           {"zeta_b_r2", l.zeta_b_r2}});
  return j;
}

inline Json decay_fit_json(const DecayFit& f) {
  Json j;
  j["schema"] = "decay-fit";
  j["schema_version"] = kSchemaVersion;
  j["quantity"] = to_string(f.quantity);
  j["window"] = {f.t_lo, f.t_hi};
  j["exponent"] = f.exponent;
  j["r2"] = f.r2;
  j["times"] = f.times;
  j["norms"] = f.norms;
  return j;
}

}  // namespace rayleigh::io
