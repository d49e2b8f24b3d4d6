#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "audits.hpp"
#include "certificate.hpp"
#include "decay_fit.hpp"
#include "scenario.hpp"

namespace memwave {

using json = nlohmann::json;

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
}

/// Non-finite values are emitted as their decimal names instead of JSON null,
/// so an unbounded radius stays distinguishable from a missing field.
inline json json_num(double v) {
  if (std::isfinite(v)) return v;
  return fmt_g(v);
}

inline std::string energy_csv(const Trajectory& tr, double g_sup_norm) {
  const auto script = running_script_E(tr.energy, g_sup_norm);
  std::string s = "t,kinetic,elastic,source,memory,gain_window,total,running_max\n";
  for (std::size_t i = 0; i < tr.energy.size(); ++i) {
    const auto& e = tr.energy[i].e;
    s += fmt_g(tr.energy[i].t) + "," + fmt_g(e.kinetic) + "," + fmt_g(e.elastic) +
         "," + fmt_g(e.source) + "," + fmt_g(e.memory) + "," +
         fmt_g(e.gain_window) + "," + fmt_g(e.total) + "," + fmt_g(script[i]) +
         "\n";
  }
  return s;
}

inline std::string trajectory_csv(const System& sys, const Trajectory& tr) {
  std::string s = "t,E";
  for (int m = 1; m <= sys.sp.n_modes; ++m) s += ",u_" + std::to_string(m);
  for (int m = 1; m <= sys.sp.n_modes; ++m) s += ",v_" + std::to_string(m);
  s += ",extrapolated\n";
  for (std::size_t i = 0; i < tr.energy.size(); ++i) {
    const std::size_t row = tr.sample_row[i];
    s += fmt_g(tr.energy[i].t) + "," + fmt_g(tr.energy[i].e.total);
    for (int m = 0; m < sys.sp.n_modes; ++m) s += "," + fmt_g(tr.buf.u[row][m]);
    for (int m = 0; m < sys.sp.n_modes; ++m) s += "," + fmt_g(tr.buf.v[row][m]);
    s += std::string(",") + (tr.sample_extrapolated[i] ? "1" : "0") + "\n";
  }
  return s;
}

inline json hypotheses_json(const HypothesisReport& r) {
  json items = json::array();
  for (const auto& c : r.checks)
    items.push_back({{"name", c.name}, {"status", c.status}, {"detail", c.detail}});
  return {{"checks", items},
          {"hard_fail", r.hard_fail},
          {"compiled", r.compiled}};
}

inline std::string hypotheses_text(const HypothesisReport& r) {
  std::string s;
  for (const auto& c : r.checks)
    s += c.name + " = " + c.status + (c.detail.empty() ? "" : "  # " + c.detail) +
         "\n";
  s += std::string("overall = ") + (r.hard_fail ? "fail" : "pass") + "\n";
  return s;
}

inline json certificate_json(const CertificateReport& c) {
  return {{"b", json_num(c.b_norm)},
          {"tau_bar", json_num(c.tau_bar)},
          {"M", json_num(c.M)},
          {"omega", json_num(c.omega)},
          {"beta_tilde", json_num(c.beta_tilde)},
          {"K", json_num(c.K)},
          {"fit_feasible", c.fit_feasible},
          {"gamma", json_num(c.gamma)},
          {"omega_prime", json_num(c.omega_prime)},
          {"slope", json_num(c.slope)},
          {"T", json_num(c.T)},
          {"C_T", json_num(c.C_T)},
          {"window_sup_T", json_num(c.window_sup_T)},
          {"C_star_T", json_num(c.C_star_T)},
          {"rho0", json_num(c.rho0)},
          {"rho", json_num(c.rho)},
          {"rho_unbounded", c.rho_unbounded},
          {"halvings", c.halvings},
          {"C_rho", json_num(c.C_rho)},
          {"L_C_rho", json_num(c.L_C_rho)},
          {"L_threshold", json_num(c.L_threshold)},
          {"mu", json_num(c.mu)},
          {"C_hat", json_num(c.C_hat)},
          {"C_tilde", json_num(c.C_tilde)},
          {"U0_norm", json_num(c.U0_norm)},
          {"g_sup", json_num(c.g_sup)},
          {"g_sup_weighted", json_num(c.g_sup_weighted)},
          {"E0", json_num(c.E0)},
          {"script_E0", json_num(c.script_E0)},
          {"smallness_state", c.smallness_state},
          {"smallness_history", c.smallness_history},
          {"data_within", c.data_within},
          {"certified", c.certified},
          {"verdict", c.verdict}};
}

inline std::string certificate_text(const CertificateReport& c) {
  std::string s;
  auto put = [&](const char* k, double v) {
    s += std::string(k) + " = " + fmt_g(v) + "\n";
  };
  put("b", c.b_norm);
  put("tau_bar", c.tau_bar);
  put("M", c.M);
  put("omega", c.omega);
  put("beta_tilde", c.beta_tilde);
  put("K", c.K);
  s += std::string("fit_feasible = ") + (c.fit_feasible ? "yes" : "no") + "\n";
  put("gamma", c.gamma);
  put("omega_prime", c.omega_prime);
  put("T", c.T);
  put("C_T", c.C_T);
  put("C_star_T", c.C_star_T);
  put("rho", c.rho);
  put("C_rho", c.C_rho);
  put("L_C_rho", c.L_C_rho);
  put("mu", c.mu);
  put("C_hat", c.C_hat);
  put("C_tilde", c.C_tilde);
  put("U0_norm", c.U0_norm);
  put("g_sup", c.g_sup);
  put("E0", c.E0);
  put("script_E0", c.script_E0);
  s += "verdict = " + c.verdict + "\n";
  return s;
}

inline json audit_json(const GronwallAudit& a) {
  return {{"status", a.status},
          {"reason", a.reason},
          {"violations", a.violations},
          {"max_ratio", json_num(a.max_ratio)},
          {"first_violation_t", json_num(a.first_violation_t)},
          {"tol", json_num(a.tol)}};
}

inline json audit_json(const LowerBoundAudit& a) {
  return {{"status", a.status},
          {"reason", a.reason},
          {"violations", a.violations},
          {"min_margin", json_num(a.min_margin)},
          {"e0_positive", a.e0_positive},
          {"slack", json_num(a.slack)}};
}

inline json audit_json(const DerivativeAudit& a) {
  return {{"status", a.status},
          {"reason", a.reason},
          {"violations", a.violations},
          {"max_excess", json_num(a.max_excess)},
          {"slack", json_num(a.slack)}};
}

inline json decay_json(const DecayFit& f) {
  return {{"rate", json_num(f.rate)},
          {"amplitude", json_num(f.amplitude)},
          {"r2", json_num(f.r2)},
          {"used_peaks", f.used_peaks},
          {"n_points", f.n_points},
          {"window_start", json_num(f.window_start)}};
}

}  // namespace memwave
