#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "config_io.hpp"
#include "reports_io.hpp"
#include "svg_plot.hpp"
#include "version.hpp"

namespace memwave::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitHypothesisFail = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitBlowUp = 4;

/// Priority: explicit flag, then MEMWAVE_OUTDIR, then ./out.
inline std::string resolve_outdir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("MEMWAVE_OUTDIR"); env && *env) return env;
  return "out";
}

namespace detail {

/// Per-invocation bookkeeping for the manifest. Data files stay byte-stable
/// across reruns; only the manifest carries the wall clock.
struct RunContext {
  std::string command;
  std::string config_source;
  std::string outdir;
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;
  json summary = json::object();

  void emit(const std::string& name, const std::string& content) {
    write_text_file(outdir + "/" + name, content);
    outputs.push_back(name);
  }
};

inline void write_manifest(RunContext& ctx, int exit_code) {
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - ctx.start)
                      .count();
  json m = {{"command", ctx.command},
            {"config", ctx.config_source},
            {"outdir", ctx.outdir},
            {"tool", kToolName},
            {"version", kToolVersion},
            {"determinism",
             "no runtime seeds; fixed evaluation order; identical inputs "
             "produce byte-identical data files"},
            {"wall_ms", ms},
            {"exit_code", exit_code},
            {"outputs", ctx.outputs},
            {"warnings", ctx.warnings},
            {"summary", ctx.summary}};
  write_text_file(ctx.outdir + "/manifest.json", m.dump(2) + "\n");
}

inline RunContext make_context(const std::string& command,
                               const std::string& config_source,
                               const std::string& outdir_flag) {
  RunContext ctx;
  ctx.command = command;
  ctx.config_source = config_source;
  ctx.outdir = resolve_outdir(outdir_flag);
  std::filesystem::create_directories(ctx.outdir);
  return ctx;
}

inline int fail(RunContext& ctx, const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  ctx.summary["error"] = e.what();
  write_manifest(ctx, kExitError);
  return kExitError;
}

/// Reads a (t, y) series from a CSV file. With a header, prefers columns
/// named t and E, falling back to t and total (the energy split file);
/// headerless files are taken as two columns.
inline std::vector<std::pair<double, double>> read_series_csv(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open CSV file: " + path);
  std::vector<std::pair<double, double>> out;
  std::string line;
  int t_col = 0, y_col = 1;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      cells.push_back(line.substr(pos, comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (first) {
      first = false;
      char* end = nullptr;
      std::strtod(cells[0].c_str(), &end);
      const bool header = (end == cells[0].c_str());
      if (header) {
        int e_col = -1, total_col = -1;
        for (std::size_t j = 0; j < cells.size(); ++j) {
          if (cells[j] == "t") t_col = static_cast<int>(j);
          if (cells[j] == "E") e_col = static_cast<int>(j);
          if (cells[j] == "total") total_col = static_cast<int>(j);
        }
        y_col = e_col >= 0 ? e_col : total_col;
        if (y_col < 0)
          throw Error("CSV has a header but no E or total column: " + path);
        continue;
      }
      if (cells.size() < 2) throw Error("CSV needs at least two columns");
    }
    if (static_cast<int>(cells.size()) <= std::max(t_col, y_col))
      throw Error("CSV row has too few columns: " + path);
    out.emplace_back(std::strtod(cells[t_col].c_str(), nullptr),
                     std::strtod(cells[y_col].c_str(), nullptr));
  }
  if (out.size() < 2) throw Error("CSV contains fewer than two data rows");
  return out;
}

inline std::vector<std::pair<double, double>> energy_series(
    const Trajectory& tr) {
  std::vector<std::pair<double, double>> s;
  s.reserve(tr.energy.size());
  for (const auto& e : tr.energy) s.emplace_back(e.t, e.e.total);
  return s;
}

/// Replaces (or appends) one key in canonical config text; used by sweeps so
/// overrides go through the same strict parser as everything else.
inline std::string override_config_text(const std::string& text,
                                        const std::string& key,
                                        const std::string& value) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  bool replaced = false;
  while (std::getline(in, line)) {
    const std::size_t eq = line.find('=');
    if (eq != std::string::npos &&
        memwave::detail::trim(line.substr(0, eq)) == key) {
      out << key << " = " << value << "\n";
      replaced = true;
    } else {
      out << line << "\n";
    }
  }
  if (!replaced) out << key << " = " << value << "\n";
  return out.str();
}

}  // namespace detail

/// Checks every standing hypothesis and writes the verdict files. Strict
/// scenarios fail the process on a failed hypothesis; exploratory ones
/// downgrade to warnings.
inline int cmd_validate(const std::string& config_source,
                        const std::string& outdir_flag = "") {
  auto ctx = detail::make_context("validate", config_source, outdir_flag);
  try {
    const ScenarioConfig cfg = resolve_config(config_source);
    const HypothesisReport rep = validate_scenario(cfg);
    ctx.emit("hypotheses.txt", hypotheses_text(rep));
    ctx.emit("hypotheses.json", hypotheses_json(rep).dump(2) + "\n");
    std::cout << hypotheses_text(rep);
    ctx.summary["hard_fail"] = rep.hard_fail;
    int code = kExitOk;
    if (rep.hard_fail) {
      if (cfg.strict) {
        code = kExitHypothesisFail;
      } else {
        ctx.warnings.push_back("hypothesis failures downgraded (exploratory)");
      }
    }
    detail::write_manifest(ctx, code);
    return code;
  } catch (const std::exception& e) {
    return detail::fail(ctx, e);
  }
}

/// Runs the constants chain and writes the certificate. Exit 3 when the
/// chain is infeasible or the data falls outside the radius.
inline int cmd_certify(const std::string& config_source,
                       const std::string& outdir_flag = "") {
  auto ctx = detail::make_context("certify", config_source, outdir_flag);
  try {
    const ScenarioConfig cfg = resolve_config(config_source);
    const CompiledScenario cs = compile_scenario(cfg);
    CertificateReport cert;
    if (cs.has_cert) {
      cert = cs.cert;
    } else {
      cert.verdict = "infeasible: no memory kernel, the undamped linear part "
                     "is conservative";
    }
    for (const auto& w : cs.warnings) ctx.warnings.push_back(w);
    ctx.emit("certificate.txt", certificate_text(cert));
    ctx.emit("certificate.json", certificate_json(cert).dump(2) + "\n");
    std::cout << certificate_text(cert);
    ctx.summary["verdict"] = cert.verdict;
    ctx.summary["scale_applied"] = cs.scale_applied;
    const int code = cert.certified ? kExitOk : kExitInfeasible;
    detail::write_manifest(ctx, code);
    return code;
  } catch (const std::exception& e) {
    return detail::fail(ctx, e);
  }
}

struct RunOptions {
  std::optional<double> horizon;
  std::optional<int> cadence;
  bool audits = true;
  bool plot = false;
};

/// Validate, simulate, audit, fit. Hypothesis failures stop a strict run
/// before it simulates; blow-up keeps the partial outputs and exits 4.
inline int cmd_run(const std::string& config_source,
                   const std::string& outdir_flag = "",
                   const RunOptions& opt = {}) {
  auto ctx = detail::make_context("run", config_source, outdir_flag);
  try {
    ScenarioConfig cfg = resolve_config(config_source);
    if (opt.horizon) cfg.horizon = *opt.horizon;
    if (opt.cadence) cfg.cadence = *opt.cadence;

    CompiledScenario cs;
    const HypothesisReport rep = validate_scenario(cfg, &cs);
    ctx.emit("hypotheses.txt", hypotheses_text(rep));
    ctx.emit("hypotheses.json", hypotheses_json(rep).dump(2) + "\n");
    if (rep.hard_fail) {
      if (cfg.strict) {
        std::cerr << "hypothesis check failed; not simulating (strict mode)\n";
        ctx.summary["hard_fail"] = true;
        detail::write_manifest(ctx, kExitHypothesisFail);
        return kExitHypothesisFail;
      }
      ctx.warnings.push_back("hypothesis failures downgraded (exploratory)");
    }
    if (!rep.compiled)
      throw ConfigError("scenario failed to compile in exploratory mode");
    for (const auto& w : cs.warnings) ctx.warnings.push_back(w);

    IntegratorConfig ic;
    ic.dt = cfg.dt;
    const Trajectory tr = simulate(cs.sys, cfg.horizon, ic, cfg.cadence);

    const double g_sup = history_g_sup_norm(cs.sys.hist);
    ctx.emit("trajectory.csv", trajectory_csv(cs.sys, tr));
    ctx.emit("energy.csv", energy_csv(tr, g_sup));

    json report = json::object();
    report["name"] = cfg.name;
    report["scale_applied"] = cs.scale_applied;
    report["steps"] = tr.steps;
    report["extrapolated_steps"] = tr.extrapolated_steps;
    report["t_end"] = tr.t_end;
    report["blew_up"] = tr.blew_up;
    if (!tr.energy.empty()) {
      report["E0"] = json_num(tr.energy.front().e.total);
      report["E_end"] = json_num(tr.energy.back().e.total);
    }
    if (cs.has_cert) report["certificate"] = certificate_json(cs.cert);

    bool audit_violations = false;
    if (opt.audits && !tr.energy.empty()) {
      const double scriptE0 =
          std::max(0.5 * g_sup * g_sup, tr.energy.front().e.total);
      const double c_star = cs.has_cert && cs.cert.fit_feasible
                                ? cs.cert.C_star_T
                                : std::numeric_limits<double>::quiet_NaN();
      const auto gron = audit_gronwall(tr.energy, cs.sys, scriptE0);
      const auto lower = audit_lower_bound(tr.energy, cs.sys, c_star, scriptE0);
      const auto deriv = audit_energy_derivative(tr.energy, cs.sys, tr.buf);
      report["audits"] = {{"gronwall", audit_json(gron)},
                          {"lower_bound", audit_json(lower)},
                          {"energy_derivative", audit_json(deriv)}};
      audit_violations = gron.violations > 0 || lower.violations > 0 ||
                         deriv.violations > 0;
    }

    try {
      const auto fit = fit_decay(detail::energy_series(tr));
      report["fit"] = decay_json(fit);
      std::cout << "fitted decay rate " << fmt_g(fit.rate) << " (r2 "
                << fmt_g(fit.r2) << ")\n";
    } catch (const NumericError& e) {
      report["fit"] = {{"error", e.what()}};
    }

    ctx.emit("report.json", report.dump(2) + "\n");
    if (opt.plot)
      ctx.emit("plot.svg", plot_svg(detail::energy_series(tr), cfg.name));

    ctx.summary["steps"] = tr.steps;
    ctx.summary["blew_up"] = tr.blew_up;
    ctx.summary["audit_violations"] = audit_violations;
    std::cout << "steps " << tr.steps << ", t_end " << fmt_g(tr.t_end) << "\n";

    int code = kExitOk;
    if (tr.blew_up) {
      std::cerr << "state norm left the admissible range; partial outputs "
                   "kept\n";
      code = kExitBlowUp;
    } else if (audit_violations && cfg.strict) {
      std::cerr << "inequality audit reported violations (strict mode)\n";
      code = kExitHypothesisFail;
    } else if (audit_violations) {
      ctx.warnings.push_back("audit violations downgraded (exploratory)");
    }
    detail::write_manifest(ctx, code);
    return code;
  } catch (const std::exception& e) {
    return detail::fail(ctx, e);
  }
}

/// Fits an exponential tail to a CSV series (energy file or bare 2 columns).
inline int cmd_fit(const std::string& csv_path, double window_fraction = 0.5,
                   const std::string& outdir_flag = "") {
  auto ctx = detail::make_context("fit", csv_path, outdir_flag);
  try {
    const auto series = detail::read_series_csv(csv_path);
    const auto fit = fit_decay(series, window_fraction);
    ctx.emit("fit.json", decay_json(fit).dump(2) + "\n");
    std::cout << "rate = " << fmt_g(fit.rate) << "\namplitude = "
              << fmt_g(fit.amplitude) << "\nr2 = " << fmt_g(fit.r2) << "\n";
    ctx.summary["rate"] = json_num(fit.rate);
    detail::write_manifest(ctx, kExitOk);
    return kExitOk;
  } catch (const std::exception& e) {
    return detail::fail(ctx, e);
  }
}

/// Renders the two-panel (linear and log) plot of a CSV series.
inline int cmd_plot(const std::string& csv_path,
                    const std::string& outdir_flag = "") {
  auto ctx = detail::make_context("plot", csv_path, outdir_flag);
  try {
    const auto series = detail::read_series_csv(csv_path);
    ctx.emit("plot.svg",
             plot_svg(series, std::filesystem::path(csv_path).stem().string()));
    detail::write_manifest(ctx, kExitOk);
    return kExitOk;
  } catch (const std::exception& e) {
    return detail::fail(ctx, e);
  }
}

namespace detail {

struct SweepRow {
  std::string value;
  std::string verdict = "error";
  double rho = std::numeric_limits<double>::quiet_NaN();
  double mu = std::numeric_limits<double>::quiet_NaN();
  double fit_rate = std::numeric_limits<double>::quiet_NaN();
  int gronwall_violations = -1;
  int lower_violations = -1;
  int derivative_violations = -1;
  bool blew_up = false;
  std::string error;
};

inline SweepRow sweep_one(const std::string& base_text, const std::string& key,
                          const std::string& value) {
  SweepRow row;
  row.value = value;
  try {
    const ScenarioConfig cfg =
        parse_config(override_config_text(base_text, key, value));
    const CompiledScenario cs = compile_scenario(cfg);
    if (cs.has_cert) {
      row.verdict = cs.cert.certified ? "certified" : "infeasible";
      row.rho = cs.cert.rho;
      row.mu = cs.cert.fit_feasible
                   ? cs.cert.mu
                   : std::numeric_limits<double>::quiet_NaN();
    } else {
      row.verdict = "no-certificate";
    }
    IntegratorConfig ic;
    ic.dt = cfg.dt;
    const Trajectory tr = simulate(cs.sys, cfg.horizon, ic, cfg.cadence);
    row.blew_up = tr.blew_up;
    if (!tr.energy.empty()) {
      const double g_sup = history_g_sup_norm(cs.sys.hist);
      const double scriptE0 =
          std::max(0.5 * g_sup * g_sup, tr.energy.front().e.total);
      const double c_star = cs.has_cert && cs.cert.fit_feasible
                                ? cs.cert.C_star_T
                                : std::numeric_limits<double>::quiet_NaN();
      row.gronwall_violations =
          audit_gronwall(tr.energy, cs.sys, scriptE0).violations;
      row.lower_violations =
          audit_lower_bound(tr.energy, cs.sys, c_star, scriptE0).violations;
      row.derivative_violations =
          audit_energy_derivative(tr.energy, cs.sys, tr.buf).violations;
      try {
        row.fit_rate = fit_decay(energy_series(tr)).rate;
      } catch (const NumericError&) {
      }
    }
  } catch (const std::exception& e) {
    row.error = e.what();
    for (char& ch : row.error)
      if (ch == ',' || ch == '\n') ch = ';';
  }
  return row;
}

}  // namespace detail

/// Re-runs the scenario across a parameter grid, fanned out over worker
/// threads; rows are merged back in the order the values were given, so the
/// output does not depend on scheduling.
inline int cmd_sweep(const std::string& config_source, const std::string& param,
                     const std::vector<std::string>& values,
                     const std::string& outdir_flag = "") {
  auto ctx = detail::make_context("sweep", config_source, outdir_flag);
  try {
    if (values.empty()) throw ConfigError("sweep: no values given");
    if (!memwave::detail::known_config_keys().count(param))
      throw UnknownKey("sweep: unknown key '" + param + "'");
    const std::string base_text = serialize_config(resolve_config(config_source));

    std::vector<detail::SweepRow> rows(values.size());
    std::atomic<std::size_t> next{0};
    const unsigned workers = std::max(
        1u, std::min({static_cast<unsigned>(values.size()),
                      std::thread::hardware_concurrency(), 8u}));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < values.size();
             i = next.fetch_add(1))
          rows[i] = detail::sweep_one(base_text, param, values[i]);
      });
    for (auto& th : pool) th.join();

    std::string csv =
        "param,value,verdict,rho,mu,fitted_rate,gronwall_violations,"
        "lower_bound_violations,derivative_violations,blew_up,error\n";
    for (const auto& r : rows) {
      csv += param + "," + r.value + "," + r.verdict + "," + fmt_g(r.rho) +
             "," + fmt_g(r.mu) + "," + fmt_g(r.fit_rate) + "," +
             std::to_string(r.gronwall_violations) + "," +
             std::to_string(r.lower_violations) + "," +
             std::to_string(r.derivative_violations) + "," +
             (r.blew_up ? "1" : "0") + "," + r.error + "\n";
    }
    ctx.emit("sweep.csv", csv);
    std::cout << csv;
    ctx.summary["rows"] = rows.size();
    detail::write_manifest(ctx, kExitOk);
    return kExitOk;
  } catch (const std::exception& e) {
    return detail::fail(ctx, e);
  }
}

}  // namespace memwave::cli
