#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "certificate.hpp"
#include "simulate.hpp"

namespace memwave {

/// Raw scenario description, one-to-one with the text config format. Values
/// here are unvalidated; compile_scenario and validate_scenario own the
/// checking so that bad values can be reported as verdicts, not just thrown.
struct ScenarioConfig {
  std::string name = "scenario";
  bool strict = true;  // strict: failed hypotheses abort; exploratory: warn
  int modes = 32;
  double length = 1.0;
  double horizon = 50.0;
  double dt = 1e-3;
  int cadence = 10;

  std::vector<std::pair<double, double>> kernel_terms;  // (weight, rate)

  DelaySpec delay;
  GainSpec gain;
  double feedback_lo = 0.0, feedback_hi = 1.0;

  SourceFamily source_family = SourceFamily::none;
  double source_exponent = 2.0;
  bool c_h_auto = true;
  double c_h_value = 0.0;

  PositionHistory hist_position = PositionHistory::constant;
  double ramp_c = 0.0, t_hist = 1.0;
  std::vector<std::pair<int, double>> u0_coeffs;  // (mode index from 1, value)
  VelocityHistory hist_velocity = VelocityHistory::constant;
  double vel_frequency = 1.0;
  std::vector<std::pair<int, double>> g0_coeffs;

  bool scale_auto = false;
  double scale_value = 1.0;
};

namespace detail {

inline void check_coeff_list(const std::vector<std::pair<int, double>>& cs,
                             int modes, const char* what) {
  std::set<int> seen;
  for (const auto& [idx, val] : cs) {
    if (idx < 1 || idx > modes)
      throw InconsistentConfig(std::string(what) + ": mode index " +
                               std::to_string(idx) + " outside 1.." +
                               std::to_string(modes));
    if (!seen.insert(idx).second)
      throw InconsistentConfig(std::string(what) + ": duplicate mode index " +
                               std::to_string(idx));
    if (!std::isfinite(val))
      throw InconsistentConfig(std::string(what) + ": non-finite coefficient");
  }
}

inline Vec coeffs_to_vec(const std::vector<std::pair<int, double>>& cs,
                         int modes, double scale) {
  Vec out = Vec::Zero(modes);
  for (const auto& [idx, val] : cs) out[idx - 1] = scale * val;
  return out;
}

}  // namespace detail

/// Field-interaction checks that single-field parsing cannot see.
inline void check_consistency(const ScenarioConfig& c) {
  if (c.modes < 1) throw InconsistentConfig("modes must be >= 1");
  if (!(c.length > 0.0)) throw InconsistentConfig("length must be > 0");
  if (!(c.dt > 0.0)) throw InconsistentConfig("dt must be > 0");
  if (!(c.horizon > 0.0)) throw InconsistentConfig("horizon must be > 0");
  if (c.cadence < 1) throw InconsistentConfig("cadence must be >= 1");
  if (!(c.delay.tau_bar >= c.dt))
    throw InconsistentConfig("tau_bar must be >= dt (delay below step size)");
  if (!(0.0 <= c.feedback_lo && c.feedback_lo < c.feedback_hi &&
        c.feedback_hi <= c.length))
    throw InconsistentConfig("feedback interval must satisfy 0 <= lo < hi <= length");
  detail::check_coeff_list(c.u0_coeffs, c.modes, "u0");
  detail::check_coeff_list(c.g0_coeffs, c.modes, "g0");
  if (!c.scale_auto && !(c.scale_value > 0.0 && std::isfinite(c.scale_value)))
    throw InconsistentConfig("scale must be > 0 or auto");
}

inline System build_system(const ScenarioConfig& c, double scale) {
  check_consistency(c);
  System sys;
  sys.sp = build_spectrum(c.modes, c.length);
  if (!c.kernel_terms.empty()) sys.kernel = make_kernel(c.kernel_terms);
  sys.fb = build_feedback(sys.sp, c.feedback_lo, c.feedback_hi);
  NonlinearitySpec ns;
  ns.family = c.source_family;
  ns.exponent = c.source_exponent;
  if (!c.c_h_auto) ns.c_h = c.c_h_value;
  sys.nl = make_nonlinearity(ns, sys.sp);
  check_delay(c.delay);
  sys.delay = c.delay;
  check_gain(c.gain);
  sys.gain = c.gain;
  sys.hist.position = c.hist_position;
  sys.hist.ramp_c = c.ramp_c;
  sys.hist.t_hist = c.t_hist;
  sys.hist.u0 = detail::coeffs_to_vec(c.u0_coeffs, c.modes, scale);
  sys.hist.velocity = c.hist_velocity;
  sys.hist.vel_frequency = c.vel_frequency;
  sys.hist.g0 = detail::coeffs_to_vec(c.g0_coeffs, c.modes, scale);
  check_history(sys.hist);
  return sys;
}

struct CompiledScenario {
  ScenarioConfig cfg;
  System sys;  // data already scaled
  bool has_sgc = false;
  SemigroupConstants sgc;
  bool has_cert = false;
  CertificateReport cert;
  double scale_applied = 1.0;
  std::vector<std::string> warnings;
};

/// Builds the operators, estimates the linear decay constants, runs the
/// certificate chain, and resolves auto-scaling (data amplitude 0.5 rho).
/// The chain's constants do not depend on the data, so rescaling only
/// re-evaluates the data-side section.
inline CompiledScenario compile_scenario(const ScenarioConfig& cfg) {
  CompiledScenario cs;
  cs.cfg = cfg;
  cs.sys = build_system(cfg, 1.0);
  if (cs.sys.kernel) {
    if (1.0 - cs.sys.kernel->beta_tilde < 0.05)
      cs.warnings.push_back("relaxation mass within 0.05 of the limit 1");
    cs.sgc = estimate_semigroup_constants(*cs.sys.kernel, cs.sys.sp);
    cs.has_sgc = true;
    cs.cert = constants_chain(cs.sys, cs.sgc);
    cs.has_cert = true;
  }

  double scale = 1.0;
  if (cfg.scale_auto) {
    if (!cs.has_cert || !cs.cert.fit_feasible || !(cs.cert.rho > 0.0)) {
      cs.warnings.push_back("auto scale unavailable (no usable certificate); "
                            "scale left at 1");
    } else if (cs.cert.rho_unbounded) {
      cs.warnings.push_back("smallness radius unbounded; auto scale left at 1");
    } else {
      const double denom = std::max(cs.cert.U0_norm, cs.cert.g_sup);
      if (denom > 0.0) scale = 0.5 * cs.cert.rho / denom;
    }
  } else {
    scale = cfg.scale_value;
  }

  if (scale != 1.0) {
    cs.sys = build_system(cfg, scale);
    if (cs.has_cert) cs.cert = constants_chain(cs.sys, cs.sgc);
  }
  cs.scale_applied = scale;
  return cs;
}

struct HypothesisCheck {
  std::string name;
  std::string status;  // "pass" | "fail" | "skipped"
  std::string detail;
};

struct HypothesisReport {
  std::vector<HypothesisCheck> checks;
  bool hard_fail = false;
  bool compiled = false;
};

namespace detail {

inline void add_check(HypothesisReport& r, std::string name, bool ok,
                      std::string detail) {
  r.checks.push_back({std::move(name), ok ? "pass" : "fail", std::move(detail)});
  if (!ok) r.hard_fail = true;
}

inline void add_skip(HypothesisReport& r, std::string name, std::string why) {
  r.checks.push_back({std::move(name), "skipped", std::move(why)});
}

inline std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Random pair check of the shared envelope: the sampled two-point ratio must
/// stay below c_h. Families are homogeneous, so unit-scale draws decide it.
inline HypothesisCheck source_spot_check(const NonlinearityOp& op) {
  HypothesisCheck c{"source-envelope", "pass", ""};
  if (op.spec.family == SourceFamily::none) {
    c.detail = "no source term";
    return c;
  }
  SplitMix64 rng(0x7061697263686563ull);
  const int n = op.n_modes;
  const double q = op.spec.exponent;
  Vec u(n), v(n);
  double worst = 0.0;
  for (int i = 0; i < 48; ++i) {
    for (int m = 0; m < n; ++m) {
      u[m] = rng.sign() * rng.uniform(0.1, 1.0) / ((m + 1.0) * (m + 1.0));
      v[m] = rng.sign() * rng.uniform(0.1, 1.0) / ((m + 1.0) * (m + 1.0));
    }
    if (i % 3 == 0) v = 0.35 * u;
    auto hn = [&](const Vec& x) {
      return std::sqrt((op.lambda.array() * x.array().square()).sum());
    };
    const double den = (std::pow(hn(u), 2 * q) + std::pow(hn(v), 2 * q)) *
                       hn(u - v) * hn(u - v);
    if (!(den > 1e-30)) continue;
    const double ratio =
        std::sqrt((grad_psi(op, u) - grad_psi(op, v)).squaredNorm() / den);
    worst = std::max(worst, ratio);
  }
  c.detail = "max sampled pair ratio " + num(worst) + " vs envelope c_h = " +
             num(op.c_h) + " over 48 pairs";
  if (!(worst <= op.c_h * (1.0 + 1e-9))) c.status = "fail";
  return c;
}

}  // namespace detail

/// Checks every standing hypothesis and reports each as pass/fail/skipped.
/// Works on the raw config: structurally bad values become fail verdicts
/// here instead of exceptions, so a validate run always produces a report.
/// When the scenario compiles, compiled_out (if given) receives the compiled
/// result so callers do not pay for the constants twice.
inline HypothesisReport validate_scenario(const ScenarioConfig& cfg,
                                          CompiledScenario* compiled_out = nullptr) {
  using detail::add_check;
  using detail::add_skip;
  using detail::num;
  HypothesisReport r;

  // relaxation kernel: smoothness, sign, mass, exponential domination
  if (cfg.kernel_terms.empty()) {
    add_skip(r, "kernel-smoothness", "no memory kernel");
    add_skip(r, "kernel-nonnegative", "no memory kernel");
    add_skip(r, "kernel-mass", "no memory kernel");
    add_skip(r, "kernel-exponential-decay", "no memory kernel");
  } else {
    add_check(r, "kernel-smoothness", true,
              "finite exponential sum, smooth on [0, inf)");
    bool pos = true;
    double mass = 0.0, dmin = std::numeric_limits<double>::infinity();
    for (const auto& [w, d] : cfg.kernel_terms) {
      if (!(w > 0.0) || !(d > 0.0)) pos = false;
      if (w > 0.0 && d > 0.0) {
        mass += w / d;
        dmin = std::min(dmin, d);
      }
    }
    add_check(r, "kernel-nonnegative", pos,
              pos ? "all term weights and rates > 0"
                  : "a term weight or rate is <= 0");
    if (pos) {
      add_check(r, "kernel-mass", mass < 1.0,
                "beta_tilde = " + num(mass) + (mass < 1.0 ? " < 1" : " >= 1"));
      add_check(r, "kernel-exponential-decay", true,
                "beta' <= -delta beta with delta = " + num(dmin));
    } else {
      add_skip(r, "kernel-mass", "kernel sign check failed");
      add_skip(r, "kernel-exponential-decay", "kernel sign check failed");
    }
  }

  // delay range on a dense grid over the run horizon
  try {
    check_delay(cfg.delay);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int i = 0; i <= 2048; ++i) {
      const double tau = tau_at(cfg.delay, cfg.horizon * i / 2048.0);
      lo = std::min(lo, tau);
      hi = std::max(hi, tau);
    }
    const bool ok = lo >= 0.0 && hi <= cfg.delay.tau_bar;
    add_check(r, "delay-range", ok,
              "tau(t) in [" + num(lo) + ", " + num(hi) + "], tau_bar = " +
                  num(cfg.delay.tau_bar));
  } catch (const Error& e) {
    add_check(r, "delay-range", false, e.what());
  }

  // windowed gain budget
  double K = std::numeric_limits<double>::quiet_NaN();
  try {
    check_gain(cfg.gain);
    K = gain_budget(cfg.gain, cfg.delay.tau_bar);
    add_check(r, "gain-budget", std::isfinite(K),
              "K = sup window integral of |k| over tau_bar = " + num(K));
  } catch (const Error& e) {
    add_check(r, "gain-budget", false, e.what());
  }

  // cross-field consistency, then the compiled checks
  CompiledScenario cs;
  bool compiled = false;
  if (!r.hard_fail) {
    try {
      cs = compile_scenario(cfg);
      compiled = true;
      add_check(r, "config-consistency", true, "cross-field checks passed");
    } catch (const Error& e) {
      add_check(r, "config-consistency", false, e.what());
    }
  } else {
    add_skip(r, "config-consistency", "earlier hypothesis failed");
  }
  r.compiled = compiled;
  if (compiled && compiled_out) *compiled_out = cs;

  if (!compiled) {
    add_skip(r, "source-envelope", "scenario did not compile");
    add_skip(r, "exponential-stability", "scenario did not compile");
    add_skip(r, "gain-growth", "scenario did not compile");
    add_skip(r, "data-smallness", "scenario did not compile");
    return r;
  }

  {
    auto c = detail::source_spot_check(cs.sys.nl);
    if (c.status == "fail") r.hard_fail = true;
    r.checks.push_back(std::move(c));
  }

  if (!cs.has_sgc) {
    add_skip(r, "exponential-stability", "no memory kernel: linear part is "
                                         "conservative");
    add_skip(r, "gain-growth", "no decay rate to fit against");
    add_skip(r, "data-smallness", "no certificate without a kernel");
    return r;
  }
  add_check(r, "exponential-stability", cs.sgc.omega > 0.0,
            "omega = " + num(cs.sgc.omega) + ", M = " + num(cs.sgc.M));
  add_check(r, "gain-growth", cs.cert.fit_feasible,
            cs.cert.fit_feasible
                ? "gamma = " + num(cs.cert.gamma) + ", omega' = " +
                      num(cs.cert.omega_prime) + " < omega = " +
                      num(cs.cert.omega)
                : "weighted gain slope " + num(cs.cert.slope) +
                      " >= omega = " + num(cs.cert.omega));
  if (!cs.cert.fit_feasible || !(cs.cert.rho > 0.0)) {
    add_skip(r, "data-smallness", "certificate chain infeasible");
  } else if (cs.cert.U0_norm == 0.0 && cs.cert.g_sup == 0.0) {
    add_check(r, "data-smallness", true, "zero initial data");
  } else {
    add_check(r, "data-smallness", cs.cert.data_within,
              "|U0| = " + num(cs.cert.U0_norm) + ", sup |g| = " +
                  num(cs.cert.g_sup) + " vs rho = " + num(cs.cert.rho));
  }
  return r;
}

inline ScenarioConfig preset_power_source_small() {
  ScenarioConfig c;
  c.name = "power-source-small";
  c.strict = true;
  c.modes = 32;
  c.length = 1.0;
  c.horizon = 20.0;
  c.dt = 1e-3;
  c.cadence = 10;
  c.kernel_terms = {{1.0, 2.0}};
  c.delay.family = DelayFamily::sinusoidal;
  c.delay.tau_bar = 0.8;
  c.delay.mean = 0.5;
  c.delay.amplitude = 0.3;
  c.delay.frequency = 1.3;
  c.delay.phase = 0.0;
  c.gain.family = GainFamily::constant;
  c.gain.amplitude = 0.05;
  c.feedback_lo = 0.2;
  c.feedback_hi = 0.8;
  c.source_family = SourceFamily::power;
  c.source_exponent = 2.0;
  c.c_h_auto = true;
  c.hist_position = PositionHistory::ramp;
  c.ramp_c = 0.3;
  c.t_hist = 1.0;
  c.u0_coeffs = {{1, 1.0}, {2, 0.3}};
  c.hist_velocity = VelocityHistory::sinusoidal;
  c.vel_frequency = 2.0;
  c.g0_coeffs = {{1, 0.5}};
  c.scale_auto = true;
  return c;
}

inline ScenarioConfig preset_integral_source_small() {
  ScenarioConfig c;
  c.name = "integral-source-small";
  c.strict = true;
  c.modes = 24;
  c.length = 1.0;
  c.horizon = 20.0;
  c.dt = 1e-3;
  c.cadence = 10;
  c.kernel_terms = {{0.6, 1.5}, {0.4, 4.0}};
  c.delay.family = DelayFamily::piecewise_linear;
  c.delay.tau_bar = 0.5;
  c.delay.knots = {{0.0, 0.4}, {5.0, 0.1}, {10.0, 0.4}};
  c.gain.family = GainFamily::exponential_decay;
  c.gain.amplitude = 0.2;
  c.gain.rate = 0.5;
  c.feedback_lo = 0.0;
  c.feedback_hi = 1.0;
  c.source_family = SourceFamily::integral;
  c.source_exponent = 2.0;
  c.c_h_auto = true;
  c.hist_position = PositionHistory::constant;
  c.u0_coeffs = {{1, 1.0}, {3, 0.2}};
  c.hist_velocity = VelocityHistory::constant;
  c.g0_coeffs = {{2, 0.4}};
  c.scale_auto = true;
  return c;
}

inline ScenarioConfig preset_no_delay_linear() {
  ScenarioConfig c;
  c.name = "no-delay-linear";
  c.strict = true;
  c.modes = 8;
  c.length = 1.0;
  c.horizon = 20.0;
  c.dt = 1e-3;
  c.cadence = 10;
  c.kernel_terms = {{1.0, 2.0}};
  c.delay.family = DelayFamily::constant;
  c.delay.tau_bar = 0.5;
  c.delay.value = 0.5;
  c.gain.family = GainFamily::constant;
  c.gain.amplitude = 0.0;
  c.feedback_lo = 0.25;
  c.feedback_hi = 0.75;
  c.source_family = SourceFamily::none;
  c.hist_position = PositionHistory::constant;
  c.u0_coeffs = {{1, 1.0}};
  c.hist_velocity = VelocityHistory::constant;
  c.g0_coeffs = {{1, 0.3}};
  c.scale_auto = false;
  c.scale_value = 1.0;
  return c;
}

inline ScenarioConfig preset_destabilizing_gain() {
  ScenarioConfig c = preset_power_source_small();
  c.name = "destabilizing-gain";
  c.strict = false;  // exploratory: run anyway, record the failed hypotheses
  c.horizon = 10.0;
  c.gain.amplitude = 5.0;
  c.scale_auto = false;
  c.scale_value = 0.02;
  return c;
}

inline ScenarioConfig preset(const std::string& name) {
  if (name == "power-source-small") return preset_power_source_small();
  if (name == "integral-source-small") return preset_integral_source_small();
  if (name == "no-delay-linear") return preset_no_delay_linear();
  if (name == "destabilizing-gain") return preset_destabilizing_gain();
  throw UnknownPreset("unknown preset: " + name);
}

inline std::vector<std::string> preset_names() {
  return {"power-source-small", "integral-source-small", "no-delay-linear",
          "destabilizing-gain"};
}

}  // namespace memwave
