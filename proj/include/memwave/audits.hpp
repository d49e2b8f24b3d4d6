#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "energy.hpp"

namespace memwave {

/// Audit statuses are three-valued on purpose: a bound whose hypothesis fails
/// is reported as not applicable, never as a pass or a violation.
inline const char* kStatusPassed = "passed";
inline const char* kStatusViolations = "violations";
inline const char* kStatusSkipped = "skipped";

struct GronwallAudit {
  std::string status = kStatusSkipped;
  std::string reason;
  int violations = 0;
  double max_ratio = 0.0;  // max over samples of E / bound
  double first_violation_t = std::numeric_limits<double>::quiet_NaN();
  double tol = 1e-6;
};

/// E(t) <= exp(3 b^2 int_0^t |k|) E_script(0) at every sample, with the
/// lemma's own hypothesis E >= 1/4 |v|^2 checked first.
inline GronwallAudit audit_gronwall(const std::vector<EnergySample>& samples,
                                    const System& sys, double scriptE0,
                                    double tol = 1e-6) {
  GronwallAudit a;
  a.tol = tol;
  if (samples.empty()) {
    a.reason = "no samples";
    return a;
  }
  const double b2 = sys.fb.b_norm * sys.fb.b_norm;
  for (const auto& s : samples) {
    if (s.e.total < 0.5 * s.e.kinetic - 1e-12 * std::max(1.0, s.e.kinetic)) {
      a.status = kStatusSkipped;
      a.reason = "hypothesis-not-met: E < |v|^2/4 at t = " + std::to_string(s.t);
      return a;
    }
  }
  for (const auto& s : samples) {
    const double bound =
        std::exp(3.0 * b2 * gain_abs_cum(sys.gain, s.t)) * scriptE0;
    if (bound > 0.0) a.max_ratio = std::max(a.max_ratio, s.e.total / bound);
    if (s.e.total > bound * (1.0 + tol)) {
      if (a.violations == 0) a.first_violation_t = s.t;
      ++a.violations;
    }
  }
  a.status = a.violations == 0 ? kStatusPassed : kStatusViolations;
  return a;
}

struct LowerBoundAudit {
  std::string status = kStatusSkipped;
  std::string reason;
  int violations = 0;
  double min_margin = std::numeric_limits<double>::infinity();
  bool e0_positive = false;
  double slack = 1e-9;
};

/// E(t) > (|v|^2 + (1-bt)|A^1/2 u|^2 + memory + gain-window) / 4 once the
/// two smallness hypotheses hold:
///   h(|A^1/2 u_0(0)|) < (1-bt)/2  and  h(2 sqrt(C*_T E_script(0) / (1-bt)))
///   < (1-bt)/2.
inline LowerBoundAudit audit_lower_bound(
    const std::vector<EnergySample>& samples, const System& sys,
    double c_star_T, double scriptE0, double slack = 1e-9) {
  LowerBoundAudit a;
  a.slack = slack;
  if (samples.empty()) {
    a.reason = "no samples";
    return a;
  }
  const double bt = sys.kernel ? sys.kernel->beta_tilde : 0.0;
  const double half_gap = 0.5 * (1.0 - bt);

  const double u0_h1 =
      std::sqrt((sys.sp.lambda.array() * sys.hist.u0.array().square()).sum());
  const double g_sup = history_g_sup_norm(sys.hist);
  if (u0_h1 == 0.0 && g_sup == 0.0) {
    a.reason = "zero solution";
    return a;
  }
  if (!(h_eval(sys.nl, u0_h1) < half_gap)) {
    a.reason = "hypothesis-not-met: h(|A^1/2 u_0|) >= (1-bt)/2";
    return a;
  }
  if (!(c_star_T > 0.0) || !std::isfinite(c_star_T)) {
    a.reason = "no certificate window constant";
    return a;
  }
  const double q2 = 2.0 * std::sqrt(c_star_T * scriptE0) / std::sqrt(1.0 - bt);
  if (!(h_eval(sys.nl, q2) < half_gap)) {
    a.reason = "hypothesis-not-met: h(2 sqrt(C*_T E(0))/sqrt(1-bt)) >= (1-bt)/2";
    return a;
  }

  a.e0_positive = samples.front().e.total > 0.0;
  for (const auto& s : samples) {
    const double quarter =
        0.5 * (s.e.kinetic + s.e.elastic + s.e.memory + s.e.gain_window);
    const double margin = s.e.total - quarter;
    a.min_margin = std::min(a.min_margin, margin);
    if (margin <= -slack) ++a.violations;
  }
  a.status = a.violations == 0 ? kStatusPassed : kStatusViolations;
  return a;
}

struct DerivativeAudit {
  std::string status = kStatusSkipped;
  std::string reason;
  int violations = 0;
  double max_excess = -std::numeric_limits<double>::infinity();
  double slack = 0.0;
};

/// Central-difference dE/dt <= (3/2)|k(t)| sup_{[t-tau_bar, t]} |B* v|^2
/// plus an absolute slack of slack_factor * max(1, E(0)). The window sup is
/// taken on a fixed 129-point grid through the dense history.
inline DerivativeAudit audit_energy_derivative(
    const std::vector<EnergySample>& samples, const System& sys,
    const HistoryBuffer& buf, double slack_factor = 1e-4) {
  DerivativeAudit a;
  if (samples.size() < 3) {
    a.reason = "need at least three samples";
    return a;
  }
  a.slack = slack_factor * std::max(1.0, samples.front().e.total);
  Vec w(sys.sp.n_modes);
  const double lo_limit = buf.empty() ? 0.0 : buf.t.front();
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
    const double t = samples[i].t;
    const double de = (samples[i + 1].e.total - samples[i - 1].e.total) /
                      (samples[i + 1].t - samples[i - 1].t);
    double window_sup = 0.0;
    const double k = std::abs(gain_at(sys.gain, t));
    if (k > 0.0) {
      const double lo = t - sys.delay.tau_bar;
      for (int j = 0; j <= 128; ++j) {
        double s = lo + (t - lo) * j / 128.0;
        if (s > lo_limit) s = std::min(s, buf.t.back());
        sample_velocity(sys.hist, buf, s, w);
        window_sup = std::max(window_sup, observed_square(sys.fb, w));
      }
    }
    const double bound = 1.5 * k * window_sup + a.slack;
    a.max_excess = std::max(a.max_excess, de - bound);
    if (de > bound) ++a.violations;
  }
  a.status = a.violations == 0 ? kStatusPassed : kStatusViolations;
  return a;
}

/// Running envelope script-E(t) = max(g-layer, max_{s <= t} E(s)); always
/// non-decreasing by construction, checked downstream as a property.
inline std::vector<double> running_script_E(
    const std::vector<EnergySample>& samples, double g_sup_norm) {
  std::vector<double> out;
  out.reserve(samples.size());
  double run = 0.5 * g_sup_norm * g_sup_norm;
  for (const auto& s : samples) {
    run = std::max(run, s.e.total);
    out.push_back(run);
  }
  return out;
}

}  // namespace memwave
