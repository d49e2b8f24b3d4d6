#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "energy.hpp"
#include "semigroup.hpp"

namespace memwave {

/// Full output of the decay-certificate chain. Every quantity that the chain
/// computes is kept, so reports can show where an infeasible run died.
struct CertificateReport {
  // linear-part constants
  double b_norm = 0.0;
  double tau_bar = 0.0;
  double M = 0.0;
  double omega = 0.0;
  double beta_tilde = 0.0;

  // gain growth fit
  bool fit_feasible = false;
  double gamma = 0.0;
  double omega_prime = 0.0;
  double slope = 0.0;
  double K = 0.0;  // sliding-window gain budget over tau_bar

  // contraction horizon
  double T = std::numeric_limits<double>::quiet_NaN();
  double C_T = std::numeric_limits<double>::quiet_NaN();
  double window_sup_T = std::numeric_limits<double>::quiet_NaN();
  double C_star_T = std::numeric_limits<double>::quiet_NaN();

  // smallness radius
  double rho0 = 0.0;
  double rho = 0.0;
  double C_rho = 0.0;
  double L_C_rho = 0.0;
  double L_threshold = 0.0;
  int halvings = 0;
  bool rho_unbounded = false;

  // certified rate and prefactor
  double mu = 0.0;
  double C_hat = 0.0;
  double C_tilde = 0.0;

  // data side
  double U0_norm = 0.0;  // sqrt(|u_1|^2 + (1-bt)|A^1/2 u_0|^2 + memory)
  double g_sup = 0.0;
  double g_sup_weighted = 0.0;  // sup over [-tau_bar,0] of e^{omega r}|g(r)|
  double E0 = 0.0;
  double script_E0 = 0.0;
  bool smallness_state = false;
  bool smallness_history = false;
  bool data_within = false;

  bool certified = false;
  std::string verdict;  // "certified" or "infeasible: <reason>"
};

namespace detail {

inline double contraction_factor(double M, double gamma, double K, double b,
                                 double omega, double omega_prime,
                                 double tau_bar, double T) {
  const double b2 = b * b;
  const double e = std::exp(omega * tau_bar);
  const double front = 4.0 * M * M * std::exp(2.0 * gamma) *
                       std::max(1.0 + K * b2 * e, e) *
                       (1.0 + e * e * K * K * b2 * b2);
  return front * std::exp(-(omega - omega_prime) * T);
}

}  // namespace detail

/// Runs the certificate chain on a system whose linear constants are already
/// known. The chain is monotone in the data: only the trailing smallness
/// section looks at the initial state, so rescaling data re-runs cheaply.
inline CertificateReport constants_chain(const System& sys,
                                         const SemigroupConstants& sgc) {
  CertificateReport r;
  r.b_norm = sys.fb.b_norm;
  r.tau_bar = sys.delay.tau_bar;
  r.M = sgc.M;
  r.omega = sgc.omega;
  r.beta_tilde = sys.kernel ? sys.kernel->beta_tilde : 0.0;
  r.K = gain_budget(sys.gain, r.tau_bar);

  auto fit = fit_gain_growth(sys.gain, r.b_norm, r.M, r.omega, r.tau_bar);
  r.fit_feasible = fit.feasible;
  r.gamma = fit.gamma;
  r.omega_prime = fit.omega_prime;
  r.slope = fit.slope;

  // data-side quantities are meaningful even when the chain dies early
  {
    HistoryBuffer empty;
    SimState s0 = initial_state(sys);
    EnergyBreakdown e0 = energy(sys, empty, s0);
    r.E0 = e0.total;
    r.script_E0 = script_E0(sys, e0);
    r.U0_norm =
        std::sqrt(2.0 * (e0.kinetic + e0.elastic + e0.memory));
    r.g_sup = history_g_sup_norm(sys.hist);
    double wmax = 0.0;
    Vec g(sys.sp.n_modes);
    for (int i = 0; i <= 512; ++i) {
      const double th = -r.tau_bar * (1.0 - i / 512.0);
      history_velocity_at(sys.hist, th, g);
      wmax = std::max(wmax, std::exp(r.omega * th) * g.norm());
    }
    r.g_sup_weighted = wmax;
  }

  if (!r.fit_feasible) {
    r.verdict = "infeasible: delayed-gain growth rate meets or exceeds the "
                "undelayed decay rate";
    return r;
  }
  r.mu = r.omega - r.omega_prime;

  // first dyadic horizon with contraction factor below one
  double T = r.tau_bar;
  bool found = false;
  for (int i = 0; i < 64; ++i) {
    const double c = detail::contraction_factor(
        r.M, r.gamma, r.K, r.b_norm, r.omega, r.omega_prime, r.tau_bar, T);
    if (c < 1.0) {
      r.T = T;
      r.C_T = c;
      found = true;
      break;
    }
    T *= 2.0;
  }
  if (!found) {
    r.verdict = "infeasible: no contraction horizon below 2^64 tau_bar";
    return r;
  }
  r.window_sup_T = gain_window_sup(sys.gain, r.T);
  r.C_star_T = std::exp(3.0 * r.b_norm * r.b_norm * r.window_sup_T);

  // smallness radius: shrink until the state-ball Lipschitz constant clears
  // the rate deficit
  const double bt = r.beta_tilde;
  const double h_inv = h_inverse(sys.nl, 0.5 * (1.0 - bt));
  r.L_threshold = r.mu / (2.0 * r.M);
  if (!std::isfinite(h_inv)) {
    r.rho_unbounded = true;
    r.rho0 = r.rho = r.C_rho = std::numeric_limits<double>::infinity();
    r.L_C_rho = 0.0;
  } else {
    r.rho0 = std::sqrt(1.0 - bt) / (2.0 * std::sqrt(r.C_star_T)) * h_inv;
    r.rho = r.rho0;
    const double ball_scale = 2.0 * std::sqrt(r.C_star_T);
    while (r.rho > 0.0 &&
           lipschitz_L_state(sys.nl, bt, ball_scale * r.rho) >= r.L_threshold) {
      r.rho *= 0.5;
      if (++r.halvings > 600) {
        r.rho = 0.0;
        break;
      }
    }
    r.C_rho = ball_scale * r.rho;
    r.L_C_rho = lipschitz_L_state(sys.nl, bt, r.C_rho);
  }

  if (!(r.rho > 0.0)) {
    r.verdict = "infeasible: smallness radius collapsed to zero";
    return r;
  }

  r.smallness_state = r.U0_norm < r.rho;
  r.smallness_history = r.g_sup < r.rho;
  r.data_within = r.smallness_state && r.smallness_history;

  // decay prefactors; the initial layer [0, tau_bar) is patched with the
  // growth bound so the estimate is pointwise from t = 0
  const double e_wt = std::exp(r.omega * r.tau_bar);
  r.C_hat = r.M * std::exp(r.gamma) *
            (r.U0_norm + e_wt * r.K * r.b_norm * r.b_norm * r.g_sup_weighted);
  const double layer = std::exp(3.0 * r.b_norm * r.b_norm *
                                gain_abs_cum(sys.gain, r.tau_bar)) *
                       r.script_E0 * std::exp(r.mu * r.tau_bar);
  r.C_tilde = std::max(
      r.C_hat * r.C_hat * (1.0 + 0.5 * r.b_norm * r.b_norm * r.K * e_wt),
      layer);

  if (!r.data_within) {
    r.verdict = "infeasible: initial data exceeds the smallness radius";
    return r;
  }
  r.certified = true;
  r.verdict = "certified";
  return r;
}

}  // namespace memwave
