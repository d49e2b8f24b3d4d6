#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "dynamics.hpp"

namespace memwave {

/// E(t) = kinetic + elastic - source + memory + gain_window with
///   kinetic     = 1/2 |v|^2
///   elastic     = (1 - beta_tilde)/2 sum lambda u^2
///   source      = psi(u)
///   memory      = 1/2 int beta(s) sum lambda (u(t) - u(t-s))^2 ds
///   gain_window = 1/2 int_{max(t - tau_bar, 0)}^t |k(s)| <G v(s), v(s)> ds
struct EnergyBreakdown {
  double kinetic = 0.0;
  double elastic = 0.0;
  double source = 0.0;
  double memory = 0.0;
  double gain_window = 0.0;
  double total = 0.0;
};

inline double gain_window_integral(const System& sys, const HistoryBuffer& buf,
                                   double t) {
  const double lo = std::max(t - sys.delay.tau_bar, 0.0);
  if (!(t > lo) || gain_is_zero(sys.gain)) return 0.0;
  Vec vs(sys.sp.n_modes);
  auto f = [&](double s) {
    const double k = std::abs(gain_at(sys.gain, s));
    if (k == 0.0) return 0.0;
    sample_velocity(sys.hist, buf, s, vs);
    return k * observed_square(sys.fb, vs);
  };
  return simpson_segmented(f, lo, t, gain_breakpoints(sys.gain, lo, t), 200,
                           1e-8, 4, 1e-30);
}

inline EnergyBreakdown energy(const System& sys, const HistoryBuffer& buf,
                              const SimState& s) {
  EnergyBreakdown e;
  e.kinetic = 0.5 * s.v.squaredNorm();
  const double bt = sys.kernel ? sys.kernel->beta_tilde : 0.0;
  e.elastic = 0.5 * (1.0 - bt) * (sys.sp.lambda.array() * s.u.array().square()).sum();
  e.source = psi_value(sys.nl, s.u);
  if (sys.kernel)
    e.memory = 0.5 * memory_energy(*sys.kernel, sys.sp, sys.hist, buf, s.u, s.t);
  e.gain_window = 0.5 * gain_window_integral(sys, buf, s.t);
  e.total = e.kinetic + e.elastic - e.source + e.memory + e.gain_window;
  return e;
}

/// Initial-layer envelope max(1/2 sup_{theta <= 0} |g|^2, E(0)).
inline double script_E0(const System& sys, const EnergyBreakdown& e0) {
  const double g = history_g_sup_norm(sys.hist);
  return std::max(0.5 * g * g, e0.total);
}

struct EnergySample {
  double t = 0.0;
  EnergyBreakdown e;
};

}  // namespace memwave
