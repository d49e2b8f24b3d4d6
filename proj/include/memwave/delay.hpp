#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "util.hpp"

namespace memwave {

enum class DelayFamily { constant, sinusoidal, piecewise_linear };

/// Time-varying lag tau(t), confined to [0, tau_bar] by construction checks.
/// piecewise_linear interpolates (t, tau) knots and extends the end values
/// left and right, so the range check on knots covers the whole line.
struct DelaySpec {
  DelayFamily family = DelayFamily::constant;
  double tau_bar = 1.0;
  double value = 0.5;                            // constant
  double mean = 0.0, amplitude = 0.0;            // sinusoidal
  double frequency = 1.0, phase = 0.0;
  std::vector<std::pair<double, double>> knots;  // piecewise_linear
};

inline void check_delay(const DelaySpec& d) {
  if (!(d.tau_bar > 0.0)) throw DelayOutOfRange("delay: tau_bar must be > 0");
  switch (d.family) {
    case DelayFamily::constant:
      if (!(d.value >= 0.0 && d.value <= d.tau_bar))
        throw DelayOutOfRange("delay: constant value outside [0, tau_bar]");
      break;
    case DelayFamily::sinusoidal:
      if (!(d.mean - std::abs(d.amplitude) >= 0.0 &&
            d.mean + std::abs(d.amplitude) <= d.tau_bar))
        throw DelayOutOfRange("delay: mean +/- amplitude outside [0, tau_bar]");
      break;
    case DelayFamily::piecewise_linear: {
      if (d.knots.empty()) throw DelayOutOfRange("delay: no knots");
      double prev = -std::numeric_limits<double>::infinity();
      for (const auto& [t, tau] : d.knots) {
        if (!(t > prev)) throw DelayOutOfRange("delay: knot times must increase");
        if (!(tau >= 0.0 && tau <= d.tau_bar))
          throw DelayOutOfRange("delay: knot value outside [0, tau_bar]");
        prev = t;
      }
      break;
    }
  }
}

inline double tau_at(const DelaySpec& d, double t) {
  switch (d.family) {
    case DelayFamily::constant:
      return d.value;
    case DelayFamily::sinusoidal:
      return d.mean + d.amplitude * std::sin(d.frequency * t + d.phase);
    case DelayFamily::piecewise_linear: {
      if (t <= d.knots.front().first) return d.knots.front().second;
      if (t >= d.knots.back().first) return d.knots.back().second;
      auto it = std::upper_bound(
          d.knots.begin(), d.knots.end(), t,
          [](double x, const auto& kn) { return x < kn.first; });
      const auto& [t1, v1] = *it;
      const auto& [t0, v0] = *(it - 1);
      return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
    }
  }
  return d.value;
}

enum class GainFamily { constant, exponential_decay, periodic_pulses, sign_alternating };

/// Feedback gain k(t), taken as 0 for t < 0 (history carries no feedback).
///   constant:           k = amplitude
///   exponential_decay:  k = amplitude e^{-rate t}
///   periodic_pulses:    k = amplitude on [m P, m P + width), else 0
///   sign_alternating:   k = +/- amplitude, sign flips every period/2
struct GainSpec {
  GainFamily family = GainFamily::constant;
  double amplitude = 0.0;
  double rate = 1.0;    // exponential_decay
  double period = 1.0;  // periodic_pulses / sign_alternating
  double width = 0.5;   // periodic_pulses
};

inline void check_gain(const GainSpec& g) {
  if (!std::isfinite(g.amplitude)) throw ConfigError("gain: amplitude not finite");
  switch (g.family) {
    case GainFamily::constant:
      break;
    case GainFamily::exponential_decay:
      if (!(g.rate > 0.0))
        throw UnboundedBudget("gain: decay rate must be > 0 for a finite budget");
      break;
    case GainFamily::periodic_pulses:
      if (!(g.period > 0.0) || !(g.width > 0.0) || !(g.width <= g.period))
        throw ConfigError("gain: need 0 < width <= period");
      break;
    case GainFamily::sign_alternating:
      if (!(g.period > 0.0)) throw ConfigError("gain: period must be > 0");
      break;
  }
}

inline bool gain_is_zero(const GainSpec& g) { return g.amplitude == 0.0; }

inline double gain_at(const GainSpec& g, double t) {
  if (t < 0.0 || g.amplitude == 0.0) return 0.0;
  switch (g.family) {
    case GainFamily::constant:
      return g.amplitude;
    case GainFamily::exponential_decay:
      return g.amplitude * std::exp(-g.rate * t);
    case GainFamily::periodic_pulses: {
      const double ph = t - g.period * std::floor(t / g.period);
      return ph < g.width ? g.amplitude : 0.0;
    }
    case GainFamily::sign_alternating: {
      const double ph = t - g.period * std::floor(t / g.period);
      return ph < 0.5 * g.period ? g.amplitude : -g.amplitude;
    }
  }
  return 0.0;
}

/// int_0^t |k|, closed form per family (0 for t <= 0).
inline double gain_abs_cum(const GainSpec& g, double t) {
  if (t <= 0.0 || g.amplitude == 0.0) return 0.0;
  const double a = std::abs(g.amplitude);
  switch (g.family) {
    case GainFamily::constant:
    case GainFamily::sign_alternating:
      return a * t;
    case GainFamily::exponential_decay:
      return (a / g.rate) * (1.0 - std::exp(-g.rate * t));
    case GainFamily::periodic_pulses: {
      const double full = std::floor(t / g.period);
      const double ph = t - g.period * full;
      return a * (full * g.width + std::min(ph, g.width));
    }
  }
  return 0.0;
}

/// lim_{t->inf} of int_0^t |k| / t.
inline double gain_asymptotic_slope(const GainSpec& g) {
  const double a = std::abs(g.amplitude);
  switch (g.family) {
    case GainFamily::constant:
    case GainFamily::sign_alternating:
      return a;
    case GainFamily::exponential_decay:
      return 0.0;
    case GainFamily::periodic_pulses:
      return a * g.width / g.period;
  }
  return 0.0;
}

/// sup_{x >= 0} int_x^{x+T} |k|. Exact per family: the cumulative is concave
/// (constant slope, decaying, or piecewise linear with breakpoints only at
/// pulse edges), so the sup sits at x = 0 or at a pulse-edge candidate.
inline double gain_window_sup(const GainSpec& g, double T) {
  if (!(T > 0.0) || g.amplitude == 0.0) return 0.0;
  const double a = std::abs(g.amplitude);
  switch (g.family) {
    case GainFamily::constant:
    case GainFamily::sign_alternating:
      return a * T;
    case GainFamily::exponential_decay:
      return (a / g.rate) * (1.0 - std::exp(-g.rate * T));
    case GainFamily::periodic_pulses: {
      // window mass is piecewise linear and P-periodic in x; evaluate at every
      // shift that puts a window end on a pulse edge.
      auto mass = [&](double x) {
        return gain_abs_cum(g, x + T) - gain_abs_cum(g, x);
      };
      double best = mass(0.0);
      const int reps = static_cast<int>(std::ceil(T / g.period)) + 2;
      for (int j = 0; j <= reps; ++j) {
        for (double edge : {j * g.period, j * g.period + g.width}) {
          for (double x : {edge, edge - T}) {
            const double xm = x - g.period * std::floor(x / g.period);
            best = std::max(best, mass(xm));
          }
        }
      }
      return best;
    }
  }
  return 0.0;
}

/// Windowed budget sup_{t} int_{t - tau_bar}^{t} |k|; with k == 0 before 0
/// this coincides with the shifted-window sup above.
inline double gain_budget(const GainSpec& g, double tau_bar) {
  return gain_window_sup(g, tau_bar);
}

/// |k| kink locations in (t0, t1) for quadrature splitting.
inline std::vector<double> gain_breakpoints(const GainSpec& g, double t0, double t1) {
  std::vector<double> cuts;
  if (t0 < 0.0 && t1 > 0.0) cuts.push_back(0.0);
  if (g.family == GainFamily::periodic_pulses && g.amplitude != 0.0) {
    const int j0 = std::max(0, static_cast<int>(std::floor(t0 / g.period)) - 1);
    for (int j = j0;; ++j) {
      const double on = j * g.period, off = j * g.period + g.width;
      if (on > t1) break;
      if (on > t0 && on < t1) cuts.push_back(on);
      if (off > t0 && off < t1) cuts.push_back(off);
    }
  }
  return cuts;
}

/// Affine growth certificate for the weighted gain mass: the smallest slope
/// omega_prime with pref * int_0^t |k| <= gamma + omega_prime t for all t,
/// where pref = b^2 M e^{omega tau_bar}; ties broken by the smallest gamma.
/// Infeasible when even the asymptotic slope reaches omega.
struct GainGrowthFit {
  bool feasible = false;
  double gamma = 0.0;
  double omega_prime = 0.0;
  double slope = 0.0;  // pref * asymptotic slope of int |k|
};

inline GainGrowthFit fit_gain_growth(const GainSpec& g, double b_norm, double M,
                                     double omega, double tau_bar) {
  GainGrowthFit fit;
  const double pref = b_norm * b_norm * M * std::exp(omega * tau_bar);
  fit.slope = pref * gain_asymptotic_slope(g);
  if (!(fit.slope < omega)) return fit;  // omega_prime must stay below omega
  fit.feasible = true;
  fit.omega_prime = fit.slope;
  // Residual sup_t (int_0^t |k| - slope t): 0 for constant slope families,
  // the total mass for integrable gains, the single-period deficit for pulses.
  const double a = std::abs(g.amplitude);
  double deficit = 0.0;
  switch (g.family) {
    case GainFamily::constant:
    case GainFamily::sign_alternating:
      deficit = 0.0;
      break;
    case GainFamily::exponential_decay:
      deficit = a > 0.0 ? a / g.rate : 0.0;
      break;
    case GainFamily::periodic_pulses:
      deficit = a * g.width * (1.0 - g.width / g.period);
      break;
  }
  fit.gamma = pref * deficit;
  return fit;
}

}  // namespace memwave
