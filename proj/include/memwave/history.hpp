#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "kernel.hpp"
#include "operators.hpp"
#include "util.hpp"

namespace memwave {

enum class PositionHistory { constant, ramp };
enum class VelocityHistory { constant, sinusoidal };

/// Prescribed past: modal position u(theta) and delayed-velocity trace
/// g(theta) for theta <= 0. The ramp position descends linearly from u0 at
/// theta = 0 to (1 - ramp_c) u0 at theta = -t_hist and is flat beyond, so the
/// memory integrals close in finite time. Velocity history peaks at theta = 0
/// for both families (cos factor <= 1).
struct InitialHistory {
  PositionHistory position = PositionHistory::constant;
  double ramp_c = 0.0;
  double t_hist = 1.0;
  Vec u0;
  VelocityHistory velocity = VelocityHistory::constant;
  double vel_frequency = 1.0;
  Vec g0;
};

inline void check_history(const InitialHistory& h) {
  if (h.position == PositionHistory::ramp) {
    if (!(h.t_hist > 0.0)) throw ConfigError("history: ramp needs t_hist > 0");
    if (!std::isfinite(h.ramp_c)) throw ConfigError("history: ramp_c not finite");
  }
  if (h.velocity == VelocityHistory::sinusoidal && !std::isfinite(h.vel_frequency))
    throw ConfigError("history: vel_frequency not finite");
  if (h.u0.size() == 0 || h.g0.size() != h.u0.size())
    throw ShapeMismatch("history: u0/g0 sizes disagree");
}

/// Depth s beyond which u(-s) is constant.
inline double history_flat_from(const InitialHistory& h) {
  return h.position == PositionHistory::ramp ? h.t_hist : 0.0;
}

inline Vec history_u_flat(const InitialHistory& h) {
  return h.position == PositionHistory::ramp ? Vec((1.0 - h.ramp_c) * h.u0)
                                             : h.u0;
}

inline void history_position_at(const InitialHistory& h, double theta, Vec& out) {
  if (h.position == PositionHistory::constant || theta >= 0.0) {
    out = h.u0;
    return;
  }
  const double s = -theta;
  const double f = s >= h.t_hist ? 1.0 - h.ramp_c
                                 : 1.0 - h.ramp_c * (s / h.t_hist);
  out = f * h.u0;
}

inline void history_velocity_at(const InitialHistory& h, double theta, Vec& out) {
  if (h.velocity == VelocityHistory::constant) {
    out = h.g0;
    return;
  }
  out = std::cos(h.vel_frequency * theta) * h.g0;
}

/// sup over theta <= 0 of |g(theta)| in the plain modal norm.
inline double history_g_sup_norm(const InitialHistory& h) {
  return h.g0.norm();
}

/// Committed trajectory samples (t, u, v, a) with a = dv/dt, supporting C^1
/// cubic Hermite lookups of u (slopes v) and v (slopes a). Times must be
/// pushed strictly increasing; lookups outside [t.front(), t.back()] throw.
struct HistoryBuffer {
  std::vector<double> t;
  std::vector<Vec> u, v, a;

  void push(double time, const Vec& uu, const Vec& vv, const Vec& aa) {
    if (!t.empty() && !(time > t.back()))
      throw HistoryGap("buffer: push times must increase");
    t.push_back(time);
    u.push_back(uu);
    v.push_back(vv);
    a.push_back(aa);
  }

  bool empty() const { return t.empty(); }

  // index i with t[i] <= theta <= t[i+1]
  std::size_t segment(double theta) const {
    if (t.size() < 2 || theta < t.front() || theta > t.back())
      throw HistoryGap("buffer: lookup outside stored range");
    auto it = std::upper_bound(t.begin(), t.end(), theta);
    std::size_t i = static_cast<std::size_t>(it - t.begin());
    if (i > 0) --i;
    if (i + 1 >= t.size()) i = t.size() - 2;
    return i;
  }

  void u_at(double theta, Vec& out) const {
    if (t.size() == 1 && theta == t.front()) { out = u.front(); return; }
    const std::size_t i = segment(theta);
    hermite_vec(t[i], t[i + 1] - t[i], u[i], v[i], u[i + 1], v[i + 1], theta, out);
  }

  void v_at(double theta, Vec& out) const {
    if (t.size() == 1 && theta == t.front()) { out = v.front(); return; }
    const std::size_t i = segment(theta);
    hermite_vec(t[i], t[i + 1] - t[i], v[i], a[i], v[i + 1], a[i + 1], theta, out);
  }
};

/// u(theta) across the prescribed/committed boundary at theta = 0.
inline void sample_position(const InitialHistory& h, const HistoryBuffer& buf,
                            double theta, Vec& out) {
  const double t0 = buf.empty() ? 0.0 : buf.t.front();
  if (theta <= t0) {
    history_position_at(h, theta - t0, out);
    return;
  }
  buf.u_at(theta, out);
}

/// Velocity across the same boundary; for theta <= 0 this is the delayed
/// velocity trace g, not d/dt of the position history.
inline void sample_velocity(const InitialHistory& h, const HistoryBuffer& buf,
                            double theta, Vec& out) {
  const double t0 = buf.empty() ? 0.0 : buf.t.front();
  if (theta <= t0) {
    history_velocity_at(h, theta - t0, out);
    return;
  }
  buf.v_at(theta, out);
}

/// Memory state z(0): z_j = w_j int_0^inf e^{-r_j s} u(-s) ds.
inline Mat initial_memory(const KernelSpec& k, const InitialHistory& h,
                          int n_modes) {
  const double flat = history_flat_from(h);
  const double s_cut = std::max(20.0 / k.delta_min, flat);
  return init_memory_state(
      k,
      [&](double theta, Vec& out) { history_position_at(h, theta, out); },
      n_modes, history_u_flat(h), flat, s_cut);
}

/// Memory energy integral at time t (unhalved):
///   int_0^inf beta(s) sum_m lambda_m (u_m(t) - u_m(t-s))^2 ds.
inline double memory_energy(const KernelSpec& k, const Spectrum& sp,
                            const InitialHistory& h, const HistoryBuffer& buf,
                            const Vec& u_now, double t) {
  const double flat = history_flat_from(h);
  const double s_cut = std::max(20.0 / k.delta_min, t + flat);
  return eta_energy(
      k, sp.lambda, u_now,
      [&](double theta, Vec& out) { sample_position(h, buf, theta, out); }, t,
      flat, s_cut);
}

}  // namespace memwave
