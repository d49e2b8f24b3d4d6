#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "dynamics.hpp"
#include "energy.hpp"

namespace memwave {

struct Trajectory {
  HistoryBuffer buf;
  std::vector<EnergySample> energy;
  // aligned with `energy`: buffer row of the sample, and whether any step
  // since the previous sample used cross-delay extrapolation
  std::vector<std::size_t> sample_row;
  std::vector<std::uint8_t> sample_extrapolated;
  SimState final_state;
  double t_end = 0.0;
  std::int64_t steps = 0;
  std::int64_t extrapolated_steps = 0;
  bool blew_up = false;
};

/// Fixed-step integration to the horizon; a near-integer horizon/dt runs on
/// the exact uniform grid, otherwise one shorter final step lands on the
/// horizon. Blow-up keeps the committed prefix and flags the trajectory.
/// energy_cadence > 0 records the energy split every that many steps (and at
/// both ends).
inline Trajectory simulate(const System& sys, double horizon,
                           const IntegratorConfig& ic, int energy_cadence = 0) {
  if (!(horizon > 0.0)) throw ConfigError("simulate: horizon must be > 0");
  Trajectory tr;
  SimState s = initial_state(sys);

  {
    Vec du, dv, scratch(s.u.size());
    Mat dz;
    eval_rhs(
        sys, s.t, s.u, s.v, s.z,
        [&](double theta, Vec& out) {
          sample_velocity(sys.hist, tr.buf, std::min(theta, 0.0), out);
        },
        du, dv, dz, scratch);
    tr.buf.push(s.t, s.u, s.v, dv);
  }

  const double n_real = horizon / ic.dt;
  std::int64_t n_full = std::llround(n_real);
  double last_dt = 0.0;
  if (std::abs(static_cast<double>(n_full) * ic.dt - horizon) > 1e-9 * ic.dt) {
    n_full = static_cast<std::int64_t>(std::floor(n_real));
    last_dt = horizon - static_cast<double>(n_full) * ic.dt;
    if (last_dt < 1e-12 * ic.dt) last_dt = 0.0;
  }
  const std::int64_t n_steps = n_full + (last_dt > 0.0 ? 1 : 0);

  bool block_extrapolated = false;
  auto record = [&]() {
    tr.energy.push_back({s.t, energy(sys, tr.buf, s)});
    tr.sample_row.push_back(tr.buf.t.size() - 1);
    tr.sample_extrapolated.push_back(block_extrapolated ? 1 : 0);
    block_extrapolated = false;
  };
  if (energy_cadence > 0) record();

  for (std::int64_t i = 0; i < n_steps; ++i) {
    const double dt = (i == n_full) ? last_dt : ic.dt;
    try {
      StepResult r = step(sys, tr.buf, s, dt, ic);
      s = std::move(r.next);
      ++tr.steps;
      if (r.used_extrapolation) {
        ++tr.extrapolated_steps;
        block_extrapolated = true;
      }
    } catch (const NonFiniteValue&) {
      tr.blew_up = true;
      break;
    }
    if (energy_cadence > 0 &&
        ((i + 1) % energy_cadence == 0 || i + 1 == n_steps))
      record();
  }

  tr.final_state = std::move(s);
  tr.t_end = tr.final_state.t;
  return tr;
}

}  // namespace memwave
