#pragma once

#include <cmath>
#include <optional>

#include "delay.hpp"
#include "history.hpp"
#include "kernel.hpp"
#include "operators.hpp"
#include "util.hpp"

namespace memwave {

struct System {
  Spectrum sp;
  std::optional<KernelSpec> kernel;
  FeedbackOperator fb;
  NonlinearityOp nl;
  DelaySpec delay;
  GainSpec gain;
  InitialHistory hist;
};

/// Modal state; z holds one memory row per kernel term (0x0 without kernel).
struct SimState {
  double t = 0.0;
  Vec u, v;
  Mat z;
};

struct IntegratorConfig {
  double dt = 1e-3;
  int corrector_max = 4;
  double corrector_tol = 1e-9;
  double blowup_sup = 1e12;
};

inline SimState initial_state(const System& sys) {
  SimState s;
  s.t = 0.0;
  s.u = sys.hist.u0;
  history_velocity_at(sys.hist, 0.0, s.v);
  if (sys.kernel)
    s.z = initial_memory(*sys.kernel, sys.hist, sys.sp.n_modes);
  else
    s.z = Mat(0, 0);
  return s;
}

/// du = v
/// dv = -lambda u + lambda (sum_j z_j) - k(t) G v(t - tau(t)) + grad psi(u)
/// dz_j = w_j u - r_j z_j
/// The delayed velocity is pulled through `vel(theta, out)`; it is only
/// consulted when k(t) != 0.
template <class VelLookup>
inline void eval_rhs(const System& sys, double t, const Vec& u, const Vec& v,
                     const Mat& z, VelLookup&& vel, Vec& du, Vec& dv, Mat& dz,
                     Vec& scratch) {
  du = v;
  dv = -(sys.sp.lambda.array() * u.array()).matrix();
  if (sys.kernel) {
    dv.array() += sys.sp.lambda.array() * memory_sum(z).array();
    dz = memory_rhs(*sys.kernel, u, z);
  }
  const double k = gain_at(sys.gain, t);
  if (k != 0.0) {
    vel(t - tau_at(sys.delay, t), scratch);
    dv.noalias() -= k * (sys.fb.gram * scratch);
  }
  if (sys.nl.spec.family != SourceFamily::none) dv += grad_psi(sys.nl, u);
}

struct StepResult {
  SimState next;
  Vec acc_next;  // dv/dt at next.t, final state
  bool used_extrapolation = false;
  int corrector_iters = 0;
};

/// One RK4 step from s.t to s.t + dt, appending the accepted sample to the
/// buffer. Delayed lookups at or before s.t use the committed buffer /
/// prescribed history; lookups inside the step (the delay dipping under dt)
/// use a provisional Hermite segment whose endpoint is fixed-point corrected.
/// `buf` must end exactly at s.t.
inline StepResult step(const System& sys, HistoryBuffer& buf,
                       const SimState& s, double dt,
                       const IntegratorConfig& ic) {
  if (!(dt > 0.0)) throw NumericError("step: dt must be > 0");
  const double t = s.t;
  const double eps = 1e-12 * std::max(1.0, std::abs(t) + dt);

  // provisional velocity segment on [t, t + dt]: start slope a0 is exact,
  // endpoint (v1g, a1g) is a guess refined by the corrector sweeps
  Vec a0, v1g = s.v, a1g;
  Vec scratch(s.u.size()), du(s.u.size());
  auto vel = [&](double theta, Vec& out) {
    if (theta <= t + eps)
      sample_velocity(sys.hist, buf, std::min(theta, t), out);
    else
      hermite_vec(t, dt, s.v, a0, v1g, a1g, std::min(theta, t + dt), out);
  };

  // k1 never looks past t (tau >= 0), so it is loop-invariant.
  Vec du1, dv1;
  Mat dz1;
  eval_rhs(sys, t, s.u, s.v, s.z, vel, du1, dv1, dz1, scratch);
  a0 = dv1;
  a1g = dv1;

  auto needs_future = [&](double ts) {
    return gain_at(sys.gain, ts) != 0.0 && ts - tau_at(sys.delay, ts) > t + eps;
  };
  const bool future = needs_future(t + 0.5 * dt) || needs_future(t + dt);

  Vec u1, v1, a1;
  Vec du2, dv2, du3, dv3, du4, dv4;
  Mat z1, dz2, dz3, dz4;
  auto pass = [&]() {
    eval_rhs(sys, t + 0.5 * dt, Vec(s.u + 0.5 * dt * du1),
             Vec(s.v + 0.5 * dt * dv1),
             sys.kernel ? Mat(s.z + 0.5 * dt * dz1) : s.z, vel, du2, dv2, dz2,
             scratch);
    eval_rhs(sys, t + 0.5 * dt, Vec(s.u + 0.5 * dt * du2),
             Vec(s.v + 0.5 * dt * dv2),
             sys.kernel ? Mat(s.z + 0.5 * dt * dz2) : s.z, vel, du3, dv3, dz3,
             scratch);
    eval_rhs(sys, t + dt, Vec(s.u + dt * du3), Vec(s.v + dt * dv3),
             sys.kernel ? Mat(s.z + dt * dz3) : s.z, vel, du4, dv4, dz4,
             scratch);
    u1 = s.u + (dt / 6.0) * (du1 + 2.0 * du2 + 2.0 * du3 + du4);
    v1 = s.v + (dt / 6.0) * (dv1 + 2.0 * dv2 + 2.0 * dv3 + dv4);
    if (sys.kernel)
      z1 = s.z + (dt / 6.0) * (dz1 + 2.0 * dz2 + 2.0 * dz3 + dz4);
    else
      z1 = s.z;
    eval_rhs(sys, t + dt, u1, v1, z1, vel, du, a1, dz4, scratch);
  };

  int iters = 0;
  if (!future) {
    pass();
  } else {
    double diff = 0.0;
    for (iters = 1; iters <= ic.corrector_max; ++iters) {
      pass();
      diff = (v1 - v1g).lpNorm<Eigen::Infinity>() +
             dt * (a1 - a1g).lpNorm<Eigen::Infinity>();
      v1g = v1;
      a1g = a1;
      if (diff <= ic.corrector_tol * std::max(1.0, v1.lpNorm<Eigen::Infinity>()))
        break;
    }
    if (!std::isfinite(diff))
      throw CorrectorDiverged("step: vanishing-delay corrector diverged");
    if (iters > ic.corrector_max) iters = ic.corrector_max;
    pass();  // final sweep with the settled segment
  }

  const double sup =
      std::max(u1.lpNorm<Eigen::Infinity>(), v1.lpNorm<Eigen::Infinity>());
  if (!u1.allFinite() || !v1.allFinite() || !z1.allFinite() ||
      sup > ic.blowup_sup)
    throw NonFiniteValue("state sup-norm exceeded blow-up threshold");

  StepResult r;
  r.next.t = t + dt;
  r.next.u = std::move(u1);
  r.next.v = std::move(v1);
  r.next.z = std::move(z1);
  r.acc_next = std::move(a1);
  r.used_extrapolation = future;
  r.corrector_iters = iters;
  buf.push(r.next.t, r.next.u, r.next.v, r.acc_next);
  return r;
}

}  // namespace memwave
