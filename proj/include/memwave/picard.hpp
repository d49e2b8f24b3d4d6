#pragma once

#include <cmath>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "dynamics.hpp"

namespace memwave {

/// Unnormalized per-mode linear block on (u, v, z_1..z_J):
///   u' = v, v' = -l u + l sum z_j, z_j' = w_j u - r_j z_j.
inline Mat build_full_block(const KernelSpec* k, double lambda) {
  const int J = k ? static_cast<int>(k->terms.size()) : 0;
  Mat A = Mat::Zero(2 + J, 2 + J);
  A(0, 1) = 1.0;
  A(1, 0) = -lambda;
  for (int j = 0; j < J; ++j) {
    A(1, 2 + j) = lambda;
    A(2 + j, 0) = k->terms[j].weight;
    A(2 + j, 2 + j) = -k->terms[j].rate;
  }
  return A;
}

struct PicardResult {
  bool converged = false;
  int iters = 0;
  double q = 0.0;        // contraction factor certificate
  double ball_radius = 0.0;
  std::vector<double> times;
  std::vector<Mat> states;  // (2+J) x n_modes per grid node: rows u, v, z_j
};

/// Fixed-point mild-solution oracle on [0, xi]: the linear flow is applied
/// exactly per mode (matrix exponentials), the gain and source forcing is
/// accumulated by trapezoid Duhamel sweeps, and sweeps repeat from the
/// constant extension until the grid sup settles. Independent of the RK4
/// stepper. Throws NotAContraction when the smallness certificate
///   q = M (L(ball) xi + b^2 int_0^xi |k|) >= 1/4
/// fails, NoConvergence when sweeps stall.
inline PicardResult picard_oracle(const System& sys, double M, double xi,
                                  int n_grid, double tol = 1e-10,
                                  int max_iter = 60) {
  if (!(xi > 0.0) || n_grid < 8) throw ConfigError("picard: bad grid");
  const int n = sys.sp.n_modes;
  const KernelSpec* k = sys.kernel ? &*sys.kernel : nullptr;
  const int rows = 2 + (k ? static_cast<int>(k->terms.size()) : 0);
  const double dt = xi / n_grid;
  const double bt = k ? k->beta_tilde : 0.0;

  // initial block state
  Mat X0(rows, n);
  {
    SimState s0 = initial_state(sys);
    X0.row(0) = s0.u.transpose();
    X0.row(1) = s0.v.transpose();
    for (int j = 2; j < rows; ++j) X0.row(j) = s0.z.row(j - 2);
  }

  // contraction certificate on the doubled data ball
  const double data_norm = std::max(X0.norm(), history_g_sup_norm(sys.hist));
  const double ball = 2.0 * M * data_norm;
  const double lip = lipschitz_L_state(sys.nl, bt, ball);
  const double b2 = sys.fb.b_norm * sys.fb.b_norm;
  const double q = M * (lip * xi + b2 * gain_abs_cum(sys.gain, xi));
  if (!(q < 0.25))
    throw NotAContraction("picard: contraction certificate q >= 1/4");

  std::vector<Mat> prop(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m)
    prop[static_cast<std::size_t>(m)] =
        (dt * build_full_block(k, sys.sp.lambda(m))).exp();

  PicardResult res;
  res.q = q;
  res.ball_radius = ball;
  res.times.resize(static_cast<std::size_t>(n_grid) + 1);
  for (int i = 0; i <= n_grid; ++i)
    res.times[static_cast<std::size_t>(i)] = dt * i;

  std::vector<Mat> cur(res.times.size(), X0), nxt(res.times.size(), X0);

  // delayed velocity on the current iterate: history for theta <= 0, cubic
  // Lagrange on the grid otherwise
  Vec w(n), u_i(n);
  auto delayed_velocity = [&](const std::vector<Mat>& it, double theta,
                              Vec& out) {
    if (theta <= 0.0) {
      history_velocity_at(sys.hist, theta, out);
      return;
    }
    int j0 = static_cast<int>(std::floor(theta / dt)) - 1;
    j0 = std::max(0, std::min(j0, n_grid - 3));
    out.setZero();
    for (int a = 0; a < 4; ++a) {
      double wgt = 1.0;
      for (int b = 0; b < 4; ++b) {
        if (a == b) continue;
        wgt *= (theta - res.times[static_cast<std::size_t>(j0 + b)]) /
               (res.times[static_cast<std::size_t>(j0 + a)] -
                res.times[static_cast<std::size_t>(j0 + b)]);
      }
      out += wgt * it[static_cast<std::size_t>(j0 + a)].row(1).transpose();
    }
  };

  auto forcing = [&](const std::vector<Mat>& it, int i, Mat& f) {
    f.setZero();
    const double s = res.times[static_cast<std::size_t>(i)];
    if (sys.nl.spec.family != SourceFamily::none) {
      u_i = it[static_cast<std::size_t>(i)].row(0).transpose();
      f.row(1) = grad_psi(sys.nl, u_i).transpose();
    }
    const double kg = gain_at(sys.gain, s);
    if (kg != 0.0) {
      delayed_velocity(it, s - tau_at(sys.delay, s), w);
      f.row(1) -= kg * (sys.fb.gram * w).transpose();
    }
  };

  Mat f_prev(rows, n), f_cur(rows, n);
  for (res.iters = 1; res.iters <= max_iter; ++res.iters) {
    nxt[0] = X0;
    forcing(cur, 0, f_prev);
    double diff = 0.0;
    for (int i = 0; i < n_grid; ++i) {
      forcing(cur, i + 1, f_cur);
      Mat& out = nxt[static_cast<std::size_t>(i + 1)];
      for (int m = 0; m < n; ++m) {
        const Mat& S = prop[static_cast<std::size_t>(m)];
        out.col(m) = S * (nxt[static_cast<std::size_t>(i)].col(m) +
                          0.5 * dt * f_prev.col(m)) +
                     0.5 * dt * f_cur.col(m);
      }
      diff = std::max(
          diff, (out - cur[static_cast<std::size_t>(i + 1)]).lpNorm<Eigen::Infinity>());
      f_prev.swap(f_cur);
    }
    cur.swap(nxt);
    if (diff <= tol) {
      res.converged = true;
      break;
    }
  }
  if (!res.converged)
    throw NoConvergence("picard: sweeps did not settle");
  res.states = std::move(cur);
  return res;
}

}  // namespace memwave
