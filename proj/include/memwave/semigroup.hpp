#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include "kernel.hpp"
#include "operators.hpp"
#include "util.hpp"

namespace memwave {

/// Per-mode reduced block in normalized coordinates
///   (sqrt((1-bt) l) u, v, sqrt(l w_j / r_j) what_j),
/// what_j = u - (r_j / w_j) z_j. The block
///   [ 0   a    0  ]        a   = sqrt((1 - bt) l)
///   [-a   0  -c_j ]  with  c_j = sqrt(l w_j / r_j)
///   [ 0  c_j -r_j ]
/// satisfies At + At^T = diag(0, 0, -2 r_j) <= 0, so ||exp(t At)|| is
/// non-increasing from 1.
inline Mat build_reduced_block(const KernelSpec& k, double lambda) {
  const int J = static_cast<int>(k.terms.size());
  Mat A = Mat::Zero(2 + J, 2 + J);
  const double a = std::sqrt((1.0 - k.beta_tilde) * lambda);
  A(0, 1) = a;
  A(1, 0) = -a;
  for (int j = 0; j < J; ++j) {
    const double c = std::sqrt(lambda * k.terms[j].weight / k.terms[j].rate);
    A(1, 2 + j) = -c;
    A(2 + j, 1) = c;
    A(2 + j, 2 + j) = -k.terms[j].rate;
  }
  return A;
}

/// Weighted reduced norm of a modal state:
///   sum_k (1-bt) l_k u_k^2 + v_k^2 + sum_j (l_k w_j / r_j) what_{jk}^2.
inline double reduced_norm(const Spectrum& sp, const KernelSpec& k,
                           const Vec& u, const Vec& v, const Mat& z) {
  double acc = 0.0;
  for (int m = 0; m < sp.n_modes; ++m) {
    const double l = sp.lambda(m);
    double s = (1.0 - k.beta_tilde) * l * u(m) * u(m) + v(m) * v(m);
    for (std::size_t j = 0; j < k.terms.size(); ++j) {
      const double w = k.terms[j].weight, r = k.terms[j].rate;
      const double what = u(m) - (r / w) * z(static_cast<int>(j), m);
      s += (l * w / r) * what * what;
    }
    acc += s;
  }
  return std::sqrt(acc);
}

inline double spectral_abscissa(const Mat& A) {
  Eigen::EigenSolver<Mat> es(A, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff();
}

/// beta_hat(mu) = sum w_j / (mu + r_j); the unique real root of
/// beta_hat(mu) = 1 in (-delta_min, 0) caps the modal rates as lambda grows.
inline double beta_hat_root(const KernelSpec& k) {
  auto f = [&](double mu) {
    double s = 0.0;
    for (const auto& t : k.terms) s += t.weight / (mu + t.rate);
    return s - 1.0;
  };
  double lo = -k.delta_min * (1.0 - 1e-13), hi = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

struct ModeConstants {
  double lambda = 0.0;
  double rate = 0.0;   // spectral decay rate of the block (-max Re)
  double m_sup = 1.0;  // sup_t e^{omega t} ||exp(t At)||
};

struct SemigroupConstants {
  double M = 1.0;
  double omega = 0.0;
  double omega_limit = 0.0;  // min(beta0 / 2, -mu*)
  double mu_star = 0.0;
  std::vector<ModeConstants> per_mode;
  std::vector<ModeConstants> probes;  // spot checks above the truncation
};

namespace detail {

/// Upper bound for sup_t e^{omega t} g(t), g(t) = ||exp(t A)||_2, using that
/// g is non-increasing: on each cell the product is at most
/// e^{omega t_{i+1}} g(t_i). The horizon doubles until the bound settles.
inline double block_m_sup(const Mat& A, double omega) {
  const double slack = 0.002;  // e^{omega dt} <= e^{slack} per cell
  double t_max = 8.0 / omega;
  double prev = -1.0;
  for (int round = 0; round < 12; ++round) {
    const double dt = slack / omega;
    const auto n = static_cast<std::int64_t>(std::ceil(t_max / dt));
    if (n > 1500000) break;  // horizon runaway guard; prev is the grid bound
    const Mat Ed = (dt * A).exp();
    Mat E = Mat::Identity(A.rows(), A.cols());
    double best = 1.0;
    for (std::int64_t i = 0; i < n; ++i) {
      const double g = E.jacobiSvd().singularValues()(0);
      best = std::max(best, std::exp(omega * dt * static_cast<double>(i + 1)) * g);
      E = Ed * E;
    }
    if (prev >= 0.0 && best <= prev * (1.0 + 1e-10)) return best;
    prev = best;
    t_max *= 2.0;
  }
  return prev;
}

}  // namespace detail

/// Decay certificate ||exp(t A)||_red <= M e^{-omega t} for the reduced
/// system, omega capped by the high-frequency limit and M the grid-certified
/// transient sup over all computed blocks plus probes past the truncation.
inline SemigroupConstants estimate_semigroup_constants(const KernelSpec& k,
                                                       const Spectrum& sp) {
  SemigroupConstants c;
  c.mu_star = beta_hat_root(k);
  c.omega_limit = std::min(0.5 * k.beta0, -c.mu_star);

  const double l_max = sp.lambda(sp.n_modes - 1);
  std::vector<double> probe_lambdas = {4.0 * l_max, 16.0 * l_max, 64.0 * l_max};

  double omega = c.omega_limit;
  c.per_mode.resize(static_cast<std::size_t>(sp.n_modes));
  for (int m = 0; m < sp.n_modes; ++m) {
    c.per_mode[static_cast<std::size_t>(m)].lambda = sp.lambda(m);
    c.per_mode[static_cast<std::size_t>(m)].rate =
        -spectral_abscissa(build_reduced_block(k, sp.lambda(m)));
    omega = std::min(omega, c.per_mode[static_cast<std::size_t>(m)].rate);
  }
  for (double l : probe_lambdas) {
    ModeConstants pc;
    pc.lambda = l;
    pc.rate = -spectral_abscissa(build_reduced_block(k, l));
    c.probes.push_back(pc);
    omega = std::min(omega, pc.rate);
  }
  if (!(omega > 0.0))
    throw NotExponentiallyStable("reduced system has no positive decay rate");
  c.omega = omega;

  double M = 1.0;
  for (auto& mc : c.per_mode) {
    mc.m_sup = detail::block_m_sup(build_reduced_block(k, mc.lambda), omega);
    M = std::max(M, mc.m_sup);
  }
  for (auto& mc : c.probes) {
    mc.m_sup = detail::block_m_sup(build_reduced_block(k, mc.lambda), omega);
    M = std::max(M, mc.m_sup);
  }
  c.M = M;
  return c;
}

}  // namespace memwave
