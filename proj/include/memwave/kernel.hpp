#pragma once

#include <utility>
#include <vector>

#include "util.hpp"

namespace memwave {

/// One exponential relaxation term: weight * exp(-rate * s).
struct KernelTerm {
  double weight;
  double rate;
};

/// Sum-of-exponentials relaxation kernel beta(s) = sum_j weight_j e^{-rate_j s}
/// with the aggregates every consumer needs:
///   beta0       = beta(0), total instantaneous weight,
///   beta_tilde  = int_0^inf beta, must stay < 1 so the residual elastic
///                 operator keeps a coercivity margin of (1 - beta_tilde),
///   delta_min   = slowest rate; beta'(s) <= -delta_min * beta(s) holds
///                 term-by-term, which is the differential domination the
///                 stability analysis relies on.
struct KernelSpec {
  std::vector<KernelTerm> terms;
  double beta0 = 0.0;
  double beta_tilde = 0.0;
  double delta_min = 0.0;
};

inline KernelSpec make_kernel(const std::vector<std::pair<double, double>>& terms) {
  if (terms.empty())
    throw NonPositiveTerm("kernel: need at least one (weight, rate) term");
  KernelSpec k;
  k.delta_min = std::numeric_limits<double>::infinity();
  for (const auto& [w, r] : terms) {
    if (!(w > 0.0) || !(r > 0.0) || !std::isfinite(w) || !std::isfinite(r))
      throw NonPositiveTerm("kernel: weights and rates must be finite and > 0");
    k.terms.push_back({w, r});
    k.beta0 += w;
    k.beta_tilde += w / r;
    k.delta_min = std::min(k.delta_min, r);
  }
  if (!(k.beta_tilde < 1.0))
    throw MassNotLessThanOne("kernel: total mass int beta = " +
                             std::to_string(k.beta_tilde) + " must be < 1");
  return k;
}

inline double beta_eval(const KernelSpec& k, double s) {
  double v = 0.0;
  for (const auto& t : k.terms) v += t.weight * std::exp(-t.rate * s);
  return v;
}

/// int_s^inf beta  (used for the flat-history tail of every s-quadrature).
inline double beta_tail(const KernelSpec& k, double s) {
  double v = 0.0;
  for (const auto& t : k.terms) v += (t.weight / t.rate) * std::exp(-t.rate * s);
  return v;
}

// Memory state z(j, m) = weight_j * int_0^inf e^{-rate_j s} u_m(t - s) ds.
// Differentiating under the integral gives the exact row-wise reduction
//   z_j' = weight_j * u - rate_j * z_j,
// and the convolution int beta(s) u(t-s) ds is the column sum over j.
inline Mat memory_rhs(const KernelSpec& k, const Vec& u, const Mat& z) {
  const auto J = static_cast<Eigen::Index>(k.terms.size());
  if (z.rows() != J || z.cols() != u.size())
    throw ShapeMismatch("memory_rhs: z must be (terms x modes)");
  Mat dz(J, u.size());
  for (Eigen::Index j = 0; j < J; ++j)
    dz.row(j) = k.terms[static_cast<std::size_t>(j)].weight * u.transpose() -
                k.terms[static_cast<std::size_t>(j)].rate * z.row(j);
  return dz;
}

/// Column sums of z: the modal coefficients of int_0^inf beta(s) u(t-s) ds.
inline Vec memory_sum(const Mat& z) { return z.colwise().sum().transpose(); }

// Seed the memory state from a position history. `past(theta, out)` must fill
// the modal coefficients of u(theta) for theta <= 0, and the history must be
// constant (== u_flat) for theta <= -flat_from. The quadrature covers
// [0, s_cut] with a split at flat_from; the remainder has the closed form
// (weight/rate) e^{-rate s_cut} u_flat because the integrand is flat there.
template <class PastU>
Mat init_memory_state(const KernelSpec& k, PastU&& past, int n_modes,
                      const Vec& u_flat, double flat_from, double s_cut,
                      int n0 = 400, double rel_tol = 1e-13,
                      int max_doublings = 6) {
  if (u_flat.size() != n_modes)
    throw ShapeMismatch("init_memory_state: u_flat size != n_modes");
  s_cut = std::max(s_cut, flat_from);
  Mat z(static_cast<Eigen::Index>(k.terms.size()), n_modes);
  Vec scratch(n_modes);
  for (std::size_t j = 0; j < k.terms.size(); ++j) {
    const double w = k.terms[j].weight, r = k.terms[j].rate;
    for (int m = 0; m < n_modes; ++m) {
      auto f = [&](double s) {
        past(-s, scratch);
        return w * std::exp(-r * s) * scratch[m];
      };
      const double body = simpson_segmented(f, 0.0, s_cut, {flat_from}, n0,
                                            rel_tol, max_doublings);
      const double tail = (w / r) * std::exp(-r * s_cut) * u_flat[m];
      z(static_cast<Eigen::Index>(j), m) = body + tail;
    }
  }
  return z;
}

// Weighted history-offset energy int_0^s_cut beta(s) * sum_m lambda_m
// (u_m(t) - u_m(t-s))^2 ds plus the exact flat tail. `past(theta, out)` must
// resolve u(theta) for theta in [t - s_cut, t]; beyond the cut the history is
// flat at u_flat so the tail is beta_tail(s_cut) * |A^{1/2}(u(t)-u_flat)|^2.
// Splits: s = t (buffer/history junction) and s = t + flat_from (ramp end)
// are derivative kinks of the integrand, so each side is integrated alone.
// Callers halve the result when they want the energy convention.
template <class PastU>
double eta_energy(const KernelSpec& k, const Vec& lambda, const Vec& u_now,
                  PastU&& past, double t, double flat_from, double s_cut,
                  int n0 = 400, double rel_tol = 1e-8, int max_doublings = 4,
                  double abs_floor = 1e-30) {
  if (lambda.size() != u_now.size())
    throw ShapeMismatch("eta_energy: lambda size != u size");
  s_cut = std::max(s_cut, t + flat_from);
  Vec scratch(u_now.size());
  auto f = [&](double s) {
    past(t - s, scratch);
    double acc = 0.0;
    for (Eigen::Index m = 0; m < u_now.size(); ++m) {
      const double d = u_now[m] - scratch[m];
      acc += lambda[m] * d * d;
    }
    return beta_eval(k, s) * acc;
  };
  const double body = simpson_segmented(f, 0.0, s_cut, {t, t + flat_from}, n0,
                                        rel_tol, max_doublings, abs_floor);
  past(t - s_cut, scratch);  // == u_flat by construction of s_cut
  double flat_gap = 0.0;
  for (Eigen::Index m = 0; m < u_now.size(); ++m) {
    const double d = u_now[m] - scratch[m];
    flat_gap += lambda[m] * d * d;
  }
  return body + beta_tail(k, s_cut) * flat_gap;
}

}  // namespace memwave
