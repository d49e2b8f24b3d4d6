#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "util.hpp"

namespace memwave {

/// Dirichlet sine spectrum on (0, length): lambda_k = (k pi / length)^2 with
/// orthonormal modes phi_k = sqrt(2/length) sin(k pi x / length), k = 1..n.
struct Spectrum {
  int n_modes = 0;
  double length = 0.0;
  Vec lambda;
};

inline Spectrum build_spectrum(int n_modes, double length) {
  if (n_modes < 1) throw InvalidDimension("spectrum: need at least one mode");
  if (!(length > 0.0) || !std::isfinite(length))
    throw InvalidDimension("spectrum: length must be finite and > 0");
  Spectrum sp;
  sp.n_modes = n_modes;
  sp.length = length;
  sp.lambda.resize(n_modes);
  for (int k = 1; k <= n_modes; ++k) {
    const double f = k * M_PI / length;
    sp.lambda[k - 1] = f * f;
  }
  return sp;
}

/// Velocity feedback localized to the observation interval (lo, hi).
/// gram(j, m) = int_lo^hi phi_{j+1} phi_{m+1} dx is the modal matrix of the
/// observe-then-inject composition; b_norm bounds the localization map on the
/// whole space (indicator multiplication: 1), not just its modal truncation.
struct FeedbackOperator {
  double lo = 0.0;
  double hi = 0.0;
  Mat gram;
  double b_norm = 1.0;
};

inline FeedbackOperator build_feedback(const Spectrum& sp, double lo, double hi) {
  if (!(0.0 <= lo && lo < hi && hi <= sp.length))
    throw EmptyObservationSet("feedback: need 0 <= lo < hi <= length");
  FeedbackOperator fb;
  fb.lo = lo;
  fb.hi = hi;
  fb.b_norm = 1.0;
  const double L = sp.length;
  const int n = sp.n_modes;
  fb.gram.resize(n, n);
  // antiderivative of cos(m pi x / L): sin(m pi x / L) / (m pi / L)
  auto S = [&](int m, double x) { return std::sin(m * M_PI * x / L) / (m * M_PI); };
  for (int j = 1; j <= n; ++j) {
    for (int m = j; m <= n; ++m) {
      double v;
      if (j == m) {
        v = (hi - lo) / L - (S(2 * j, hi) - S(2 * j, lo));
      } else {
        v = (S(j - m, hi) - S(j - m, lo)) - (S(j + m, hi) - S(j + m, lo));
      }
      fb.gram(j - 1, m - 1) = v;
      fb.gram(m - 1, j - 1) = v;
    }
  }
  return fb;
}

/// |observed velocity|^2 = <G v, v>; the quantity the gain multiplies.
inline double observed_square(const FeedbackOperator& fb, const Vec& v) {
  if (v.size() != fb.gram.rows()) throw ShapeMismatch("observed_square: size");
  return v.dot(fb.gram * v);
}

enum class SourceFamily { none, power, integral };

/// Source term configuration. `exponent` is the homogeneity degree q of the
/// growth envelope h(z) = c_h z^q shared by both families; c_h = NaN requests
/// the seeded numerical envelope at operator build time.
struct NonlinearitySpec {
  SourceFamily family = SourceFamily::none;
  double exponent = 2.0;
  double c_h = std::numeric_limits<double>::quiet_NaN();
  int grid_factor = 4;  // collocation grid size = grid_factor * n_modes
};

/// Prepared source operator: the pointwise family carries its collocation
/// synthesis matrix (zero-padded sine grid, de-aliases integer exponents up to
/// grid_factor - 1); the integral family is exact in modal coordinates.
struct NonlinearityOp {
  NonlinearitySpec spec;
  int n_modes = 0;
  double length = 0.0;
  Vec lambda;
  Mat synth;       // grid values of modes, (n_grid x n_modes)
  double quad_w = 0.0;  // collocation quadrature weight length/(n_grid+1)
  double c_h = 0.0;
  bool c_h_estimated = false;
};

inline Vec grad_psi(const NonlinearityOp& op, const Vec& u) {
  if (u.size() != op.n_modes) throw ShapeMismatch("grad_psi: modal size");
  switch (op.spec.family) {
    case SourceFamily::none:
      return Vec::Zero(op.n_modes);
    case SourceFamily::power: {
      Vec grid = op.synth * u;
      for (Eigen::Index i = 0; i < grid.size(); ++i)
        grid[i] = std::pow(std::abs(grid[i]), op.spec.exponent) * grid[i];
      return op.quad_w * (op.synth.transpose() * grid);
    }
    case SourceFamily::integral: {
      const double nn = u.squaredNorm();
      return std::pow(nn, op.spec.exponent / 2.0) * u;
    }
  }
  return Vec::Zero(op.n_modes);
}

inline double psi_value(const NonlinearityOp& op, const Vec& u) {
  if (u.size() != op.n_modes) throw ShapeMismatch("psi_value: modal size");
  switch (op.spec.family) {
    case SourceFamily::none:
      return 0.0;
    case SourceFamily::power: {
      const Vec grid = op.synth * u;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < grid.size(); ++i)
        acc += std::pow(std::abs(grid[i]), op.spec.exponent + 2.0);
      return op.quad_w * acc / (op.spec.exponent + 2.0);
    }
    case SourceFamily::integral:
      return std::pow(u.squaredNorm(), (op.spec.exponent + 2.0) / 2.0) /
             (op.spec.exponent + 2.0);
  }
  return 0.0;
}

/// Growth envelope h(z) = c_h z^q; |grad psi(u)| <= h(r) r at radius
/// r = |A^{1/2} u| and |psi(u)| <= h(r) r^2 / 2 follow from the pair bound.
inline double h_eval(const NonlinearityOp& op, double z) {
  if (op.spec.family == SourceFamily::none) return 0.0;
  return op.c_h * std::pow(z, op.spec.exponent);
}

inline double h_inverse(const NonlinearityOp& op, double y) {
  if (y < 0.0) throw NegativeArgument("h_inverse: negative argument");
  if (op.spec.family == SourceFamily::none || op.c_h <= 0.0)
    return std::numeric_limits<double>::infinity();
  return std::pow(y / op.c_h, 1.0 / op.spec.exponent);
}

/// Gradient Lipschitz constant on {|A^{1/2} u| <= r}: L(r) = sqrt(2) c_h r^q.
inline double lipschitz_L(const NonlinearityOp& op, double r) {
  if (op.spec.family == SourceFamily::none) return 0.0;
  return std::sqrt(2.0) * op.c_h * std::pow(r, op.spec.exponent);
}

/// Same constant transported to the product state space, where the position
/// block carries the (1 - beta_tilde) |A^{1/2} u|^2 weight. Radius and
/// difference both pick up the 1/sqrt(1 - beta_tilde) conversion.
inline double lipschitz_L_state(const NonlinearityOp& op, double beta_tilde,
                                double r) {
  if (op.spec.family == SourceFamily::none) return 0.0;
  const double c = std::sqrt(1.0 - beta_tilde);
  return lipschitz_L(op, r / c) / c;
}

namespace detail {

// Seeded pair ensemble for the shared envelope constant:
//   |grad psi(u) - grad psi(v)|^2 <= C (r_u^{2q} + r_v^{2q}) |A^{1/2}(u-v)|^2
// with r = |A^{1/2}.|. c_h = 1.05 sqrt(max sampled ratio). Taking v = 0 in the
// bound recovers the growth envelope, and the two-sided form recovers the
// Lipschitz constant, so one constant serves h, L, and psi. Both families are
// positively homogeneous, so the ratio is scale-invariant and unit-radius
// samples decide it. Colinear pairs are included deliberately: they realize
// the worst ratio for the integral family.
inline double envelope_c_h(const NonlinearityOp& op) {
  SplitMix64 rng(0x6d656d7761766531ull);
  const int n = op.n_modes;
  const double q = op.spec.exponent;
  auto draw = [&](Vec& out) {
    out.resize(n);
    for (int m = 0; m < n; ++m)
      out[m] = rng.sign() * rng.uniform(0.2, 1.0) / ((m + 1.0) * (m + 1.0));
  };
  auto half_norm = [&](const Vec& x) {
    double acc = 0.0;
    for (int m = 0; m < n; ++m) acc += op.lambda[m] * x[m] * x[m];
    return std::sqrt(acc);
  };
  double worst = 0.0;
  Vec u, v, w;
  for (int i = 0; i < 320; ++i) {
    draw(u);
    switch (i % 4) {
      case 0: draw(v); break;
      case 1: v = rng.uniform(-1.2, 1.2) * u; break;             // colinear
      case 2: draw(w); v = u + 1e-3 * w; break;                  // near-tangent
      default: v = Vec::Zero(n); break;                          // growth form
    }
    const double ru = half_norm(u), rv = half_norm(v);
    const double den = (std::pow(ru, 2 * q) + std::pow(rv, 2 * q)) *
                       half_norm(u - v) * half_norm(u - v);
    if (!(den > 1e-30)) continue;
    const double num = (grad_psi(op, u) - grad_psi(op, v)).squaredNorm();
    worst = std::max(worst, num / den);
  }
  return 1.05 * std::sqrt(worst);
}

}  // namespace detail

inline NonlinearityOp make_nonlinearity(const NonlinearitySpec& spec,
                                        const Spectrum& sp) {
  NonlinearityOp op;
  op.spec = spec;
  op.n_modes = sp.n_modes;
  op.length = sp.length;
  op.lambda = sp.lambda;
  if (spec.family == SourceFamily::none) {
    op.c_h = 0.0;
    return op;
  }
  if (!(spec.exponent >= 1.0))
    throw ConfigError("source: exponent must be >= 1");
  if (spec.family == SourceFamily::power) {
    if (spec.grid_factor < 2)
      throw ConfigError("source: grid_factor must be >= 2");
    const int ng = spec.grid_factor * sp.n_modes;
    op.synth.resize(ng, sp.n_modes);
    const double L = sp.length;
    const double amp = std::sqrt(2.0 / L);
    for (int i = 1; i <= ng; ++i) {
      const double x = i * L / (ng + 1.0);
      for (int m = 1; m <= sp.n_modes; ++m)
        op.synth(i - 1, m - 1) = amp * std::sin(m * M_PI * x / L);
    }
    op.quad_w = L / (ng + 1.0);
  }
  if (std::isnan(spec.c_h)) {
    op.c_h = detail::envelope_c_h(op);
    op.c_h_estimated = true;
  } else {
    if (!(spec.c_h > 0.0)) throw ConfigError("source: c_h must be > 0");
    op.c_h = spec.c_h;
  }
  return op;
}

inline std::string family_name(SourceFamily f) {
  switch (f) {
    case SourceFamily::none: return "none";
    case SourceFamily::power: return "power";
    case SourceFamily::integral: return "integral";
  }
  return "none";
}

}  // namespace memwave
