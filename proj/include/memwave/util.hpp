#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "errors.hpp"

namespace memwave {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Deterministic generator with a fixed algorithm so sampled envelopes and
// property tests do not depend on the standard library's distributions.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double sign() { return (next() & 1ull) ? 1.0 : -1.0; }
};

// Composite Simpson with n subintervals (n is rounded up to the next even
// count). The integrand is evaluated n+1 times.
template <class F>
double simpson(F&& f, double a, double b, int n) {
  if (!(b > a)) return 0.0;
  if (n < 2) n = 2;
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double odd = 0.0, even = 0.0;
  for (int i = 1; i < n; i += 2) odd += f(a + i * h);
  for (int i = 2; i < n; i += 2) even += f(a + i * h);
  return (h / 3.0) * (f(a) + 4.0 * odd + 2.0 * even + f(b));
}

// Doubling refinement until the relative change drops below rel_tol (measured
// against max(|I|, abs_floor)) or max_doublings is exhausted.
template <class F>
double simpson_adaptive(F&& f, double a, double b, int n0, double rel_tol,
                        int max_doublings, double abs_floor = 1e-300) {
  double prev = simpson(f, a, b, n0);
  for (int d = 0; d < max_doublings; ++d) {
    n0 *= 2;
    const double cur = simpson(f, a, b, n0);
    const double scale = std::max(std::abs(cur), abs_floor);
    if (std::abs(cur - prev) <= rel_tol * scale) return cur;
    prev = cur;
  }
  return prev;
}

// Integrate over [a, b] split at the given interior breakpoints; each piece is
// refined independently. Breakpoints outside (a, b) are discarded.
template <class F>
double simpson_segmented(F&& f, double a, double b, std::vector<double> cuts,
                         int n0, double rel_tol, int max_doublings,
                         double abs_floor = 1e-300) {
  if (!(b > a)) return 0.0;
  cuts.erase(std::remove_if(cuts.begin(), cuts.end(),
                            [&](double c) { return !(c > a && c < b); }),
             cuts.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.insert(cuts.begin(), a);
  cuts.push_back(b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    if (!(hi > lo + 1e-300)) continue;
    // Node budget proportional to the piece, never below a sane floor.
    int n = std::max(32, static_cast<int>(n0 * (hi - lo) / (b - a)));
    total += simpson_adaptive(f, lo, hi, n, rel_tol, max_doublings, abs_floor);
  }
  return total;
}

// Shortest exact decimal form used by every serializer, so identical inputs
// produce byte-identical files.
inline std::string fmt_g(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

// Cubic Hermite on [t0, t0+h] from endpoint values and derivatives.
inline double hermite_scalar(double t0, double h, double y0, double d0,
                             double y1, double d1, double t) {
  const double s = (t - t0) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 +
         (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * d1;
}

inline void hermite_vec(double t0, double h, const Vec& y0, const Vec& d0,
                        const Vec& y1, const Vec& d1, double t, Vec& out) {
  const double s = (t - t0) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double a0 = 2 * s3 - 3 * s2 + 1;
  const double a1 = (s3 - 2 * s2 + s) * h;
  const double a2 = -2 * s3 + 3 * s2;
  const double a3 = (s3 - s2) * h;
  out = a0 * y0 + a1 * d0 + a2 * y1 + a3 * d1;
}

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(static_cast<std::size_t>(std::max(n, 2)));
  const double h = (b - a) / (out.size() - 1);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a + h * i;
  out.back() = b;
  return out;
}

}  // namespace memwave
