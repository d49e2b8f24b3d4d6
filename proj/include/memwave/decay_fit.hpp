#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace memwave {

struct DecayFit {
  double rate = 0.0;       // decay exponent (positive means decay)
  double amplitude = 0.0;  // prefactor of the fitted a*exp(-rate*t)
  double r2 = 0.0;
  bool used_peaks = false;
  int n_points = 0;
  double window_start = 0.0;
};

namespace detail {

struct LogFit {
  double slope = 0.0, intercept = 0.0, r2 = 1.0;
};

inline LogFit least_squares_log(const std::vector<std::pair<double, double>>& pts) {
  LogFit f;
  const double n = static_cast<double>(pts.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (const auto& p : pts) {
    const double y = std::log(p.second);
    st += p.first;
    sy += y;
    stt += p.first * p.first;
    sty += p.first * y;
  }
  const double det = n * stt - st * st;
  if (det == 0.0) {
    f.intercept = sy / n;
    return f;
  }
  f.slope = (n * sty - st * sy) / det;
  f.intercept = (sy - f.slope * st) / n;
  double ss_res = 0, ss_tot = 0;
  const double mean = sy / n;
  for (const auto& p : pts) {
    const double y = std::log(p.second);
    const double fit = f.intercept + f.slope * p.first;
    ss_res += (y - fit) * (y - fit);
    ss_tot += (y - mean) * (y - mean);
  }
  f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  return f;
}

}  // namespace detail

/// Least-squares exponential fit on the tail window of a (t, y) series.
/// Oscillatory tails (r^2 < 0.9) are refit on the local-maxima envelope,
/// which tracks the slow eigenvalue instead of the beat pattern.
inline DecayFit fit_decay(const std::vector<std::pair<double, double>>& series,
                          double window_fraction = 0.5) {
  if (series.size() < 3) throw NonPositiveEnergy("too few samples for a decay fit");
  if (!(window_fraction > 0.0) || window_fraction > 1.0)
    throw NegativeArgument("window fraction must lie in (0, 1]");
  const double t0 = series.front().first;
  const double t1 = series.back().first;
  const double cut = t1 - window_fraction * (t1 - t0);

  std::vector<std::pair<double, double>> win;
  for (const auto& p : series)
    if (p.first >= cut && p.second > 0.0 && std::isfinite(p.second))
      win.push_back(p);
  if (win.size() < 3)
    throw NonPositiveEnergy("fewer than three positive samples in fit window");

  DecayFit out;
  out.window_start = cut;
  auto f = detail::least_squares_log(win);
  out.n_points = static_cast<int>(win.size());

  if (f.r2 < 0.9) {
    std::vector<std::pair<double, double>> peaks;
    for (std::size_t i = 1; i + 1 < win.size(); ++i)
      if (win[i].second >= win[i - 1].second && win[i].second > win[i + 1].second)
        peaks.push_back(win[i]);
    if (peaks.size() >= 3) {
      f = detail::least_squares_log(peaks);
      out.used_peaks = true;
      out.n_points = static_cast<int>(peaks.size());
    }
  }
  out.rate = -f.slope;
  out.amplitude = std::exp(f.intercept);
  out.r2 = f.r2;
  return out;
}

}  // namespace memwave
