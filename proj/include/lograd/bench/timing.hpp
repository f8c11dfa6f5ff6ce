#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lograd/errors.hpp"

namespace lograd::bench {

struct Timing {
  double median_ns = 0.0;
  double iqr_ns = 0.0;
  std::size_t inner_reps = 1;        // calls per sample; > 1 when one call is below min_sample_ns
  std::vector<double> samples_ns;    // per-call times, one per repetition
};

// Linear-interpolation quantile of a sorted sample.
inline double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw InvalidArgument("quantile: empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Wall-clock timing: `warmup` untimed calls, then `repetitions` samples.
// Calls shorter than min_sample_ns are batched so each sample spans at least
// that long; reported times are per call.
template <typename F>
Timing time_callable(F&& fn, std::size_t repetitions = 7, std::size_t warmup = 2,
                     double min_sample_ns = 1e6) {
  using Clock = std::chrono::steady_clock;
  if (repetitions == 0) throw InvalidArgument("time_callable: repetitions must be positive");
  auto elapsed = [](Clock::time_point a, Clock::time_point b) {
    return static_cast<double>(std::chrono::duration_cast<std::chrono::nanoseconds>(b - a).count());
  };

  for (std::size_t i = 0; i < warmup; ++i) fn();

  Timing t;
  const auto probe_start = Clock::now();
  fn();
  const double probe = elapsed(probe_start, Clock::now());
  if (probe < min_sample_ns) {
    t.inner_reps = static_cast<std::size_t>(std::ceil(min_sample_ns / std::max(probe, 1.0)));
  }

  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    const auto start = Clock::now();
    for (std::size_t k = 0; k < t.inner_reps; ++k) fn();
    t.samples_ns.push_back(elapsed(start, Clock::now()) / static_cast<double>(t.inner_reps));
  }
  std::vector<double> sorted = t.samples_ns;
  std::sort(sorted.begin(), sorted.end());
  t.median_ns = quantile(sorted, 0.5);
  t.iqr_ns = quantile(sorted, 0.75) - quantile(sorted, 0.25);
  return t;
}

}  // namespace lograd::bench
