#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>

#include "lograd/errors.hpp"

namespace lograd {

enum class ScheduleKind { Cosine, Constant };

struct LrSchedule {
  double initial_lr = 5e-5;
  double min_lr = 1e-6;
  std::size_t total_steps = 1;
  ScheduleKind kind = ScheduleKind::Cosine;

  void validate() const {
    if (!(min_lr <= initial_lr)) throw InvalidArgument("LrSchedule: min_lr must not exceed initial_lr");
    if (min_lr < 0.0) throw InvalidArgument("LrSchedule: negative learning rate");
  }
};

// Cosine annealing from initial_lr at step 0 to min_lr at total_steps;
// steps past the end stay at min_lr.
inline double schedule_lr(const LrSchedule& s, std::size_t step) {
  s.validate();
  if (s.kind == ScheduleKind::Constant) return s.initial_lr;
  if (s.total_steps == 0 || step >= s.total_steps) return s.min_lr;
  const double phase = std::numbers::pi * static_cast<double>(step) / static_cast<double>(s.total_steps);
  const double lr = s.min_lr + 0.5 * (s.initial_lr - s.min_lr) * (1.0 + std::cos(phase));
  // Rounding can nudge the value a hair outside the band.
  return std::fmin(s.initial_lr, std::fmax(s.min_lr, lr));
}

}  // namespace lograd
