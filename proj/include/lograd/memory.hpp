#pragma once

#include <algorithm>
#include <cstdint>
#include <string>

#include "lograd/errors.hpp"
#include "lograd/matrix.hpp"
#include "lograd/subspace.hpp"

namespace lograd {

// Optimizer-state scalar counts for one m x n parameter.
struct MemoryFootprint {
  std::uint64_t full_scalars = 0;       // two full Adam moments
  std::uint64_t projected_scalars = 0;  // two projected moments (+ basis)
  double reduction_fraction = 0.0;      // 1 - projected / full
  Side side = Side::Left;               // side with the smaller count
};

inline MemoryFootprint memory_footprint(std::uint64_t m, std::uint64_t n, std::uint64_t r,
                                        bool store_basis) {
  if (r == 0) throw InvalidArgument("memory_footprint: rank must be positive");
  if (r > std::min(m, n)) {
    throw DimensionError("memory_footprint: rank " + std::to_string(r) + " exceeds min of " +
                         std::to_string(m) + "x" + std::to_string(n));
  }
  MemoryFootprint f;
  f.full_scalars = 2 * m * n;
  const std::uint64_t left = 2 * r * n + (store_basis ? m * r : 0);
  const std::uint64_t right = 2 * m * r + (store_basis ? n * r : 0);
  f.side = left <= right ? Side::Left : Side::Right;
  f.projected_scalars = std::min(left, right);
  f.reduction_fraction =
      1.0 - static_cast<double>(f.projected_scalars) / static_cast<double>(f.full_scalars);
  return f;
}

}  // namespace lograd
