#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "lograd/matrix.hpp"

namespace lograd {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
  return mix_seed(mix_seed(base) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

// FNV-1a, for turning parameter names into seed streams.
constexpr std::uint64_t hash_name(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng,
                                   double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  DenseMatrix m(rows, cols);
  for (double& v : m.data()) v = scale * normal(rng);
  return m;
}

inline DenseMatrix uniform_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo,
                                  double hi) {
  std::uniform_real_distribution<double> uni(lo, hi);
  DenseMatrix m(rows, cols);
  for (double& v : m.data()) v = uni(rng);
  return m;
}

}  // namespace lograd
