#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "lograd/errors.hpp"
#include "lograd/fft.hpp"
#include "lograd/matrix.hpp"
#include "lograd/random.hpp"

namespace lograd {

enum class Mixing { UnitaryDCT, ComplexDFT };

inline const char* to_string(Mixing m) {
  return m == Mixing::UnitaryDCT ? "dct" : "dft";
}

// Subsampled randomized transform Pi = S F D acting on vectors of length
// input_dim. D flips signs, F is a unitary fast transform, S keeps
// sketch_dim of the transformed coordinates.
struct SrftOperator {
  std::size_t input_dim = 0;
  std::size_t sketch_dim = 0;
  std::vector<double> sign_flips;
  std::vector<std::size_t> sampled_indices;
  Mixing mixing = Mixing::UnitaryDCT;
  std::uint64_t seed = 0;

  // Shared, immutable transform plans.
  std::shared_ptr<const fft::DctPlan> dct;
  std::shared_ptr<const fft::FftPlan> dft;

  // Columns produced per sketched row: ell for DCT, 2*ell (real, imaginary) for DFT.
  std::size_t output_columns() const noexcept {
    return mixing == Mixing::ComplexDFT ? 2 * sketch_dim : sketch_dim;
  }

  friend bool operator==(const SrftOperator& a, const SrftOperator& b) {
    return a.input_dim == b.input_dim && a.sketch_dim == b.sketch_dim &&
           a.sign_flips == b.sign_flips && a.sampled_indices == b.sampled_indices &&
           a.mixing == b.mixing && a.seed == b.seed;
  }
};

inline SrftOperator build_srft(std::size_t input_dim, std::size_t sketch_dim, Mixing mixing,
                               std::uint64_t seed) {
  if (sketch_dim == 0) throw InvalidArgument("build_srft: sketch_dim must be positive");
  if (sketch_dim > input_dim) {
    throw DimensionError("build_srft: sketch_dim " + std::to_string(sketch_dim) +
                         " exceeds input_dim " + std::to_string(input_dim));
  }
  SrftOperator op;
  op.input_dim = input_dim;
  op.sketch_dim = sketch_dim;
  op.mixing = mixing;
  op.seed = seed;

  Rng rng(seed);
  op.sign_flips.resize(input_dim);
  for (double& s : op.sign_flips) s = (rng() >> 63) != 0 ? 1.0 : -1.0;

  // Partial Fisher-Yates: uniform sample without replacement.
  std::vector<std::size_t> pool(input_dim);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < sketch_dim; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, input_dim - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  op.sampled_indices.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(sketch_dim));

  if (mixing == Mixing::UnitaryDCT) {
    op.dct = std::make_shared<const fft::DctPlan>(input_dim);
  } else {
    op.dft = std::make_shared<const fft::FftPlan>(input_dim);
  }
  return op;
}

namespace detail {

inline void require_plan(const SrftOperator& op) {
  if ((op.mixing == Mixing::UnitaryDCT && !op.dct) || (op.mixing == Mixing::ComplexDFT && !op.dft)) {
    throw InvalidArgument("SrftOperator: transform plan missing (construct with build_srft)");
  }
}

}  // namespace detail

// F (D v). For the DCT the imaginary parts are zero.
inline std::vector<std::complex<double>> apply_mixing(const SrftOperator& op,
                                                      std::span<const double> v) {
  if (v.size() != op.input_dim) {
    throw DimensionError("apply_mixing: vector length " + std::to_string(v.size()) +
                         " != input_dim " + std::to_string(op.input_dim));
  }
  detail::require_plan(op);
  const std::size_t n = op.input_dim;
  fft::Workspace ws;
  std::vector<std::complex<double>> out(n);
  if (op.mixing == Mixing::UnitaryDCT) {
    std::vector<double> flipped(n), mixed(n);
    for (std::size_t i = 0; i < n; ++i) flipped[i] = op.sign_flips[i] * v[i];
    op.dct->forward(flipped, mixed, ws);
    for (std::size_t i = 0; i < n; ++i) out[i] = mixed[i];
  } else {
    for (std::size_t i = 0; i < n; ++i) out[i] = op.sign_flips[i] * v[i];
    op.dft->forward(out, ws);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& c : out) c *= scale;
  }
  return out;
}

// Y = G Pi^T: every row of G is sign-flipped, mixed and subsampled.
// m x ell for the DCT; m x 2 ell (real parts, then imaginary parts) for the DFT.
inline DenseMatrix sketch_columns(const SrftOperator& op, const DenseMatrix& g) {
  if (g.cols() != op.input_dim) {
    throw DimensionError("sketch_columns: matrix has " + std::to_string(g.cols()) +
                         " columns, operator expects " + std::to_string(op.input_dim));
  }
  detail::require_plan(op);
  const std::size_t n = op.input_dim;
  const std::size_t ell = op.sketch_dim;
  DenseMatrix y(g.rows(), op.output_columns());
  fft::Workspace ws;
  if (op.mixing == Mixing::UnitaryDCT) {
    std::vector<double> flipped(n), mixed(n);
    for (std::size_t i = 0; i < g.rows(); ++i) {
      const auto src = g.row(i);
      for (std::size_t k = 0; k < n; ++k) flipped[k] = op.sign_flips[k] * src[k];
      op.dct->forward(flipped, mixed, ws);
      auto dst = y.row(i);
      for (std::size_t j = 0; j < ell; ++j) dst[j] = mixed[op.sampled_indices[j]];
    }
  } else {
    std::vector<std::complex<double>> buf(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t i = 0; i < g.rows(); ++i) {
      const auto src = g.row(i);
      for (std::size_t k = 0; k < n; ++k) buf[k] = op.sign_flips[k] * src[k];
      op.dft->forward(buf, ws);
      auto dst = y.row(i);
      for (std::size_t j = 0; j < ell; ++j) {
        const auto c = buf[op.sampled_indices[j]] * scale;
        dst[j] = c.real();
        dst[ell + j] = c.imag();
      }
    }
  }
  return y;
}

// Classical Gaussian range-finder sketch Y = G Omega, Omega_ij ~ N(0, 1/ell).
inline DenseMatrix sketch_gaussian(const DenseMatrix& g, std::size_t ell, std::uint64_t seed) {
  if (ell == 0) throw InvalidArgument("sketch_gaussian: ell must be positive");
  if (ell > g.cols()) {
    throw DimensionError("sketch_gaussian: ell " + std::to_string(ell) + " exceeds " +
                         std::to_string(g.cols()) + " columns");
  }
  Rng rng(seed);
  const DenseMatrix omega =
      gaussian_matrix(g.cols(), ell, rng, 1.0 / std::sqrt(static_cast<double>(ell)));
  return matmul(g, omega);
}

}  // namespace lograd
