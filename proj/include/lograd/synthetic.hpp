#pragma once

// Test matrices with prescribed singular spectra.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "lograd/errors.hpp"
#include "lograd/matrix.hpp"
#include "lograd/random.hpp"

namespace lograd {

enum class Spectrum { ExactRank, PowerLaw, Exponential };

inline const char* to_string(Spectrum s) {
  switch (s) {
    case Spectrum::ExactRank: return "exact";
    case Spectrum::PowerLaw: return "power";
    case Spectrum::Exponential: return "exp";
  }
  return "?";
}

// sigma_k for k = 1..count. ExactRank: 1 for k <= rank, else 0.
// PowerLaw: k^-2. Exponential: exp(-k/20).
inline std::vector<double> spectrum_values(Spectrum s, std::size_t count, std::size_t rank) {
  std::vector<double> sigma(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double k = static_cast<double>(i + 1);
    switch (s) {
      case Spectrum::ExactRank: sigma[i] = i < rank ? 1.0 : 0.0; break;
      case Spectrum::PowerLaw: sigma[i] = 1.0 / (k * k); break;
      case Spectrum::Exponential: sigma[i] = std::exp(-k / 20.0); break;
    }
  }
  return sigma;
}

// Eckart-Young: the best rank-r Frobenius residual, relative to ||G||_F.
inline double optimal_residual(const std::vector<double>& sigma, std::size_t r) {
  double tail = 0.0, total = 0.0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    total += sigma[i] * sigma[i];
    if (i >= r) tail += sigma[i] * sigma[i];
  }
  return total == 0.0 ? 0.0 : std::sqrt(tail / total);
}

// Haar-distributed rows x cols matrix with orthonormal columns.
inline Eigen::MatrixXd random_orthonormal(std::size_t rows, std::size_t cols, Rng& rng) {
  if (cols > rows) throw DimensionError("random_orthonormal: cols > rows");
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd a(rows, cols);
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), a.cols());
  // Sign fix against R's diagonal makes the distribution exactly Haar.
  const auto& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

// U diag(sigma) V^T with random orthonormal U (rows x k) and V (cols x k),
// k = sigma.size() <= min(rows, cols). Trailing zeros in sigma are skipped.
inline DenseMatrix matrix_with_spectrum(std::size_t rows, std::size_t cols,
                                        const std::vector<double>& sigma, std::uint64_t seed) {
  std::size_t k = sigma.size();
  if (k > std::min(rows, cols)) throw DimensionError("matrix_with_spectrum: too many singular values");
  while (k > 0 && sigma[k - 1] == 0.0) --k;
  DenseMatrix g(rows, cols);
  if (k == 0) return g;
  Rng rng(seed);
  Eigen::MatrixXd u = random_orthonormal(rows, k, rng);
  const Eigen::MatrixXd v = random_orthonormal(cols, k, rng);
  for (std::size_t j = 0; j < k; ++j) u.col(static_cast<Eigen::Index>(j)) *= sigma[j];
  g.view().noalias() = u * v.transpose();
  return g;
}

inline DenseMatrix matrix_with_spectrum(std::size_t rows, std::size_t cols, Spectrum s,
                                        std::size_t rank, std::uint64_t seed) {
  return matrix_with_spectrum(rows, cols, spectrum_values(s, std::min(rows, cols), rank), seed);
}

// Exact rank-r matrix with Gaussian factors.
inline DenseMatrix low_rank_matrix(std::size_t rows, std::size_t cols, std::size_t rank,
                                   std::uint64_t seed) {
  Rng rng(seed);
  const DenseMatrix a = gaussian_matrix(rows, rank, rng);
  const DenseMatrix b = gaussian_matrix(rank, cols, rng);
  return matmul(a, b);
}

}  // namespace lograd
