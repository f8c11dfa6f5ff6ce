#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "lograd/errors.hpp"
#include "lograd/matrix.hpp"
#include "lograd/random.hpp"

namespace lograd {

struct QrResult {
  DenseMatrix q;  // m x k, orthonormal columns
  DenseMatrix r;  // k x k upper triangular, Y = Q R
  // Columns whose remaining norm vanished; Q was continued there with a
  // random direction and the matching diagonal of R is zero.
  std::vector<std::size_t> completed_columns;

  bool rank_deficient() const noexcept { return !completed_columns.empty(); }
};

inline constexpr std::uint64_t kDefaultCompletionSeed = 0x5eedc0de;

// Householder QR with explicit thin Q. Rank deficiency never fails: a column
// that is (numerically) in the span of the previous ones is replaced by a
// random direction in the orthogonal complement and the QR continues.
inline QrResult qr_orthonormalize(const DenseMatrix& y,
                                  std::uint64_t completion_seed = kDefaultCompletionSeed) {
  const std::size_t m = y.rows();
  const std::size_t k = y.cols();
  if (m < k) {
    throw DimensionError("qr_orthonormalize: need rows >= cols, got " + shape_string(m, k));
  }

  // Column-major working copy; cols[j] is column j.
  std::vector<std::vector<double>> cols(k, std::vector<double>(m));
  double max_norm = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    double ss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      cols[j][i] = y(i, j);
      ss += cols[j][i] * cols[j][i];
    }
    max_norm = std::max(max_norm, std::sqrt(ss));
  }
  const double tol = 10.0 * static_cast<double>(std::max<std::size_t>(m, 1)) *
                     std::numeric_limits<double>::epsilon() * max_norm;

  QrResult out;
  out.r = DenseMatrix(k, k);
  std::vector<std::vector<double>> reflectors(k);
  Rng rng(completion_seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  for (std::size_t j = 0; j < k; ++j) {
    auto& col = cols[j];
    for (std::size_t i = 0; i < j; ++i) out.r(i, j) = col[i];

    double trailing = 0.0;
    for (std::size_t i = j; i < m; ++i) trailing += col[i] * col[i];
    trailing = std::sqrt(trailing);

    bool completed = false;
    if (trailing <= tol) {
      completed = true;
      out.completed_columns.push_back(j);
      trailing = 0.0;
      while (trailing == 0.0) {
        for (std::size_t i = j; i < m; ++i) col[i] = normal(rng);
        for (std::size_t i = j; i < m; ++i) trailing += col[i] * col[i];
        trailing = std::sqrt(trailing);
      }
    }

    const double x0 = col[j];
    const double alpha = x0 >= 0.0 ? -trailing : trailing;
    std::vector<double> v(col.begin() + static_cast<std::ptrdiff_t>(j), col.end());
    v[0] -= alpha;
    double vnorm = 0.0;
    for (double e : v) vnorm += e * e;
    vnorm = std::sqrt(vnorm);
    if (vnorm > 0.0) {
      for (double& e : v) e /= vnorm;
    }
    reflectors[j] = std::move(v);
    out.r(j, j) = completed ? 0.0 : alpha;

    const auto& h = reflectors[j];
    if (vnorm > 0.0) {
      for (std::size_t l = j + 1; l < k; ++l) {
        auto& c = cols[l];
        double dot = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) dot += h[i] * c[j + i];
        dot *= 2.0;
        for (std::size_t i = 0; i < h.size(); ++i) c[j + i] -= dot * h[i];
      }
    }
  }

  // Q = H_0 H_1 ... H_{k-1} [I_k; 0], accumulated right to left.
  std::vector<std::vector<double>> qcols(k, std::vector<double>(m, 0.0));
  for (std::size_t j = 0; j < k; ++j) qcols[j][j] = 1.0;
  for (std::size_t jj = k; jj-- > 0;) {
    const auto& h = reflectors[jj];
    for (std::size_t l = jj; l < k; ++l) {
      auto& c = qcols[l];
      double dot = 0.0;
      for (std::size_t i = 0; i < h.size(); ++i) dot += h[i] * c[jj + i];
      if (dot == 0.0) continue;
      dot *= 2.0;
      for (std::size_t i = 0; i < h.size(); ++i) c[jj + i] -= dot * h[i];
    }
  }
  out.q = DenseMatrix(m, k);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < m; ++i) out.q(i, j) = qcols[j][i];
  }
  return out;
}

}  // namespace lograd
