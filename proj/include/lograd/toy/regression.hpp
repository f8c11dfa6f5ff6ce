#pragma once

#include <cstdint>

#include <Eigen/QR>

#include "lograd/errors.hpp"
#include "lograd/matrix.hpp"
#include "lograd/random.hpp"
#include "lograd/synthetic.hpp"

namespace lograd::toy {

// Least squares Y ~ X W^T with a planted low-rank solution. The noise lives in
// the same rank-k column subspace B as W*, so every gradient taken from W = 0
// along that subspace stays inside it and the optimum has a nonzero floor.
//   W* = B C            (m x n, rank k)
//   Y  = X W*^T + noise * Z B^T
struct PlantedRegression {
  DenseMatrix x;       // N x n
  DenseMatrix y;       // N x m
  DenseMatrix w_star;  // m x n
  DenseMatrix basis;   // m x k, orthonormal

  std::size_t rows() const noexcept { return w_star.rows(); }
  std::size_t cols() const noexcept { return w_star.cols(); }
  std::size_t samples() const noexcept { return x.rows(); }

  // ||X W^T - Y||_F^2 / (N m)
  double loss(const DenseMatrix& w) const {
    DenseMatrix r = matmul_nt(x, w);
    r.view() -= y.view();
    const double f = frobenius_norm(r);
    return f * f / static_cast<double>(samples() * rows());
  }

  DenseMatrix gradient(const DenseMatrix& w) const {
    DenseMatrix r = matmul_nt(x, w);
    r.view() -= y.view();
    DenseMatrix g = matmul_tn(r, x);
    g.view() *= 2.0 / static_cast<double>(samples() * rows());
    return g;
  }

  // Loss of the exact least-squares solution.
  double optimal_loss() const {
    const Eigen::MatrixXd xe = x.view();
    const Eigen::MatrixXd ye = y.view();
    const Eigen::MatrixXd wt = xe.colPivHouseholderQr().solve(ye);  // n x m
    return loss(DenseMatrix::from_eigen(wt.transpose()));
  }
};

inline PlantedRegression make_planted_regression(std::size_t m, std::size_t n, std::size_t samples,
                                                 std::size_t rank, double noise, std::uint64_t seed) {
  if (rank == 0 || rank > std::min(m, n)) {
    throw DimensionError("make_planted_regression: rank " + std::to_string(rank) + " for " + shape_string(m, n));
  }
  if (samples < n) throw InvalidArgument("make_planted_regression: fewer samples than features");
  Rng rng(seed);
  PlantedRegression p;
  p.basis = DenseMatrix::from_eigen(random_orthonormal(m, rank, rng));
  const DenseMatrix coeff = gaussian_matrix(rank, n, rng);
  p.w_star = matmul(p.basis, coeff);
  p.x = gaussian_matrix(samples, n, rng);
  p.y = matmul_nt(p.x, p.w_star);
  const DenseMatrix z = gaussian_matrix(samples, rank, rng, noise);
  p.y.view() += z.view() * p.basis.view().transpose();
  return p;
}

}  // namespace lograd::toy
