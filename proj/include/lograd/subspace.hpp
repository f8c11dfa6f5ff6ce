#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/SVD>

#include "lograd/errors.hpp"
#include "lograd/matrix.hpp"
#include "lograd/qr.hpp"
#include "lograd/sketch.hpp"

namespace lograd {

enum class Side { Left, Right };
enum class BasisMethod { ExactSVD, SRFT, Gaussian };

inline const char* to_string(Side s) { return s == Side::Left ? "left" : "right"; }

inline const char* to_string(BasisMethod m) {
  switch (m) {
    case BasisMethod::ExactSVD: return "svd";
    case BasisMethod::SRFT: return "srft";
    case BasisMethod::Gaussian: return "gaussian";
  }
  return "?";
}

// Orthonormal basis of an estimated dominant subspace of a gradient.
// Left: m x r, spans columns of G. Right: n x r, spans rows of G.
struct ProjectionBasis {
  DenseMatrix basis;
  Side side = Side::Left;
  std::size_t rank = 0;
  std::size_t birth_step = 0;
  BasisMethod method = BasisMethod::ExactSVD;
  // Set when the sketch was rank deficient and the basis was completed with
  // random directions.
  bool rank_deficient = false;

  std::size_t ambient_dim() const noexcept { return basis.rows(); }
};

// Orientation helper: the matrix whose column space the basis must span.
inline DenseMatrix oriented(const DenseMatrix& g, Side side) {
  return side == Side::Left ? g : transpose(g);
}

// Compressed coordinates: P^T G (Left, r x n) or G P (Right, m x r).
inline DenseMatrix project(const ProjectionBasis& p, const DenseMatrix& g) {
  return p.side == Side::Left ? matmul_tn(p.basis, g) : matmul(g, p.basis);
}

// Back to full shape: P R (Left) or R P^T (Right).
inline DenseMatrix expand(const ProjectionBasis& p, const DenseMatrix& r) {
  return p.side == Side::Left ? matmul(p.basis, r) : matmul_nt(r, p.basis);
}

namespace detail {

inline void check_rank(std::size_t r, std::size_t rows, std::size_t cols, const char* who) {
  if (r == 0) throw InvalidArgument(std::string(who) + ": rank must be positive");
  if (r > std::min(rows, cols)) {
    throw DimensionError(std::string(who) + ": rank " + std::to_string(r) +
                         " exceeds min dimension of " + shape_string(rows, cols));
  }
}

inline void check_finite(const DenseMatrix& g, const char* who) {
  if (!g.all_finite()) throw NumericalError(std::string(who) + ": input has non-finite entries");
}

// Make the largest-magnitude entry of every column positive.
inline void fix_column_signs(DenseMatrix& q) {
  for (std::size_t j = 0; j < q.cols(); ++j) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < q.rows(); ++i) {
      const double a = std::abs(q(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (q(arg, j) < 0.0) {
      for (std::size_t i = 0; i < q.rows(); ++i) q(i, j) = -q(i, j);
    }
  }
}

// Range finder tail shared by the SRFT and Gaussian sketches: orthonormalize
// the sketch, then keep the r leading left singular directions of R so that
// the oversampled columns actually inform the truncated basis.
inline ProjectionBasis basis_from_sketch(const DenseMatrix& y, std::size_t r, Side side,
                                         BasisMethod method, std::uint64_t seed) {
  if (y.cols() > y.rows()) {
    throw DimensionError("range finder: sketch " + shape_string(y.rows(), y.cols()) +
                         " has more columns than rows");
  }
  QrResult qr = qr_orthonormalize(y, derive_seed(seed, 0x9c0));
  Eigen::MatrixXd rmat = qr.r.view();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(rmat, Eigen::ComputeFullU);
  ProjectionBasis out;
  out.basis = DenseMatrix(y.rows(), r);
  out.basis.view().noalias() = qr.q.view() * svd.matrixU().leftCols(static_cast<Eigen::Index>(r));
  out.side = side;
  out.rank = r;
  out.method = method;
  out.rank_deficient = qr.rank_deficient();
  return out;
}

}  // namespace detail

// Top-r singular vectors of G from a full dense SVD (the exact baseline).
inline ProjectionBasis svd_basis(const DenseMatrix& g, std::size_t r, Side side = Side::Left) {
  detail::check_rank(r, g.rows(), g.cols(), "svd_basis");
  detail::check_finite(g, "svd_basis");
  const Eigen::MatrixXd a = g.view();
  const unsigned opts = side == Side::Left ? Eigen::ComputeThinU : Eigen::ComputeThinV;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, opts);
  if (svd.info() != Eigen::Success) {
    throw NumericalError("svd_basis: SVD did not converge for " +
                         shape_string(g.rows(), g.cols()) + " input with Frobenius norm " +
                         std::to_string(a.norm()));
  }
  const auto rr = static_cast<Eigen::Index>(r);
  ProjectionBasis out;
  out.basis = DenseMatrix::from_eigen(side == Side::Left ? svd.matrixU().leftCols(rr)
                                                         : svd.matrixV().leftCols(rr));
  detail::fix_column_signs(out.basis);
  out.side = side;
  out.rank = r;
  out.method = BasisMethod::ExactSVD;
  return out;
}

// Randomized range finder with an SRFT sketch of r + oversample columns.
inline ProjectionBasis srft_basis(const DenseMatrix& g, std::size_t r, std::size_t oversample,
                                  Mixing mixing, std::uint64_t seed, Side side = Side::Left) {
  detail::check_rank(r, g.rows(), g.cols(), "srft_basis");
  detail::check_finite(g, "srft_basis");
  const DenseMatrix a = oriented(g, side);
  const SrftOperator op = build_srft(a.cols(), r + oversample, mixing, seed);
  const DenseMatrix y = sketch_columns(op, a);
  return detail::basis_from_sketch(y, r, side, BasisMethod::SRFT, seed);
}

// Same range finder with a dense Gaussian test matrix; the classical reference.
inline ProjectionBasis gaussian_basis(const DenseMatrix& g, std::size_t r, std::size_t oversample,
                                      std::uint64_t seed, Side side = Side::Left) {
  detail::check_rank(r, g.rows(), g.cols(), "gaussian_basis");
  detail::check_finite(g, "gaussian_basis");
  const DenseMatrix a = oriented(g, side);
  const DenseMatrix y = sketch_gaussian(a, r + oversample, seed);
  return detail::basis_from_sketch(y, r, side, BasisMethod::Gaussian, seed);
}

// ||G - P P^T G||_F / ||G||_F (Left) or ||G - G P P^T||_F / ||G||_F (Right).
inline double subspace_residual(const DenseMatrix& g, const ProjectionBasis& p) {
  const std::size_t ambient = p.side == Side::Left ? g.rows() : g.cols();
  if (p.basis.rows() != ambient) {
    throw DimensionError("subspace_residual: basis " +
                         shape_string(p.basis.rows(), p.basis.cols()) + " vs matrix " +
                         shape_string(g.rows(), g.cols()) + " (" + to_string(p.side) + ")");
  }
  const double norm = frobenius_norm(g);
  if (norm == 0.0) return 0.0;
  const DenseMatrix back = expand(p, project(p, g));
  return std::min(1.0, frobenius_distance(g, back) / norm);
}

// Principal angles (radians, ascending) between span(P1) and span(P2).
// Cosines come from the singular values of P1^T P2 (clamped to [0, 1]);
// angles below pi/4 are taken from the sines, the singular values of
// P2 - P1 P1^T P2, where arccos would lose half the digits.
inline std::vector<double> principal_angles(const ProjectionBasis& p1, const ProjectionBasis& p2) {
  if (p1.basis.rows() != p2.basis.rows() || p1.basis.cols() != p2.basis.cols()) {
    throw DimensionError("principal_angles: bases " +
                         shape_string(p1.basis.rows(), p1.basis.cols()) + " and " +
                         shape_string(p2.basis.rows(), p2.basis.cols()));
  }
  const Eigen::MatrixXd cross = p1.basis.view().transpose() * p2.basis.view();
  const Eigen::MatrixXd rest = p2.basis.view() - p1.basis.view() * cross;
  const Eigen::VectorXd cosines = Eigen::JacobiSVD<Eigen::MatrixXd>(cross).singularValues();
  const Eigen::VectorXd sines = Eigen::JacobiSVD<Eigen::MatrixXd>(rest).singularValues();
  const auto r = static_cast<std::size_t>(cosines.size());
  std::vector<double> angles(r);
  for (std::size_t i = 0; i < r; ++i) {
    // cosines descend, sines descend: the i-th smallest angle pairs the
    // i-th largest cosine with the i-th smallest sine.
    const double c = std::clamp(cosines(static_cast<Eigen::Index>(i)), 0.0, 1.0);
    const double s = std::clamp(sines(static_cast<Eigen::Index>(r - 1 - i)), 0.0, 1.0);
    angles[i] = c * c >= 0.5 ? std::asin(s) : std::acos(c);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

}  // namespace lograd
