#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lograd/errors.hpp"

namespace lograd {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMajorMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMajorMatrix>;

inline std::string shape_string(std::size_t rows, std::size_t cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

// Dense real matrix, row-major, 64-bit entries. The carrier for gradients,
// weights, sketches and bases throughout the library.
class DenseMatrix {
 public:
  DenseMatrix() = default;

  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("DenseMatrix: data length " + std::to_string(data_.size()) +
                           " does not match shape " + shape_string(rows_, cols_));
    }
  }

  // Construction from untrusted input; rejects NaN/Inf.
  static DenseMatrix from_external(std::size_t rows, std::size_t cols, std::vector<double> data) {
    DenseMatrix m(rows, cols, std::move(data));
    if (!m.all_finite()) {
      throw NumericalError("DenseMatrix: non-finite entry in external input");
    }
    return m;
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static DenseMatrix from_eigen(const Eigen::Ref<const Eigen::MatrixXd>& src) {
    DenseMatrix m(static_cast<std::size_t>(src.rows()), static_cast<std::size_t>(src.cols()));
    m.view() = src;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& storage() const noexcept { return data_; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  MatrixMap view() noexcept {
    return {data_.data(), static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_)};
  }
  ConstMatrixMap view() const noexcept {
    return {data_.data(), static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(cols_)};
  }

  bool all_finite() const noexcept {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  void fill(double v) noexcept { std::fill(data_.begin(), data_.end(), v); }

  bool same_shape(const DenseMatrix& o) const noexcept {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": shape " + shape_string(a.rows(), a.cols()) +
                         " vs " + shape_string(b.rows(), b.cols()));
  }
}

// A * B
inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: " + shape_string(a.rows(), a.cols()) + " * " +
                         shape_string(b.rows(), b.cols()));
  }
  DenseMatrix c(a.rows(), b.cols());
  c.view().noalias() = a.view() * b.view();
  return c;
}

// A^T * B
inline DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("matmul_tn: " + shape_string(a.rows(), a.cols()) + "^T * " +
                         shape_string(b.rows(), b.cols()));
  }
  DenseMatrix c(a.cols(), b.cols());
  c.view().noalias() = a.view().transpose() * b.view();
  return c;
}

// A * B^T
inline DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_nt: " + shape_string(a.rows(), a.cols()) + " * " +
                         shape_string(b.rows(), b.cols()) + "^T");
  }
  DenseMatrix c(a.rows(), b.rows());
  c.view().noalias() = a.view() * b.view().transpose();
  return c;
}

inline DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  t.view() = a.view().transpose();
  return t;
}

inline double frobenius_norm(const DenseMatrix& a) { return a.view().norm(); }

// ||A - B||_F
inline double frobenius_distance(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "frobenius_distance");
  return (a.view() - b.view()).norm();
}

inline double max_abs_difference(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "max_abs_difference");
  if (a.empty()) return 0.0;
  return (a.view() - b.view()).cwiseAbs().maxCoeff();
}

// First `count` columns of `a`.
inline DenseMatrix leading_columns(const DenseMatrix& a, std::size_t count) {
  if (count > a.cols()) {
    throw DimensionError("leading_columns: " + std::to_string(count) + " > " +
                         std::to_string(a.cols()));
  }
  DenseMatrix out(a.rows(), count);
  out.view() = a.view().leftCols(static_cast<Eigen::Index>(count));
  return out;
}

// ||Q^T Q - I||_F
inline double orthonormality_error(const DenseMatrix& q) {
  const auto k = static_cast<Eigen::Index>(q.cols());
  RowMajorMatrix gram = q.view().transpose() * q.view();
  return (gram - RowMajorMatrix::Identity(k, k)).norm();
}

}  // namespace lograd
