#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lograd/errors.hpp"
#include "lograd/matrix.hpp"
#include "lograd/random.hpp"

// Building blocks for the hand-differentiated toy models. Token matrices are
// L x d with one token per row; a linear map with weight W (out x in) sends
// X to X W^T.

namespace lograd::toy {

// A trainable matrix with its accumulated gradient.
struct Param {
  std::string name;
  DenseMatrix value;
  DenseMatrix grad;
  // Eligible for low-rank projected updates.
  bool projectable = false;

  Param() = default;
  Param(std::string n, DenseMatrix v, bool proj)
      : name(std::move(n)), value(std::move(v)), grad(value.rows(), value.cols()), projectable(proj) {}

  void zero_grad() { grad.fill(0.0); }
};

// Non-owning view used by optimizers and checkpoints.
using ParamList = std::vector<Param*>;

inline DenseMatrix init_weight(std::size_t out, std::size_t in, Rng& rng) {
  return gaussian_matrix(out, in, rng, 1.0 / std::sqrt(static_cast<double>(in)));
}

// Y = X W^T
inline DenseMatrix linear(const DenseMatrix& x, const DenseMatrix& w) {
  if (x.cols() != w.cols()) {
    throw DimensionError("linear: input " + shape_string(x.rows(), x.cols()) + " vs weight " +
                         shape_string(w.rows(), w.cols()));
  }
  return matmul_nt(x, w);
}

// Given dY for Y = X W^T: dW += dY^T X, returns dX = dY W.
inline DenseMatrix linear_backward(const DenseMatrix& x, const DenseMatrix& w, const DenseMatrix& dy,
                                   DenseMatrix& dw) {
  dw.view().noalias() += dy.view().transpose() * x.view();
  return matmul(dy, w);
}

inline DenseMatrix tanh_of(const DenseMatrix& x) {
  DenseMatrix y = x;
  for (double& v : y.data()) v = std::tanh(v);
  return y;
}

// dX = dY * (1 - tanh^2), given Y = tanh(X).
inline DenseMatrix tanh_backward(const DenseMatrix& y, const DenseMatrix& dy) {
  DenseMatrix dx = dy;
  auto a = dx.data();
  auto t = y.data();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= 1.0 - t[i] * t[i];
  return dx;
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline void add_in_place(DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "add_in_place");
  a.view() += b.view();
}

// Row-wise softmax of scores, in place.
inline void softmax_rows(DenseMatrix& s) {
  for (std::size_t i = 0; i < s.rows(); ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < s.cols(); ++j) mx = std::max(mx, s(i, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < s.cols(); ++j) {
      s(i, j) = std::exp(s(i, j) - mx);
      sum += s(i, j);
    }
    for (std::size_t j = 0; j < s.cols(); ++j) s(i, j) /= sum;
  }
}

// Single-head scaled dot-product attention: softmax(Q K^T / sqrt(dk)) V.
struct AttentionCache {
  DenseMatrix q, k, v;
  DenseMatrix weights;  // Lq x Lk, rows sum to one
};

inline DenseMatrix attend(const DenseMatrix& q, const DenseMatrix& k, const DenseMatrix& v,
                          AttentionCache* cache = nullptr) {
  if (q.cols() != k.cols() || k.rows() != v.rows()) {
    throw DimensionError("attend: q " + shape_string(q.rows(), q.cols()) + ", k " +
                         shape_string(k.rows(), k.cols()) + ", v " + shape_string(v.rows(), v.cols()));
  }
  DenseMatrix s = matmul_nt(q, k);
  s.view() *= 1.0 / std::sqrt(static_cast<double>(q.cols()));
  softmax_rows(s);
  DenseMatrix out = matmul(s, v);
  if (cache) *cache = {q, k, v, std::move(s)};
  return out;
}

struct AttentionGrads {
  DenseMatrix dq, dk, dv;
};

inline AttentionGrads attend_backward(const AttentionCache& c, const DenseMatrix& dout) {
  const DenseMatrix& a = c.weights;
  AttentionGrads g;
  g.dv = matmul_tn(a, dout);
  DenseMatrix da = matmul_nt(dout, c.v);
  // softmax Jacobian row by row: dS = A * (dA - <dA, A>_row)
  DenseMatrix ds(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double dot = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) dot += da(i, j) * a(i, j);
    for (std::size_t j = 0; j < a.cols(); ++j) ds(i, j) = a(i, j) * (da(i, j) - dot);
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(c.q.cols()));
  g.dq = matmul(ds, c.k);
  g.dq.view() *= scale;
  g.dk = matmul_tn(ds, c.q);
  g.dk.view() *= scale;
  return g;
}

inline DenseMatrix column_block(const DenseMatrix& x, std::size_t first, std::size_t count) {
  DenseMatrix out(x.rows(), count);
  out.view() = x.view().middleCols(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count));
  return out;
}

inline void set_column_block(DenseMatrix& x, std::size_t first, const DenseMatrix& block) {
  x.view().middleCols(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(block.cols())) = block.view();
}

}  // namespace lograd::toy
