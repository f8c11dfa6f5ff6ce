#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "lograd/errors.hpp"
#include "lograd/matrix.hpp"

namespace lograd {

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamWState {
  DenseMatrix moment1;
  DenseMatrix moment2;
  std::size_t step = 0;

  static AdamWState for_shape(std::size_t rows, std::size_t cols) {
    return {DenseMatrix(rows, cols), DenseMatrix(rows, cols), 0};
  }
};

namespace detail {

// One bias-corrected Adam update of the moments from `grad` (same shape),
// writing the normalized direction m_hat / (sqrt(v_hat) + eps) into `out`.
// `t` is the 1-based step used for bias correction.
inline void adam_direction(DenseMatrix& m1, DenseMatrix& m2, const DenseMatrix& grad,
                           const AdamHyper& h, std::size_t t, DenseMatrix& out) {
  const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(t));
  auto a = m1.data();
  auto b = m2.data();
  auto g = grad.data();
  auto o = out.data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    a[i] = h.beta1 * a[i] + (1.0 - h.beta1) * g[i];
    b[i] = h.beta2 * b[i] + (1.0 - h.beta2) * g[i] * g[i];
    const double mhat = a[i] / c1;
    const double vhat = b[i] / c2;
    o[i] = mhat / (std::sqrt(vhat) + h.eps);
  }
}

}  // namespace detail

// Full-matrix AdamW: W <- W - lr * dir - lr * wd * W (decoupled decay, old W).
inline void full_adamw_step(DenseMatrix& weight, const DenseMatrix& grad, AdamWState& state,
                            double lr, const AdamHyper& hyper, double weight_decay,
                            const std::string& name = "param") {
  require_same_shape(weight, grad, "full_adamw_step");
  if (state.moment1.empty() && !weight.empty()) state = AdamWState::for_shape(weight.rows(), weight.cols());
  require_same_shape(weight, state.moment1, "full_adamw_step moments");
  if (!grad.all_finite()) throw NumericalError("full_adamw_step: non-finite gradient for '" + name + "'");
  if (!weight.all_finite()) throw NumericalError("full_adamw_step: non-finite weight for '" + name + "'");
  DenseMatrix dir(weight.rows(), weight.cols());
  detail::adam_direction(state.moment1, state.moment2, grad, hyper, state.step + 1, dir);
  auto w = weight.data();
  auto d = dir.data();
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = w[i] - lr * d[i] - lr * weight_decay * w[i];
  ++state.step;
}

}  // namespace lograd
