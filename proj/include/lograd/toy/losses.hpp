#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "lograd/errors.hpp"
#include "lograd/matrix.hpp"

// Segmentation losses over C x N grids: one row per channel, one column per
// pixel. `pred` holds probabilities, `target` a one-hot labelling.

namespace lograd::toy {

inline constexpr double kDiceSmoothing = 1e-5;
inline constexpr double kBceClamp = 1e-7;

struct HybridWeights {
  double dice = 1.0;
  double bce = 1.0;
};

namespace detail {

inline void check_loss_inputs(const DenseMatrix& pred, const DenseMatrix& target, const char* who) {
  require_same_shape(pred, target, who);
  if (pred.empty()) throw DimensionError(std::string(who) + ": empty input");
}

}  // namespace detail

// 1 - mean_c (2 sum p t + s) / (sum p + sum t + s)
inline double dice_loss(const DenseMatrix& pred, const DenseMatrix& target, DenseMatrix* grad = nullptr,
                        double smoothing = kDiceSmoothing) {
  detail::check_loss_inputs(pred, target, "dice_loss");
  for (double p : pred.data()) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("dice_loss: prediction outside [0, 1]");
  }
  const std::size_t channels = pred.rows();
  if (grad) *grad = DenseMatrix(pred.rows(), pred.cols());
  double total = 0.0;
  for (std::size_t c = 0; c < channels; ++c) {
    double inter = 0.0, sp = 0.0, st = 0.0;
    for (std::size_t i = 0; i < pred.cols(); ++i) {
      inter += pred(c, i) * target(c, i);
      sp += pred(c, i);
      st += target(c, i);
    }
    const double den = sp + st + smoothing;
    const double num = 2.0 * inter + smoothing;
    total += num / den;
    if (grad) {
      const double scale = -1.0 / static_cast<double>(channels);
      for (std::size_t i = 0; i < pred.cols(); ++i) {
        (*grad)(c, i) = scale * (2.0 * target(c, i) / den - num / (den * den));
      }
    }
  }
  return 1.0 - total / static_cast<double>(channels);
}

// mean of -[t log p + (1 - t) log(1 - p)], p clamped to [1e-7, 1 - 1e-7]
inline double bce_loss(const DenseMatrix& pred, const DenseMatrix& target, DenseMatrix* grad = nullptr) {
  detail::check_loss_inputs(pred, target, "bce_loss");
  const auto p = pred.data();
  const auto t = target.data();
  const double inv = 1.0 / static_cast<double>(p.size());
  if (grad) *grad = DenseMatrix(pred.rows(), pred.cols());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], kBceClamp, 1.0 - kBceClamp);
    sum -= t[i] * std::log(q) + (1.0 - t[i]) * std::log(1.0 - q);
    if (grad) {
      const bool clamped = p[i] < kBceClamp || p[i] > 1.0 - kBceClamp;
      grad->data()[i] = clamped ? 0.0 : inv * ((1.0 - t[i]) / (1.0 - q) - t[i] / q);
    }
  }
  return sum * inv;
}

inline double hybrid_loss(const DenseMatrix& pred, const DenseMatrix& target, HybridWeights w = {},
                          DenseMatrix* grad = nullptr) {
  DenseMatrix gd, gb;
  const double d = dice_loss(pred, target, grad ? &gd : nullptr);
  const double b = bce_loss(pred, target, grad ? &gb : nullptr);
  if (grad) {
    *grad = DenseMatrix(pred.rows(), pred.cols());
    grad->view() = w.dice * gd.view() + w.bce * gb.view();
  }
  return w.dice * d + w.bce * b;
}

}  // namespace lograd::toy
