#pragma once

// Arbitrary-length FFT (radix-2, Bluestein chirp-z for other lengths) and
// the orthonormal DCT-II built on it. Plans are immutable once constructed
// and may be shared between threads; scratch lives in a caller-owned
// Workspace.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "lograd/errors.hpp"

namespace lograd::fft {

using Complex = std::complex<double>;

inline bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_power_of_two(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// In-place iterative radix-2 transform of a fixed power-of-two length.
class Radix2 {
 public:
  Radix2() = default;

  explicit Radix2(std::size_t n) : n_(n), bitrev_(n), twiddle_(n / 2) {
    if (!is_power_of_two(n)) throw InvalidArgument("Radix2: length must be a power of two");
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1U) << (bits - 1 - b);
      bitrev_[i] = r;
    }
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      twiddle_[k] = {std::cos(angle), std::sin(angle)};
    }
  }

  std::size_t size() const noexcept { return n_; }

  // Unnormalized forward DFT: X_k = sum_j x_j exp(-2 pi i jk / n).
  void forward(std::span<Complex> x) const noexcept {
    for (std::size_t i = 0; i < n_; ++i) {
      if (i < bitrev_[i]) std::swap(x[i], x[bitrev_[i]]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = n_ / len;
      for (std::size_t start = 0; start < n_; start += len) {
        for (std::size_t k = 0; k < half; ++k) {
          const Complex w = twiddle_[k * stride];
          const Complex a = x[start + k];
          const Complex b = x[start + k + half] * w;
          x[start + k] = a + b;
          x[start + k + half] = a - b;
        }
      }
    }
  }

  // Unnormalized inverse (no 1/n factor).
  void backward(std::span<Complex> x) const noexcept {
    for (auto& v : x) v = std::conj(v);
    forward(x);
    for (auto& v : x) v = std::conj(v);
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> bitrev_;
  std::vector<Complex> twiddle_;
};

struct Workspace {
  std::vector<Complex> a;
  std::vector<Complex> b;
};

// Unnormalized DFT of any length n >= 1 in O(n log n).
class FftPlan {
 public:
  FftPlan() = default;

  explicit FftPlan(std::size_t n) : n_(n) {
    if (n == 0) throw InvalidArgument("FftPlan: length must be positive");
    if (is_power_of_two(n)) {
      direct_ = Radix2(n);
      return;
    }
    const std::size_t m = next_power_of_two(2 * n - 1);
    conv_ = Radix2(m);
    chirp_.resize(n);
    const std::size_t period = 2 * n;
    for (std::size_t k = 0; k < n; ++k) {
      // k^2 mod 2n keeps the phase argument small for large k.
      const std::size_t k2 = static_cast<std::size_t>((static_cast<unsigned __int128>(k) * k) % period);
      const double angle = -std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
      chirp_[k] = {std::cos(angle), std::sin(angle)};
    }
    kernel_.assign(m, Complex{});
    kernel_[0] = std::conj(chirp_[0]);
    for (std::size_t k = 1; k < n; ++k) {
      kernel_[k] = std::conj(chirp_[k]);
      kernel_[m - k] = std::conj(chirp_[k]);
    }
    conv_.forward(kernel_);
  }

  std::size_t size() const noexcept { return n_; }

  void forward(std::span<Complex> x, Workspace& ws) const {
    if (x.size() != n_) throw DimensionError("FftPlan: input length mismatch");
    if (chirp_.empty()) {
      direct_.forward(x);
      return;
    }
    const std::size_t m = conv_.size();
    ws.b.assign(m, Complex{});
    for (std::size_t k = 0; k < n_; ++k) ws.b[k] = x[k] * chirp_[k];
    conv_.forward(ws.b);
    for (std::size_t k = 0; k < m; ++k) ws.b[k] *= kernel_[k];
    conv_.backward(ws.b);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n_; ++k) x[k] = ws.b[k] * chirp_[k] * inv_m;
  }

 private:
  std::size_t n_ = 0;
  Radix2 direct_;
  Radix2 conv_;
  std::vector<Complex> chirp_;
  std::vector<Complex> kernel_;
};

// Orthonormal DCT-II: X_k = c_k sum_j x_j cos(pi (2j+1) k / 2n), with
// c_0 = sqrt(1/n), c_k = sqrt(2/n). Computed with one length-n complex FFT
// of the even/odd reordered input.
class DctPlan {
 public:
  DctPlan() = default;

  explicit DctPlan(std::size_t n) : n_(n), fft_(n), post_(n) {
    const double nn = static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double angle = -std::numbers::pi * static_cast<double>(k) / (2.0 * nn);
      const double scale = (k == 0) ? std::sqrt(1.0 / nn) : std::sqrt(2.0 / nn);
      post_[k] = Complex{std::cos(angle), std::sin(angle)} * scale;
    }
  }

  std::size_t size() const noexcept { return n_; }

  void forward(std::span<const double> in, std::span<double> out, Workspace& ws) const {
    if (in.size() != n_ || out.size() != n_) throw DimensionError("DctPlan: length mismatch");
    ws.a.resize(n_);
    const std::size_t evens = (n_ + 1) / 2;
    for (std::size_t k = 0; k < evens; ++k) ws.a[k] = in[2 * k];
    for (std::size_t k = 0; k < n_ / 2; ++k) ws.a[n_ - 1 - k] = in[2 * k + 1];
    fft_.forward(ws.a, ws);
    for (std::size_t k = 0; k < n_; ++k) out[k] = (ws.a[k] * post_[k]).real();
  }

 private:
  std::size_t n_ = 0;
  FftPlan fft_;
  std::vector<Complex> post_;
};

}  // namespace lograd::fft
