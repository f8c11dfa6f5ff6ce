#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "lograd/errors.hpp"
#include "lograd/matrix.hpp"
#include "lograd/random.hpp"

namespace lograd::toy {

inline constexpr std::size_t kClassCount = 4;  // background + three landmark classes

// One grayscale image with a per-pixel label in {0, 1, 2, 3}, row-major.
struct SyntheticLandmarkSample {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> image;
  std::vector<std::uint8_t> labels;

  std::size_t pixels() const noexcept { return height * width; }
  std::size_t foreground() const {
    std::size_t n = 0;
    for (auto l : labels) n += l != 0;
    return n;
  }

  bool operator==(const SyntheticLandmarkSample&) const = default;
};

struct SyntheticDataset {
  std::uint64_t seed = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<SyntheticLandmarkSample> samples;

  bool operator==(const SyntheticDataset&) const = default;
};

// kClassCount x (H*W) one-hot matrix.
inline DenseMatrix one_hot(const SyntheticLandmarkSample& s) {
  DenseMatrix t(kClassCount, s.pixels());
  for (std::size_t i = 0; i < s.pixels(); ++i) t(s.labels[i], i) = 1.0;
  return t;
}

namespace detail {

inline SyntheticLandmarkSample draw_sample(std::size_t h, std::size_t w, Rng& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  SyntheticLandmarkSample s;
  s.height = h;
  s.width = w;
  s.image.assign(h * w, 0.0);
  s.labels.assign(h * w, 0);

  // Background: a few low-frequency plane waves plus pixel noise.
  for (int k = 0; k < 3; ++k) {
    const double fx = 2.0 * std::numbers::pi * (0.5 + 2.0 * uni(rng)) / static_cast<double>(w);
    const double fy = 2.0 * std::numbers::pi * (0.5 + 2.0 * uni(rng)) / static_cast<double>(h);
    const double phase = 2.0 * std::numbers::pi * uni(rng);
    const double amp = 0.05 + 0.1 * uni(rng);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        s.image[y * w + x] += amp * std::sin(fx * static_cast<double>(x) + fy * static_cast<double>(y) + phase);
      }
    }
  }
  for (double& v : s.image) v += 0.03 * normal(rng);

  // 1-3 quadratic Bezier strokes, one class each.
  std::uniform_int_distribution<int> curve_count(1, 3);
  std::uniform_int_distribution<int> cls(1, 3);
  const int curves = curve_count(rng);
  const double hmax = static_cast<double>(h - 1);
  const double wmax = static_cast<double>(w - 1);
  for (int c = 0; c < curves; ++c) {
    const auto label = static_cast<std::uint8_t>(cls(rng));
    std::array<double, 3> px{}, py{};
    for (int k = 0; k < 3; ++k) {
      px[k] = wmax * (0.1 + 0.8 * uni(rng));
      py[k] = hmax * (0.1 + 0.8 * uni(rng));
    }
    const std::size_t samples = 4 * (h + w);
    for (std::size_t i = 0; i <= samples; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(samples);
      const double a = (1 - t) * (1 - t), b = 2 * t * (1 - t), d = t * t;
      const double x = std::clamp(a * px[0] + b * px[1] + d * px[2], 0.0, wmax);
      const double y = std::clamp(a * py[0] + b * py[1] + d * py[2], 0.0, hmax);
      const std::size_t idx = static_cast<std::size_t>(std::lround(y)) * w + static_cast<std::size_t>(std::lround(x));
      s.labels[idx] = label;
      s.image[idx] = 0.4 + 0.2 * static_cast<double>(label);
    }
  }
  return s;
}

}  // namespace detail

// Deterministic per (seed, index): sample i only depends on derive_seed(seed, i).
inline SyntheticDataset generate_synthetic_dataset(std::size_t count, std::size_t height, std::size_t width,
                                                   std::uint64_t seed) {
  if (count == 0) throw InvalidArgument("generate_synthetic_dataset: count must be at least 1");
  if (height < 4 || width < 4) {
    throw InvalidArgument("generate_synthetic_dataset: image " + shape_string(height, width) + " too small");
  }
  SyntheticDataset ds{seed, height, width, {}};
  ds.samples.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, i));
    ds.samples.push_back(detail::draw_sample(height, width, rng));
  }
  return ds;
}

inline double mean_foreground_fraction(const SyntheticDataset& ds) {
  double sum = 0.0;
  for (const auto& s : ds.samples) sum += static_cast<double>(s.foreground()) / static_cast<double>(s.pixels());
  return ds.samples.empty() ? 0.0 : sum / static_cast<double>(ds.samples.size());
}

// Container: "LGRDDATA" u32 version, u64 count, u64 H, u64 W, u64 seed, then
// per sample H*W f64 pixels followed by H*W u8 labels. Little-endian.
inline constexpr std::array<char, 8> kDatasetMagic = {'L', 'G', 'R', 'D', 'D', 'A', 'T', 'A'};
inline constexpr std::uint32_t kDatasetVersion = 1;

inline void save_dataset(const std::string& path, const SyntheticDataset& ds) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("save_dataset: cannot open '" + path + "'");
  auto put = [&](const auto& v) { os.write(reinterpret_cast<const char*>(&v), sizeof(v)); };
  os.write(kDatasetMagic.data(), kDatasetMagic.size());
  put(kDatasetVersion);
  put(static_cast<std::uint64_t>(ds.samples.size()));
  put(static_cast<std::uint64_t>(ds.height));
  put(static_cast<std::uint64_t>(ds.width));
  put(ds.seed);
  for (const auto& s : ds.samples) {
    os.write(reinterpret_cast<const char*>(s.image.data()), static_cast<std::streamsize>(s.image.size() * sizeof(double)));
    os.write(reinterpret_cast<const char*>(s.labels.data()), static_cast<std::streamsize>(s.labels.size()));
  }
  if (!os) throw Error("save_dataset: write failed for '" + path + "'");
}

inline SyntheticDataset load_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("load_dataset: cannot open '" + path + "'");
  auto get = [&](auto& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw FormatError("load_dataset: truncated header in '" + path + "'");
  };
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kDatasetMagic) throw FormatError("load_dataset: bad magic in '" + path + "'");
  std::uint32_t version = 0;
  get(version);
  if (version != kDatasetVersion) throw FormatError("load_dataset: unsupported version " + std::to_string(version));
  std::uint64_t count = 0, h = 0, w = 0;
  SyntheticDataset ds;
  get(count);
  get(h);
  get(w);
  get(ds.seed);
  if (h == 0 || w == 0 || h * w > (1u << 24) || count > (1u << 24)) {
    throw FormatError("load_dataset: implausible header in '" + path + "'");
  }
  ds.height = h;
  ds.width = w;
  ds.samples.resize(count);
  for (auto& s : ds.samples) {
    s.height = h;
    s.width = w;
    s.image.resize(h * w);
    s.labels.resize(h * w);
    is.read(reinterpret_cast<char*>(s.image.data()), static_cast<std::streamsize>(h * w * sizeof(double)));
    is.read(reinterpret_cast<char*>(s.labels.data()), static_cast<std::streamsize>(h * w));
    if (!is) throw FormatError("load_dataset: truncated sample data in '" + path + "'");
    for (auto l : s.labels) {
      if (l >= kClassCount) throw FormatError("load_dataset: label out of range in '" + path + "'");
    }
  }
  return ds;
}

}  // namespace lograd::toy
