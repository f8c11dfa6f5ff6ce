#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lograd/errors.hpp"
#include "lograd/galore.hpp"
#include "lograd/matrix.hpp"

// Binary checkpoint of GaloreParamState records.
//
// Layout (little-endian):
//   "LGRDCKPT" u32 version u64 count
//   per state: name, config block, u64 config hash, u64 step, u8 pinned,
//              refresh_steps, u8 has_basis [basis block], moment1, moment2
// Doubles are stored as raw IEEE-754 bits so a round trip is bit-exact.

namespace lograd {

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes little-endian");

inline constexpr std::array<char, 8> kCheckpointMagic = {'L', 'G', 'R', 'D', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}

  template <typename T>
  void pod(const T& v) {
    os_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void u8(std::uint8_t v) { pod(v); }
  void u64(std::uint64_t v) { pod(v); }
  void f64(double v) { pod(v); }
  void str(const std::string& s) {
    u64(s.size());
    os_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void matrix(const DenseMatrix& m) {
    u64(m.rows());
    u64(m.cols());
    const auto d = m.data();
    os_.write(reinterpret_cast<const char*>(d.data()), static_cast<std::streamsize>(d.size() * sizeof(double)));
  }

 private:
  std::ostream& os_;
};

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  template <typename T>
  T pod() {
    T v{};
    is_.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is_) throw FormatError("checkpoint: truncated input");
    return v;
  }
  std::uint8_t u8() { return pod<std::uint8_t>(); }
  std::uint64_t u64() { return pod<std::uint64_t>(); }
  double f64() { return pod<double>(); }
  std::string str() {
    const std::uint64_t n = u64();
    if (n > (1u << 20)) throw FormatError("checkpoint: implausible string length " + std::to_string(n));
    std::string s(n, '\0');
    is_.read(s.data(), static_cast<std::streamsize>(n));
    if (!is_) throw FormatError("checkpoint: truncated string");
    return s;
  }
  DenseMatrix matrix() {
    const std::uint64_t rows = u64();
    const std::uint64_t cols = u64();
    if (cols != 0 && rows > (std::uint64_t{1} << 40) / cols) {
      throw FormatError("checkpoint: implausible matrix shape " + shape_string(rows, cols));
    }
    DenseMatrix m(rows, cols);
    auto d = m.data();
    is_.read(reinterpret_cast<char*>(d.data()), static_cast<std::streamsize>(d.size() * sizeof(double)));
    if (!is_) throw FormatError("checkpoint: truncated matrix data");
    return m;
  }

 private:
  std::istream& is_;
};

inline void write_config(Writer& w, const GaloreConfig& c) {
  w.u64(c.rank);
  w.u64(c.refresh_interval);
  w.f64(c.adam.beta1);
  w.f64(c.adam.beta2);
  w.f64(c.adam.eps);
  w.f64(c.scale);
  w.u8(static_cast<std::uint8_t>(c.method));
  w.u64(c.oversample);
  w.u8(static_cast<std::uint8_t>(c.mixing));
  w.u64(c.seed);
  w.u8(c.reset_moments_on_refresh ? 1 : 0);
  w.u8(c.redraw_operator ? 1 : 0);
  w.u8(c.side ? (*c.side == Side::Left ? 1 : 2) : 0);
}

template <typename E>
E enum_in_range(std::uint8_t v, std::uint8_t max, const char* what) {
  if (v > max) throw FormatError(std::string("checkpoint: bad ") + what + " tag " + std::to_string(v));
  return static_cast<E>(v);
}

inline GaloreConfig read_config(Reader& r) {
  GaloreConfig c;
  c.rank = r.u64();
  c.refresh_interval = r.u64();
  c.adam.beta1 = r.f64();
  c.adam.beta2 = r.f64();
  c.adam.eps = r.f64();
  c.scale = r.f64();
  c.method = enum_in_range<ProjectionMethod>(r.u8(), 1, "method");
  c.oversample = r.u64();
  c.mixing = enum_in_range<Mixing>(r.u8(), 1, "mixing");
  c.seed = r.u64();
  c.reset_moments_on_refresh = r.u8() != 0;
  c.redraw_operator = r.u8() != 0;
  const std::uint8_t side = r.u8();
  if (side > 2) throw FormatError("checkpoint: bad side tag");
  if (side != 0) c.side = side == 1 ? Side::Left : Side::Right;
  return c;
}

}  // namespace detail

// FNV-1a over the serialized config block.
inline std::uint64_t config_hash(const GaloreConfig& c) {
  std::ostringstream os;
  detail::Writer w(os);
  detail::write_config(w, c);
  return hash_name(os.str());
}

inline void write_state(std::ostream& os, const GaloreParamState& s) {
  detail::Writer w(os);
  w.str(s.name);
  detail::write_config(w, s.config);
  w.u64(config_hash(s.config));
  w.u64(s.step);
  w.u8(s.basis_pinned ? 1 : 0);
  w.u64(s.refresh_steps.size());
  for (std::size_t v : s.refresh_steps) w.u64(v);
  w.u8(s.basis ? 1 : 0);
  if (s.basis) {
    const ProjectionBasis& b = *s.basis;
    w.matrix(b.basis);
    w.u8(b.side == Side::Left ? 0 : 1);
    w.u64(b.rank);
    w.u64(b.birth_step);
    w.u8(static_cast<std::uint8_t>(b.method));
    w.u8(b.rank_deficient ? 1 : 0);
  }
  w.matrix(s.moment1);
  w.matrix(s.moment2);
}

inline GaloreParamState read_state(std::istream& is) {
  detail::Reader r(is);
  GaloreParamState s;
  s.name = r.str();
  s.config = detail::read_config(r);
  const std::uint64_t stored = r.u64();
  if (stored != config_hash(s.config)) {
    throw FormatError("checkpoint: config hash mismatch for '" + s.name + "'");
  }
  s.step = r.u64();
  s.basis_pinned = r.u8() != 0;
  const std::uint64_t refreshes = r.u64();
  if (refreshes > s.step + 1) throw FormatError("checkpoint: refresh count exceeds step for '" + s.name + "'");
  s.refresh_steps.resize(refreshes);
  for (auto& v : s.refresh_steps) v = r.u64();
  if (r.u8() != 0) {
    ProjectionBasis b;
    b.basis = r.matrix();
    b.side = r.u8() == 0 ? Side::Left : Side::Right;
    b.rank = r.u64();
    b.birth_step = r.u64();
    b.method = detail::enum_in_range<BasisMethod>(r.u8(), 2, "basis method");
    b.rank_deficient = r.u8() != 0;
    if (b.basis.cols() != b.rank) throw FormatError("checkpoint: basis rank does not match its columns");
    s.basis = std::move(b);
  }
  s.moment1 = r.matrix();
  s.moment2 = r.matrix();
  if (!s.moment1.same_shape(s.moment2)) throw FormatError("checkpoint: moment shapes differ for '" + s.name + "'");
  return s;
}

inline void write_checkpoint(std::ostream& os, const std::vector<GaloreParamState>& states) {
  os.write(kCheckpointMagic.data(), kCheckpointMagic.size());
  detail::Writer w(os);
  w.pod(kCheckpointVersion);
  w.u64(states.size());
  for (const auto& s : states) write_state(os, s);
}

inline std::vector<GaloreParamState> read_checkpoint(std::istream& is) {
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kCheckpointMagic) throw FormatError("checkpoint: bad magic");
  detail::Reader r(is);
  const auto version = r.pod<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  }
  const std::uint64_t count = r.u64();
  if (count > (1u << 20)) throw FormatError("checkpoint: implausible state count");
  std::vector<GaloreParamState> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) out.push_back(read_state(is));
  return out;
}

inline void save_checkpoint(const std::string& path, const std::vector<GaloreParamState>& states) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("save_checkpoint: cannot open '" + path + "' for writing");
  write_checkpoint(os, states);
  os.flush();
  if (!os) throw Error("save_checkpoint: write failed for '" + path + "'");
}

inline std::vector<GaloreParamState> load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("load_checkpoint: cannot open '" + path + "'");
  return read_checkpoint(is);
}

}  // namespace lograd
