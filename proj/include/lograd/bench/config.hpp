#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lograd/errors.hpp"
#include "lograd/matrix.hpp"
#include "lograd/schedule.hpp"
#include "lograd/sketch.hpp"
#include "lograd/synthetic.hpp"
#include "lograd/toy/train.hpp"

// Run configuration for the lograd CLI: a flat `key = value` text file,
// '#' starts a comment, lists are comma separated. Every key has a default
// (see defaults_for); unknown keys are rejected.

namespace lograd::bench {

enum class Command { BenchProjection, BenchSubspace, TrainToy, AblateRank, MemoryReport };
enum class OutputFormat { CSV, JSON };

inline const char* to_string(Command c) {
  switch (c) {
    case Command::BenchProjection: return "bench-projection";
    case Command::BenchSubspace: return "bench-subspace";
    case Command::TrainToy: return "train-toy";
    case Command::AblateRank: return "ablate-rank";
    case Command::MemoryReport: return "memory-report";
  }
  return "?";
}

inline Command parse_command(const std::string& s) {
  for (Command c : {Command::BenchProjection, Command::BenchSubspace, Command::TrainToy, Command::AblateRank,
                    Command::MemoryReport}) {
    if (s == to_string(c)) return c;
  }
  throw ConfigError("unknown command '" + s + "'");
}

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool operator==(const Shape&) const = default;
};

struct RunConfig {
  Command command = Command::BenchProjection;
  std::vector<Shape> shapes;
  std::vector<std::size_t> ranks;
  std::vector<std::uint64_t> seeds{0};
  std::size_t oversample = 8;
  Mixing mixing = Mixing::UnitaryDCT;
  std::size_t refresh_interval = 50;

  // timing
  std::size_t repetitions = 7;
  std::size_t warmup = 2;
  std::vector<std::string> methods;  // bench-projection: svd, srft; bench-subspace adds gaussian
  std::vector<std::string> phases;   // basis, step
  std::vector<Spectrum> spectra;

  // memory-report
  bool store_basis = true;

  // train-toy / ablate-rank
  toy::TrainConfig train;

  std::string output_path;  // empty: stdout
  OutputFormat format = OutputFormat::CSV;
};

namespace detail {

inline std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  const auto res = std::from_chars(v.data(), end, out);
  if (res.ec != std::errc() || res.ptr != end) throw ConfigError(key + ": cannot parse '" + v + "' as a number");
  return out;
}

inline double parse_real(const std::string& key, const std::string& v) {
  const double d = parse_number<double>(key, v);
  if (!std::isfinite(d)) throw ConfigError(key + ": value must be finite");
  return d;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

inline Shape parse_shape(const std::string& key, const std::string& v) {
  const auto x = v.find('x');
  if (x == std::string::npos) throw ConfigError(key + ": shape '" + v + "' is not of the form MxN");
  Shape s{parse_number<std::size_t>(key, v.substr(0, x)), parse_number<std::size_t>(key, v.substr(x + 1))};
  if (s.rows == 0 || s.cols == 0) throw ConfigError(key + ": empty shape '" + v + "'");
  return s;
}

template <typename T, typename F>
std::vector<T> parse_list(const std::string& key, const std::string& v, F&& one) {
  std::vector<T> out;
  for (const auto& item : split_list(v)) out.push_back(one(key, item));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

inline std::vector<std::string> parse_choices(const std::string& key, const std::string& v,
                                              const std::vector<std::string>& allowed) {
  auto items = split_list(v);
  if (items.empty()) throw ConfigError(key + ": empty list");
  for (const auto& it : items) {
    if (std::find(allowed.begin(), allowed.end(), it) == allowed.end()) {
      throw ConfigError(key + ": unknown value '" + it + "'");
    }
  }
  return items;
}

inline Spectrum parse_spectrum(const std::string& key, const std::string& v) {
  for (Spectrum s : {Spectrum::ExactRank, Spectrum::PowerLaw, Spectrum::Exponential}) {
    if (v == to_string(s)) return s;
  }
  throw ConfigError(key + ": unknown spectrum '" + v + "' (exact, power, exp)");
}

template <typename T>
std::string join(const std::vector<T>& v, auto&& fmt) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

inline std::string real_string(double d) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), d);
  return std::string(buf, res.ptr);
}

}  // namespace detail

inline RunConfig defaults_for(Command c) {
  RunConfig cfg;
  cfg.command = c;
  switch (c) {
    case Command::BenchProjection:
      cfg.shapes = {{1024, 1024}};
      cfg.ranks = {128};
      cfg.methods = {"svd", "srft"};
      cfg.phases = {"basis", "step"};
      break;
    case Command::BenchSubspace:
      cfg.shapes = {{512, 512}};
      cfg.ranks = {32};
      cfg.seeds = {0, 1, 2, 3, 4};
      cfg.methods = {"svd", "srft", "gaussian"};
      cfg.spectra = {Spectrum::ExactRank, Spectrum::PowerLaw, Spectrum::Exponential};
      break;
    case Command::TrainToy:
      cfg.ranks = {8};
      cfg.train.steps = 100;
      break;
    case Command::AblateRank:
      cfg.ranks = {32, 64, 128, 256};
      cfg.train.encoder.model_dim = 256;
      cfg.train.dataset_size = 4;
      cfg.train.steps = 10;
      cfg.refresh_interval = 5;
      break;
    case Command::MemoryReport:
      cfg.shapes = {{1024, 1024}, {1024, 576}};
      cfg.ranks = {128};
      break;
  }
  cfg.train.rank = cfg.ranks.front();
  cfg.train.oversample = cfg.oversample;
  cfg.train.refresh_interval = cfg.refresh_interval;
  return cfg;
}

// Sets one flat key. Throws ConfigError on unknown keys or bad values.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  using namespace detail;
  const std::string v = trim(value);
  toy::TrainConfig& t = cfg.train;
  if (key == "shapes") {
    cfg.shapes = parse_list<Shape>(key, v, parse_shape);
  } else if (key == "ranks") {
    cfg.ranks = parse_list<std::size_t>(key, v, parse_number<std::size_t>);
    t.rank = cfg.ranks.front();
  } else if (key == "seeds") {
    cfg.seeds = parse_list<std::uint64_t>(key, v, parse_number<std::uint64_t>);
  } else if (key == "oversample") {
    cfg.oversample = t.oversample = parse_number<std::size_t>(key, v);
  } else if (key == "mixing") {
    if (v != "dct" && v != "dft") throw ConfigError(key + ": expected dct or dft");
    cfg.mixing = t.mixing = v == "dct" ? Mixing::UnitaryDCT : Mixing::ComplexDFT;
  } else if (key == "refresh_interval") {
    cfg.refresh_interval = t.refresh_interval = parse_number<std::size_t>(key, v);
  } else if (key == "timing.repetitions") {
    cfg.repetitions = parse_number<std::size_t>(key, v);
  } else if (key == "timing.warmup") {
    cfg.warmup = parse_number<std::size_t>(key, v);
  } else if (key == "methods") {
    cfg.methods = parse_choices(key, v, {"svd", "srft", "gaussian"});
  } else if (key == "phases") {
    cfg.phases = parse_choices(key, v, {"basis", "step"});
  } else if (key == "spectra") {
    cfg.spectra = parse_list<Spectrum>(key, v, parse_spectrum);
  } else if (key == "memory.store_basis") {
    cfg.store_basis = parse_bool(key, v);
  } else if (key == "schedule.initial_lr") {
    t.initial_lr = parse_real(key, v);
  } else if (key == "schedule.min_lr") {
    t.min_lr = parse_real(key, v);
  } else if (key == "schedule.kind") {
    if (v != "cosine" && v != "constant") throw ConfigError(key + ": expected cosine or constant");
    t.schedule = v == "cosine" ? ScheduleKind::Cosine : ScheduleKind::Constant;
  } else if (key == "train.steps") {
    t.steps = parse_number<std::size_t>(key, v);
  } else if (key == "train.model") {
    if (v != "dual-encoder" && v != "linreg") throw ConfigError(key + ": expected dual-encoder or linreg");
    t.model = v == "linreg" ? toy::ToyModel::LinearRegression : toy::ToyModel::DualEncoder;
  } else if (key == "train.optimizer") {
    if (v == "adamw") t.optimizer = toy::OptimizerKind::AdamW;
    else if (v == "galore-svd") t.optimizer = toy::OptimizerKind::GaloreSVD;
    else if (v == "galore-srft") t.optimizer = toy::OptimizerKind::GaloreSRFT;
    else throw ConfigError(key + ": expected adamw, galore-svd or galore-srft");
  } else if (key == "train.weight_decay") {
    t.weight_decay = parse_real(key, v);
  } else if (key == "train.scale") {
    t.scale = parse_real(key, v);
  } else if (key == "train.reset_moments") {
    t.reset_moments_on_refresh = parse_bool(key, v);
  } else if (key == "train.redraw_operator") {
    t.redraw_operator = parse_bool(key, v);
  } else if (key == "train.dataset_size") {
    t.dataset_size = parse_number<std::size_t>(key, v);
  } else if (key == "train.image_size") {
    t.encoder.height = t.encoder.width = parse_number<std::size_t>(key, v);
  } else if (key == "train.patch") {
    t.encoder.patch = parse_number<std::size_t>(key, v);
  } else if (key == "train.model_dim") {
    t.encoder.model_dim = parse_number<std::size_t>(key, v);
  } else if (key == "train.heads") {
    t.encoder.heads = parse_number<std::size_t>(key, v);
  } else if (key == "train.dice_weight") {
    t.loss_weights.dice = parse_real(key, v);
  } else if (key == "train.bce_weight") {
    t.loss_weights.bce = parse_real(key, v);
  } else if (key == "adam.beta1") {
    t.adam.beta1 = parse_real(key, v);
  } else if (key == "adam.beta2") {
    t.adam.beta2 = parse_real(key, v);
  } else if (key == "adam.eps") {
    t.adam.eps = parse_real(key, v);
  } else if (key == "regression.rows") {
    t.regression.rows = parse_number<std::size_t>(key, v);
  } else if (key == "regression.cols") {
    t.regression.cols = parse_number<std::size_t>(key, v);
  } else if (key == "regression.samples") {
    t.regression.samples = parse_number<std::size_t>(key, v);
  } else if (key == "regression.rank") {
    t.regression.rank = parse_number<std::size_t>(key, v);
  } else if (key == "regression.noise") {
    t.regression.noise = parse_real(key, v);
  } else if (key == "output.path") {
    cfg.output_path = v;
  } else if (key == "output.format") {
    if (v != "csv" && v != "json") throw ConfigError(key + ": expected csv or json");
    cfg.format = v == "csv" ? OutputFormat::CSV : OutputFormat::JSON;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

// Ordered key/value pairs from config text.
inline std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text,
                                                                         const std::string& origin) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": missing key");
    out.emplace_back(key, detail::trim(line.substr(eq + 1)));
  }
  return out;
}

inline void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  for (const auto& [k, v] : parse_config_text(ss.str(), path)) {
    try {
      apply_setting(cfg, k, v);
    } catch (const ConfigError& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }
}

// Cross-field checks once all sources are merged.
inline void validate(const RunConfig& cfg) {
  if (cfg.seeds.empty()) throw ConfigError("seeds must not be empty");
  if (cfg.ranks.empty()) throw ConfigError("ranks must not be empty");
  for (std::size_t r : cfg.ranks) {
    if (r == 0) throw ConfigError("ranks must be positive");
  }
  const bool matrix_command = cfg.command == Command::BenchProjection || cfg.command == Command::BenchSubspace ||
                              cfg.command == Command::MemoryReport;
  if (matrix_command) {
    if (cfg.shapes.empty()) throw ConfigError("shapes must not be empty");
    for (const Shape& s : cfg.shapes) {
      for (std::size_t r : cfg.ranks) {
        if (r > std::min(s.rows, s.cols)) {
          throw ConfigError("rank " + std::to_string(r) + " exceeds min dimension of shape " +
                            shape_string(s.rows, s.cols));
        }
        const bool sketched = std::any_of(cfg.methods.begin(), cfg.methods.end(),
                                          [](const std::string& m) { return m != "svd"; });
        if (cfg.command != Command::MemoryReport && sketched && r + cfg.oversample > std::min(s.rows, s.cols)) {
          throw ConfigError("rank " + std::to_string(r) + " + oversample " + std::to_string(cfg.oversample) +
                            " exceeds min dimension of shape " + shape_string(s.rows, s.cols));
        }
      }
    }
  }
  if (cfg.repetitions == 0) throw ConfigError("timing.repetitions must be positive");
  if (cfg.refresh_interval == 0) throw ConfigError("refresh_interval must be positive");
  const toy::TrainConfig& t = cfg.train;
  if (cfg.command == Command::TrainToy || cfg.command == Command::AblateRank) {
    if (t.steps == 0) throw ConfigError("train.steps must be positive");
    if (t.min_lr > t.initial_lr || t.min_lr < 0.0) throw ConfigError("schedule: need 0 <= min_lr <= initial_lr");
    if (t.model == toy::ToyModel::DualEncoder) {
      const auto& e = t.encoder;
      if (e.patch == 0 || e.height % e.patch != 0) throw ConfigError("train.image_size must be a multiple of train.patch");
      if (e.heads == 0 || e.model_dim % e.heads != 0) throw ConfigError("train.model_dim must be a multiple of train.heads");
      if (t.dataset_size == 0) throw ConfigError("train.dataset_size must be positive");
      for (std::size_t r : cfg.ranks) {
        if (r > e.model_dim) {
          throw ConfigError("rank " + std::to_string(r) + " exceeds train.model_dim " + std::to_string(e.model_dim));
        }
      }
    } else {
      const auto& g = t.regression;
      if (g.rank == 0 || g.rank > std::min(g.rows, g.cols)) throw ConfigError("regression.rank must fit the weight");
      if (g.samples < g.cols) throw ConfigError("regression.samples must be at least regression.cols");
      for (std::size_t r : cfg.ranks) {
        if (r > std::min(g.rows, g.cols)) throw ConfigError("rank " + std::to_string(r) + " exceeds the regression weight");
      }
    }
  }
}

// Resolved settings, in a fixed order, for the JSON config echo.
inline std::vector<std::pair<std::string, std::string>> echo(const RunConfig& cfg) {
  using namespace detail;
  const toy::TrainConfig& t = cfg.train;
  auto num = [](auto v) { return std::to_string(v); };
  std::vector<std::pair<std::string, std::string>> e = {
      {"command", to_string(cfg.command)},
      {"shapes", join(cfg.shapes, [](const Shape& s) { return std::to_string(s.rows) + "x" + std::to_string(s.cols); })},
      {"ranks", join(cfg.ranks, num)},
      {"seeds", join(cfg.seeds, num)},
      {"oversample", num(cfg.oversample)},
      {"mixing", to_string(cfg.mixing)},
      {"refresh_interval", num(cfg.refresh_interval)},
      {"timing.repetitions", num(cfg.repetitions)},
      {"timing.warmup", num(cfg.warmup)},
      {"methods", join(cfg.methods, [](const std::string& s) { return s; })},
      {"phases", join(cfg.phases, [](const std::string& s) { return s; })},
      {"spectra", join(cfg.spectra, [](Spectrum s) { return std::string(to_string(s)); })},
      {"memory.store_basis", cfg.store_basis ? "true" : "false"},
      {"schedule.initial_lr", real_string(t.initial_lr)},
      {"schedule.min_lr", real_string(t.min_lr)},
      {"schedule.kind", t.schedule == ScheduleKind::Cosine ? "cosine" : "constant"},
      {"train.steps", num(t.steps)},
      {"train.model", to_string(t.model)},
      {"train.optimizer", to_string(t.optimizer)},
      {"train.weight_decay", real_string(t.weight_decay)},
      {"train.scale", real_string(t.scale)},
      {"train.reset_moments", t.reset_moments_on_refresh ? "true" : "false"},
      {"train.redraw_operator", t.redraw_operator ? "true" : "false"},
      {"train.dataset_size", num(t.dataset_size)},
      {"train.image_size", num(t.encoder.height)},
      {"train.patch", num(t.encoder.patch)},
      {"train.model_dim", num(t.encoder.model_dim)},
      {"train.heads", num(t.encoder.heads)},
      {"train.dice_weight", real_string(t.loss_weights.dice)},
      {"train.bce_weight", real_string(t.loss_weights.bce)},
      {"adam.beta1", real_string(t.adam.beta1)},
      {"adam.beta2", real_string(t.adam.beta2)},
      {"adam.eps", real_string(t.adam.eps)},
      {"regression.rows", num(t.regression.rows)},
      {"regression.cols", num(t.regression.cols)},
      {"regression.samples", num(t.regression.samples)},
      {"regression.rank", num(t.regression.rank)},
      {"regression.noise", real_string(t.regression.noise)},
      {"output.format", cfg.format == OutputFormat::CSV ? "csv" : "json"},
  };
  return e;
}

}  // namespace lograd::bench
