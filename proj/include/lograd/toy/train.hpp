#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lograd/adamw.hpp"
#include "lograd/galore.hpp"
#include "lograd/schedule.hpp"
#include "lograd/toy/dataset.hpp"
#include "lograd/toy/model.hpp"
#include "lograd/toy/regression.hpp"

namespace lograd::toy {

enum class ToyModel { LinearRegression, DualEncoder };
enum class OptimizerKind { AdamW, GaloreSVD, GaloreSRFT };

inline const char* to_string(ToyModel m) { return m == ToyModel::LinearRegression ? "linreg" : "dual-encoder"; }

inline const char* to_string(OptimizerKind k) {
  switch (k) {
    case OptimizerKind::AdamW: return "adamw";
    case OptimizerKind::GaloreSVD: return "galore-svd";
    case OptimizerKind::GaloreSRFT: return "galore-srft";
  }
  return "?";
}

struct RegressionSpec {
  std::size_t rows = 48;
  std::size_t cols = 64;
  std::size_t samples = 256;
  std::size_t rank = 8;
  double noise = 0.5;
};

// One step is one full-batch pass over the data.
struct TrainConfig {
  ToyModel model = ToyModel::DualEncoder;
  OptimizerKind optimizer = OptimizerKind::GaloreSRFT;
  std::size_t rank = 8;
  std::size_t refresh_interval = 50;
  std::size_t oversample = 8;
  Mixing mixing = Mixing::UnitaryDCT;
  bool reset_moments_on_refresh = false;
  bool redraw_operator = true;
  double scale = 1.0;
  AdamHyper adam;
  double weight_decay = 0.0;
  double initial_lr = 1e-2;
  double min_lr = 1e-4;
  ScheduleKind schedule = ScheduleKind::Cosine;
  std::size_t steps = 100;
  std::uint64_t seed = 0;
  RegressionSpec regression;
  DualEncoderConfig encoder;
  std::size_t dataset_size = 8;
  HybridWeights loss_weights;

  LrSchedule lr_schedule() const { return {initial_lr, min_lr, steps, schedule}; }
};

struct StepRecord {
  std::size_t step = 0;
  double loss = 0.0;
  double lr = 0.0;
  std::int64_t wall_ns = 0;
};

struct ParamSummary {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool projected = false;
  std::uint64_t full_state_scalars = 0;  // two dense Adam moments
  std::uint64_t state_scalars = 0;       // what this run actually keeps (moments + basis)
};

struct TrainTrace {
  std::vector<StepRecord> steps;
  std::vector<ParamSummary> params;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::int64_t total_ns = 0;
  bool diverged = false;
  std::string failure;

  std::uint64_t state_scalars() const {
    std::uint64_t n = 0;
    for (const auto& p : params) n += p.state_scalars;
    return n;
  }
  std::uint64_t full_state_scalars() const {
    std::uint64_t n = 0;
    for (const auto& p : params) n += p.full_state_scalars;
    return n;
  }
};

// Per-parameter optimizer: projected updates for projectable parameters whose
// both dimensions reach the rank, dense AdamW for everything else.
class ParamOptimizer {
 public:
  ParamOptimizer(ParamList params, const TrainConfig& cfg) : cfg_(cfg) {
    for (Param* p : params) {
      Slot s;
      s.param = p;
      s.projected = cfg.optimizer != OptimizerKind::AdamW && p->projectable &&
                    std::min(p->value.rows(), p->value.cols()) >= cfg.rank;
      if (s.projected) {
        GaloreConfig g;
        g.rank = cfg.rank;
        g.refresh_interval = cfg.refresh_interval;
        g.adam = cfg.adam;
        g.scale = cfg.scale;
        g.method = cfg.optimizer == OptimizerKind::GaloreSVD ? ProjectionMethod::ExactSVD : ProjectionMethod::SRFT;
        // The sketch cannot be wider than the smaller dimension.
        g.oversample = std::min(cfg.oversample, std::min(p->value.rows(), p->value.cols()) - cfg.rank);
        g.mixing = cfg.mixing;
        g.seed = derive_seed(cfg.seed, hash_name(p->name));
        g.reset_moments_on_refresh = cfg.reset_moments_on_refresh;
        g.redraw_operator = cfg.redraw_operator;
        s.galore = GaloreParamState(p->name, g);
      }
      slots_.push_back(std::move(s));
    }
  }

  void step(double lr) {
    for (Slot& s : slots_) {
      if (s.projected) {
        galore_step(s.galore, s.param->value, s.param->grad, lr, cfg_.weight_decay);
      } else {
        full_adamw_step(s.param->value, s.param->grad, s.adam, lr, cfg_.adam, cfg_.weight_decay, s.param->name);
      }
    }
  }

  std::vector<ParamSummary> summary() const {
    std::vector<ParamSummary> out;
    for (const Slot& s : slots_) {
      ParamSummary p;
      p.name = s.param->name;
      p.rows = s.param->value.rows();
      p.cols = s.param->value.cols();
      p.projected = s.projected;
      p.full_state_scalars = 2ull * p.rows * p.cols;
      if (s.projected) {
        const Side side = default_side(p.rows, p.cols);
        const std::uint64_t other = side == Side::Left ? p.cols : p.rows;
        const std::uint64_t ambient = side == Side::Left ? p.rows : p.cols;
        p.state_scalars = 2ull * cfg_.rank * other + ambient * cfg_.rank;
      } else {
        p.state_scalars = p.full_state_scalars;
      }
      out.push_back(std::move(p));
    }
    return out;
  }

  const GaloreParamState* galore_state(const std::string& name) const {
    for (const Slot& s : slots_) {
      if (s.projected && s.param->name == name) return &s.galore;
    }
    return nullptr;
  }

 private:
  struct Slot {
    Param* param = nullptr;
    bool projected = false;
    AdamWState adam;
    GaloreParamState galore;
  };
  TrainConfig cfg_;
  std::vector<Slot> slots_;
};

namespace detail {

// Uniform interface over the two toy problems.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual ParamList parameters() = 0;
  // Loss at the current parameters; fills gradients when asked.
  virtual double evaluate(bool with_grad) = 0;
};

class RegressionObjective final : public Objective {
 public:
  RegressionObjective(const TrainConfig& cfg)
      : problem_(make_planted_regression(cfg.regression.rows, cfg.regression.cols, cfg.regression.samples,
                                         cfg.regression.rank, cfg.regression.noise, cfg.seed)),
        w_("w", DenseMatrix(cfg.regression.rows, cfg.regression.cols), true) {}

  ParamList parameters() override { return {&w_}; }
  double evaluate(bool with_grad) override {
    if (with_grad) w_.grad = problem_.gradient(w_.value);
    return problem_.loss(w_.value);
  }
  const PlantedRegression& problem() const { return problem_; }

 private:
  PlantedRegression problem_;
  Param w_;
};

class EncoderObjective final : public Objective {
 public:
  EncoderObjective(const TrainConfig& cfg, SyntheticDataset data) : model_(encoder_config(cfg)), data_(std::move(data)), weights_(cfg.loss_weights) {}

  ParamList parameters() override { return model_.parameters(); }
  double evaluate(bool with_grad) override {
    if (with_grad) model_.zero_grad();
    const double inv = 1.0 / static_cast<double>(data_.samples.size());
    double total = 0.0;
    for (const auto& s : data_.samples) total += model_.loss(s, weights_, with_grad, inv);
    return total * inv;
  }

 private:
  static DualEncoderConfig encoder_config(const TrainConfig& cfg) {
    DualEncoderConfig c = cfg.encoder;
    c.seed = derive_seed(cfg.seed, hash_name("model"));
    return c;
  }
  DualEncoderToy model_;
  SyntheticDataset data_;
  HybridWeights weights_;
};

}  // namespace detail

inline SyntheticDataset default_dataset(const TrainConfig& cfg) {
  return generate_synthetic_dataset(cfg.dataset_size, cfg.encoder.height, cfg.encoder.width,
                                    derive_seed(cfg.seed, hash_name("data")));
}

// Full-batch training. A non-finite loss or gradient stops the run and marks
// the trace as diverged; the steps recorded so far are kept.
inline TrainTrace train_toy(const TrainConfig& cfg, std::optional<SyntheticDataset> data = std::nullopt) {
  using Clock = std::chrono::steady_clock;
  if (cfg.steps == 0) throw InvalidArgument("train_toy: steps must be positive");
  const LrSchedule sched = cfg.lr_schedule();
  sched.validate();

  std::unique_ptr<detail::Objective> objective;
  if (cfg.model == ToyModel::LinearRegression) {
    objective = std::make_unique<detail::RegressionObjective>(cfg);
  } else {
    objective = std::make_unique<detail::EncoderObjective>(cfg, data ? std::move(*data) : default_dataset(cfg));
  }
  ParamOptimizer opt(objective->parameters(), cfg);

  TrainTrace trace;
  trace.params = opt.summary();
  const auto run_start = Clock::now();
  for (std::size_t t = 0; t < cfg.steps; ++t) {
    const auto start = Clock::now();
    const double lr = schedule_lr(sched, t);
    const double loss = objective->evaluate(true);
    if (!std::isfinite(loss)) {
      trace.diverged = true;
      trace.failure = "non-finite loss at step " + std::to_string(t);
      break;
    }
    try {
      opt.step(lr);
    } catch (const NumericalError& e) {
      trace.diverged = true;
      trace.failure = "step " + std::to_string(t) + ": " + e.what();
      trace.steps.push_back({t, loss, lr, std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count()});
      break;
    }
    trace.steps.push_back({t, loss, lr, std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count()});
  }
  if (!trace.steps.empty()) trace.initial_loss = trace.steps.front().loss;
  trace.final_loss = trace.diverged ? std::nan("") : objective->evaluate(false);
  if (!trace.diverged && !std::isfinite(trace.final_loss)) {
    trace.diverged = true;
    trace.failure = "non-finite final loss";
  }
  trace.total_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - run_start).count();
  return trace;
}

}  // namespace lograd::toy
