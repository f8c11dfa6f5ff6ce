#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lograd/bench/config.hpp"
#include "lograd/bench/table.hpp"
#include "lograd/bench/timing.hpp"
#include "lograd/galore.hpp"
#include "lograd/memory.hpp"
#include "lograd/random.hpp"
#include "lograd/subspace.hpp"
#include "lograd/synthetic.hpp"
#include "lograd/toy/train.hpp"

namespace lograd::bench {

namespace detail {

inline bool has(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

inline Cell ratio_cell(double value, double reference) {
  if (reference <= 0.0) return std::monostate{};
  return value / reference;
}

inline constexpr const char* kRepeatNote =
    "rows with inner_reps > 1 were timed in batches because one call was shorter than 1 ms; times are per call";

}  // namespace detail

// Wall time of basis computation ("basis") and of a full projected optimizer
// step that refreshes every call ("step"), per shape, rank, method and seed.
inline Table bench_projection(const RunConfig& cfg) {
  Table t;
  t.columns = {"m", "n", "r", "method", "median_ns", "iqr_ns", "phase", "seed", "oversample", "inner_reps"};
  bool repeated = false;
  for (const Shape& s : cfg.shapes) {
    for (std::size_t r : cfg.ranks) {
      for (std::uint64_t seed : cfg.seeds) {
        Rng rng(derive_seed(seed, hash_name("bench-projection")));
        const DenseMatrix g = gaussian_matrix(s.rows, s.cols, rng);
        const Side side = default_side(s.rows, s.cols);
        for (const std::string& method : cfg.methods) {
          if (method == "gaussian") continue;
          for (const std::string& phase : cfg.phases) {
            Timing tm;
            if (phase == "basis") {
              tm = method == "svd"
                       ? time_callable([&] { (void)svd_basis(g, r, side); }, cfg.repetitions, cfg.warmup)
                       : time_callable([&] { (void)srft_basis(g, r, cfg.oversample, cfg.mixing, seed, side); },
                                       cfg.repetitions, cfg.warmup);
            } else {
              GaloreConfig gc;
              gc.rank = r;
              gc.refresh_interval = 1;
              gc.method = method == "svd" ? ProjectionMethod::ExactSVD : ProjectionMethod::SRFT;
              gc.oversample = cfg.oversample;
              gc.mixing = cfg.mixing;
              gc.seed = seed;
              GaloreParamState state("bench", gc);
              DenseMatrix w = g;
              tm = time_callable([&] { (void)galore_step(state, w, g, 1e-6, 0.0); }, cfg.repetitions, cfg.warmup);
            }
            repeated = repeated || tm.inner_reps > 1;
            t.add_row({cell(s.rows), cell(s.cols), cell(r), cell(method), cell(tm.median_ns), cell(tm.iqr_ns),
                       cell(phase), Cell(seed), cell(cfg.oversample), cell(tm.inner_reps)});
          }
        }
      }
    }
  }
  if (repeated) t.notes.push_back(detail::kRepeatNote);
  return t;
}

// Relative residuals of each basis method against the Eckart-Young optimum,
// and the largest principal angle between each sketched basis and the SVD one.
inline Table bench_subspace(const RunConfig& cfg) {
  Table t;
  t.columns = {"m",
               "n",
               "r",
               "spectrum",
               "seed",
               "optimal_residual",
               "svd_residual",
               "srft_residual",
               "gaussian_residual",
               "srft_ratio",
               "gaussian_ratio",
               "srft_max_angle",
               "gaussian_max_angle"};
  for (const Shape& s : cfg.shapes) {
    for (Spectrum spec : cfg.spectra) {
      for (std::size_t r : cfg.ranks) {
        for (std::uint64_t seed : cfg.seeds) {
          const std::vector<double> sigma = spectrum_values(spec, std::min(s.rows, s.cols), r);
          const DenseMatrix g = matrix_with_spectrum(s.rows, s.cols, sigma, derive_seed(seed, hash_name("matrix")));
          const double optimal = optimal_residual(sigma, r);
          const Side side = default_side(s.rows, s.cols);
          const ProjectionBasis exact = svd_basis(g, r, side);
          Cell svd_res, srft_res, gauss_res, srft_ratio, gauss_ratio, srft_angle, gauss_angle;
          if (detail::has(cfg.methods, "svd")) svd_res = subspace_residual(g, exact);
          const std::uint64_t sketch_seed = derive_seed(seed, hash_name("sketch"));
          if (detail::has(cfg.methods, "srft")) {
            const ProjectionBasis b = srft_basis(g, r, cfg.oversample, cfg.mixing, sketch_seed, side);
            const double res = subspace_residual(g, b);
            srft_res = res;
            srft_ratio = detail::ratio_cell(res, optimal);
            srft_angle = principal_angles(exact, b).back();
          }
          if (detail::has(cfg.methods, "gaussian")) {
            const ProjectionBasis b = gaussian_basis(g, r, cfg.oversample, sketch_seed, side);
            const double res = subspace_residual(g, b);
            gauss_res = res;
            gauss_ratio = detail::ratio_cell(res, optimal);
            gauss_angle = principal_angles(exact, b).back();
          }
          t.add_row({cell(s.rows), cell(s.cols), cell(r), cell(to_string(spec)), Cell(seed), cell(optimal), svd_res,
                     srft_res, gauss_res, srft_ratio, gauss_ratio, srft_angle, gauss_angle});
        }
      }
    }
  }
  t.notes.push_back("ratios are empty where the optimal residual is zero");
  return t;
}

inline toy::TrainConfig train_config_for(const RunConfig& cfg, std::size_t rank, std::uint64_t seed) {
  toy::TrainConfig tc = cfg.train;
  tc.rank = rank;
  tc.seed = seed;
  tc.oversample = cfg.oversample;
  tc.mixing = cfg.mixing;
  tc.refresh_interval = cfg.refresh_interval;
  return tc;
}

// Per-step loss trace for every (rank, seed).
inline Table train_toy_command(const RunConfig& cfg) {
  Table t;
  t.columns = {"rank", "seed", "step", "loss", "lr", "wall_ns"};
  for (std::size_t r : cfg.ranks) {
    for (std::uint64_t seed : cfg.seeds) {
      const toy::TrainTrace trace = toy::train_toy(train_config_for(cfg, r, seed));
      for (const auto& st : trace.steps) {
        t.add_row({cell(r), Cell(seed), cell(st.step), cell(st.loss), cell(st.lr), Cell(st.wall_ns)});
      }
      const std::string key = "rank" + std::to_string(r) + ".seed" + std::to_string(seed);
      t.summary.emplace_back(key + ".initial_loss", trace.initial_loss);
      t.summary.emplace_back(key + ".final_loss", trace.final_loss);
      t.summary.emplace_back(key + ".state_scalars", Cell(trace.state_scalars()));
      t.summary.emplace_back(key + ".full_state_scalars", Cell(trace.full_state_scalars()));
      if (trace.diverged) {
        t.numerical_failure = true;
        t.notes.push_back(key + " diverged: " + trace.failure);
      }
    }
  }
  return t;
}

// Final loss, per-epoch time and optimizer memory across ranks.
inline Table ablate_rank(const RunConfig& cfg) {
  Table t;
  t.columns = {"rank",         "seed",          "optimizer",          "initial_loss",       "final_loss",
               "mean_epoch_ns", "median_epoch_ns", "total_ns",        "state_scalars",      "full_state_scalars",
               "reduction_fraction", "diverged"};
  for (std::size_t r : cfg.ranks) {
    for (std::uint64_t seed : cfg.seeds) {
      const toy::TrainTrace trace = toy::train_toy(train_config_for(cfg, r, seed));
      std::vector<double> epochs;
      double sum = 0.0;
      for (const auto& st : trace.steps) {
        epochs.push_back(static_cast<double>(st.wall_ns));
        sum += static_cast<double>(st.wall_ns);
      }
      std::sort(epochs.begin(), epochs.end());
      const double mean = epochs.empty() ? 0.0 : sum / static_cast<double>(epochs.size());
      const double median = epochs.empty() ? 0.0 : quantile(epochs, 0.5);
      const double reduction =
          1.0 - static_cast<double>(trace.state_scalars()) / static_cast<double>(trace.full_state_scalars());
      t.add_row({cell(r), Cell(seed), cell(toy::to_string(cfg.train.optimizer)), cell(trace.initial_loss),
                 cell(trace.final_loss), cell(mean), cell(median), Cell(trace.total_ns),
                 Cell(trace.state_scalars()), Cell(trace.full_state_scalars()), cell(reduction),
                 cell(trace.diverged)});
      if (trace.diverged) {
        t.numerical_failure = true;
        t.notes.push_back("rank " + std::to_string(r) + " seed " + std::to_string(seed) +
                          " diverged: " + trace.failure);
      }
    }
  }
  t.notes.push_back("one epoch is one full-batch optimizer step");
  return t;
}

// Optimizer-state scalars per layer shape and rank, plus one total row per rank.
inline Table memory_report(const RunConfig& cfg) {
  Table t;
  t.columns = {"r", "layer", "m", "n", "side", "full_scalars", "projected_scalars", "reduction_fraction"};
  for (std::size_t r : cfg.ranks) {
    std::uint64_t full = 0, projected = 0;
    for (std::size_t i = 0; i < cfg.shapes.size(); ++i) {
      const Shape& s = cfg.shapes[i];
      const MemoryFootprint f = memory_footprint(s.rows, s.cols, r, cfg.store_basis);
      full += f.full_scalars;
      projected += f.projected_scalars;
      t.add_row({cell(r), cell("layer" + std::to_string(i)), cell(s.rows), cell(s.cols), cell(to_string(f.side)),
                 Cell(f.full_scalars), Cell(f.projected_scalars), cell(f.reduction_fraction)});
    }
    const double reduction = 1.0 - static_cast<double>(projected) / static_cast<double>(full);
    t.add_row({cell(r), cell("total"), std::monostate{}, std::monostate{}, std::monostate{}, Cell(full),
               Cell(projected), cell(reduction)});
  }
  if (cfg.store_basis) t.notes.push_back("projected counts include the stored basis");
  return t;
}

inline Table run_command(const RunConfig& cfg) {
  validate(cfg);
  switch (cfg.command) {
    case Command::BenchProjection: return bench_projection(cfg);
    case Command::BenchSubspace: return bench_subspace(cfg);
    case Command::TrainToy: return train_toy_command(cfg);
    case Command::AblateRank: return ablate_rank(cfg);
    case Command::MemoryReport: return memory_report(cfg);
  }
  throw ConfigError("unknown command");
}

}  // namespace lograd::bench
