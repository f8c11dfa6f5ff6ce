#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lograd/adamw.hpp"
#include "lograd/errors.hpp"
#include "lograd/matrix.hpp"
#include "lograd/random.hpp"
#include "lograd/sketch.hpp"
#include "lograd/subspace.hpp"

namespace lograd {

enum class ProjectionMethod { ExactSVD, SRFT };

inline const char* to_string(ProjectionMethod m) {
  return m == ProjectionMethod::ExactSVD ? "svd" : "srft";
}

struct GaloreConfig {
  std::size_t rank = 128;
  std::size_t refresh_interval = 50;
  AdamHyper adam;
  double scale = 1.0;
  ProjectionMethod method = ProjectionMethod::SRFT;
  std::size_t oversample = 0;
  Mixing mixing = Mixing::UnitaryDCT;
  std::uint64_t seed = 0;
  bool reset_moments_on_refresh = false;
  // Fresh SRFT randomness at every refresh; false reuses one operator seed.
  bool redraw_operator = true;
  // Unset: project the smaller dimension (Left when rows <= cols).
  std::optional<Side> side;
};

inline Side default_side(std::size_t rows, std::size_t cols) {
  return rows <= cols ? Side::Left : Side::Right;
}

// Per-parameter low-rank optimizer state. Moments live in projected
// coordinates: r x n for a Left basis, m x r for a Right basis.
struct GaloreParamState {
  std::string name = "param";
  GaloreConfig config;
  std::optional<ProjectionBasis> basis;
  DenseMatrix moment1;
  DenseMatrix moment2;
  std::size_t step = 0;
  // birth_step of every basis computed so far, in order.
  std::vector<std::size_t> refresh_steps;
  // A pinned basis is never recomputed.
  bool basis_pinned = false;

  GaloreParamState() = default;
  GaloreParamState(std::string param_name, GaloreConfig cfg)
      : name(std::move(param_name)), config(std::move(cfg)) {}

  void pin_basis(ProjectionBasis b) {
    if (b.rank != config.rank || b.basis.cols() != config.rank) {
      throw DimensionError("pin_basis: basis rank does not match configured rank");
    }
    basis = std::move(b);
    basis_pinned = true;
  }
};

// Seed of the SRFT operator used at a given refresh.
inline std::uint64_t refresh_seed(const GaloreConfig& cfg, std::size_t refresh_index) {
  return cfg.redraw_operator ? derive_seed(cfg.seed, refresh_index) : cfg.seed;
}

inline ProjectionBasis compute_basis(const GaloreConfig& cfg, const DenseMatrix& grad, Side side,
                                     std::size_t refresh_index) {
  if (cfg.method == ProjectionMethod::ExactSVD) return svd_basis(grad, cfg.rank, side);
  return srft_basis(grad, cfg.rank, cfg.oversample, cfg.mixing, refresh_seed(cfg, refresh_index), side);
}

// One projected AdamW step. Refreshes the basis from `grad` when
// step % refresh_interval == 0, projects, runs the Adam rule on the
// compressed gradient, maps back and updates `weight` in place.
// Returns the applied direction scale * P rho(P^T G) (before the lr factor).
inline DenseMatrix galore_step(GaloreParamState& state, DenseMatrix& weight, const DenseMatrix& grad,
                               double lr, double weight_decay) {
  const GaloreConfig& cfg = state.config;
  require_same_shape(weight, grad, ("galore_step '" + state.name + "'").c_str());
  if (cfg.refresh_interval == 0) throw InvalidArgument("galore_step: refresh_interval must be positive");
  if (cfg.rank == 0 || cfg.rank > std::min(grad.rows(), grad.cols())) {
    throw DimensionError("galore_step '" + state.name + "': rank " + std::to_string(cfg.rank) +
                         " does not fit " + shape_string(grad.rows(), grad.cols()));
  }
  if (!grad.all_finite()) throw NumericalError("galore_step: non-finite gradient for '" + state.name + "'");

  const Side side = cfg.side.value_or(default_side(grad.rows(), grad.cols()));
  if (state.basis_pinned) {
    const std::size_t ambient = state.basis->side == Side::Left ? grad.rows() : grad.cols();
    if (state.basis->basis.rows() != ambient) {
      throw DimensionError("galore_step '" + state.name + "': pinned basis does not fit gradient");
    }
  } else if (state.step % cfg.refresh_interval == 0) {
    ProjectionBasis fresh = compute_basis(cfg, grad, side, state.step / cfg.refresh_interval);
    fresh.birth_step = state.step;
    state.basis = std::move(fresh);
    state.refresh_steps.push_back(state.step);
    if (cfg.reset_moments_on_refresh) {
      state.moment1.fill(0.0);
      state.moment2.fill(0.0);
    }
  } else if (!state.basis) {
    throw InvalidArgument("galore_step '" + state.name + "': no basis");
  }

  const ProjectionBasis& p = *state.basis;
  const DenseMatrix reduced = project(p, grad);
  if (!state.moment1.same_shape(reduced)) {
    state.moment1 = DenseMatrix(reduced.rows(), reduced.cols());
    state.moment2 = DenseMatrix(reduced.rows(), reduced.cols());
  }
  DenseMatrix normalized(reduced.rows(), reduced.cols());
  detail::adam_direction(state.moment1, state.moment2, reduced, cfg.adam, state.step + 1, normalized);

  DenseMatrix direction = expand(p, normalized);
  if (cfg.scale != 1.0) {
    for (double& v : direction.data()) v *= cfg.scale;
  }
  auto w = weight.data();
  auto d = direction.data();
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = w[i] - lr * d[i] - lr * weight_decay * w[i];
  ++state.step;
  return direction;
}

}  // namespace lograd
