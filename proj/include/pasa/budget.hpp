#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "pasa/numerics.hpp"

namespace pasa {

/// One velocity prediction per denoising step, all of the same shape.
struct VelocityTrajectory {
  std::vector<Matrix> tensors;

  std::size_t timesteps() const { return tensors.size(); }
  void validate() const;
};

/// Per-step mean L1 change. Entry i = mean|v[i+1] - v[i]| and belongs to step i+1.
using L1Curve = std::vector<double>;

struct ClipEvent {
  std::size_t step = 0;
  double pre_clip = 0.0;
};

struct BudgetSchedule {
  std::size_t total_steps = 0;
  std::size_t dense_prefix = 0;
  std::vector<std::size_t> sparse_steps;
  double baseline_density = 0.0;
  std::vector<double> alphas;
  std::vector<double> densities;
  std::vector<ClipEvent> clip_events;

  bool is_dense(std::size_t step) const { return step < dense_prefix; }
  /// Density for a sparse step; 1 for steps in the dense prefix.
  double density_at(std::size_t step) const;
};

inline constexpr double kDefaultDenseFraction = 0.20;

L1Curve l1_curve(const VelocityTrajectory& traj);

L1Curve average_curves(std::span<const L1Curve> curves);

/// Number of leading steps that run dense attention: round(dense_frac * T).
std::size_t dense_prefix_steps(std::size_t total_steps, double dense_frac);

/// Picks the l-values of the sparse steps out of a full-trajectory curve.
/// With an empty dense prefix, step 0 has no predecessor and reuses step 1's value.
std::vector<double> restrict_to_sparse(const L1Curve& curve, std::size_t total_steps, double dense_frac);

/// alpha_t = l_t / mean(l), rho_t = rho * alpha_t; values above 1 are clipped
/// to 1 and logged in clip_events without redistributing the excess.
BudgetSchedule build_schedule(std::span<const double> sparse_curve, double rho, std::size_t total_steps,
                              double dense_frac = kDefaultDenseFraction);

/// Synthetic trajectory with a fast-moving start, a flat middle and a
/// resurgence over the last five steps.
VelocityTrajectory synth_three_phase(std::size_t total_steps, std::uint64_t seed);

/// Averaged curve over `prompts` synthetic trajectories (seeds seed..seed+prompts-1).
L1Curve synthetic_calibration_curve(std::size_t total_steps, std::size_t prompts, std::uint64_t seed);

// File interfaces.

/// CSV with header `step,l1`. Rows may come in any order; steps must be
/// exactly 1..T-1. Returns the curve indexed as in L1Curve.
L1Curve read_calibration_csv(const std::filesystem::path& path);
void write_calibration_csv(const std::filesystem::path& path, const L1Curve& curve);

/// CSV with header `step,<values...>`, one flattened tensor per row.
VelocityTrajectory read_trajectory_csv(const std::filesystem::path& path);
void write_trajectory_csv(const std::filesystem::path& path, const VelocityTrajectory& traj);

nlohmann::ordered_json schedule_to_json(const BudgetSchedule& schedule);

}  // namespace pasa
