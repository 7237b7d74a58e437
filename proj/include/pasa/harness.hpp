#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pasa/budget.hpp"
#include "pasa/compensation_mode.hpp"
#include "pasa/oracle.hpp"

namespace pasa {

struct ExperimentConfig {
  std::size_t seq_len = 1024;
  std::size_t head_dim = 32;
  std::size_t block_size = 64;
  std::size_t group_size = 32;
  double rho = 0.15;
  double bias_beta = 0.1;
  double epsilon = 1e-6;
  double dense_frac = kDefaultDenseFraction;
  std::size_t total_steps = 50;
  std::vector<CompensationMode> modes = {CompensationMode::kFirstOrderGrouped};
  std::uint64_t seed = 0;
  std::size_t num_trials = 4;
  double correlation_strength = 0.5;
  /// Per-step perturbation magnitude between consecutive sparse steps.
  double drift_rate = 0.01;
  std::size_t heads = 1;
  /// false reproduces the uniform-density schedule.
  bool dynamic_budget = true;
  std::size_t calibration_prompts = 10;
  /// Optional `step,l1` CSV replacing the synthetic calibration curve.
  std::string calibration_file;
  std::size_t workers = 1;

  /// seq_len rounded up to a multiple of block_size.
  std::size_t padded_seq_len() const;
  void validate() const;
};

nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);

struct InstanceContext {
  std::uint64_t trial = 0;
  std::uint64_t head = 0;
};

/// Seeded synthetic Q, K, V of size padded_seq_len x head_dim. Keys in a block
/// are a shared anchor plus independent deviations; values carry
/// correlation_strength times a block-local linear map of those deviations.
/// The maps vary smoothly along the block index, so neighbouring blocks have
/// similar first-order statistics.
AttentionInstance generate_instance(const ExperimentConfig& cfg, const InstanceContext& ctx);

/// Instance 0 is generate_instance(cfg, ctx); each later one adds
/// drift_rate * N(0,1) to every entry of the previous Q, K and V.
std::vector<AttentionInstance> generate_drifting_sequence(const ExperimentConfig& cfg, const InstanceContext& ctx,
                                                          std::size_t num_steps, double drift_rate);

/// Schedule used by run_experiment (synthetic calibration unless a curve file is configured).
BudgetSchedule experiment_schedule(const ExperimentConfig& cfg);

struct ExperimentResult {
  nlohmann::ordered_json report;
  bool invariants_ok = true;
};

/// Routes, computes sparse and dense outputs, and checks bounds for every trial
/// and sparse step. Trials run on cfg.workers threads; the report does not
/// depend on the worker count.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct VerifyOptions {
  std::uint64_t seed = 0;
  std::size_t draws = 100;
};

/// Randomized residual-bound, sum-of-squares, mode-collapse and streaming-vs-naive checks.
ExperimentResult run_verification(const VerifyOptions& opts);

struct BenchRow {
  std::size_t seq_len = 0;
  std::string mode;
  double mean_ms = 0.0;
  double min_ms = 0.0;
  double rel_frobenius = 0.0;
};

std::vector<BenchRow> run_bench(const ExperimentConfig& cfg, const std::vector<std::size_t>& seq_lens,
                                std::size_t repeats);
std::string bench_to_csv(const std::vector<BenchRow>& rows);

}  // namespace pasa
