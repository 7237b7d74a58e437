#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pasa/blockstats.hpp"
#include "pasa/numerics.hpp"

namespace pasa {

struct RoutingConfig {
  double epsilon = 1e-6;
  /// Noise scale as a multiple of each score row's standard deviation.
  double bias_beta = 0.1;
  std::uint64_t seed = 0;
};

/// Identifies one routing decision for replay.
struct RngContext {
  std::uint64_t seed = 0;
  std::uint64_t timestep = 0;
  std::uint64_t layer = 0;
  std::uint64_t head = 0;
  friend bool operator==(const RngContext&, const RngContext&) = default;
};

struct RoutingPlan {
  /// Per query block, ascending key-block indices computed exactly.
  std::vector<std::vector<std::size_t>> selected;
  Matrix scores;
  Matrix biased_scores;
  std::size_t k_used = 0;
  RngContext rng_context;

  std::size_t num_query_blocks() const { return selected.size(); }
  std::size_t num_key_blocks() const { return scores.cols(); }
  /// Membership mask of query block i over key blocks.
  std::vector<bool> selected_mask(std::size_t query_block) const;
};

/// s_ij = scale * mean(Q_i) . centroid_j + log(het_norm_j + eps). The
/// row softmax that would normally wrap this is omitted: it cannot change
/// any row's ranking.
Matrix block_scores(const Matrix& queries, const BlockPartition& part, const BlockStatistics& stats,
                    const RoutingConfig& cfg, double scale);

/// Adds beta * std(row i) * Gumbel(seed, timestep, layer, head, i, j) to each
/// score. beta == 0 returns the input unchanged.
Matrix apply_bias(const Matrix& scores, const RoutingConfig& cfg, const RngContext& ctx);

/// Top-k per row, ties toward the lower block index. k is clamped to N_B.
/// The returned plan carries biased_scores; scores/rng_context are left for
/// the caller (see route()).
RoutingPlan select_topk(const Matrix& biased, std::size_t k);

/// k = clamp(round(rho * num_blocks), 1, num_blocks).
std::size_t density_to_k(double rho, std::size_t num_blocks);

/// Scores, perturbs, and selects in one call; fills every plan field.
RoutingPlan route(const Matrix& queries, const BlockPartition& part, const BlockStatistics& stats,
                  const RoutingConfig& cfg, double scale, std::size_t k, const RngContext& ctx);

}  // namespace pasa
