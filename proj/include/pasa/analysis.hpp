#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pasa/compensation_mode.hpp"
#include "pasa/numerics.hpp"
#include "pasa/routing.hpp"

namespace pasa {

struct FidelityReport {
  double rel_frobenius = 0.0;
  double max_row_l2 = 0.0;
  CompensationMode mode = CompensationMode::kFirstOrderGrouped;
  double sparsity = 0.0;
  std::uint64_t seed = 0;
};

/// Relative Frobenius error and worst row L2 error of `sparse` against `dense`.
/// Only the two error fields are filled.
FidelityReport fidelity(const Matrix& sparse, const Matrix& dense);

inline constexpr double kBoundTolerance = 1e-9;

struct BoundCheck {
  double residual_norm = 0.0;
  double bound = 0.0;
  bool satisfied = true;
  double margin = 0.0;
};

/// R = sum_{j in U} alpha_j (H_j - Hgroup_{g(j)}),
/// M = max_{j in U} ||H_j - Hgroup_{g(j)}||_F, and checks ||R||_F <= M sum alpha.
BoundCheck lemma1_check(std::span<const Matrix> H, std::span<const Matrix> group_means,
                        std::span<const std::size_t> group_of, std::span<const double> alphas,
                        std::span<const std::size_t> unselected);

struct Proposition1Result {
  /// sum over group of ||H_j - group mean||_F^2
  std::vector<double> lhs;
  /// sum over group of ||H_j - global mean||_F^2
  std::vector<double> rhs;
  bool holds = true;
};

/// Group means are recomputed here from `group_of`.
Proposition1Result proposition1_check(std::span<const Matrix> H, std::span<const std::size_t> group_of,
                                      const Matrix& global_mean);

/// First block j (if any) with ||H_j - Hgroup_{g(j)}||_F > ||H_j - global||_F.
std::optional<std::size_t> find_group_deviation_excess(std::span<const Matrix> H,
                                                       std::span<const std::size_t> group_of,
                                                       const Matrix& global_mean);

struct RemarkSearchResult {
  bool found = false;
  std::size_t draws_used = 0;
  std::size_t block = 0;
  double group_deviation = 0.0;
  double global_deviation = 0.0;
};

/// Draws random H-sets (N_B blocks of d x d, contiguous groups of `group_size`)
/// until some block is farther from its group mean than from the global mean.
RemarkSearchResult remark_counterexample_search(std::size_t max_draws, std::uint64_t seed, std::size_t num_blocks = 8,
                                                std::size_t dim = 2, std::size_t group_size = 2);

struct SelectionStats {
  std::vector<std::size_t> counts;
  std::vector<std::size_t> sorted_counts;  ///< descending
  double entropy = 0.0;                    ///< natural log
  double mean_jaccard = 1.0;               ///< consecutive plans, per query block
};

/// Plans are taken as a time-ordered sequence sharing N_B.
SelectionStats selection_stats(std::span<const RoutingPlan> plans);

double shannon_entropy(std::span<const std::size_t> counts);
double jaccard(std::span<const std::size_t> a, std::span<const std::size_t> b);

}  // namespace pasa
