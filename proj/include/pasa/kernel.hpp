#pragma once

#include <stdexcept>

#include "pasa/blockstats.hpp"
#include "pasa/compensation_mode.hpp"
#include "pasa/oracle.hpp"
#include "pasa/routing.hpp"

namespace pasa {

/// A query row ended with a zero denominator (HardDrop with nothing selected).
class DegenerateNormalization : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Piecewise sparse attention forward pass.
///
/// Each query row t streams over key blocks in ascending order with a single
/// running max m_t shared by exact logits and centroid logits:
///   selected block j:   sum_n exp(s q.k_n - m) v_n  /  sum_n exp(s q.k_n - m)
///   unselected block j: a (vsum_j + s q C_j)        /  B a,   a = exp(s q.kbar_j - m)
/// where C_j is absent (zeroth order), the global mean of H, the group mean,
/// or H_j itself. HardDrop skips unselected blocks. Partial sums are rescaled
/// whenever m grows.
Matrix piecewise_attention(const AttentionInstance& inst, const RoutingPlan& plan, const BlockStatistics& stats,
                           CompensationMode mode);

struct EquivalenceReport {
  /// max |grouped(single group) - global|
  double single_group_vs_global = 0.0;
  /// max |grouped(group size 1) - per-block|
  double singleton_groups_vs_per_block = 0.0;
  bool holds(double tol = 1e-12) const {
    return single_group_vs_global <= tol && singleton_groups_vs_per_block <= tol;
  }
};

/// Checks the two definitional collapses of grouped compensation.
EquivalenceReport scaled_variant_equivalences(const AttentionInstance& inst, const RoutingPlan& plan,
                                              const BlockStatistics& stats);

/// max_ij |a_ij - b_ij|
double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace pasa
