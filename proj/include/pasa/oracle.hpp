#pragma once

#include <cstddef>
#include <optional>

#include "pasa/blockstats.hpp"
#include "pasa/compensation_mode.hpp"
#include "pasa/numerics.hpp"
#include "pasa/routing.hpp"

namespace pasa {

/// Q, K, V for one head. All three are S x d.
struct AttentionInstance {
  Matrix queries;
  Matrix keys;
  Matrix values;
  double scale = 1.0;

  /// Builds an instance with scale = 1/sqrt(d) unless overridden.
  static AttentionInstance make(Matrix queries, Matrix keys, Matrix values,
                                std::optional<double> scale = std::nullopt);

  std::size_t seq_len() const { return queries.rows(); }
  std::size_t head_dim() const { return queries.cols(); }

  /// Throws InvalidInput on shape mismatch, non-finite data or scale <= 0.
  void validate() const;
  /// Also requires seq_len to be a multiple of block_size.
  void validate(std::size_t block_size) const;
};

/// softmax(scale * Q K^T) V.
Matrix dense_attention(const AttentionInstance& inst);

/// Naive evaluation of the piecewise numerator/denominator: every exponent
/// is taken unshifted and every sum is compensated. Reference for the
/// streaming kernel; deliberately shares none of its accumulation code.
Matrix piecewise_reference(const AttentionInstance& inst, const RoutingPlan& plan, CompensationMode mode,
                           const BlockStatistics& stats);

}  // namespace pasa
