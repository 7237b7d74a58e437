#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "pasa/numerics.hpp"

namespace pasa {

struct TokenRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  friend bool operator==(const TokenRange&, const TokenRange&) = default;
};

struct BlockPartition {
  std::size_t block_size = 0;
  std::vector<TokenRange> ranges;

  std::size_t num_blocks() const { return ranges.size(); }
  std::size_t seq_len() const { return block_size * ranges.size(); }
};

/// Contiguous equal blocks covering [0, seq_len). The caller pads first;
/// a non-divisible length is rejected.
BlockPartition partition(std::size_t seq_len, std::size_t block_size);

/// Per-block key centroids (N_B x d), one row per block.
Matrix block_centroids(const Matrix& x, const BlockPartition& part);

/// Per-block column sums (N_B x d).
Matrix block_sums(const Matrix& x, const BlockPartition& part);

/// H_j = sum_n (K_{j,n} - centroid_j)^T V_{j,n}; one d_k x d_v matrix per block.
std::vector<Matrix> compute_block_H(const Matrix& keys, const Matrix& values, const BlockPartition& part);

struct GroupedMeans {
  Matrix global;
  std::vector<Matrix> grouped;
  std::vector<std::size_t> group_of;
};

/// Global mean of H and means over contiguous runs of `group_size` blocks.
/// The final group is shorter when group_size does not divide N_B.
GroupedMeans global_and_grouped_means(std::span<const Matrix> H, std::size_t group_size);

/// Per-block ||H_j - mean||_F. The stabilizer epsilon is only validated here;
/// routing adds it inside its log.
std::vector<double> heterogeneity_norms(std::span<const Matrix> H, const Matrix& mean, double epsilon);

struct BlockStatistics {
  std::size_t block_size = 0;
  std::size_t group_size = 0;
  Matrix centroids;
  Matrix value_sums;
  std::vector<Matrix> H;
  Matrix H_global;
  std::vector<Matrix> H_grouped;
  std::vector<std::size_t> group_of;
  std::vector<double> het_norms;

  std::size_t num_blocks() const { return H.size(); }
  std::size_t num_groups() const { return H_grouped.size(); }
};

BlockStatistics compute_block_statistics(const Matrix& keys, const Matrix& values, const BlockPartition& part,
                                         std::size_t group_size, double epsilon);

/// Same statistics with the grouping recomputed at a different group size.
BlockStatistics regroup(BlockStatistics stats, std::size_t group_size);

}  // namespace pasa
