#include "pasa/blockstats.hpp"

#include <algorithm>

namespace pasa {

BlockPartition partition(std::size_t seq_len, std::size_t block_size) {
  require(block_size > 0, "partition: block size must be positive");
  require(seq_len > 0, "partition: empty sequence");
  require(seq_len % block_size == 0, "partition: sequence length not divisible by block size");
  BlockPartition part;
  part.block_size = block_size;
  for (std::size_t b = 0; b < seq_len; b += block_size) part.ranges.push_back({b, b + block_size});
  return part;
}

Matrix block_sums(const Matrix& x, const BlockPartition& part) {
  require(x.rows() == part.seq_len(), "block_sums: row count differs from partition length");
  Matrix out(part.num_blocks(), x.cols());
  for (std::size_t j = 0; j < part.num_blocks(); ++j) {
    auto acc = out.row(j);
    for (std::size_t n = part.ranges[j].begin; n < part.ranges[j].end; ++n) {
      auto r = x.row(n);
      for (std::size_t c = 0; c < x.cols(); ++c) acc[c] += r[c];
    }
  }
  return out;
}

// Running mean: a block of identical rows yields that row bit-for-bit, so H_j is exactly zero.
Matrix block_centroids(const Matrix& x, const BlockPartition& part) {
  require(x.rows() == part.seq_len(), "block_centroids: row count differs from partition length");
  Matrix out(part.num_blocks(), x.cols());
  for (std::size_t j = 0; j < part.num_blocks(); ++j) {
    auto m = out.row(j);
    double n = 0.0;
    for (std::size_t t = part.ranges[j].begin; t < part.ranges[j].end; ++t) {
      n += 1.0;
      auto r = x.row(t);
      for (std::size_t a = 0; a < x.cols(); ++a) m[a] += (r[a] - m[a]) / n;
    }
  }
  return out;
}

std::vector<Matrix> compute_block_H(const Matrix& keys, const Matrix& values, const BlockPartition& part) {
  require(keys.rows() == part.seq_len() && values.rows() == part.seq_len(),
          "compute_block_H: K/V rows differ from partition length");
  const Matrix centroids = block_centroids(keys, part);
  const std::size_t dk = keys.cols();
  const std::size_t dv = values.cols();
  std::vector<Matrix> H;
  H.reserve(part.num_blocks());
  std::vector<double> dev(dk);
  for (std::size_t j = 0; j < part.num_blocks(); ++j) {
    Matrix h(dk, dv);
    auto centroid = centroids.row(j);
    for (std::size_t n = part.ranges[j].begin; n < part.ranges[j].end; ++n) {
      auto k = keys.row(n);
      auto v = values.row(n);
      for (std::size_t a = 0; a < dk; ++a) dev[a] = k[a] - centroid[a];
      for (std::size_t a = 0; a < dk; ++a) {
        auto hr = h.row(a);
        for (std::size_t b = 0; b < dv; ++b) hr[b] += dev[a] * v[b];
      }
    }
    H.push_back(std::move(h));
  }
  return H;
}

GroupedMeans global_and_grouped_means(std::span<const Matrix> H, std::size_t group_size) {
  require(!H.empty(), "global_and_grouped_means: empty H list");
  require(group_size >= 1, "global_and_grouped_means: group size must be >= 1");
  const std::size_t nb = H.size();
  GroupedMeans out;
  out.global = Matrix(H[0].rows(), H[0].cols());
  for (const Matrix& h : H) out.global += h;
  out.global *= 1.0 / static_cast<double>(nb);

  out.group_of.resize(nb);
  for (std::size_t start = 0; start < nb; start += group_size) {
    const std::size_t stop = std::min(nb, start + group_size);
    Matrix mean(H[0].rows(), H[0].cols());
    for (std::size_t j = start; j < stop; ++j) {
      mean += H[j];
      out.group_of[j] = out.grouped.size();
    }
    mean *= 1.0 / static_cast<double>(stop - start);
    out.grouped.push_back(std::move(mean));
  }
  return out;
}

std::vector<double> heterogeneity_norms(std::span<const Matrix> H, const Matrix& mean, double epsilon) {
  require(epsilon > 0.0, "heterogeneity_norms: epsilon must be positive");
  std::vector<double> out;
  out.reserve(H.size());
  for (const Matrix& h : H) out.push_back(frobenius_norm(h - mean));
  return out;
}

BlockStatistics compute_block_statistics(const Matrix& keys, const Matrix& values, const BlockPartition& part,
                                         std::size_t group_size, double epsilon) {
  BlockStatistics s;
  s.block_size = part.block_size;
  s.centroids = block_centroids(keys, part);
  s.value_sums = block_sums(values, part);
  s.H = compute_block_H(keys, values, part);
  s = regroup(std::move(s), group_size);
  s.het_norms = heterogeneity_norms(s.H, s.H_global, epsilon);
  return s;
}

BlockStatistics regroup(BlockStatistics stats, std::size_t group_size) {
  GroupedMeans means = global_and_grouped_means(stats.H, group_size);
  stats.group_size = group_size;
  stats.H_global = std::move(means.global);
  stats.H_grouped = std::move(means.grouped);
  stats.group_of = std::move(means.group_of);
  return stats;
}

}  // namespace pasa
