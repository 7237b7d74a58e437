#include "pasa/routing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pasa/counter_rng.hpp"

namespace pasa {

std::vector<bool> RoutingPlan::selected_mask(std::size_t query_block) const {
  std::vector<bool> mask(num_key_blocks(), false);
  for (std::size_t j : selected.at(query_block)) mask.at(j) = true;
  return mask;
}

Matrix block_scores(const Matrix& queries, const BlockPartition& part, const BlockStatistics& stats,
                    const RoutingConfig& cfg, double scale) {
  require(cfg.epsilon > 0.0, "block_scores: epsilon must be positive");
  require(stats.num_blocks() == part.num_blocks() && stats.het_norms.size() == part.num_blocks(),
          "block_scores: statistics do not match partition");
  require(stats.centroids.cols() == queries.cols(), "block_scores: query/key width mismatch");
  const Matrix query_centroids = block_centroids(queries, part);
  const std::size_t nb = part.num_blocks();
  std::vector<double> prior(nb);
  for (std::size_t j = 0; j < nb; ++j) prior[j] = std::log(stats.het_norms[j] + cfg.epsilon);

  Matrix scores(query_centroids.rows(), nb);
  for (std::size_t i = 0; i < query_centroids.rows(); ++i)
    for (std::size_t j = 0; j < nb; ++j)
      scores(i, j) = scale * dot(query_centroids.row(i), stats.centroids.row(j)) + prior[j];
  return scores;
}

Matrix apply_bias(const Matrix& scores, const RoutingConfig& cfg, const RngContext& ctx) {
  require(cfg.bias_beta >= 0.0, "apply_bias: beta must be non-negative");
  if (cfg.bias_beta == 0.0) return scores;
  Matrix out = scores;
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    auto row = scores.row(i);
    const double n = static_cast<double>(row.size());
    const double mean = std::accumulate(row.begin(), row.end(), 0.0) / n;
    double var = 0.0;
    for (double x : row) var += (x - mean) * (x - mean);
    const double sigma = std::sqrt(var / n);
    for (std::size_t j = 0; j < row.size(); ++j) {
      CounterStream draw(ctx.seed, {static_cast<std::uint64_t>(StreamDomain::kRoutingBias), ctx.timestep,
                                    ctx.layer, ctx.head, i, j});
      out(i, j) += cfg.bias_beta * sigma * draw.gumbel();
    }
  }
  return out;
}

RoutingPlan select_topk(const Matrix& biased, std::size_t k) {
  const std::size_t nb = biased.cols();
  RoutingPlan plan;
  plan.k_used = std::min(k, nb);
  plan.biased_scores = biased;
  plan.selected.resize(biased.rows());
  std::vector<std::size_t> order(nb);
  for (std::size_t i = 0; i < biased.rows(); ++i) {
    auto row = biased.row(i);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(plan.k_used), order.end(),
                      [&](std::size_t a, std::size_t b) { return row[a] > row[b] || (row[a] == row[b] && a < b); });
    std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(plan.k_used));
    std::sort(chosen.begin(), chosen.end());
    plan.selected[i] = std::move(chosen);
  }
  return plan;
}

std::size_t density_to_k(double rho, std::size_t num_blocks) {
  require(rho >= 0.0, "density_to_k: negative density");
  require(num_blocks > 0, "density_to_k: no blocks");
  const double raw = std::round(rho * static_cast<double>(num_blocks));
  return static_cast<std::size_t>(std::clamp(raw, 1.0, static_cast<double>(num_blocks)));
}

RoutingPlan route(const Matrix& queries, const BlockPartition& part, const BlockStatistics& stats,
                  const RoutingConfig& cfg, double scale, std::size_t k, const RngContext& ctx) {
  Matrix scores = block_scores(queries, part, stats, cfg, scale);
  RoutingPlan plan = select_topk(apply_bias(scores, cfg, ctx), k);
  plan.scores = std::move(scores);
  plan.rng_context = ctx;
  return plan;
}

}  // namespace pasa
