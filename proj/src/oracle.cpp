#include "pasa/oracle.hpp"

#include <cmath>
#include <vector>

namespace pasa {

AttentionInstance AttentionInstance::make(Matrix queries, Matrix keys, Matrix values, std::optional<double> scale) {
  AttentionInstance inst;
  const double d = static_cast<double>(queries.cols());
  inst.scale = scale.value_or(d > 0 ? 1.0 / std::sqrt(d) : 1.0);
  inst.queries = std::move(queries);
  inst.keys = std::move(keys);
  inst.values = std::move(values);
  inst.validate();
  return inst;
}

void AttentionInstance::validate() const {
  require(seq_len() > 0 && head_dim() > 0, "instance: empty Q");
  require(queries.same_shape(keys) && queries.same_shape(values), "instance: Q, K, V shapes differ");
  require(queries.all_finite() && keys.all_finite() && values.all_finite(), "instance: non-finite entries");
  require(std::isfinite(scale) && scale > 0.0, "instance: scale must be positive");
}

void AttentionInstance::validate(std::size_t block_size) const {
  validate();
  require(block_size > 0 && seq_len() % block_size == 0, "instance: sequence length not a multiple of block size");
}

Matrix dense_attention(const AttentionInstance& inst) {
  inst.validate();
  Matrix logits = matmul(inst.queries, transpose(inst.keys));
  logits *= inst.scale;
  return matmul(stable_row_softmax(logits), inst.values);
}

namespace {

const Matrix* correction_for(const BlockStatistics& stats, CompensationMode mode, std::size_t block) {
  switch (mode) {
    case CompensationMode::kFirstOrderGlobal:
      return &stats.H_global;
    case CompensationMode::kFirstOrderGrouped:
      return &stats.H_grouped[stats.group_of[block]];
    case CompensationMode::kFirstOrderPerBlock:
      return &stats.H[block];
    default:
      return nullptr;
  }
}

}  // namespace

Matrix piecewise_reference(const AttentionInstance& inst, const RoutingPlan& plan, CompensationMode mode,
                           const BlockStatistics& stats) {
  inst.validate(stats.block_size);
  const std::size_t S = inst.seq_len();
  const std::size_t d = inst.head_dim();
  const std::size_t B = stats.block_size;
  const std::size_t nb = S / B;
  require(stats.num_blocks() == nb && stats.centroids.rows() == nb && stats.value_sums.rows() == nb,
          "piecewise_reference: statistics inconsistent with instance");
  require(stats.group_of.size() == nb, "piecewise_reference: grouping inconsistent with instance");
  require(plan.num_query_blocks() == nb, "piecewise_reference: plan has wrong number of query blocks");
  for (const auto& sel : plan.selected)
    for (std::size_t j : sel) require(j < nb, "piecewise_reference: selected block out of range");

  Matrix out(S, d);
  for (std::size_t t = 0; t < S; ++t) {
    const std::size_t qb = t / B;
    std::vector<bool> chosen(nb, false);
    for (std::size_t j : plan.selected[qb]) chosen[j] = true;
    auto q = inst.queries.row(t);

    std::vector<CompensatedSum> num(d);
    CompensatedSum den;
    for (std::size_t j = 0; j < nb; ++j) {
      if (chosen[j]) {
        for (std::size_t n = j * B; n < (j + 1) * B; ++n) {
          const double w = std::exp(inst.scale * dot(q, inst.keys.row(n)));
          den.add(w);
          auto v = inst.values.row(n);
          for (std::size_t c = 0; c < d; ++c) num[c].add(w * v[c]);
        }
        continue;
      }
      if (mode == CompensationMode::kHardDrop) continue;
      const double alpha = std::exp(inst.scale * dot(q, stats.centroids.row(j)));
      den.add(static_cast<double>(B) * alpha);
      auto vs = stats.value_sums.row(j);
      for (std::size_t c = 0; c < d; ++c) num[c].add(alpha * vs[c]);
      if (const Matrix* C = correction_for(stats, mode, j)) {
        for (std::size_t c = 0; c < d; ++c) {
          CompensatedSum qc;
          for (std::size_t a = 0; a < d; ++a) qc.add(q[a] * (*C)(a, c));
          num[c].add(alpha * inst.scale * qc.value());
        }
      }
    }
    const double D = den.value();
    require(D > 0.0 && std::isfinite(D), "piecewise_reference: degenerate normalization");
    for (std::size_t c = 0; c < d; ++c) out(t, c) = num[c].value() / D;
  }
  return out;
}

}  // namespace pasa
