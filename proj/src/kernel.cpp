#include "pasa/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace pasa {

std::string_view to_string(CompensationMode mode) {
  switch (mode) {
    case CompensationMode::kHardDrop:
      return "hard_drop";
    case CompensationMode::kZerothOrder:
      return "zeroth_order";
    case CompensationMode::kFirstOrderGlobal:
      return "first_order_global";
    case CompensationMode::kFirstOrderGrouped:
      return "first_order_grouped";
    case CompensationMode::kFirstOrderPerBlock:
      return "first_order_per_block";
  }
  return "unknown";
}

std::optional<CompensationMode> parse_mode(std::string_view name) {
  for (CompensationMode m : kAllModes)
    if (to_string(m) == name) return m;
  if (name == "pisa") return CompensationMode::kFirstOrderGlobal;
  if (name == "pasa") return CompensationMode::kFirstOrderGrouped;
  return std::nullopt;
}

namespace {

// Online-softmax state for one query row.
struct RowAccumulator {
  double max = -std::numeric_limits<double>::infinity();
  double den = 0.0;
  std::vector<double> num;

  explicit RowAccumulator(std::size_t d) : num(d, 0.0) {}

  // Raises the running max to at least `m`, rescaling partial sums.
  void raise_max(double m) {
    if (m <= max) return;
    if (den != 0.0) {
      const double f = std::exp(max - m);
      den *= f;
      for (double& x : num) x *= f;
    }
    max = m;
  }
};

void check_consistency(const AttentionInstance& inst, const RoutingPlan& plan, const BlockStatistics& stats) {
  inst.validate(stats.block_size);
  const std::size_t nb = inst.seq_len() / stats.block_size;
  require(stats.num_blocks() == nb && stats.centroids.rows() == nb && stats.value_sums.rows() == nb &&
              stats.group_of.size() == nb,
          "piecewise_attention: statistics inconsistent with instance");
  require(stats.centroids.cols() == inst.head_dim() && stats.value_sums.cols() == inst.head_dim(),
          "piecewise_attention: statistics width differs from head dim");
  require(plan.num_query_blocks() == nb, "piecewise_attention: plan has wrong number of query blocks");
  for (const auto& sel : plan.selected)
    for (std::size_t j : sel) require(j < nb, "piecewise_attention: selected block out of range");
}

// out = scale * q C
void project(std::span<const double> q, const Matrix& C, double scale, std::vector<double>& out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t a = 0; a < C.rows(); ++a) {
    const double qa = scale * q[a];
    auto cr = C.row(a);
    for (std::size_t c = 0; c < C.cols(); ++c) out[c] += qa * cr[c];
  }
}

}  // namespace

Matrix piecewise_attention(const AttentionInstance& inst, const RoutingPlan& plan, const BlockStatistics& stats,
                           CompensationMode mode) {
  check_consistency(inst, plan, stats);
  const std::size_t S = inst.seq_len();
  const std::size_t d = inst.head_dim();
  const std::size_t B = stats.block_size;
  const std::size_t nb = S / B;
  const double Bd = static_cast<double>(B);

  Matrix out(S, d);
  std::vector<double> logits(B);
  std::vector<double> correction(d);
  // Per-row cache of scale * q C for the global and grouped modes.
  std::vector<std::vector<double>> group_projection;
  std::vector<bool> group_ready;

  for (std::size_t qb = 0; qb < nb; ++qb) {
    const std::vector<bool> chosen = plan.selected_mask(qb);
    for (std::size_t t = qb * B; t < (qb + 1) * B; ++t) {
      auto q = inst.queries.row(t);
      RowAccumulator acc(d);
      if (mode == CompensationMode::kFirstOrderGlobal) {
        group_projection.assign(1, std::vector<double>(d));
        project(q, stats.H_global, inst.scale, group_projection[0]);
      } else if (mode == CompensationMode::kFirstOrderGrouped) {
        group_projection.assign(stats.num_groups(), std::vector<double>(d));
        group_ready.assign(stats.num_groups(), false);
      }

      for (std::size_t j = 0; j < nb; ++j) {
        if (chosen[j]) {
          double block_max = -std::numeric_limits<double>::infinity();
          for (std::size_t n = 0; n < B; ++n) {
            logits[n] = inst.scale * dot(q, inst.keys.row(j * B + n));
            block_max = std::max(block_max, logits[n]);
          }
          acc.raise_max(block_max);
          for (std::size_t n = 0; n < B; ++n) {
            const double p = std::exp(logits[n] - acc.max);
            acc.den += p;
            auto v = inst.values.row(j * B + n);
            for (std::size_t c = 0; c < d; ++c) acc.num[c] += p * v[c];
          }
          continue;
        }
        if (mode == CompensationMode::kHardDrop) continue;

        const double centroid_logit = inst.scale * dot(q, stats.centroids.row(j));
        acc.raise_max(centroid_logit);
        const double alpha = std::exp(centroid_logit - acc.max);
        acc.den += Bd * alpha;
        auto vs = stats.value_sums.row(j);
        for (std::size_t c = 0; c < d; ++c) acc.num[c] += alpha * vs[c];

        const std::vector<double>* term = nullptr;
        switch (mode) {
          case CompensationMode::kFirstOrderGlobal:
            term = &group_projection[0];
            break;
          case CompensationMode::kFirstOrderGrouped: {
            const std::size_t g = stats.group_of[j];
            if (!group_ready[g]) {
              project(q, stats.H_grouped[g], inst.scale, group_projection[g]);
              group_ready[g] = true;
            }
            term = &group_projection[g];
            break;
          }
          case CompensationMode::kFirstOrderPerBlock:
            project(q, stats.H[j], inst.scale, correction);
            term = &correction;
            break;
          default:
            break;
        }
        if (term != nullptr)
          for (std::size_t c = 0; c < d; ++c) acc.num[c] += alpha * (*term)[c];
      }

      if (!(acc.den > 0.0) || !std::isfinite(acc.den))
        throw DegenerateNormalization("piecewise_attention: zero denominator for query row " + std::to_string(t));
      auto o = out.row(t);
      for (std::size_t c = 0; c < d; ++c) o[c] = acc.num[c] / acc.den;
    }
  }
  return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require(a.same_shape(b), "max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

EquivalenceReport scaled_variant_equivalences(const AttentionInstance& inst, const RoutingPlan& plan,
                                              const BlockStatistics& stats) {
  const std::size_t nb = stats.num_blocks();
  EquivalenceReport report;
  const BlockStatistics one_group = regroup(stats, nb);
  report.single_group_vs_global =
      max_abs_diff(piecewise_attention(inst, plan, one_group, CompensationMode::kFirstOrderGrouped),
                   piecewise_attention(inst, plan, one_group, CompensationMode::kFirstOrderGlobal));
  const BlockStatistics singletons = regroup(stats, 1);
  report.singleton_groups_vs_per_block =
      max_abs_diff(piecewise_attention(inst, plan, singletons, CompensationMode::kFirstOrderGrouped),
                   piecewise_attention(inst, plan, singletons, CompensationMode::kFirstOrderPerBlock));
  return report;
}

}  // namespace pasa
