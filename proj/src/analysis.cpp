#include "pasa/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "pasa/blockstats.hpp"
#include "pasa/counter_rng.hpp"

namespace pasa {

FidelityReport fidelity(const Matrix& sparse, const Matrix& dense) {
  require(sparse.same_shape(dense), "fidelity: shape mismatch");
  const double dense_norm = frobenius_norm(dense);
  require(dense_norm > 0.0, "fidelity: dense output has zero norm");
  const Matrix diff = sparse - dense;
  FidelityReport r;
  r.rel_frobenius = frobenius_norm(diff) / dense_norm;
  for (std::size_t i = 0; i < diff.rows(); ++i) r.max_row_l2 = std::max(r.max_row_l2, std::sqrt(dot(diff.row(i), diff.row(i))));
  return r;
}

BoundCheck lemma1_check(std::span<const Matrix> H, std::span<const Matrix> group_means,
                        std::span<const std::size_t> group_of, std::span<const double> alphas,
                        std::span<const std::size_t> unselected) {
  require(group_of.size() == H.size() && alphas.size() == H.size(), "lemma1_check: inconsistent sizes");
  BoundCheck check;
  if (unselected.empty()) return check;
  Matrix residual(H.front().rows(), H.front().cols());
  double max_dev = 0.0;
  double alpha_sum = 0.0;
  for (std::size_t j : unselected) {
    require(j < H.size() && group_of[j] < group_means.size(), "lemma1_check: index out of range");
    require(alphas[j] >= 0.0, "lemma1_check: negative weight");
    Matrix dev = H[j] - group_means[group_of[j]];
    max_dev = std::max(max_dev, frobenius_norm(dev));
    alpha_sum += alphas[j];
    dev *= alphas[j];
    residual += dev;
  }
  check.residual_norm = frobenius_norm(residual);
  check.bound = max_dev * alpha_sum;
  check.margin = check.bound - check.residual_norm;
  check.satisfied = check.residual_norm <= check.bound + kBoundTolerance;
  return check;
}

namespace {

double squared_frobenius(const Matrix& m) {
  const double f = frobenius_norm(m);
  return f * f;
}

std::vector<Matrix> means_by_group(std::span<const Matrix> H, std::span<const std::size_t> group_of) {
  require(group_of.size() == H.size() && !H.empty(), "grouping does not match H");
  const std::size_t groups = *std::max_element(group_of.begin(), group_of.end()) + 1;
  std::vector<Matrix> means(groups, Matrix(H.front().rows(), H.front().cols()));
  std::vector<std::size_t> sizes(groups, 0);
  for (std::size_t j = 0; j < H.size(); ++j) {
    means[group_of[j]] += H[j];
    ++sizes[group_of[j]];
  }
  for (std::size_t g = 0; g < groups; ++g) {
    require(sizes[g] > 0, "grouping leaves an empty group");
    means[g] *= 1.0 / static_cast<double>(sizes[g]);
  }
  return means;
}

}  // namespace

Proposition1Result proposition1_check(std::span<const Matrix> H, std::span<const std::size_t> group_of,
                                      const Matrix& global_mean) {
  const std::vector<Matrix> means = means_by_group(H, group_of);
  Proposition1Result r;
  r.lhs.assign(means.size(), 0.0);
  r.rhs.assign(means.size(), 0.0);
  for (std::size_t j = 0; j < H.size(); ++j) {
    r.lhs[group_of[j]] += squared_frobenius(H[j] - means[group_of[j]]);
    r.rhs[group_of[j]] += squared_frobenius(H[j] - global_mean);
  }
  for (std::size_t g = 0; g < means.size(); ++g) r.holds = r.holds && r.lhs[g] <= r.rhs[g] + kBoundTolerance;
  return r;
}

std::optional<std::size_t> find_group_deviation_excess(std::span<const Matrix> H,
                                                       std::span<const std::size_t> group_of,
                                                       const Matrix& global_mean) {
  const std::vector<Matrix> means = means_by_group(H, group_of);
  for (std::size_t j = 0; j < H.size(); ++j)
    if (frobenius_norm(H[j] - means[group_of[j]]) > frobenius_norm(H[j] - global_mean)) return j;
  return std::nullopt;
}

RemarkSearchResult remark_counterexample_search(std::size_t max_draws, std::uint64_t seed, std::size_t num_blocks,
                                                std::size_t dim, std::size_t group_size) {
  require(num_blocks > group_size, "remark search: need at least two groups");
  RemarkSearchResult result;
  for (std::size_t draw = 0; draw < max_draws; ++draw) {
    CounterStream rng(seed, {static_cast<std::uint64_t>(StreamDomain::kVerify), 0x524d, draw});
    std::vector<Matrix> H(num_blocks, Matrix(dim, dim));
    for (Matrix& h : H)
      for (double& x : h.data()) x = rng.normal();
    const GroupedMeans means = global_and_grouped_means(H, group_size);
    result.draws_used = draw + 1;
    if (auto j = find_group_deviation_excess(H, means.group_of, means.global)) {
      result.found = true;
      result.block = *j;
      result.group_deviation = frobenius_norm(H[*j] - means.grouped[means.group_of[*j]]);
      result.global_deviation = frobenius_norm(H[*j] - means.global);
      return result;
    }
  }
  return result;
}

double shannon_entropy(std::span<const std::size_t> counts) {
  double total = 0.0;
  for (std::size_t c : counts) total += static_cast<double>(c);
  if (total == 0.0) return 0.0;
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  return h;
}

double jaccard(std::span<const std::size_t> a, std::span<const std::size_t> b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t common = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++common;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

SelectionStats selection_stats(std::span<const RoutingPlan> plans) {
  SelectionStats s;
  if (plans.empty()) return s;
  const std::size_t nb = plans.front().num_key_blocks();
  s.counts.assign(nb, 0);
  for (const RoutingPlan& p : plans) {
    require(p.num_key_blocks() == nb, "selection_stats: plans disagree on N_B");
    for (const auto& sel : p.selected)
      for (std::size_t j : sel) ++s.counts.at(j);
  }
  s.sorted_counts = s.counts;
  std::sort(s.sorted_counts.begin(), s.sorted_counts.end(), std::greater<>());
  s.entropy = shannon_entropy(s.counts);

  double jsum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t t = 1; t < plans.size(); ++t) {
    const std::size_t qbs = std::min(plans[t].num_query_blocks(), plans[t - 1].num_query_blocks());
    for (std::size_t qb = 0; qb < qbs; ++qb) {
      jsum += jaccard(plans[t - 1].selected[qb], plans[t].selected[qb]);
      ++pairs;
    }
  }
  s.mean_jaccard = pairs == 0 ? 1.0 : jsum / static_cast<double>(pairs);
  return s;
}

}  // namespace pasa
