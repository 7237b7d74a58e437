#include <cmath>
#include <numeric>

#include "doctest.h"
#include "pasa/analysis.hpp"
#include "pasa/blockstats.hpp"
#include "pasa/harness.hpp"
#include "test_util.hpp"

using namespace pasa;
using pasa::testing::random_matrix;
using pasa::testing::test_stream;

namespace {

std::vector<Matrix> random_H(CounterStream& rng, std::size_t nb, std::size_t d) {
  std::vector<Matrix> H;
  for (std::size_t j = 0; j < nb; ++j) H.push_back(random_matrix(rng, d, d));
  return H;
}

std::vector<std::size_t> all_blocks(std::size_t nb) {
  std::vector<std::size_t> v(nb);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

RoutingPlan plan_of(std::vector<std::vector<std::size_t>> selected, std::size_t nb) {
  RoutingPlan p;
  p.scores = Matrix(selected.size(), nb);
  p.selected = std::move(selected);
  return p;
}

}  // namespace

TEST_CASE("fidelity examples") {
  auto rng = test_stream(1, 20);
  const Matrix dense = random_matrix(rng, 6, 4);
  CHECK(fidelity(dense, dense).rel_frobenius == 0.0);
  CHECK(fidelity(dense, dense).max_row_l2 == 0.0);
  CHECK(fidelity(2.0 * dense, dense).rel_frobenius == doctest::Approx(1.0).epsilon(1e-15));

  const Matrix other = random_matrix(rng, 6, 4);
  double num = 0.0, den = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    double row = 0.0;
    for (std::size_t a = 0; a < 4; ++a) {
      const double e = other(i, a) - dense(i, a);
      row += e * e;
      den += dense(i, a) * dense(i, a);
    }
    num += row;
    worst = std::max(worst, std::sqrt(row));
  }
  const FidelityReport r = fidelity(other, dense);
  CHECK(r.rel_frobenius == doctest::Approx(std::sqrt(num / den)).epsilon(1e-13));
  CHECK(r.max_row_l2 == doctest::Approx(worst).epsilon(1e-13));

  CHECK_THROWS_AS(fidelity(other, Matrix(6, 4)), InvalidInput);
  CHECK_THROWS_AS(fidelity(Matrix(6, 3), dense), InvalidInput);
}

TEST_CASE("residual bound: zero residual when each group is constant") {
  std::vector<Matrix> H{Matrix{{1.0, 2.0}}, Matrix{{1.0, 2.0}}, Matrix{{-3.0, 0.5}}, Matrix{{-3.0, 0.5}}};
  const GroupedMeans m = global_and_grouped_means(H, 2);
  const std::vector<double> alphas{0.3, 0.7, 1.1, 0.2};
  const BoundCheck c = lemma1_check(H, m.grouped, m.group_of, alphas, all_blocks(4));
  CHECK(c.residual_norm == 0.0);
  CHECK(c.bound == 0.0);
  CHECK(c.satisfied);
  CHECK(c.margin == c.bound);
}

TEST_CASE("residual bound: empty unselected set is trivially satisfied") {
  auto rng = test_stream(2, 20);
  const auto H = random_H(rng, 4, 3);
  const GroupedMeans m = global_and_grouped_means(H, 2);
  const BoundCheck c = lemma1_check(H, m.grouped, m.group_of, std::vector<double>(4, 1.0), {});
  CHECK(c.residual_norm == 0.0);
  CHECK(c.bound == 0.0);
  CHECK(c.satisfied);
}

TEST_CASE("residual bound: a single unselected block is the tight case") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto rng = test_stream(seed, 21);
    const auto H = random_H(rng, 8, 3);
    const GroupedMeans m = global_and_grouped_means(H, 4);
    std::vector<double> alphas(8);
    for (double& a : alphas) a = rng.uniform() * 3.0;
    const std::size_t j = seed % 8;
    const std::vector<std::size_t> U{j};
    const BoundCheck c = lemma1_check(H, m.grouped, m.group_of, alphas, U);
    CHECK(c.satisfied);
    CHECK(std::abs(c.bound - c.residual_norm) <= 1e-9);
    CHECK(c.residual_norm == doctest::Approx(alphas[j] * frobenius_norm(H[j] - m.grouped[m.group_of[j]])));
  }
}

TEST_CASE("residual bound holds on random draws") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto rng = test_stream(seed, 22);
    const std::size_t nb = 2 + seed % 40;
    const std::size_t d = 1 + seed % 7;
    const std::size_t G = 1 + seed % nb;
    auto H = random_H(rng, nb, d);
    // Scale spread across blocks so the max term dominates unevenly.
    for (Matrix& h : H) h *= std::exp(rng.normal());
    const GroupedMeans m = global_and_grouped_means(H, G);
    std::vector<double> alphas(nb);
    for (double& a : alphas) a = std::exp(2.0 * rng.normal());
    std::vector<std::size_t> U;
    for (std::size_t j = 0; j < nb; ++j)
      if (rng.uniform() < 0.6) U.push_back(j);
    const BoundCheck c = lemma1_check(H, m.grouped, m.group_of, alphas, U);
    CHECK(c.satisfied);
    CHECK(c.residual_norm <= c.bound + kBoundTolerance);
  }
}

TEST_CASE("residual bound rejects negative weights") {
  std::vector<Matrix> H{Matrix{{1.0}}, Matrix{{2.0}}};
  const GroupedMeans m = global_and_grouped_means(H, 1);
  const std::vector<std::size_t> U{0};
  CHECK_THROWS_AS(lemma1_check(H, m.grouped, m.group_of, std::vector<double>{-1.0, 1.0}, U), InvalidInput);
}

TEST_CASE("group sum of squares: equality when group means equal the global mean") {
  // Each group is symmetric around the same mean.
  const Matrix c{{0.5, -1.0}};
  std::vector<Matrix> H{c + Matrix{{1.0, 2.0}}, c - Matrix{{1.0, 2.0}}, c + Matrix{{-4.0, 0.25}},
                        c - Matrix{{-4.0, 0.25}}, c + Matrix{{0.1, 0.3}}, c - Matrix{{0.1, 0.3}}};
  const GroupedMeans m = global_and_grouped_means(H, 2);
  const Proposition1Result r = proposition1_check(H, m.group_of, m.global);
  REQUIRE(r.lhs.size() == 3);
  for (std::size_t g = 0; g < 3; ++g) CHECK(std::abs(r.lhs[g] - r.rhs[g]) <= 1e-12);
  CHECK(r.holds);
}

TEST_CASE("group sum of squares: opposite constant offsets") {
  const Matrix base{{1.0, 2.0}, {3.0, 4.0}};
  const Matrix delta{{0.5, -0.25}, {2.0, 1.0}};
  std::vector<Matrix> H{base + delta, base + delta, base - delta, base - delta};
  const GroupedMeans m = global_and_grouped_means(H, 2);
  const Proposition1Result r = proposition1_check(H, m.group_of, m.global);
  const double dd = frobenius_norm(delta) * frobenius_norm(delta);
  for (std::size_t g = 0; g < 2; ++g) {
    CHECK(r.lhs[g] == 0.0);
    CHECK(r.rhs[g] == doctest::Approx(2.0 * dd).epsilon(1e-14));
  }
  CHECK(r.holds);
}

TEST_CASE("group sum of squares holds on random draws with varied grouping") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto rng = test_stream(seed, 23);
    const std::size_t nb = 2 + rng.next_u64() % 63;
    const std::size_t d = 1 + rng.next_u64() % 16;
    const std::size_t options[] = {1, 2, 8, 32, nb};
    const std::size_t G = std::min(options[seed % 5], nb);
    auto H = random_H(rng, nb, d);
    for (std::size_t j = 0; j < nb; ++j) H[j] += Matrix(d, d, 0.2 * static_cast<double>(j));
    const GroupedMeans m = global_and_grouped_means(H, G);
    const Proposition1Result r = proposition1_check(H, m.group_of, m.global);
    CHECK(r.holds);
    for (std::size_t g = 0; g < r.lhs.size(); ++g) CHECK(r.lhs[g] <= r.rhs[g] + 1e-9);
  }
}

TEST_CASE("a block can sit farther from its group mean than from the global mean") {
  std::vector<Matrix> H{Matrix{{1.0}}, Matrix{{-1.0}}, Matrix{{0.0}}, Matrix{{0.0}}};
  GroupedMeans m = global_and_grouped_means(H, 2);
  CHECK(m.global(0, 0) == 0.0);
  CHECK(m.grouped[0](0, 0) == 0.0);
  CHECK_FALSE(find_group_deviation_excess(H, m.group_of, m.global).has_value());

  // Group {1,2} mean moves to 2 and the global mean to 1: block 1 is now
  // at distance 1 from its group mean and 0 from the global mean.
  H[1] = Matrix{{3.0}};
  m = global_and_grouped_means(H, 2);
  CHECK(m.global(0, 0) == 1.0);
  CHECK(m.grouped[0](0, 0) == 2.0);
  const auto j = find_group_deviation_excess(H, m.group_of, m.global);
  REQUIRE(j.has_value());
  CHECK(*j == 0);
  CHECK(frobenius_norm(H[0] - m.grouped[0]) == 1.0);
  CHECK(frobenius_norm(H[0] - m.global) == 0.0);

  const std::vector<Matrix> same(6, Matrix{{2.0, -1.0}});
  const GroupedMeans ms = global_and_grouped_means(same, 2);
  CHECK_FALSE(find_group_deviation_excess(same, ms.group_of, ms.global).has_value());
}

TEST_CASE("random search finds the group-deviation excess") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const RemarkSearchResult r = remark_counterexample_search(1000, seed);
    REQUIRE(r.found);
    CHECK(r.group_deviation > r.global_deviation);
    CHECK(r.draws_used <= 1000);
  }
  CHECK(remark_counterexample_search(1000, 3).draws_used == remark_counterexample_search(1000, 3).draws_used);
  CHECK_THROWS_AS(remark_counterexample_search(10, 0, 4, 2, 4), InvalidInput);
}

TEST_CASE("entropy and jaccard helpers") {
  CHECK(shannon_entropy(std::vector<std::size_t>{5, 5, 5, 5}) == doctest::Approx(std::log(4.0)).epsilon(1e-15));
  CHECK(shannon_entropy(std::vector<std::size_t>{7, 0, 0}) == 0.0);
  CHECK(shannon_entropy(std::vector<std::size_t>{0, 0}) == 0.0);
  CHECK(shannon_entropy(std::vector<std::size_t>{1, 3}) ==
        doctest::Approx(-(0.25 * std::log(0.25) + 0.75 * std::log(0.75))));
  // Non-uniform counts stay strictly below the maximum.
  CHECK(shannon_entropy(std::vector<std::size_t>{5, 5, 5, 6}) < std::log(4.0) - 1e-9);

  CHECK(jaccard(std::vector<std::size_t>{1, 2, 3}, std::vector<std::size_t>{1, 2, 3}) == 1.0);
  CHECK(jaccard(std::vector<std::size_t>{1, 2}, std::vector<std::size_t>{3, 4}) == 0.0);
  CHECK(jaccard(std::vector<std::size_t>{1, 2, 3}, std::vector<std::size_t>{2, 3, 4}) == 0.5);
  CHECK(jaccard(std::vector<std::size_t>{}, std::vector<std::size_t>{}) == 1.0);
}

TEST_CASE("selection stats under full selection") {
  const std::size_t nb = 6;
  std::vector<RoutingPlan> plans;
  for (int step = 0; step < 4; ++step) plans.push_back(plan_of({all_blocks(nb), all_blocks(nb), all_blocks(nb)}, nb));
  const SelectionStats s = selection_stats(plans);
  CHECK(s.counts == std::vector<std::size_t>(nb, 12));
  CHECK(std::abs(s.entropy - std::log(6.0)) <= 1e-9);
  CHECK(s.mean_jaccard == 1.0);
}

TEST_CASE("selection stats counts and ordering") {
  std::vector<RoutingPlan> plans{plan_of({{0, 1}, {1, 2}}, 4), plan_of({{0, 3}, {1, 2}}, 4)};
  const SelectionStats s = selection_stats(plans);
  CHECK(s.counts == std::vector<std::size_t>{2, 3, 2, 1});
  CHECK(s.sorted_counts == std::vector<std::size_t>{3, 2, 2, 1});
  CHECK(s.mean_jaccard == doctest::Approx((1.0 / 3.0 + 1.0) / 2.0));
  std::vector<RoutingPlan> bad{plan_of({{0}}, 4), plan_of({{0}}, 5)};
  CHECK_THROWS_AS(selection_stats(bad), InvalidInput);
}

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.seq_len = 128;
  cfg.head_dim = 8;
  cfg.block_size = 16;
  cfg.group_size = 4;
  cfg.correlation_strength = 0.5;
  return cfg;
}

std::vector<RoutingPlan> route_sequence(const std::vector<AttentionInstance>& seq, const ExperimentConfig& cfg,
                                        double beta, std::uint64_t seed, std::size_t k) {
  const BlockPartition part = partition(cfg.padded_seq_len(), cfg.block_size);
  RoutingConfig rc;
  rc.bias_beta = beta;
  std::vector<RoutingPlan> plans;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const BlockStatistics stats = compute_block_statistics(seq[t].keys, seq[t].values, part, cfg.group_size, 1e-6);
    plans.push_back(route(seq[t].queries, part, stats, rc, seq[t].scale, k, {seed, t, 0, 0}));
  }
  return plans;
}

}  // namespace

TEST_CASE("deterministic routing on a static instance never changes selection") {
  const ExperimentConfig cfg = small_config();
  const auto seq = generate_drifting_sequence(cfg, {0, 0}, 5, 0.0);
  const SelectionStats s = selection_stats(route_sequence(seq, cfg, 0.0, 7, 2));
  CHECK(s.mean_jaccard == 1.0);
}

TEST_CASE("bias spreads selection counts on a drifting instance") {
  const ExperimentConfig cfg = small_config();
  const auto seq = generate_drifting_sequence(cfg, {0, 0}, 5, 0.01);
  double h0 = 0.0, h1 = 0.0;
  const std::size_t seeds = 1000;
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    h0 += selection_stats(route_sequence(seq, cfg, 0.0, seed, 2)).entropy;
    h1 += selection_stats(route_sequence(seq, cfg, 1.0, seed, 2)).entropy;
  }
  MESSAGE("mean entropy beta=0: " << h0 / seeds << ", beta=1: " << h1 / seeds);
  CHECK(h1 > h0);
}
