#include "pasa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "pasa/analysis.hpp"
#include "pasa/blockstats.hpp"
#include "pasa/counter_rng.hpp"
#include "pasa/kernel.hpp"
#include "pasa/routing.hpp"

namespace pasa {

using json = nlohmann::ordered_json;

namespace {

constexpr double kKeyDeviation = 0.5;
constexpr double kQueryNoise = 0.5;
constexpr double kValueNoise = 0.5;
constexpr std::size_t kMapSpan = 8;  // blocks between independent value-map anchors

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) { return hash_context({seed, trial}); }

// Runs fn(i) for i in [0, n) on `workers` threads. Results must be written to
// per-index slots by fn.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

Summary summarize(const std::vector<double>& xs) {
  Summary s;
  s.count = xs.size();
  if (xs.empty()) return s;
  CompensatedSum acc;
  for (double x : xs) acc.add(x);
  s.mean = acc.value() / static_cast<double>(xs.size());
  CompensatedSum var;
  for (double x : xs) var.add((x - s.mean) * (x - s.mean));
  s.stddev = xs.size() > 1 ? std::sqrt(var.value() / static_cast<double>(xs.size() - 1)) : 0.0;
  s.max = *std::max_element(xs.begin(), xs.end());
  return s;
}

json summary_json(const Summary& s) {
  return {{"mean", s.mean}, {"stddev", s.stddev}, {"max", s.max}, {"count", s.count}};
}

// Residual bound on the first query row of every query block, with shifted
// centroid weights exp(s q.kbar_j - max_j).
std::vector<BoundCheck> lemma1_for_plan(const AttentionInstance& inst, const RoutingPlan& plan,
                                        const BlockStatistics& stats) {
  std::vector<BoundCheck> out;
  const std::size_t nb = stats.num_blocks();
  std::vector<double> logits(nb);
  std::vector<double> alphas(nb);
  for (std::size_t qb = 0; qb < plan.num_query_blocks(); ++qb) {
    auto q = inst.queries.row(qb * stats.block_size);
    for (std::size_t j = 0; j < nb; ++j) logits[j] = inst.scale * dot(q, stats.centroids.row(j));
    const double m = *std::max_element(logits.begin(), logits.end());
    for (std::size_t j = 0; j < nb; ++j) alphas[j] = std::exp(logits[j] - m);
    const std::vector<bool> mask = plan.selected_mask(qb);
    std::vector<std::size_t> unselected;
    for (std::size_t j = 0; j < nb; ++j)
      if (!mask[j]) unselected.push_back(j);
    out.push_back(lemma1_check(stats.H, stats.H_grouped, stats.group_of, alphas, unselected));
  }
  return out;
}

struct StepRecord {
  std::size_t step = 0;
  std::size_t k = 0;
  double density = 0.0;
  std::vector<FidelityReport> fidelity;  // one per configured mode
  std::size_t lemma_checked = 0;
  std::size_t lemma_violations = 0;
  double lemma_min_margin = std::numeric_limits<double>::infinity();
  bool prop1_holds = true;
};

struct TrialRecord {
  std::vector<StepRecord> steps;
  std::vector<RoutingPlan> plans;  // head 0 only
  std::size_t k_total = 0;
  EquivalenceReport equivalence;
  bool failed = false;
  std::string error;
};

TrialRecord run_trial(const ExperimentConfig& cfg, const BudgetSchedule& schedule, std::size_t trial) {
  TrialRecord rec;
  const std::uint64_t seed = trial_seed(cfg.seed, trial);
  const std::size_t S = cfg.padded_seq_len();
  const BlockPartition part = partition(S, cfg.block_size);
  const std::size_t nb = part.num_blocks();
  const RoutingConfig rcfg{cfg.epsilon, cfg.bias_beta, seed};
  const std::size_t sparse_count = schedule.sparse_steps.size();

  std::vector<std::vector<AttentionInstance>> sequences;
  for (std::size_t h = 0; h < cfg.heads; ++h)
    sequences.push_back(generate_drifting_sequence(cfg, {trial, h}, sparse_count, cfg.drift_rate));

  for (std::size_t i = 0; i < sparse_count; ++i) {
    StepRecord step;
    step.step = schedule.sparse_steps[i];
    step.density = schedule.densities[i];
    step.k = density_to_k(step.density, nb);
    std::vector<std::vector<double>> errs(cfg.modes.size()), row_errs(cfg.modes.size());
    for (std::size_t h = 0; h < cfg.heads; ++h) {
      const AttentionInstance& inst = sequences[h][i];
      const BlockStatistics stats =
          compute_block_statistics(inst.keys, inst.values, part, cfg.group_size, cfg.epsilon);
      RoutingPlan plan = route(inst.queries, part, stats, rcfg, inst.scale, step.k, {seed, step.step, 0, h});
      const Matrix dense = dense_attention(inst);
      for (std::size_t m = 0; m < cfg.modes.size(); ++m) {
        const FidelityReport f = fidelity(piecewise_attention(inst, plan, stats, cfg.modes[m]), dense);
        errs[m].push_back(f.rel_frobenius);
        row_errs[m].push_back(f.max_row_l2);
      }
      for (const BoundCheck& b : lemma1_for_plan(inst, plan, stats)) {
        ++step.lemma_checked;
        if (!b.satisfied) ++step.lemma_violations;
        step.lemma_min_margin = std::min(step.lemma_min_margin, b.margin);
      }
      step.prop1_holds = step.prop1_holds && proposition1_check(stats.H, stats.group_of, stats.H_global).holds;
      if (i == 0 && h == 0) rec.equivalence = scaled_variant_equivalences(inst, plan, stats);
      if (h == 0) rec.plans.push_back(std::move(plan));
    }
    for (std::size_t m = 0; m < cfg.modes.size(); ++m) {
      FidelityReport f;
      f.mode = cfg.modes[m];
      f.rel_frobenius = summarize(errs[m]).mean;
      f.max_row_l2 = summarize(row_errs[m]).max;
      f.sparsity = 1.0 - static_cast<double>(step.k) / static_cast<double>(nb);
      f.seed = seed;
      step.fidelity.push_back(f);
    }
    rec.k_total += step.k;
    rec.steps.push_back(std::move(step));
  }
  return rec;
}

}  // namespace

std::size_t ExperimentConfig::padded_seq_len() const {
  require(block_size > 0, "config: block_size must be positive");
  return (seq_len + block_size - 1) / block_size * block_size;
}

void ExperimentConfig::validate() const {
  require(seq_len > 0 && head_dim > 0 && block_size > 0 && group_size > 0, "config: sizes must be positive");
  require(rho > 0.0 && rho <= 1.0, "config: rho must lie in (0, 1]");
  require(bias_beta >= 0.0, "config: bias_beta must be >= 0");
  require(epsilon > 0.0, "config: epsilon must be > 0");
  require(dense_frac >= 0.0 && dense_frac < 1.0, "config: dense_frac must lie in [0, 1)");
  require(total_steps >= 2, "config: total_steps must be >= 2");
  require(!modes.empty(), "config: no compensation modes");
  require(num_trials >= 1 && heads >= 1 && workers >= 1, "config: trials, heads and workers must be >= 1");
  require(correlation_strength >= 0.0 && correlation_strength <= 1.0, "config: correlation_strength must lie in [0, 1]");
  require(drift_rate >= 0.0, "config: drift_rate must be >= 0");
  require(calibration_prompts >= 1, "config: calibration_prompts must be >= 1");
}

json config_to_json(const ExperimentConfig& cfg) {
  json modes = json::array();
  for (CompensationMode m : cfg.modes) modes.push_back(std::string(to_string(m)));
  return {{"seq_len", cfg.seq_len},
          {"padded_seq_len", cfg.padded_seq_len()},
          {"head_dim", cfg.head_dim},
          {"block_size", cfg.block_size},
          {"group_size", cfg.group_size},
          {"rho", cfg.rho},
          {"bias_beta", cfg.bias_beta},
          {"epsilon", cfg.epsilon},
          {"dense_frac", cfg.dense_frac},
          {"total_steps", cfg.total_steps},
          {"modes", modes},
          {"seed", cfg.seed},
          {"num_trials", cfg.num_trials},
          {"correlation_strength", cfg.correlation_strength},
          {"drift_rate", cfg.drift_rate},
          {"heads", cfg.heads},
          {"dynamic_budget", cfg.dynamic_budget},
          {"calibration_prompts", cfg.calibration_prompts},
          {"calibration_file", cfg.calibration_file}};
}

AttentionInstance generate_instance(const ExperimentConfig& cfg, const InstanceContext& ctx) {
  cfg.validate();
  const std::size_t S = cfg.padded_seq_len();
  const std::size_t d = cfg.head_dim;
  const std::size_t B = cfg.block_size;
  const std::size_t nb = S / B;
  const double c = cfg.correlation_strength;
  CounterStream rng(cfg.seed, {static_cast<std::uint64_t>(StreamDomain::kInstance), ctx.trial, ctx.head});
  auto random_matrix = [&](std::size_t r, std::size_t cols, double sd) {
    Matrix m(r, cols);
    for (double& x : m.data()) x = sd * rng.normal();
    return m;
  };

  const Matrix key_anchors = random_matrix(nb, d, 1.0);
  const Matrix query_anchors = random_matrix(nb, d, 1.0);
  const Matrix value_means = random_matrix(nb, d, 1.0);
  const double map_sd = 1.0 / std::sqrt(static_cast<double>(d));
  const Matrix common_map = random_matrix(d, d, map_sd);
  std::vector<Matrix> local_maps;
  for (std::size_t r = 0; r <= nb / kMapSpan + 1; ++r) local_maps.push_back(random_matrix(d, d, map_sd));

  AttentionInstance inst;
  inst.queries = Matrix(S, d);
  inst.keys = Matrix(S, d);
  inst.values = Matrix(S, d);
  inst.scale = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<double> dev(d);
  for (std::size_t j = 0; j < nb; ++j) {
    const std::size_t r = j / kMapSpan;
    const double w = static_cast<double>(j % kMapSpan) / static_cast<double>(kMapSpan);
    Matrix map = common_map + (1.0 - w) * local_maps[r] + w * local_maps[r + 1];
    map *= c / kKeyDeviation;
    for (std::size_t t = j * B; t < (j + 1) * B; ++t) {
      for (std::size_t a = 0; a < d; ++a) {
        inst.queries(t, a) = query_anchors(j, a) + kQueryNoise * rng.normal();
        dev[a] = kKeyDeviation * rng.normal();
        inst.keys(t, a) = key_anchors(j, a) + dev[a];
      }
      for (std::size_t b = 0; b < d; ++b) {
        double v = value_means(j, b) + kValueNoise * rng.normal();
        for (std::size_t a = 0; a < d; ++a) v += dev[a] * map(a, b);
        inst.values(t, b) = v;
      }
    }
  }
  inst.validate(B);
  return inst;
}

std::vector<AttentionInstance> generate_drifting_sequence(const ExperimentConfig& cfg, const InstanceContext& ctx,
                                                          std::size_t num_steps, double drift_rate) {
  require(drift_rate >= 0.0, "drifting sequence: drift_rate must be >= 0");
  std::vector<AttentionInstance> seq;
  if (num_steps == 0) return seq;
  seq.push_back(generate_instance(cfg, ctx));
  for (std::size_t s = 1; s < num_steps; ++s) {
    AttentionInstance next = seq.back();
    if (drift_rate > 0.0) {
      CounterStream rng(cfg.seed, {static_cast<std::uint64_t>(StreamDomain::kDrift), ctx.trial, ctx.head, s});
      for (Matrix* m : {&next.queries, &next.keys, &next.values})
        for (double& x : m->data()) x += drift_rate * rng.normal();
    }
    seq.push_back(std::move(next));
  }
  return seq;
}

BudgetSchedule experiment_schedule(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t T = cfg.total_steps;
  if (!cfg.dynamic_budget) {
    const std::vector<double> flat(T - dense_prefix_steps(T, cfg.dense_frac), 1.0);
    return build_schedule(flat, cfg.rho, T, cfg.dense_frac);
  }
  L1Curve curve = cfg.calibration_file.empty()
                      ? synthetic_calibration_curve(T, cfg.calibration_prompts, cfg.seed)
                      : read_calibration_csv(cfg.calibration_file);
  require(curve.size() == T - 1, "calibration curve length must be total_steps - 1");
  return build_schedule(restrict_to_sparse(curve, T, cfg.dense_frac), cfg.rho, T, cfg.dense_frac);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const BudgetSchedule schedule = experiment_schedule(cfg);
  const std::size_t nb = cfg.padded_seq_len() / cfg.block_size;

  std::vector<TrialRecord> trials(cfg.num_trials);
  parallel_for(cfg.num_trials, cfg.workers, [&](std::size_t t) {
    try {
      trials[t] = run_trial(cfg, schedule, t);
    } catch (const std::exception& e) {
      trials[t] = TrialRecord{};
      trials[t].failed = true;
      trials[t].error = e.what();
    }
  });

  ExperimentResult result;
  json& report = result.report;
  report["config"] = config_to_json(cfg);
  report["schedule"] = schedule_to_json(schedule);

  json trials_json = json::array();
  std::vector<std::vector<double>> mode_errs(cfg.modes.size()), mode_row(cfg.modes.size());
  std::size_t lemma_checked = 0, lemma_violations = 0, prop1_violations = 0, prop1_steps = 0, failures = 0;
  double lemma_min_margin = std::numeric_limits<double>::infinity();
  double eq_global = 0.0, eq_block = 0.0;
  std::vector<double> entropies, jaccards;
  std::vector<std::size_t> total_counts(nb, 0);
  std::vector<double> realized;

  for (std::size_t t = 0; t < trials.size(); ++t) {
    const TrialRecord& rec = trials[t];
    json tj;
    tj["trial"] = t;
    tj["seed"] = trial_seed(cfg.seed, t);
    if (rec.failed) {
      ++failures;
      tj["failed"] = true;
      tj["error"] = rec.error;
      trials_json.push_back(tj);
      continue;
    }
    json steps = json::array();
    for (const StepRecord& s : rec.steps) {
      json sj{{"step", s.step}, {"k", s.k}, {"density", s.density}};
      json modes = json::object();
      for (std::size_t m = 0; m < s.fidelity.size(); ++m) {
        const FidelityReport& f = s.fidelity[m];
        modes[std::string(to_string(f.mode))] = {{"rel_frobenius", f.rel_frobenius}, {"max_row_l2", f.max_row_l2}};
        mode_errs[m].push_back(f.rel_frobenius);
        mode_row[m].push_back(f.max_row_l2);
      }
      sj["modes"] = modes;
      sj["lemma1_violations"] = s.lemma_violations;
      sj["proposition1_holds"] = s.prop1_holds;
      steps.push_back(sj);
      lemma_checked += s.lemma_checked;
      lemma_violations += s.lemma_violations;
      lemma_min_margin = std::min(lemma_min_margin, s.lemma_min_margin);
      ++prop1_steps;
      if (!s.prop1_holds) ++prop1_violations;
    }
    tj["steps"] = steps;
    const double sparsity = 1.0 - static_cast<double>(rec.k_total) /
                                      static_cast<double>(rec.steps.size() * nb);
    tj["realized_sparsity"] = sparsity;
    realized.push_back(sparsity);
    const SelectionStats sel = selection_stats(rec.plans);
    tj["selection_entropy"] = sel.entropy;
    tj["selection_jaccard"] = sel.mean_jaccard;
    entropies.push_back(sel.entropy);
    jaccards.push_back(sel.mean_jaccard);
    for (std::size_t j = 0; j < nb; ++j) total_counts[j] += sel.counts[j];
    eq_global = std::max(eq_global, rec.equivalence.single_group_vs_global);
    eq_block = std::max(eq_block, rec.equivalence.singleton_groups_vs_per_block);
    trials_json.push_back(tj);
  }
  report["trials"] = trials_json;

  json aggregates;
  json per_mode = json::object();
  for (std::size_t m = 0; m < cfg.modes.size(); ++m)
    per_mode[std::string(to_string(cfg.modes[m]))] = {{"rel_frobenius", summary_json(summarize(mode_errs[m]))},
                                                      {"max_row_l2", summary_json(summarize(mode_row[m]))}};
  aggregates["modes"] = per_mode;
  double density_sum = 0.0;
  for (double x : schedule.densities) density_sum += x;
  aggregates["scheduled_mean_density"] = density_sum / static_cast<double>(schedule.densities.size());
  aggregates["realized_sparsity"] = summary_json(summarize(realized));
  aggregates["failed_trials"] = failures;
  report["aggregates"] = aggregates;

  const bool lemma_ok = lemma_violations == 0;
  const bool prop_ok = prop1_violations == 0;
  const bool eq_ok = eq_global <= 1e-12 && eq_block <= 1e-12;
  report["bound_checks"] = {
      {"lemma1", {{"checked", lemma_checked}, {"violations", lemma_violations},
                  {"min_margin", lemma_checked > 0 ? lemma_min_margin : 0.0}}},
      {"proposition1", {{"steps_checked", prop1_steps}, {"violations", prop1_violations}}},
      {"equivalences", {{"single_group_vs_global", eq_global}, {"singleton_groups_vs_per_block", eq_block},
                        {"holds", eq_ok}}}};

  std::vector<std::size_t> sorted = total_counts;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  report["selection_stats"] = {{"counts", total_counts},
                               {"sorted_counts", sorted},
                               {"entropy_of_total", shannon_entropy(total_counts)},
                               {"mean_trial_entropy", summarize(entropies).mean},
                               {"mean_trial_jaccard", summarize(jaccards).mean}};

  result.invariants_ok = lemma_ok && prop_ok && eq_ok && failures == 0;
  report["invariants_ok"] = result.invariants_ok;
  return result;
}

ExperimentResult run_verification(const VerifyOptions& opts) {
  ExperimentResult result;
  json& report = result.report;
  std::size_t lemma_fail = 0, prop_fail = 0, eq_fail = 0, stream_fail = 0;
  double worst_stream = 0.0, worst_eq = 0.0;

  for (std::size_t draw = 0; draw < opts.draws; ++draw) {
    CounterStream rng(opts.seed, {static_cast<std::uint64_t>(StreamDomain::kVerify), 1, draw});
    const std::size_t nb = 2 + static_cast<std::size_t>(rng.uniform() * 30);
    const std::size_t d = 1 + static_cast<std::size_t>(rng.uniform() * 8);
    const std::size_t g = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(nb));
    std::vector<Matrix> H(nb, Matrix(d, d));
    for (Matrix& h : H)
      for (double& x : h.data()) x = rng.normal() * 3.0;
    const GroupedMeans means = global_and_grouped_means(H, g);
    std::vector<double> alphas(nb);
    std::vector<std::size_t> unselected;
    for (std::size_t j = 0; j < nb; ++j) {
      alphas[j] = rng.uniform();
      if (rng.uniform() < 0.6) unselected.push_back(j);
    }
    if (!lemma1_check(H, means.grouped, means.group_of, alphas, unselected).satisfied) ++lemma_fail;
    if (!proposition1_check(H, means.group_of, means.global).holds) ++prop_fail;
  }

  const std::size_t instance_draws = std::max<std::size_t>(1, opts.draws / 10);
  for (std::size_t draw = 0; draw < instance_draws; ++draw) {
    ExperimentConfig cfg;
    cfg.seq_len = 128;
    cfg.head_dim = 8;
    cfg.block_size = 16;
    cfg.group_size = 3;
    cfg.seed = opts.seed;
    const AttentionInstance inst = generate_instance(cfg, {draw, 0});
    const BlockPartition part = partition(inst.seq_len(), cfg.block_size);
    const BlockStatistics stats = compute_block_statistics(inst.keys, inst.values, part, cfg.group_size, cfg.epsilon);
    const RoutingPlan plan = route(inst.queries, part, stats, {cfg.epsilon, 0.5, opts.seed}, inst.scale, 2,
                                   {opts.seed, draw, 0, 0});
    const EquivalenceReport eq = scaled_variant_equivalences(inst, plan, stats);
    worst_eq = std::max({worst_eq, eq.single_group_vs_global, eq.singleton_groups_vs_per_block});
    if (!eq.holds()) ++eq_fail;
    for (CompensationMode mode : kAllModes) {
      const Matrix ref = piecewise_reference(inst, plan, mode, stats);
      const double err = frobenius_norm(piecewise_attention(inst, plan, stats, mode) - ref) / frobenius_norm(ref);
      worst_stream = std::max(worst_stream, err);
      if (err > 1e-8) ++stream_fail;
    }
  }

  const RemarkSearchResult remark = remark_counterexample_search(1000, opts.seed);

  report["seed"] = opts.seed;
  report["draws"] = opts.draws;
  report["lemma1"] = {{"violations", lemma_fail}};
  report["proposition1"] = {{"violations", prop_fail}};
  report["equivalences"] = {{"violations", eq_fail}, {"max_deviation", worst_eq}};
  report["streaming_vs_naive"] = {{"violations", stream_fail}, {"max_rel_frobenius", worst_stream}};
  report["remark_search"] = {{"found", remark.found}, {"draws_used", remark.draws_used}};
  result.invariants_ok = lemma_fail == 0 && prop_fail == 0 && eq_fail == 0 && stream_fail == 0;
  report["invariants_ok"] = result.invariants_ok;
  return result;
}

std::vector<BenchRow> run_bench(const ExperimentConfig& base, const std::vector<std::size_t>& seq_lens,
                                std::size_t repeats) {
  require(repeats >= 1, "bench: repeats must be >= 1");
  using clock = std::chrono::steady_clock;
  std::vector<BenchRow> rows;
  for (std::size_t S : seq_lens) {
    ExperimentConfig cfg = base;
    cfg.seq_len = S;
    const AttentionInstance inst = generate_instance(cfg, {0, 0});
    const BlockPartition part = partition(inst.seq_len(), cfg.block_size);
    const BlockStatistics stats = compute_block_statistics(inst.keys, inst.values, part, cfg.group_size, cfg.epsilon);
    const std::size_t k = density_to_k(cfg.rho, part.num_blocks());
    const RoutingPlan plan = route(inst.queries, part, stats, {cfg.epsilon, cfg.bias_beta, cfg.seed}, inst.scale, k,
                                   {cfg.seed, 0, 0, 0});
    Matrix dense;
    auto time_it = [&](const std::string& name, auto&& fn) {
      BenchRow row;
      row.seq_len = inst.seq_len();
      row.mode = name;
      row.min_ms = std::numeric_limits<double>::infinity();
      double total = 0.0;
      Matrix out;
      for (std::size_t r = 0; r < repeats; ++r) {
        const auto start = clock::now();
        out = fn();
        const double ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
        total += ms;
        row.min_ms = std::min(row.min_ms, ms);
      }
      row.mean_ms = total / static_cast<double>(repeats);
      if (name == "dense")
        dense = out;
      else
        row.rel_frobenius = fidelity(out, dense).rel_frobenius;
      rows.push_back(row);
    };
    time_it("dense", [&] { return dense_attention(inst); });
    for (CompensationMode mode : base.modes)
      time_it(std::string(to_string(mode)), [&] { return piecewise_attention(inst, plan, stats, mode); });
  }
  return rows;
}

std::string bench_to_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out.precision(6);
  out << "seq_len,mode,mean_ms,min_ms,rel_frobenius\n";
  for (const BenchRow& r : rows)
    out << r.seq_len << ',' << r.mode << ',' << r.mean_ms << ',' << r.min_ms << ',' << r.rel_frobenius << '\n';
  return out.str();
}

}  // namespace pasa
