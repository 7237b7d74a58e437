#include "pasa/cli.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pasa/budget.hpp"
#include "pasa/harness.hpp"

namespace pasa {

namespace {

std::vector<CompensationMode> parse_modes(const std::string& spec) {
  if (spec == "all") return {kAllModes.begin(), kAllModes.end()};
  std::vector<CompensationMode> modes;
  std::stringstream ss(spec);
  std::string name;
  while (std::getline(ss, name, ',')) {
    const auto m = parse_mode(name);
    if (!m) throw CLI::ValidationError("--mode", "unknown compensation mode '" + name + "'");
    modes.push_back(*m);
  }
  if (modes.empty()) throw CLI::ValidationError("--mode", "no modes given");
  return modes;
}

void add_experiment_flags(CLI::App& app, ExperimentConfig& cfg, std::string& modes) {
  app.add_option("--seq-len", cfg.seq_len, "Sequence length S (padded up to a multiple of the block size)");
  app.add_option("--head-dim", cfg.head_dim, "Head dimension d");
  app.add_option("--block-size", cfg.block_size, "Block size B");
  app.add_option("--group-size", cfg.group_size, "Blocks per compensation group G");
  app.add_option("--rho", cfg.rho, "Baseline density (fraction of blocks computed exactly)");
  app.add_option("--bias-beta", cfg.bias_beta, "Routing noise scale, multiple of per-row score std");
  app.add_option("--epsilon", cfg.epsilon, "Routing score stabilizer");
  app.add_option("--dense-frac", cfg.dense_frac, "Fraction of leading steps run dense");
  app.add_option("--total-steps", cfg.total_steps, "Denoising steps T");
  app.add_option("--mode", modes,
                 "Compensation mode(s): hard_drop, zeroth_order, first_order_global (pisa), "
                 "first_order_grouped (pasa), first_order_per_block; comma separated or 'all'");
  app.add_option("--seed", cfg.seed, "Base seed");
  app.add_option("--trials", cfg.num_trials, "Number of independent trials");
  app.add_option("--correlation-strength", cfg.correlation_strength, "Within-block K/V coupling in [0, 1]");
  app.add_option("--drift-rate", cfg.drift_rate, "Per-step perturbation of Q, K, V between sparse steps");
  app.add_option("--heads", cfg.heads, "Attention heads per step");
  app.add_option("--dynamic-budget", cfg.dynamic_budget, "Curvature-aware per-step densities (false = uniform rho)");
  app.add_option("--calibration-prompts", cfg.calibration_prompts, "Synthetic calibration trajectories");
  app.add_option("--calibration-file", cfg.calibration_file, "step,l1 CSV replacing the synthetic calibration");
  app.add_option("--workers", cfg.workers, "Worker threads (results do not depend on it)");
}

bool write_text(const std::string& path, const std::string& text, std::ostream& out, std::ostream& err) {
  if (path.empty() || path == "-") {
    out << text;
    return true;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) {
    err << "cannot write " << path << '\n';
    return false;
  }
  f << text;
  return static_cast<bool>(f);
}

constexpr const char* kSubcommands[] = {"run", "schedule", "verify", "bench"};

bool is_subcommand(const std::string& a) {
  for (const char* s : kSubcommands)
    if (a == s) return true;
  return false;
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  for (const std::string& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

// Expands `--config FILE` into ordinary flags placed right after the
// subcommand. Keys may use '-' or '_'; flags already given on the command line
// win. Items in a [section] only apply to the subcommand of that name.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;
  auto sub = std::find_if(args.begin() + 1, args.end(), is_subcommand);
  if (sub == args.end()) return args;

  std::vector<std::string> injected;
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_file(path)) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() && (item.parents.size() != 1 || item.parents[0] != *sub)) continue;
    std::string key = item.name;
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string flag = "--" + key;
    if (has_flag(args, flag)) continue;
    std::string value;
    for (std::size_t i = 0; i < item.inputs.size(); ++i) value += (i ? "," : "") + item.inputs[i];
    injected.push_back(flag + "=" + value);
  }
  args.insert(sub + 1, injected.begin(), injected.end());
  return args;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Piecewise block-sparse attention with grouped first-order compensation"};
  app.require_subcommand(1);
  // Handled by expand_config before parsing; registered for --help.
  app.add_option("--config", "key=value configuration file; command-line flags take precedence");

  ExperimentConfig cfg;
  std::string modes_spec;
  std::string out_path;
  std::string csv_path;

  CLI::App* run = app.add_subcommand("run", "Full experiment, JSON report");
  add_experiment_flags(*run, cfg, modes_spec);
  run->add_option("--out", out_path, "Report path (stdout when omitted)");
  run->add_option("--csv", csv_path, "Optional per-step CSV table");

  CLI::App* sched = app.add_subcommand("schedule", "Build a budget schedule");
  std::string trajectory_path;
  std::string curve_path;
  bool synthetic = false;
  double rho = cfg.rho;
  double dense_frac = cfg.dense_frac;
  std::size_t total_steps = cfg.total_steps;
  std::size_t prompts = cfg.calibration_prompts;
  std::uint64_t seed = 0;
  auto* traj_opt = sched->add_option("--trajectory", trajectory_path, "Trajectory CSV (step,values...)");
  auto* curve_opt = sched->add_option("--curve", curve_path, "Calibration CSV (step,l1)");
  auto* synth_opt = sched->add_flag("--synthetic", synthetic, "Use averaged synthetic three-phase trajectories");
  traj_opt->excludes(curve_opt)->excludes(synth_opt);
  curve_opt->excludes(synth_opt);
  sched->add_option("--rho", rho, "Baseline density");
  sched->add_option("--dense-frac", dense_frac, "Fraction of leading steps run dense");
  sched->add_option("--total-steps", total_steps, "Steps for --synthetic");
  sched->add_option("--prompts", prompts, "Synthetic trajectories to average");
  sched->add_option("--seed", seed, "Seed for --synthetic");
  sched->add_option("--out", out_path, "Schedule JSON path (stdout when omitted)");

  CLI::App* verify = app.add_subcommand("verify", "Randomized bound and identity checks; nonzero exit on violation");
  VerifyOptions vopts;
  verify->add_option("--seed", vopts.seed, "Seed");
  verify->add_option("--draws", vopts.draws, "Random draws per check");
  verify->add_option("--out", out_path, "Report path (stdout when omitted)");

  CLI::App* bench = app.add_subcommand("bench", "Wall-clock timing of modes at growing S (CSV)");
  add_experiment_flags(*bench, cfg, modes_spec);
  std::vector<std::size_t> seq_lens = {256, 512, 1024, 2048};
  std::size_t repeats = 3;
  bench->add_option("--sizes", seq_lens, "Sequence lengths")->delimiter(',');
  bench->add_option("--repeats", repeats, "Repetitions per measurement");
  bench->add_option("--out", out_path, "CSV path (stdout when omitted)");

  try {
    std::vector<std::string> args = expand_config(std::vector<std::string>(argv, argv + argc));
    // CLI11 consumes the vector form back to front.
    args.erase(args.begin());
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    // --help exits 0; every usage error maps to 2.
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (!modes_spec.empty()) cfg.modes = parse_modes(modes_spec);

    if (*run) {
      const ExperimentResult result = run_experiment(cfg);
      if (!write_text(out_path, result.report.dump(2) + "\n", out, err)) return 2;
      if (!csv_path.empty()) {
        std::ostringstream csv;
        csv.precision(17);
        csv << "trial,step,k,density,mode,rel_frobenius,max_row_l2\n";
        for (const auto& trial : result.report["trials"]) {
          if (!trial.contains("steps")) continue;
          for (const auto& step : trial["steps"])
            for (const auto& [mode, vals] : step["modes"].items())
              csv << trial["trial"].get<std::size_t>() << ',' << step["step"].get<std::size_t>() << ','
                  << step["k"].get<std::size_t>() << ',' << step["density"].get<double>() << ',' << mode << ','
                  << vals["rel_frobenius"].get<double>() << ',' << vals["max_row_l2"].get<double>() << '\n';
        }
        if (!write_text(csv_path, csv.str(), out, err)) return 2;
      }
      return result.invariants_ok ? 0 : 1;
    }

    if (*sched) {
      if (!*traj_opt && !*curve_opt && !synthetic) {
        err << "schedule: one of --trajectory, --curve or --synthetic is required\n";
        return 2;
      }
      L1Curve curve;
      if (*traj_opt) {
        curve = l1_curve(read_trajectory_csv(trajectory_path));
      } else if (*curve_opt) {
        curve = read_calibration_csv(curve_path);
      } else {
        curve = synthetic_calibration_curve(total_steps, prompts, seed);
      }
      const std::size_t T = curve.size() + 1;
      const BudgetSchedule s = build_schedule(restrict_to_sparse(curve, T, dense_frac), rho, T, dense_frac);
      return write_text(out_path, schedule_to_json(s).dump(2) + "\n", out, err) ? 0 : 2;
    }

    if (*verify) {
      const ExperimentResult result = run_verification(vopts);
      if (!write_text(out_path, result.report.dump(2) + "\n", out, err)) return 2;
      return result.invariants_ok ? 0 : 1;
    }

    if (*bench) {
      cfg.validate();
      if (modes_spec.empty()) cfg.modes = {kAllModes.begin(), kAllModes.end()};
      return write_text(out_path, bench_to_csv(run_bench(cfg, seq_lens, repeats)), out, err) ? 0 : 2;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace pasa
