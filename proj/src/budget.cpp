#include "pasa/budget.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "pasa/counter_rng.hpp"

namespace pasa {

void VelocityTrajectory::validate() const {
  require(tensors.size() >= 2, "trajectory: need at least two timesteps");
  for (const Matrix& m : tensors) {
    require(m.same_shape(tensors.front()), "trajectory: tensors differ in shape");
    require(m.all_finite(), "trajectory: non-finite values");
  }
}

double BudgetSchedule::density_at(std::size_t step) const {
  if (is_dense(step)) return 1.0;
  require(step < total_steps, "schedule: step out of range");
  return densities[step - dense_prefix];
}

L1Curve l1_curve(const VelocityTrajectory& traj) {
  traj.validate();
  L1Curve curve;
  curve.reserve(traj.timesteps() - 1);
  for (std::size_t t = 0; t + 1 < traj.timesteps(); ++t)
    curve.push_back(mean_abs_diff(traj.tensors[t + 1], traj.tensors[t]));
  return curve;
}

L1Curve average_curves(std::span<const L1Curve> curves) {
  require(!curves.empty(), "average_curves: no curves");
  const std::size_t n = curves.front().size();
  for (const L1Curve& c : curves) require(c.size() == n, "average_curves: length mismatch");
  L1Curve out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    CompensatedSum acc;
    for (const L1Curve& c : curves) acc.add(c[i]);
    out[i] = acc.value() / static_cast<double>(curves.size());
  }
  return out;
}

std::size_t dense_prefix_steps(std::size_t total_steps, double dense_frac) {
  require(dense_frac >= 0.0 && dense_frac < 1.0, "dense fraction must lie in [0, 1)");
  return static_cast<std::size_t>(std::lround(dense_frac * static_cast<double>(total_steps)));
}

std::vector<double> restrict_to_sparse(const L1Curve& curve, std::size_t total_steps, double dense_frac) {
  require(total_steps >= 2 && curve.size() == total_steps - 1, "restrict_to_sparse: curve length must be T-1");
  const std::size_t prefix = dense_prefix_steps(total_steps, dense_frac);
  require(prefix < total_steps, "restrict_to_sparse: no sparse steps");
  std::vector<double> out;
  for (std::size_t step = prefix; step < total_steps; ++step) out.push_back(curve[step == 0 ? 0 : step - 1]);
  return out;
}

BudgetSchedule build_schedule(std::span<const double> sparse_curve, double rho, std::size_t total_steps,
                              double dense_frac) {
  require(rho > 0.0 && rho <= 1.0, "build_schedule: rho must lie in (0, 1]");
  BudgetSchedule s;
  s.total_steps = total_steps;
  s.dense_prefix = dense_prefix_steps(total_steps, dense_frac);
  require(s.dense_prefix < total_steps, "build_schedule: no sparse steps");
  require(sparse_curve.size() == total_steps - s.dense_prefix,
          "build_schedule: curve length differs from number of sparse steps");
  CompensatedSum total;
  for (double l : sparse_curve) {
    require(std::isfinite(l) && l >= 0.0, "build_schedule: curve values must be finite and >= 0");
    total.add(l);
  }
  const double mean = total.value() / static_cast<double>(sparse_curve.size());
  require(mean > 0.0, "build_schedule: flat calibration curve cannot be normalized");

  s.baseline_density = rho;
  for (std::size_t i = 0; i < sparse_curve.size(); ++i) {
    const std::size_t step = s.dense_prefix + i;
    const double alpha = sparse_curve[i] / mean;
    double density = rho * alpha;
    if (density > 1.0) {
      s.clip_events.push_back({step, density});
      density = 1.0;
    }
    s.sparse_steps.push_back(step);
    s.alphas.push_back(alpha);
    s.densities.push_back(density);
  }
  return s;
}

VelocityTrajectory synth_three_phase(std::size_t total_steps, std::uint64_t seed) {
  require(total_steps >= 20, "synth_three_phase: need at least 20 steps");
  constexpr std::size_t kRows = 8;
  constexpr std::size_t kCols = 8;
  const double T = static_cast<double>(total_steps);
  const std::size_t early_end = static_cast<std::size_t>(std::ceil(0.2 * T));
  const std::size_t late_begin = total_steps - 5;

  // Prompt-level jitter of each phase's amplitude.
  CounterStream prompt(seed, {static_cast<std::uint64_t>(StreamDomain::kTrajectory), 0});
  const double early_amp = 1.0 * (0.8 + 0.4 * prompt.uniform());
  const double mid_amp = 0.15 * (0.8 + 0.4 * prompt.uniform());
  const double late_amp = 0.45 * (0.8 + 0.4 * prompt.uniform());

  VelocityTrajectory traj;
  Matrix v(kRows, kCols);
  CounterStream init(seed, {static_cast<std::uint64_t>(StreamDomain::kTrajectory), 1});
  for (double& x : v.data()) x = init.normal();
  traj.tensors.push_back(v);
  for (std::size_t step = 1; step < total_steps; ++step) {
    double amp = mid_amp;
    if (step < early_end)
      amp = early_amp * (1.0 - 0.5 * static_cast<double>(step) / static_cast<double>(early_end));
    else if (step >= late_begin)
      amp = late_amp;
    CounterStream noise(seed, {static_cast<std::uint64_t>(StreamDomain::kTrajectory), 2, step});
    for (double& x : v.data()) x += amp * noise.normal();
    traj.tensors.push_back(v);
  }
  return traj;
}

L1Curve synthetic_calibration_curve(std::size_t total_steps, std::size_t prompts, std::uint64_t seed) {
  require(prompts >= 1, "synthetic_calibration_curve: need at least one prompt");
  std::vector<L1Curve> curves;
  for (std::size_t p = 0; p < prompts; ++p) curves.push_back(l1_curve(synth_three_phase(total_steps, seed + p)));
  return average_curves(curves);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell.erase(0, cell.find_first_not_of(" \t\r"));
    cell.erase(cell.find_last_not_of(" \t\r") + 1);
    out.push_back(cell);
  }
  return out;
}

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InvalidInput("csv: not a number: '" + s + "'");
  }
  require(used == s.size(), "csv: trailing characters in '" + s + "'");
  return v;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open " + path.string());
  return in;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  require(out.good(), "cannot write " + path.string());
  out.precision(17);
  return out;
}

}  // namespace

L1Curve read_calibration_csv(const std::filesystem::path& path) {
  std::ifstream in = open_for_read(path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "calibration csv: empty file");
  const auto header = split_csv(line);
  require(header.size() == 2 && header[0] == "step" && header[1] == "l1", "calibration csv: header must be step,l1");
  std::vector<std::pair<std::size_t, double>> rows;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    require(cells.size() == 2, "calibration csv: expected two columns");
    const double step = parse_number(cells[0]);
    require(step >= 1.0 && step == std::floor(step), "calibration csv: steps must be integers >= 1");
    rows.emplace_back(static_cast<std::size_t>(step), parse_number(cells[1]));
  }
  require(!rows.empty(), "calibration csv: no rows");
  std::sort(rows.begin(), rows.end());
  L1Curve curve;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i].first == i + 1, "calibration csv: steps must be exactly 1..T-1");
    curve.push_back(rows[i].second);
  }
  return curve;
}

void write_calibration_csv(const std::filesystem::path& path, const L1Curve& curve) {
  std::ofstream out = open_for_write(path);
  out << "step,l1\n";
  for (std::size_t i = 0; i < curve.size(); ++i) out << (i + 1) << ',' << curve[i] << '\n';
}

VelocityTrajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in = open_for_read(path);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "trajectory csv: empty file");
  const auto header = split_csv(line);
  require(header.size() >= 2 && header[0] == "step", "trajectory csv: header must start with step");
  const std::size_t width = header.size() - 1;
  std::vector<std::pair<std::size_t, Matrix>> rows;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    require(cells.size() == width + 1, "trajectory csv: row width differs from header");
    std::vector<double> values;
    for (std::size_t c = 1; c < cells.size(); ++c) values.push_back(parse_number(cells[c]));
    const double step = parse_number(cells[0]);
    require(step >= 0.0 && step == std::floor(step), "trajectory csv: steps must be non-negative integers");
    rows.emplace_back(static_cast<std::size_t>(step), Matrix(1, width, std::move(values)));
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  VelocityTrajectory traj;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i].first == i, "trajectory csv: steps must be exactly 0..T-1");
    traj.tensors.push_back(std::move(rows[i].second));
  }
  traj.validate();
  return traj;
}

void write_trajectory_csv(const std::filesystem::path& path, const VelocityTrajectory& traj) {
  traj.validate();
  std::ofstream out = open_for_write(path);
  out << "step";
  for (std::size_t c = 0; c < traj.tensors.front().size(); ++c) out << ",v" << c;
  out << '\n';
  for (std::size_t t = 0; t < traj.timesteps(); ++t) {
    out << t;
    for (double x : traj.tensors[t].data()) out << ',' << x;
    out << '\n';
  }
}

nlohmann::ordered_json schedule_to_json(const BudgetSchedule& s) {
  nlohmann::ordered_json j;
  j["total_steps"] = s.total_steps;
  j["dense_prefix"] = s.dense_prefix;
  j["rho"] = s.baseline_density;
  j["sparse_steps"] = s.sparse_steps;
  j["alphas"] = s.alphas;
  j["densities"] = s.densities;
  j["clip_events"] = nlohmann::ordered_json::array();
  for (const ClipEvent& e : s.clip_events) j["clip_events"].push_back({{"step", e.step}, {"pre_clip", e.pre_clip}});
  return j;
}

}  // namespace pasa
