#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "doctest.h"
#include "pasa/budget.hpp"
#include "test_util.hpp"

using namespace pasa;
using pasa::testing::random_matrix;
using pasa::testing::test_stream;

namespace {

VelocityTrajectory scalar_trajectory(std::initializer_list<double> xs) {
  VelocityTrajectory t;
  for (double x : xs) t.tensors.push_back(Matrix{{x}});
  return t;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("pasa_budget_" + name);
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

double mean_of(const L1Curve& c, std::size_t begin, std::size_t end) {
  return std::accumulate(c.begin() + begin, c.begin() + end, 0.0) / static_cast<double>(end - begin);
}

}  // namespace

TEST_CASE("l1 curve examples") {
  CHECK(l1_curve(scalar_trajectory({0.0, 1.0, 3.0})) == L1Curve{1.0, 2.0});
  CHECK(l1_curve(scalar_trajectory({4.0, 4.0, 4.0, 4.0})) == L1Curve{0.0, 0.0, 0.0});
  CHECK_THROWS_AS(l1_curve(scalar_trajectory({1.0})), InvalidInput);

  VelocityTrajectory mixed = scalar_trajectory({0.0, 1.0});
  mixed.tensors.push_back(Matrix(2, 1));
  CHECK_THROWS_AS(l1_curve(mixed), InvalidInput);
}

TEST_CASE("l1 curve matches an elementwise oracle") {
  auto rng = test_stream(1, 10);
  VelocityTrajectory traj;
  for (int t = 0; t < 6; ++t) traj.tensors.push_back(random_matrix(rng, 3, 5));
  const L1Curve curve = l1_curve(traj);
  REQUIRE(curve.size() == 5);
  for (std::size_t t = 0; t < 5; ++t) {
    double s = 0.0;
    for (std::size_t i = 0; i < 15; ++i) s += std::abs(traj.tensors[t + 1].data()[i] - traj.tensors[t].data()[i]);
    CHECK(curve[t] == doctest::Approx(s / 15.0).epsilon(1e-14));
  }
}

TEST_CASE("average_curves") {
  const L1Curve one{0.5, 0.25, 3.0};
  CHECK(average_curves(std::vector<L1Curve>{one}) == one);
  CHECK(average_curves(std::vector<L1Curve>{{0.0, 2.0}, {2.0, 0.0}}) == L1Curve{1.0, 1.0});
  CHECK_THROWS_AS(average_curves(std::vector<L1Curve>{{1.0}, {1.0, 2.0}}), InvalidInput);
  CHECK_THROWS_AS(average_curves(std::vector<L1Curve>{}), InvalidInput);

  auto rng = test_stream(2, 10);
  std::vector<L1Curve> curves(10, L1Curve(7));
  for (auto& c : curves)
    for (double& x : c) x = std::abs(rng.normal());
  const L1Curve avg = average_curves(curves);
  for (std::size_t i = 0; i < 7; ++i) {
    double s = 0.0;
    for (const auto& c : curves) s += c[i];
    CHECK(avg[i] == doctest::Approx(s / 10.0).epsilon(1e-14));
  }
}

TEST_CASE("dense prefix and restriction to sparse steps") {
  CHECK(dense_prefix_steps(50, 0.2) == 10);
  CHECK(dense_prefix_steps(4, 0.2) == 1);
  CHECK(dense_prefix_steps(10, 0.0) == 0);
  CHECK_THROWS_AS(dense_prefix_steps(10, 1.0), InvalidInput);

  // Curve entry i belongs to step i+1; step 2 is the first sparse step of T=10.
  L1Curve curve(9);
  std::iota(curve.begin(), curve.end(), 1.0);
  const auto sparse = restrict_to_sparse(curve, 10, 0.2);
  CHECK(sparse == std::vector<double>{2, 3, 4, 5, 6, 7, 8, 9});
  CHECK(restrict_to_sparse(curve, 10, 0.0).front() == 1.0);
  CHECK_THROWS_AS(restrict_to_sparse(L1Curve(5), 10, 0.2), InvalidInput);
}

TEST_CASE("schedule worked examples") {
  const std::vector<double> l{2.0, 1.0, 1.0};
  const BudgetSchedule s = build_schedule(l, 0.15, 3, 0.0);
  const std::vector<double> alpha{1.5, 0.75, 0.75};
  const std::vector<double> rho{0.225, 0.1125, 0.1125};
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(s.alphas[i] - alpha[i]) <= 1e-12);
    CHECK(std::abs(s.densities[i] - rho[i]) <= 1e-12);
  }
  CHECK(s.clip_events.empty());
  CHECK(s.sparse_steps == std::vector<std::size_t>{0, 1, 2});

  const BudgetSchedule no_clip = build_schedule(std::vector<double>{10.0, 1.0, 1.0}, 0.3, 3, 0.0);
  CHECK(std::abs(no_clip.densities[0] - 0.75) <= 1e-12);
  CHECK(no_clip.clip_events.empty());

  const BudgetSchedule clipped = build_schedule(std::vector<double>{10.0, 1.0, 1.0}, 0.5, 3, 0.0);
  CHECK(clipped.densities[0] == 1.0);
  REQUIRE(clipped.clip_events.size() == 1);
  CHECK(clipped.clip_events[0].step == 0);
  CHECK(std::abs(clipped.clip_events[0].pre_clip - 1.25) <= 1e-12);
}

TEST_CASE("schedule with a dense prefix") {
  const BudgetSchedule s = build_schedule(std::vector<double>{2.0, 1.0, 1.0}, 0.15, 4, 0.2);
  CHECK(s.dense_prefix == 1);
  CHECK(s.sparse_steps == std::vector<std::size_t>{1, 2, 3});
  CHECK(s.density_at(0) == 1.0);
  CHECK(std::abs(s.density_at(1) - 0.225) <= 1e-12);
  CHECK_THROWS_AS(s.density_at(4), InvalidInput);
  CHECK_THROWS_AS(build_schedule(std::vector<double>{1.0, 1.0}, 0.15, 4, 0.2), InvalidInput);
}

TEST_CASE("schedule input errors") {
  CHECK_THROWS_AS(build_schedule(std::vector<double>{0.0, 0.0}, 0.15, 2, 0.0), InvalidInput);
  CHECK_THROWS_AS(build_schedule(std::vector<double>{1.0, -1.0}, 0.15, 2, 0.0), InvalidInput);
  CHECK_THROWS_AS(build_schedule(std::vector<double>{1.0, 1.0}, 0.0, 2, 0.0), InvalidInput);
  CHECK_THROWS_AS(build_schedule(std::vector<double>{1.0, 1.0}, 1.5, 2, 0.0), InvalidInput);
  CHECK_THROWS_AS(build_schedule(std::vector<double>{1.0, NAN}, 0.15, 2, 0.0), InvalidInput);
}

TEST_CASE("constant curve reduces to the uniform schedule") {
  for (double rho : {0.05, 0.15, 0.5, 1.0}) {
    const BudgetSchedule s = build_schedule(std::vector<double>(40, 0.37), rho, 50, 0.2);
    for (std::size_t i = 0; i < s.densities.size(); ++i) {
      CHECK(s.alphas[i] == 1.0);
      CHECK(s.densities[i] == rho);
    }
    CHECK(s.clip_events.empty());
  }
}

TEST_CASE("conservation, scale invariance and clip reconciliation on random curves") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto rng = test_stream(seed, 11);
    const std::size_t T = 10 + seed % 40;
    const std::size_t n = T - dense_prefix_steps(T, 0.2);
    std::vector<double> l(n);
    for (double& x : l) x = std::exp(rng.normal());
    const double rho = 0.05 + 0.3 * rng.uniform();
    const BudgetSchedule s = build_schedule(l, rho, T, 0.2);

    // Every clip event's excess, added back, restores the unclipped total.
    double sum = 0.0;
    for (double r : s.densities) sum += r;
    double deficit = 0.0;
    for (const ClipEvent& e : s.clip_events) deficit += e.pre_clip - 1.0;
    CHECK(std::abs(sum + deficit - rho * static_cast<double>(n)) <= 1e-12);
    if (s.clip_events.empty()) CHECK(std::abs(sum - rho * static_cast<double>(n)) <= 1e-12);
    for (double r : s.densities) CHECK((r > 0.0 && r <= 1.0));

    for (double c : {1e-3, 1.0, 1e3}) {
      std::vector<double> scaled(l);
      for (double& x : scaled) x *= c;
      const BudgetSchedule t = build_schedule(scaled, rho, T, 0.2);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(t.alphas[i] - s.alphas[i]) <= 1e-12);
        CHECK(std::abs(t.densities[i] - s.densities[i]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("synthetic three-phase trajectory shape") {
  for (std::size_t T : {20u, 50u, 100u}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const L1Curve c = l1_curve(synth_three_phase(T, seed));
      // Entry i belongs to step i+1; phase windows are in step numbers.
      const std::size_t early_end = static_cast<std::size_t>(std::lround(0.2 * T));
      const std::size_t mid_begin = static_cast<std::size_t>(std::lround(0.25 * T));
      const std::size_t mid_end = static_cast<std::size_t>(std::lround(0.75 * T));
      const double early = mean_of(c, 0, early_end - 1);
      const double mid = mean_of(c, mid_begin - 1, mid_end - 1);
      const double late = mean_of(c, c.size() - 5, c.size());
      CHECK(early > 2.0 * mid);
      CHECK(late > 1.5 * mid);
    }
  }
  CHECK(synth_three_phase(30, 7).tensors == synth_three_phase(30, 7).tensors);
  CHECK(synth_three_phase(30, 7).tensors != synth_three_phase(30, 8).tensors);
  CHECK_THROWS_AS(synth_three_phase(19, 0), InvalidInput);

  const L1Curve avg = synthetic_calibration_curve(50, 10, 3);
  CHECK(avg.size() == 49);
  CHECK(avg == synthetic_calibration_curve(50, 10, 3));
}

TEST_CASE("calibration csv round trip and errors") {
  const auto p = temp_file("calib.csv");
  const L1Curve curve{0.1, 1.0 / 3.0, 2.5e-7, 4.0};
  write_calibration_csv(p, curve);
  CHECK(read_calibration_csv(p) == curve);

  write_text(p, "step,l1\n3,0.3\n1,0.1\n2,0.2\n");
  CHECK(read_calibration_csv(p) == L1Curve{0.1, 0.2, 0.3});

  write_text(p, "step,value\n1,0.1\n");
  CHECK_THROWS_AS(read_calibration_csv(p), InvalidInput);
  write_text(p, "step,l1\n1,0.1\n3,0.3\n");
  CHECK_THROWS_AS(read_calibration_csv(p), InvalidInput);
  write_text(p, "step,l1\n1,abc\n");
  CHECK_THROWS_AS(read_calibration_csv(p), InvalidInput);
  write_text(p, "step,l1\n0,0.5\n");
  CHECK_THROWS_AS(read_calibration_csv(p), InvalidInput);
  std::filesystem::remove(p);
  CHECK_THROWS_AS(read_calibration_csv(p), InvalidInput);
}

TEST_CASE("trajectory csv round trip and errors") {
  const auto p = temp_file("traj.csv");
  const VelocityTrajectory traj = synth_three_phase(20, 4);
  write_trajectory_csv(p, traj);
  const VelocityTrajectory back = read_trajectory_csv(p);
  REQUIRE(back.timesteps() == 20);
  for (std::size_t t = 0; t < 20; ++t) CHECK(std::ranges::equal(back.tensors[t].data(), traj.tensors[t].data()));
  CHECK(l1_curve(back) == l1_curve(traj));

  write_text(p, "step,a,b\n0,1,2\n1,3\n");
  CHECK_THROWS_AS(read_trajectory_csv(p), InvalidInput);
  write_text(p, "step,a\n0,1\n2,3\n");
  CHECK_THROWS_AS(read_trajectory_csv(p), InvalidInput);
  write_text(p, "step,a\n0,1\n");
  CHECK_THROWS_AS(read_trajectory_csv(p), InvalidInput);
  std::filesystem::remove(p);
}

TEST_CASE("schedule json export") {
  const BudgetSchedule s = build_schedule(std::vector<double>{10.0, 1.0, 1.0}, 0.5, 4, 0.2);
  const auto j = schedule_to_json(s);
  CHECK(j["total_steps"] == 4);
  CHECK(j["dense_prefix"] == 1);
  CHECK(j["rho"] == 0.5);
  CHECK(j["alphas"].size() == 3);
  CHECK(j["densities"][0] == 1.0);
  REQUIRE(j["clip_events"].size() == 1);
  CHECK(j["clip_events"][0]["step"] == 1);
}
