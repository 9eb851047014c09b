/*
 Copyright 2026 The COCA Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "coca/bench.hpp"
#include "helpers.hpp"

namespace coca::bench {
namespace {

using testkit::vec;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

TEST(QuadrotorConfig, DiscretizedPlant) {
  const auto c = qvf_config(10, {0});
  EXPECT_EQ(c.sys.A(), testkit::mat({{1, 1}, {0, 0.75}}));
  EXPECT_EQ(c.sys.B(), testkit::mat({{0}, {1}}));
  EXPECT_EQ(c.x0, Vec::Zero(2));
}

TEST(QuadrotorConfig, GravityFoldedIntoDisturbance) {
  // Wind w = -5 lands at -5 - 9.8 = -14.8 in the velocity channel.
  const auto c = qvf_config(10, {0});
  const double lo = c.w_lo(1), hi = c.w_hi(1);
  EXPECT_DOUBLE_EQ(0.5 * (lo + hi), -14.8);
  EXPECT_DOUBLE_EQ(lo, -15.3);
  EXPECT_EQ(c.w_lo(0), 0.0);
  const auto dm = c.disturbance(0);
  for (std::int64_t t = 1; t <= 200; ++t) {
    EXPECT_EQ(dm.sample(t)(0), 0.0);
    EXPECT_GE(dm.sample(t)(1), lo);
    EXPECT_LE(dm.sample(t)(1), hi);
  }
  const auto up = qvf_config(10, {0}, Wind::Up);
  EXPECT_DOUBLE_EQ(0.5 * (up.w_lo(1) + up.w_hi(1)), -4.8);
}

TEST(QuadrotorConfig, FeedbackFunctions) {
  const auto env = qvf_config(10, {0}).environment(0);
  const Vec x0 = Vec::Zero(2);
  EXPECT_DOUBLE_EQ(env(0).adversarial(x0, vec({0})).value, 0.3);
  const auto fb = env(5);
  EXPECT_TRUE(fb.is_strongly_convex);
  EXPECT_DOUBLE_EQ(fb.static_constraint(vec({1.9, 0}), vec({5})).value, 0.2);
  EXPECT_DOUBLE_EQ(fb.static_constraint(x0, vec({-1})).value, 1.0);
  EXPECT_DOUBLE_EQ(fb.static_constraint(x0, vec({13})).value, 1.0);
  // Cost at the hover point is 0.1 * 0.7^2 regardless of chi.
  EXPECT_DOUBLE_EQ(fb.cost(x0, vec({9.8})).value, 0.1 * 0.49);
  const double chi = fb.cost(vec({0.7, 0}), vec({10.8})).value;
  EXPECT_GE(chi, 0.1);
  EXPECT_LE(chi, 0.2);
}

TEST(ThermalConfig, DiscretizedPlant) {
  const auto c = hvac_config(10, {0});
  EXPECT_DOUBLE_EQ(c.sys.A()(0, 0), 0.9);
  EXPECT_DOUBLE_EQ(c.sys.B()(0, 0), -0.6);
  EXPECT_DOUBLE_EQ(0.5 * (c.w_lo(0) + c.w_hi(0)) - 0.6 * 0.1, 3.9);
  EXPECT_DOUBLE_EQ(c.w_lo(0), 3.9 - 0.66);
  EXPECT_DOUBLE_EQ(c.w_hi(0), 3.9 + 0.78);
}

TEST(ThermalConfig, NoAdversarialConstraint) {
  const auto env = hvac_config(10, {0}).environment(3);
  for (std::int64_t t = 1; t <= 20; ++t) EXPECT_EQ(env(t).adversarial(vec({30}), vec({9})).value, -1.0);
  const auto fb = env(1);
  EXPECT_DOUBLE_EQ(fb.static_constraint(vec({24}), vec({2.5})).value, -1.5);
  EXPECT_DOUBLE_EQ(fb.static_constraint(vec({26}), vec({2.5})).value, 0.5);
  EXPECT_DOUBLE_EQ(fb.static_constraint(vec({24}), vec({0})).value, 0.5);
}

TEST(ThermalConfig, PublishedRates) {
  const auto c = hvac_config(1000, {0});
  const auto r = std::get<HardRates>(c.rates(SolverKind::Hard, 1000));
  EXPECT_EQ(r.V, 0.1);
  EXPECT_NEAR(r.gamma, 100.0, 1e-9);
  EXPECT_NEAR(r.alpha, 100.0, 1e-9);
  EXPECT_NEAR(r.eta, std::pow(1000.0, 1.5), 1e-6);
  EXPECT_EQ(c.H, 7);
}

TEST(ScalarConfig, SlaterSlackAtZeroInput) {
  const auto c = synthetic_scalar_config(2000, {0});
  const auto env = c.environment(0);
  const auto dm = c.disturbance(0);
  Vec x = c.x0;
  for (std::int64_t t = 1; t <= c.T; ++t) {
    const auto fb = env(t);
    EXPECT_LE(fb.adversarial(x, vec({0})).value, -0.5);
    EXPECT_LT(fb.static_constraint(x, vec({0})).value, 0.0);
    x = step(c.sys, x, vec({0}), dm.sample(t));
  }
}

TEST(ScalarConfig, BaselineFeasibleSetNonempty) {
  const auto c = synthetic_scalar_config(300, {0});
  const auto gain = prepare_gain(c);
  const auto b = baseline_for(c, gain, 0);
  EXPECT_TRUE(b.feasible);
  EXPECT_GT(b.admissible, 0u);
}

TEST(Algorithms, NamesRoundTrip) {
  for (auto a : all_algos()) EXPECT_EQ(parse_algo(to_string(a)), a);
  EXPECT_THROW(parse_algo("lqr"), ConfigError);
}

TEST(Algorithms, ControllerConfigs) {
  auto c = qvf_config(1000, {0});
  EXPECT_TRUE(controller_config(c, Algo::StableK).frozen);
  EXPECT_EQ(controller_config(c, Algo::B2W).kind, SolverKind::B2W);
  c.rate_c = 0.5;
  const auto r = std::get<HardRates>(controller_config(c, Algo::Hard).rates);
  EXPECT_NEAR(r.gamma, 1000.0, 1e-9);
  EXPECT_NEAR(r.alpha, std::sqrt(1000.0), 1e-9);
}

TEST(MeanCI, StudentIntervalAtNineDegrees) {
  std::vector<double> xs{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto ci = mean_ci(xs);
  EXPECT_DOUBLE_EQ(ci.mean, 5.5);
  ASSERT_TRUE(ci.ci95.has_value());
  // t_{0.975, 9} = 2.2621571628; sd = sqrt(55/6).
  EXPECT_NEAR(*ci.ci95, 2.2621571628 * std::sqrt(55.0 / 6.0) / std::sqrt(10.0), 1e-9);
  EXPECT_FALSE(mean_ci({3.0}).ci95.has_value());
}

TEST(Suite, SingleSeedStableGainOmitsInterval) {
  const auto c = qvf_config(50, {0});
  const auto runs = run_all(c, {Algo::StableK});
  ASSERT_EQ(runs.size(), 1u);
  const auto rep = aggregate(c.name, runs);
  ASSERT_EQ(rep.algorithms.size(), 1u);
  EXPECT_FALSE(rep.algorithms[0].cost.ci95.has_value());
  EXPECT_TRUE(std::isnan(rep.algorithms[0].cum_cost_ci.back()));
}

TEST(Suite, ResultsAreAlgorithmMajor) {
  const auto c = synthetic_scalar_config(30, {4, 2});
  const auto runs = run_all(c, {Algo::Hard, Algo::Soft});
  ASSERT_EQ(runs.size(), 4u);
  EXPECT_EQ(runs[0].algo, Algo::Hard);
  EXPECT_EQ(runs[0].seed, 4u);
  EXPECT_EQ(runs[1].seed, 2u);
  EXPECT_EQ(runs[2].algo, Algo::Soft);
}

TEST(Suite, OutputsAreByteIdenticalAcrossReruns) {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "coca_bench_determinism";
  fs::remove_all(base);
  const auto c = hvac_config(100, {0, 1});
  for (const char* tag : {"a", "b"}) {
    const auto gain = prepare_gain(c);
    const auto runs = run_all(c, all_algos());
    const auto rep = aggregate(c.name, runs);
    write_outputs(base / tag, c, gain, runs, rep);
  }
  std::size_t compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(base / "a")) {
    if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
    const auto other = base / "b" / fs::relative(e.path(), base / "a");
    EXPECT_EQ(slurp(e.path()), slurp(other)) << e.path();
    ++compared;
  }
  EXPECT_EQ(compared, 4u * 2u * 3u + 1u);
  EXPECT_TRUE(fs::exists(base / "a" / "hvac" / "report.json"));
  EXPECT_TRUE(fs::exists(base / "a" / "hvac" / "soft" / "seed1" / "manifest.json"));
  fs::remove_all(base);
}

TEST(ConfigHash, StableAndSensitive) {
  const auto a = config_json(qvf_config(1000, {0}), Algo::Soft);
  EXPECT_EQ(config_hash(a), config_hash(config_json(qvf_config(1000, {5}), Algo::Soft)));
  EXPECT_NE(config_hash(a), config_hash(config_json(qvf_config(1001, {0}), Algo::Soft)));
  EXPECT_NE(config_hash(a), config_hash(config_json(qvf_config(1000, {0}), Algo::Hard)));
  EXPECT_NE(config_hash(a), config_hash(config_json(qvf_config(1000, {0}, Wind::Up), Algo::Soft)));
  // Independent FNV-1a 64 evaluations of the dumped text "{}" and "\"a\"".
  EXPECT_EQ(config_hash(nlohmann::json::object()), "08f44b07b5901a25");
  EXPECT_EQ(config_hash(nlohmann::json("a")), "d4272417d7c77eea");
}

TEST(Golden, QuadrotorSeedZeroCost) {
  // Frozen from a verified run; any change to dynamics, feedback or solver shows up here.
  const auto c = qvf_config(1000, {0});
  const auto gain = prepare_gain(c);
  EXPECT_NEAR(run_one(c, gain, Algo::Soft, 0).metrics.final_cost(), 37109.753274243223, 1e-6);
  EXPECT_NEAR(run_one(c, gain, Algo::StableK, 0).metrics.final_cost(), 70217.88375103088, 1e-6);
}

TEST(OcoInstance, FixedPointIsFeasibleForEveryRound) {
  const OcoInstance inst{0, 500};
  const auto fp = best_fixed_feasible(inst, 0.01);
  ASSERT_EQ(fp.x.size(), 2);
  EXPECT_LE(fp.x.norm(), 1.0 + 1e-12);
  for (std::int64_t t = 1; t <= inst.T; ++t) EXPECT_LE(inst.round(t).constraint(fp.x).value, 1e-12);
}

}  // namespace
}  // namespace coca::bench
