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
#ifndef COCA_BENCH_HPP
#define COCA_BENCH_HPP

/**
 * @file
 * @brief Benchmark experiments (quadrotor vertical flight, HVAC, synthetic scalar plant),
 * multi-seed orchestration, aggregation and acceptance checks.
 */

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "json.hpp"

#include "coca/coco.hpp"
#include "coca/controller.hpp"
#include "coca/metrics.hpp"

#ifndef COCA_GIT_DESCRIBE
#define COCA_GIT_DESCRIBE "unknown"
#endif

namespace coca::bench {

/// Independent stream for per-step cost coefficients (disturbances use stream 0).
inline constexpr std::uint32_t kCoefficientStream = 1;

inline double keyed_uniform(std::uint64_t seed, std::int64_t t, double lo, double hi) {
  return lo + (hi - lo) * keyed_uniforms(seed, kCoefficientStream, t, 1)[0];
}

struct ExperimentConfig {
  std::string name;
  LinearSystem sys{Mat::Identity(1, 1), Mat::Identity(1, 1)};
  Vec x0;
  Vec w_lo, w_hi;  // effective disturbance (affine plant terms folded in)
  std::function<Environment(std::uint64_t seed)> environment;
  std::function<Rates(SolverKind, std::int64_t T)> rates = default_rates;
  std::int64_t T = 1000;
  std::vector<std::uint64_t> seeds{0};
  double target_rho = 0.5;
  int H = kDefaultMemory;
  double a = 0.0;  // <= 0: 2 kappa
  std::optional<double> rate_c;
  bool project_static = false;
  InnerSolverConfig inner{};
  /// Static description (plant parameters, cost family) for the manifest and config hash.
  nlohmann::json params;

  DisturbanceModel disturbance(std::uint64_t seed) const { return DisturbanceModel::uniform(w_lo, w_hi, seed); }
};

// ---------------------------------------------------------------------------
// Experiments

enum class Wind { Down, Up };

/// Quadrotor altitude: z'' = u/m - g - I z'/m + w, forward Euler with step dt.
inline ExperimentConfig qvf_config(std::int64_t T, std::vector<std::uint64_t> seeds, Wind wind = Wind::Down) {
  constexpr double mass = 1.0, g = 9.8, drag = 0.25, dt = 1.0;
  ExperimentConfig c;
  c.name = "qvf";
  Mat A(2, 2);
  A << 1.0, dt, 0.0, 1.0 - dt * drag / mass;
  Mat B(2, 1);
  B << 0.0, dt / mass;
  c.sys = LinearSystem(A, B);
  c.x0 = Vec::Zero(2);
  const double lo = wind == Wind::Down ? -5.5 : 4.5;
  const double hi = wind == Wind::Down ? -4.5 : 5.5;
  c.w_lo = Vec(2);
  c.w_hi = Vec(2);
  c.w_lo << 0.0, dt * (lo - g);
  c.w_hi << 0.0, dt * (hi - g);
  c.environment = [](std::uint64_t seed) -> Environment {
    const fn::AffinePiece ceiling{(Vec(2) << 1.0, 0.0).finished(), Vec::Zero(1), -1.7};
    const fn::AffinePiece thrust_lo{Vec::Zero(2), Vec::Constant(1, -1.0), 0.0};
    const fn::AffinePiece thrust_hi{Vec::Zero(2), Vec::Constant(1, 1.0), -12.0};
    FeedbackFn l = fn::max_affine({ceiling, thrust_lo, thrust_hi});
    return [seed, l](std::int64_t t) {
      const double chi = keyed_uniform(seed, t, 0.1, 0.2);
      FeedbackBundle fb;
      fb.cost = fn::quadratic((Vec(2) << 0.1, 0.1).finished(), (Vec(2) << 0.7, 0.0).finished(), Vec::Constant(1, chi),
                              Vec::Constant(1, 9.8));
      // z_t >= 0.3 + 0.3 sin(t / 10)
      fb.adversarial = fn::affine((Vec(2) << -1.0, 0.0).finished(), Vec::Zero(1),
                                  0.3 + 0.3 * std::sin(static_cast<double>(t) / 10.0));
      fb.static_constraint = l;
      fb.is_strongly_convex = true;
      return fb;
    };
  };
  c.rates = default_rates;
  c.T = T;
  c.seeds = std::move(seeds);
  c.target_rho = 0.5;
  c.params = {{"plant", "quadrotor altitude"}, {"mass", mass}, {"g", g}, {"drag", drag}, {"dt", dt},
              {"wind", wind == Wind::Down ? "down" : "up"}, {"wind_range", {lo, hi}}, {"chi_range", {0.1, 0.2}},
              {"cost", "0.1(z-0.7)^2 + 0.1 zdot^2 + chi (u-9.8)^2"}, {"adversarial", "0.3 + 0.3 sin(t/10) - z"},
              {"static", "max(z - 1.7, -u, u - 12)"}};
  return c;
}

/// Room temperature: x' = (theta_o - x)/(v zeta) - u/v + (w + iota)/v, forward Euler.
inline ExperimentConfig hvac_config(std::int64_t T, std::vector<std::uint64_t> seeds) {
  constexpr double v = 100.0, zeta = 6.0, theta_o = 30.0, iota = 1.5, dt = 60.0;
  ExperimentConfig c;
  c.name = "hvac";
  c.sys = LinearSystem(Mat::Constant(1, 1, 1.0 - dt / (v * zeta)), Mat::Constant(1, 1, -dt / v));
  c.x0 = Vec::Constant(1, 24.0);
  const double bias = dt * (theta_o / (v * zeta) + iota / v);
  c.w_lo = Vec::Constant(1, bias + dt / v * -1.1);
  c.w_hi = Vec::Constant(1, bias + dt / v * 1.3);
  c.environment = [](std::uint64_t seed) -> Environment {
    FeedbackFn l = fn::max_affine({{Vec::Constant(1, -1.0), Vec::Zero(1), 22.5},
                                   {Vec::Constant(1, 1.0), Vec::Zero(1), -25.5},
                                   {Vec::Zero(1), Vec::Constant(1, -1.0), 0.5},
                                   {Vec::Zero(1), Vec::Constant(1, 1.0), -4.5}});
    // No adversarial constraint: d_t == -1 keeps the queue empty and the d-hinge inactive.
    FeedbackFn d = fn::constant(-1.0, 1, 1);
    return [seed, l, d](std::int64_t t) {
      const double chi = keyed_uniform(seed, t, 0.1, 4.0);
      FeedbackBundle fb;
      fb.cost = fn::quadratic(Vec::Constant(1, 2.0), Vec::Constant(1, 24.0), Vec::Constant(1, chi),
                              Vec::Constant(1, 2.5));
      fb.adversarial = d;
      fb.static_constraint = l;
      fb.is_strongly_convex = true;
      return fb;
    };
  };
  c.rates = hvac_rates;
  c.T = T;
  c.seeds = std::move(seeds);
  c.target_rho = 0.5;
  // 2 kappa = 2 cannot reach the u ~ 2.6 equilibrium through the disturbance feedforward.
  c.a = 10.0;
  c.params = {{"plant", "room temperature"}, {"v", v}, {"zeta", zeta}, {"theta_o", theta_o}, {"iota", iota},
              {"dt", dt}, {"w_range", {-1.1, 1.3}}, {"chi_range", {0.1, 4.0}},
              {"cost", "2(x-24)^2 + chi (u-2.5)^2"}, {"static", "22.5 <= x <= 25.5, 0.5 <= u <= 4.5"}};
  return c;
}

/// Scalar plant x+ = 0.9 x + u + w with a quadratic tracking cost around a random center and
/// a slowly varying adversarial cap on the input.
inline ExperimentConfig synthetic_scalar_config(std::int64_t T, std::vector<std::uint64_t> seeds) {
  ExperimentConfig c;
  c.name = "scalar";
  c.sys = LinearSystem(Mat::Constant(1, 1, 0.9), Mat::Constant(1, 1, 1.0));
  c.x0 = Vec::Zero(1);
  c.w_lo = Vec::Constant(1, -0.5);
  c.w_hi = Vec::Constant(1, 0.5);
  c.environment = [](std::uint64_t seed) -> Environment {
    FeedbackFn l = fn::affine(Vec::Constant(1, 1.0), Vec::Zero(1), -5.0);
    return [seed, l](std::int64_t t) {
      const double center = keyed_uniform(seed, t, -0.5, 0.5);
      FeedbackBundle fb;
      fb.cost = fn::quadratic(Vec::Constant(1, 1.0), Vec::Constant(1, center), Vec::Constant(1, 1.0), Vec::Zero(1));
      // u <= 1 + 0.5 sin(t / 25): slack >= 0.5 at u = 0.
      fb.adversarial = fn::affine(Vec::Zero(1), Vec::Constant(1, 1.0), -(1.0 + 0.5 * std::sin(t / 25.0)));
      fb.static_constraint = l;
      fb.is_strongly_convex = true;
      return fb;
    };
  };
  c.rates = default_rates;
  c.T = T;
  c.seeds = std::move(seeds);
  c.target_rho = 0.5;
  c.params = {{"plant", "scalar"}, {"A", 0.9}, {"B", 1.0}, {"w_range", {-0.5, 0.5}},
              {"cost", "(x-c_t)^2 + u^2, c_t ~ U(-0.5,0.5)"}, {"adversarial", "u - 1 - 0.5 sin(t/25)"},
              {"static", "x - 5"}};
  return c;
}

// ---------------------------------------------------------------------------
// Runs

enum class Algo { Soft, Hard, B2W, StableK };

inline std::string to_string(Algo a) {
  switch (a) {
    case Algo::Soft: return "soft";
    case Algo::Hard: return "hard";
    case Algo::B2W: return "b2w";
    case Algo::StableK: return "stablek";
  }
  return "?";
}

inline Algo parse_algo(const std::string& s) {
  if (s == "soft") return Algo::Soft;
  if (s == "hard") return Algo::Hard;
  if (s == "b2w") return Algo::B2W;
  if (s == "stablek") return Algo::StableK;
  throw ConfigError("unknown algorithm '" + s + "'");
}

inline std::vector<Algo> all_algos() { return {Algo::Soft, Algo::Hard, Algo::B2W, Algo::StableK}; }

/// Stable gain and its certificate; also checks that the plant certifies before any run.
inline StableGain prepare_gain(const ExperimentConfig& cfg) {
  auto gain = synthesize_stable_K(cfg.sys, cfg.target_rho);
  const auto check = verify_strong_stability(cfg.sys, gain.K, gain.cert.kappa, gain.cert.rho);
  if (!check.ok()) throw ConfigError("synthesized gain failed verification: " + check.failure);
  return gain;
}

inline ControllerConfig controller_config(const ExperimentConfig& cfg, Algo algo) {
  ControllerConfig cc;
  cc.H = cfg.H;
  cc.a = cfg.a;
  cc.inner = cfg.inner;
  cc.project_static = cfg.project_static;
  switch (algo) {
    case Algo::StableK:
      cc.frozen = true;
      cc.kind = SolverKind::Hard;
      cc.rates = cfg.rates(SolverKind::Hard, cfg.T);
      break;
    case Algo::Soft: cc.kind = SolverKind::Soft; break;
    case Algo::Hard: cc.kind = SolverKind::Hard; break;
    case Algo::B2W: cc.kind = SolverKind::B2W; break;
  }
  if (algo != Algo::StableK) {
    cc.rates = cfg.rates(cc.kind, cfg.T);
    if (cfg.rate_c && cc.kind == SolverKind::Hard) {
      HardRates r = tradeoff_rates_hard(*cfg.rate_c, cfg.T);
      r.V = std::get<HardRates>(cc.rates).V;
      cc.rates = r;
    }
  }
  return cc;
}

struct RunResult {
  Algo algo = Algo::StableK;
  std::uint64_t seed = 0;
  EpisodeResult episode;
  MetricsSeries metrics;
  double wall_seconds = 0.0;
};

inline RunResult run_one(const ExperimentConfig& cfg, const StableGain& gain, Algo algo, std::uint64_t seed,
                         bool keep_weights = false) {
  const auto start = std::chrono::steady_clock::now();
  Controller ctrl(cfg.sys, gain.cert, controller_config(cfg, algo));
  RunResult r;
  r.algo = algo;
  r.seed = seed;
  r.episode = run_episode(cfg.sys, cfg.disturbance(seed), cfg.environment(seed), ctrl, cfg.T, cfg.x0, keep_weights);
  r.metrics = compute_metrics(r.episode.traj);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

/// Runs every (algorithm, seed) pair; results are ordered algorithm-major, seed-minor.
inline std::vector<RunResult> run_all(const ExperimentConfig& cfg, const std::vector<Algo>& algos,
                                      bool keep_weights = false) {
  const StableGain gain = prepare_gain(cfg);
  std::vector<std::pair<Algo, std::uint64_t>> jobs;
  for (Algo a : algos)
    for (auto s : cfg.seeds) jobs.emplace_back(a, s);
  std::vector<RunResult> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), jobs.size()));
  std::size_t next = 0;
  std::mutex mu;
  auto worker = [&] {
    while (true) {
      std::size_t k;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= jobs.size()) return;
        k = next++;
      }
      try {
        results[k] = run_one(cfg, gain, jobs[k].first, jobs[k].second, keep_weights);
      } catch (const std::exception& e) {
        errors[k] = "algorithm " + to_string(jobs[k].first) + ", seed " + std::to_string(jobs[k].second) + ": " +
                    e.what();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (!e.empty()) throw Error("episode aborted: " + e);
  return results;
}

// ---------------------------------------------------------------------------
// Aggregation

struct MeanCI {
  double mean = 0.0;
  std::optional<double> ci95;  // half-width; absent for a single seed
};

inline MeanCI mean_ci(const std::vector<double>& xs) {
  MeanCI out;
  if (xs.empty()) return out;
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() >= 2) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    boost::math::students_t dist(static_cast<double>(xs.size() - 1));
    out.ci95 = boost::math::quantile(dist, 0.975) * sd / std::sqrt(static_cast<double>(xs.size()));
  }
  return out;
}

struct AlgoSummary {
  Algo algo = Algo::StableK;
  MeanCI cost;
  double mean_soft = 0.0;
  double mean_hard = 0.0;
  double max_anytime_l = 0.0;
  // Per-step means across seeds.
  std::vector<double> cum_cost, cum_cost_ci, cum_soft, cum_hard, max_l;
  std::vector<const RunResult*> runs;
};

struct CheckResult {
  std::string id;
  bool pass = false;
  double observed = 0.0;
  double threshold = 0.0;
};

struct AggregateReport {
  std::string experiment;
  std::vector<AlgoSummary> algorithms;
  std::vector<CheckResult> checks;

  const AlgoSummary* find(Algo a) const {
    for (const auto& s : algorithms)
      if (s.algo == a) return &s;
    return nullptr;
  }

  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
  }
};

inline AggregateReport aggregate(const std::string& experiment, const std::vector<RunResult>& runs) {
  AggregateReport rep;
  rep.experiment = experiment;
  for (const auto& r : runs) {
    auto it = std::find_if(rep.algorithms.begin(), rep.algorithms.end(),
                           [&](const AlgoSummary& s) { return s.algo == r.algo; });
    if (it == rep.algorithms.end()) {
      rep.algorithms.push_back(AlgoSummary{});
      rep.algorithms.back().algo = r.algo;
      it = std::prev(rep.algorithms.end());
    }
    it->runs.push_back(&r);
  }
  for (auto& s : rep.algorithms) {
    std::vector<double> cost, soft, hard;
    s.max_anytime_l = -std::numeric_limits<double>::infinity();
    for (const auto* r : s.runs) {
      cost.push_back(r->metrics.final_cost());
      soft.push_back(r->metrics.final_soft());
      hard.push_back(r->metrics.final_hard());
      s.max_anytime_l = std::max(s.max_anytime_l, r->metrics.final_max_l());
    }
    s.cost = mean_ci(cost);
    s.mean_soft = mean_ci(soft).mean;
    s.mean_hard = mean_ci(hard).mean;
    const std::size_t T = s.runs.front()->metrics.size();
    for (std::size_t k = 0; k < T; ++k) {
      std::vector<double> c, so, h, l;
      for (const auto* r : s.runs) {
        c.push_back(r->metrics.cum_cost[k]);
        so.push_back(r->metrics.cum_soft[k]);
        h.push_back(r->metrics.cum_hard[k]);
        l.push_back(r->metrics.max_l[k]);
      }
      const auto ci = mean_ci(c);
      s.cum_cost.push_back(ci.mean);
      s.cum_cost_ci.push_back(ci.ci95.value_or(std::nan("")));
      s.cum_soft.push_back(mean_ci(so).mean);
      s.cum_hard.push_back(mean_ci(h).mean);
      s.max_l.push_back(mean_ci(l).mean);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Checks

namespace thresholds {
inline constexpr double kCostRatio = 0.9;
inline constexpr std::int64_t kSoftFrom = 200;
inline constexpr double kHardPlateau = 0.15;
inline constexpr double kRegretRatio = 1.9;
inline constexpr double kOcoLossGap = 0.05;
inline constexpr std::int64_t kAnytimeFrom = 50;
inline constexpr double kAnytimeViolation = 0.1;
}  // namespace thresholds

/// Cost dominance, soft-violation sign and hard-violation plateau/order for the
/// adversarially constrained experiment.
inline void add_qvf_checks(AggregateReport& rep) {
  const AlgoSummary* base = rep.find(Algo::StableK);
  const AlgoSummary* soft = rep.find(Algo::Soft);
  for (const auto& s : rep.algorithms) {
    if (s.algo == Algo::StableK) continue;
    const std::string name = to_string(s.algo);
    if (base) {
      const double ratio = s.cost.mean / base->cost.mean;
      rep.checks.push_back({"cost_dominance_" + name, ratio <= thresholds::kCostRatio, ratio, thresholds::kCostRatio});
    }
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto* r : s.runs)
      for (std::size_t k = static_cast<std::size_t>(thresholds::kSoftFrom - 1); k < r->metrics.size(); ++k)
        worst = std::max(worst, r->metrics.cum_soft[k]);
    rep.checks.push_back({"soft_sign_" + name, worst <= 0.0, worst, 0.0});
    const std::size_t T = s.cum_hard.size();
    const double end = s.cum_hard.back();
    const double mid = s.cum_hard[T / 2 - 1];
    const double frac = end > 0.0 ? (end - mid) / end : 0.0;
    rep.checks.push_back({"hard_plateau_" + name, frac <= thresholds::kHardPlateau, frac, thresholds::kHardPlateau});
    if (soft && s.algo != Algo::Soft)
      rep.checks.push_back({"hard_order_" + name, s.mean_hard <= soft->mean_hard, s.mean_hard, soft->mean_hard});
  }
}

/// Largest static violation after the warm-up window, across seeds.
inline void add_anytime_checks(AggregateReport& rep) {
  for (const auto& s : rep.algorithms) {
    if (s.algo == Algo::StableK) continue;
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto* r : s.runs)
      for (std::size_t k = static_cast<std::size_t>(thresholds::kAnytimeFrom); k < r->metrics.size(); ++k)
        worst = std::max(worst, r->metrics.l[k]);
    rep.checks.push_back({"anytime_static_" + to_string(s.algo), worst <= thresholds::kAnytimeViolation, worst,
                          thresholds::kAnytimeViolation});
  }
}

// ---------------------------------------------------------------------------
// Regret against the grid baseline

inline std::vector<FeedbackBundle> collect_feedback(const Environment& env, std::int64_t T) {
  std::vector<FeedbackBundle> out;
  out.reserve(static_cast<std::size_t>(T));
  for (std::int64_t t = 1; t <= T; ++t) out.push_back(env(t));
  return out;
}

inline std::vector<Vec> collect_disturbances(const DisturbanceModel& dm, std::int64_t T) {
  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(T));
  for (std::int64_t t = 1; t <= T; ++t) out.push_back(dm.sample(t));
  return out;
}

inline GridSpec default_grid(const LinearSystem& sys, double kappa) {
  GridSpec g = GridSpec::symmetric(sys.m() * sys.n(), 2.0 * kappa, 0.01);
  if (sys.m() * sys.n() > 2) g.coarse_step = 0.1;
  return g;
}

inline BaselineResult baseline_for(const ExperimentConfig& cfg, const StableGain& gain, std::uint64_t seed,
                                   std::optional<GridSpec> grid = std::nullopt) {
  const auto w = collect_disturbances(cfg.disturbance(seed), cfg.T);
  const auto fb = collect_feedback(cfg.environment(seed), cfg.T);
  return offline_best_linear(cfg.sys, w, fb, cfg.x0, grid.value_or(default_grid(cfg.sys, gain.cert.kappa)),
                             gain.cert.kappa, gain.cert.rho);
}

struct RegretPoint {
  std::int64_t T = 0;
  double mean_regret = 0.0;
  std::vector<double> per_seed;
  std::size_t infeasible_baselines = 0;
};

/// Mean regret of one algorithm at each horizon (rates re-derived per horizon).
inline std::vector<RegretPoint> regret_scaling(ExperimentConfig cfg, Algo algo, const std::vector<std::int64_t>& Ts) {
  std::vector<RegretPoint> out;
  for (auto T : Ts) {
    cfg.T = T;
    const StableGain gain = prepare_gain(cfg);
    RegretPoint p;
    p.T = T;
    for (auto seed : cfg.seeds) {
      const RunResult run = run_one(cfg, gain, algo, seed);
      const BaselineResult base = baseline_for(cfg, gain, seed);
      if (!base.feasible) ++p.infeasible_baselines;
      p.per_seed.push_back(regret(run.episode.traj, base));
    }
    p.mean_regret = mean_ci(p.per_seed).mean;
    out.push_back(std::move(p));
  }
  return out;
}

inline void add_regret_checks(AggregateReport& rep, const std::vector<RegretPoint>& pts) {
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double ratio = pts[k + 1].mean_regret / pts[k].mean_regret;
    const bool ok = pts[k].mean_regret > 0.0 && ratio <= thresholds::kRegretRatio;
    rep.checks.push_back({"regret_ratio_T" + std::to_string(pts[k].T), ok, ratio, thresholds::kRegretRatio});
  }
}

// ---------------------------------------------------------------------------
// Memoryless constrained OCO sanity instance

/// Decision x in the unit disc (one 1x2 weight block with a = 2, rho = 0.5); loss
/// |x - c_t|^2 with c_t jittered around (0.8, 0.6); constraint x_0 + x_1 <= 0.4 + 0.02 sin(t/30).
struct OcoInstance {
  std::uint64_t seed = 0;
  std::int64_t T = 2000;

  DacWeights shape() const { return DacWeights::zero(1, 1, 2, 2.0, 0.5); }

  Vec center(std::int64_t t) const {
    const auto u = keyed_uniforms(seed, kCoefficientStream, t, 2);
    return (Vec(2) << 0.8 + 0.6 * (u[0] - 0.5), 0.6 + 0.6 * (u[1] - 0.5)).finished();
  }
  double bound(std::int64_t t) const { return 0.4 + 0.02 * std::sin(static_cast<double>(t) / 30.0); }

  OcoRound round(std::int64_t t) const {
    const Vec c = center(t);
    const double b = bound(t);
    return {[c](const Vec& x) { return TildeEval{(x - c).squaredNorm(), 2.0 * (x - c)}; },
            [b](const Vec& x) { return TildeEval{x(0) + x(1) - b, Vec::Ones(2)}; }};
  }
};

struct FixedPoint {
  Vec x;
  double mean_loss = std::numeric_limits<double>::infinity();
};

/// Best fixed decision on a grid over the disc that satisfies every round's constraint.
inline FixedPoint best_fixed_feasible(const OcoInstance& inst, double step = 0.005) {
  double b_min = std::numeric_limits<double>::infinity();
  Vec mean_c = Vec::Zero(2);
  double mean_sq = 0.0;
  for (std::int64_t t = 1; t <= inst.T; ++t) {
    b_min = std::min(b_min, inst.bound(t));
    const Vec c = inst.center(t);
    mean_c += c;
    mean_sq += c.squaredNorm();
  }
  mean_c /= static_cast<double>(inst.T);
  mean_sq /= static_cast<double>(inst.T);
  const double r = inst.shape().radius(1);
  FixedPoint best;
  const long n = static_cast<long>(std::floor(2.0 * r / step + 1e-9));
  for (long i = 0; i <= n; ++i)
    for (long j = 0; j <= n; ++j) {
      const Vec x = (Vec(2) << -r + step * i, -r + step * j).finished();
      if (x.norm() > r + 1e-12 || x(0) + x(1) > b_min) continue;
      // mean |x - c_t|^2 = |x|^2 - 2 <x, mean c> + mean |c|^2
      const double v = x.squaredNorm() - 2.0 * x.dot(mean_c) + mean_sq;
      if (v < best.mean_loss) {
        best.mean_loss = v;
        best.x = x;
      }
    }
  return best;
}

// ---------------------------------------------------------------------------
// Output

/// FNV-1a over the canonical JSON text.
inline std::string config_hash(const nlohmann::json& j) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

inline nlohmann::json rates_json(const Rates& r) {
  return std::visit(
      [](const auto& x) -> nlohmann::json {
        using R = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<R, SoftRates>)
          return {{"solver", "soft"}, {"V", x.V}, {"eta", x.eta}, {"alpha", x.alpha}, {"epsilon", x.epsilon}};
        else if constexpr (std::is_same_v<R, HardRates>)
          return {{"solver", "hard"}, {"V", x.V}, {"gamma", x.gamma}, {"eta", x.eta}, {"alpha", x.alpha}};
        else {
          auto s = [](const PowerSchedule& p) { return nlohmann::json{{"coef", p.coef}, {"exponent", p.exponent}}; };
          return {{"solver", "b2w"}, {"V", s(x.V)}, {"gamma", s(x.gamma)}, {"eta", s(x.eta)}, {"alpha", s(x.alpha)},
                  {"epsilon", x.epsilon}};
        }
      },
      r);
}

inline nlohmann::json config_json(const ExperimentConfig& cfg, Algo algo) {
  const auto cc = controller_config(cfg, algo);
  std::vector<double> x0(cfg.x0.data(), cfg.x0.data() + cfg.x0.size());
  return {{"experiment", cfg.name}, {"params", cfg.params}, {"algorithm", to_string(algo)}, {"T", cfg.T},
          {"H", cfg.H}, {"a", cfg.a}, {"target_rho", cfg.target_rho}, {"x0", x0},
          {"project_static", cfg.project_static}, {"rates", rates_json(cc.rates)},
          {"inner", {{"max_iters", cfg.inner.max_iters}, {"tol", cfg.inner.tol}}}};
}

inline nlohmann::json report_json(const AggregateReport& rep) {
  nlohmann::json algos = nlohmann::json::array();
  for (const auto& s : rep.algorithms) {
    algos.push_back({{"name", to_string(s.algo)},
                     {"mean_cost", s.cost.mean},
                     {"ci95", s.cost.ci95 ? nlohmann::json(*s.cost.ci95) : nlohmann::json(nullptr)},
                     {"mean_soft", s.mean_soft},
                     {"mean_hard", s.mean_hard},
                     {"max_anytime_l", s.max_anytime_l}});
  }
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"id", c.id}, {"pass", c.pass}, {"observed", c.observed}, {"threshold", c.threshold}});
  return {{"experiment", rep.experiment}, {"algorithms", algos}, {"checks", checks}};
}

/// <out>/<exp>/<algo>/seed<k>/{traj,solver,metrics}.csv + {manifest,summary}.json, and
/// <out>/<exp>/{aggregate.csv, report.json}.
inline void write_outputs(const std::filesystem::path& out, const ExperimentConfig& cfg, const StableGain& gain,
                          const std::vector<RunResult>& runs, const AggregateReport& rep) {
  namespace fs = std::filesystem;
  const fs::path root = out / cfg.name;
  for (const auto& r : runs) {
    const fs::path dir = root / to_string(r.algo) / ("seed" + std::to_string(r.seed));
    fs::create_directories(dir);
    {
      std::ofstream f(dir / "traj.csv");
      r.episode.traj.write_csv(f);
    }
    {
      std::ofstream f(dir / "solver.csv");
      write_trace_csv(f, r.episode.trace);
    }
    {
      std::ofstream f(dir / "metrics.csv");
      r.metrics.write_csv(f);
    }
    std::ofstream(dir / "summary.json") << metrics_summary(r.episode.traj, r.metrics).dump(2) << '\n';
    const auto cj = config_json(cfg, r.algo);
    std::vector<double> K(gain.K.data(), gain.K.data() + gain.K.size());
    nlohmann::json manifest = {{"config_hash", config_hash(cj)}, {"seed", r.seed},
                               {"git_describe", COCA_GIT_DESCRIBE}, {"wall_time_s", r.wall_seconds},
                               {"config", cj}, {"K", K}, {"kappa", gain.cert.kappa}, {"rho", gain.cert.rho}};
    std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
  }
  fs::create_directories(root);
  {
    std::ofstream f(root / "aggregate.csv");
    f << "algo,t,mean_cum_cost,ci95_cum_cost,mean_cum_soft,mean_cum_hard,mean_max_l\n";
    for (const auto& s : rep.algorithms)
      for (std::size_t k = 0; k < s.cum_cost.size(); ++k)
        f << to_string(s.algo) << ',' << k + 1 << ',' << fmt17(s.cum_cost[k]) << ','
          << (std::isnan(s.cum_cost_ci[k]) ? std::string() : fmt17(s.cum_cost_ci[k])) << ',' << fmt17(s.cum_soft[k])
          << ',' << fmt17(s.cum_hard[k]) << ',' << fmt17(s.max_l[k]) << '\n';
  }
  std::ofstream(root / "report.json") << report_json(rep).dump(2) << '\n';
}

}  // namespace coca::bench

#endif  // COCA_BENCH_HPP
