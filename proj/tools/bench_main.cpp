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
// bench: run the benchmark experiments and write per-run logs, aggregates and checks.
//
//   bench run --exp qvf --algo all --T 1000 --seeds 30 --out runs --check

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "coca.hpp"

namespace {

using namespace coca;
using namespace coca::bench;

struct Options {
  std::string exp = "qvf";
  std::string algo = "all";
  std::string wind = "down";
  std::int64_t T = 1000;
  int seeds = 1;
  std::uint64_t seed0 = 0;
  std::string out = "runs";
  bool check = false;
  double rate_c = -1.0;
  bool project_static = false;
  bool subgradient = false;
  double rho = -1.0;
  double a = -1.0;
  int H = 0;
};

ExperimentConfig make_config(const Options& o) {
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < o.seeds; ++k) seeds.push_back(o.seed0 + static_cast<std::uint64_t>(k));
  ExperimentConfig cfg;
  if (o.exp == "qvf")
    cfg = qvf_config(o.T, seeds, o.wind == "up" ? Wind::Up : Wind::Down);
  else if (o.exp == "hvac")
    cfg = hvac_config(o.T, seeds);
  else if (o.exp == "scalar")
    cfg = synthetic_scalar_config(o.T, seeds);
  else
    throw ConfigError("unknown experiment '" + o.exp + "'");
  if (o.rate_c >= 0.0) cfg.rate_c = o.rate_c;
  cfg.project_static = o.project_static;
  if (o.rho > 0.0) cfg.target_rho = o.rho;
  if (o.a > 0.0) cfg.a = o.a;
  if (o.H > 0) cfg.H = o.H;
  if (o.subgradient) cfg.inner.method = InnerMethod::ProjectedSubgradient;
  return cfg;
}

int run(const Options& o) {
  const ExperimentConfig cfg = make_config(o);
  const std::vector<Algo> algos = o.algo == "all" ? all_algos() : std::vector<Algo>{parse_algo(o.algo)};
  const StableGain gain = prepare_gain(cfg);
  std::cerr << "K = " << gain.K << "  kappa = " << gain.cert.kappa << "  rho = " << gain.cert.rho << '\n';

  const auto runs = run_all(cfg, algos);
  AggregateReport rep = aggregate(cfg.name, runs);
  if (o.check) {
    if (cfg.name == "qvf") add_qvf_checks(rep);
    if (cfg.name == "hvac") add_anytime_checks(rep);
    if (cfg.name == "scalar")
      for (Algo a : algos)
        if (a != Algo::StableK) {
          auto pts = regret_scaling(cfg, a, {cfg.T, 2 * cfg.T});
          AggregateReport tmp;
          add_regret_checks(tmp, pts);
          for (auto& c : tmp.checks) {
            c.id += "_" + to_string(a);
            rep.checks.push_back(c);
          }
        }
  }
  write_outputs(o.out, cfg, gain, runs, rep);

  for (const auto& s : rep.algorithms)
    std::cout << to_string(s.algo) << ": cost " << s.cost.mean << " (ci95 " << s.cost.ci95.value_or(0.0)
              << ")  soft " << s.mean_soft << "  hard " << s.mean_hard << "  max l " << s.max_anytime_l << '\n';
  for (const auto& c : rep.checks)
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.id << "  observed " << c.observed << "  threshold " << c.threshold
              << '\n';
  return rep.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained online nonstochastic control benchmarks"};
  app.require_subcommand(1);
  Options o;
  auto* r = app.add_subcommand("run", "run one experiment");
  r->add_option("--exp", o.exp, "experiment")->check(CLI::IsMember({"qvf", "hvac", "scalar"}));
  r->add_option("--algo", o.algo, "algorithm")->check(CLI::IsMember({"soft", "hard", "b2w", "stablek", "all"}));
  r->add_option("--wind", o.wind, "qvf wind direction")->check(CLI::IsMember({"down", "up"}));
  r->add_option("--T", o.T, "horizon")->check(CLI::PositiveNumber);
  r->add_option("--seeds", o.seeds, "number of seeds")->check(CLI::PositiveNumber);
  r->add_option("--seed0", o.seed0, "first seed");
  r->add_option("--out", o.out, "output directory");
  r->add_flag("--check", o.check, "evaluate acceptance checks; exit 1 if any fails");
  r->add_option("--rate-c", o.rate_c, "Hard trade-off exponent c in [0.5, 1)");
  r->add_flag("--project-static", o.project_static, "enforce l~ <= 0 by projection instead of the hinge");
  r->add_flag("--subgradient", o.subgradient, "use the projected subgradient inner solver");
  r->add_option("--rho", o.rho, "stable-K target rho (experiment default otherwise)");
  r->add_option("--a", o.a, "weight-set radius a (experiment default otherwise)");
  r->add_option("--H", o.H, "policy memory H");
  CLI11_PARSE(app, argc, argv);
  try {
    return run(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
