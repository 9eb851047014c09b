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
#ifndef COCA_METRICS_HPP
#define COCA_METRICS_HPP

/**
 * @file
 * @brief Regret and violation accounting, the offline best linear controller found by
 * exhaustive grid search, and closed-form boundedness diagnostics.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "json.hpp"

#include "coca/common.hpp"
#include "coca/feedback.hpp"
#include "coca/linsys.hpp"

namespace coca {

struct MetricsSeries {
  std::vector<double> cum_cost;
  std::vector<double> cum_soft;  // sum d_t
  std::vector<double> cum_hard;  // sum d_t^+
  std::vector<double> max_l;     // running max of l
  std::vector<double> cost, d, l;

  std::size_t size() const { return cum_cost.size(); }
  double final_cost() const { return cum_cost.empty() ? 0.0 : cum_cost.back(); }
  double final_soft() const { return cum_soft.empty() ? 0.0 : cum_soft.back(); }
  double final_hard() const { return cum_hard.empty() ? 0.0 : cum_hard.back(); }
  double final_max_l() const { return max_l.empty() ? -std::numeric_limits<double>::infinity() : max_l.back(); }

  void write_csv(std::ostream& os) const {
    os << "t,cum_cost,cum_soft,cum_hard,max_l\n";
    for (std::size_t k = 0; k < size(); ++k)
      os << k + 1 << ',' << fmt17(cum_cost[k]) << ',' << fmt17(cum_soft[k]) << ',' << fmt17(cum_hard[k]) << ','
         << fmt17(max_l[k]) << '\n';
  }
};

inline MetricsSeries compute_metrics(const TrajectoryLog& log) {
  MetricsSeries s;
  double cost = 0.0, soft = 0.0, hard = 0.0, mx = -std::numeric_limits<double>::infinity();
  for (const auto& r : log.records) {
    cost += r.cost;
    soft += r.d;
    hard += positive_part(r.d);
    mx = std::max(mx, r.l);
    s.cum_cost.push_back(cost);
    s.cum_soft.push_back(soft);
    s.cum_hard.push_back(hard);
    s.max_l.push_back(mx);
    s.cost.push_back(r.cost);
    s.d.push_back(r.d);
    s.l.push_back(r.l);
  }
  return s;
}

/// Uniform grid per gain entry (row-major over K), optionally followed by refinement.
struct GridSpec {
  std::vector<double> lo;
  std::vector<double> hi;
  double step = 0.01;
  /// When > 0, search at this coarse step first, then at `step` within one coarse cell of the winner.
  double coarse_step = 0.0;

  static GridSpec symmetric(int entries, double half_width, double step) {
    return GridSpec{std::vector<double>(static_cast<std::size_t>(entries), -half_width),
                    std::vector<double>(static_cast<std::size_t>(entries), half_width), step, 0.0};
  }
};

struct BaselineResult {
  Mat K;
  double cost = std::numeric_limits<double>::infinity();
  /// min over t of (-d_t, -l); >= -tolerance for members of the constraint set.
  double margin = -std::numeric_limits<double>::infinity();
  /// False when no grid point satisfied the constraints; K is then the best stable gain.
  bool feasible = false;
  std::int64_t horizon = 0;
  GridSpec grid;
  std::size_t evaluated = 0;
  std::size_t stable = 0;
  std::size_t admissible = 0;
};

struct ReplayData {
  const LinearSystem* sys;
  const std::vector<Vec>* w;  // w_1..w_T
  const std::vector<FeedbackBundle>* feedback;
  Vec x0;
};

namespace detail {

struct Rollout {
  double cost = 0.0;
  double margin = std::numeric_limits<double>::infinity();
  bool aborted = false;
};

/// Replays u = -K x. Stops early once cost exceeds `cost_cap` or, if `need_feasible`, a
/// constraint exceeds `tol`.
inline Rollout replay_linear(const ReplayData& data, const Mat& K, double cost_cap, bool need_feasible, double tol) {
  Rollout r;
  Vec x = data.x0;
  const auto& sys = *data.sys;
  const std::size_t T = data.w->size();
  for (std::size_t k = 0; k < T; ++k) {
    const Vec u = -K * x;
    const auto& fb = (*data.feedback)[k];
    r.cost += fb.cost(x, u).value;
    const double m = std::min(-fb.adversarial(x, u).value, -fb.static_constraint(x, u).value);
    r.margin = std::min(r.margin, m);
    if (r.cost > cost_cap || (need_feasible && m < -tol) || !std::isfinite(r.cost)) {
      r.aborted = true;
      return r;
    }
    x = sys.A() * x + sys.B() * u + (*data.w)[k];
  }
  return r;
}

inline bool better(double cost, const Mat& K, const BaselineResult& best) {
  if (cost < best.cost) return true;
  return cost == best.cost && best.K.size() > 0 && K.norm() < best.K.norm();
}

inline void search_grid(const ReplayData& data, const GridSpec& g, double step, double kappa, double rho, double tol,
                        bool need_feasible, BaselineResult& best) {
  const int m = data.sys->m();
  const int n = data.sys->n();
  const std::size_t entries = static_cast<std::size_t>(m * n);
  std::vector<long> counts(entries);
  for (std::size_t e = 0; e < entries; ++e)
    counts[e] = static_cast<long>(std::floor((g.hi[e] - g.lo[e]) / step + 1e-9)) + 1;
  std::vector<long> idx(entries, 0);
  while (true) {
    Mat K(m, n);
    for (std::size_t e = 0; e < entries; ++e)
      K(static_cast<Eigen::Index>(e) / n, static_cast<Eigen::Index>(e) % n) = g.lo[e] + step * static_cast<double>(idx[e]);
    ++best.evaluated;
    const auto check = verify_strong_stability(*data.sys, K, kappa, rho);
    if (check.ok()) {
      ++best.stable;
      const auto r = replay_linear(data, K, best.cost, need_feasible, tol);
      if (!r.aborted) {
        ++best.admissible;
        if (better(r.cost, K, best)) {
          best.cost = r.cost;
          best.K = K;
          best.margin = r.margin;
        }
      }
    }
    std::size_t e = 0;
    while (e < entries && ++idx[e] >= counts[e]) idx[e++] = 0;
    if (e == entries) break;
  }
}

}  // namespace detail

/// Best (kappa, rho)-strongly stable linear gain in hindsight among those whose replay keeps
/// every d_t and l within `tol`. Ties go to the smallest |K|_F.
inline BaselineResult offline_best_linear(const LinearSystem& sys, const std::vector<Vec>& w,
                                          const std::vector<FeedbackBundle>& feedback, const Vec& x0,
                                          const GridSpec& grid, double kappa, double rho, double tol = 1e-9) {
  detail::require_dims(w.size() == feedback.size() && !w.empty(), "baseline replay inputs");
  const std::size_t entries = static_cast<std::size_t>(sys.m() * sys.n());
  detail::require_dims(grid.lo.size() == entries && grid.hi.size() == entries, "grid spec entries");
  if (!(grid.step > 0.0)) throw ConfigError("grid step must be positive");
  const ReplayData data{&sys, &w, &feedback, x0};

  auto run = [&](bool need_feasible) {
    BaselineResult best;
    best.horizon = static_cast<std::int64_t>(w.size());
    best.grid = grid;
    if (grid.coarse_step > grid.step) {
      detail::search_grid(data, grid, grid.coarse_step, kappa, rho, tol, need_feasible, best);
      if (best.K.size() > 0) {
        GridSpec fine = grid;
        for (std::size_t e = 0; e < entries; ++e) {
          const double c = best.K(static_cast<Eigen::Index>(e) / sys.n(), static_cast<Eigen::Index>(e) % sys.n());
          fine.lo[e] = std::max(grid.lo[e], c - grid.coarse_step);
          fine.hi[e] = std::min(grid.hi[e], c + grid.coarse_step);
        }
        detail::search_grid(data, fine, grid.step, kappa, rho, tol, need_feasible, best);
      }
    } else {
      detail::search_grid(data, grid, grid.step, kappa, rho, tol, need_feasible, best);
    }
    return best;
  };

  BaselineResult best = run(true);
  best.feasible = best.K.size() > 0;
  if (!best.feasible) {
    best = run(false);
    best.feasible = false;
    if (best.K.size() == 0) throw Error("no strongly stable gain on the baseline grid");
  }
  return best;
}

/// Cumulative cost of the policy minus that of the baseline.
inline double regret(const TrajectoryLog& log, const BaselineResult& base) {
  if (static_cast<std::int64_t>(log.size()) != base.horizon) throw Error("regret: horizon mismatch");
  double c = 0.0;
  for (const auto& r : log.records) c += r.cost;
  return c - base.cost;
}

// ---------------------------------------------------------------------------
// Bounds

/// {regret, final violations, baseline K*, feasibility margin}; baseline fields are null
/// when no baseline was computed.
inline nlohmann::json metrics_summary(const TrajectoryLog& log, const MetricsSeries& m,
                                      const BaselineResult* base = nullptr) {
  nlohmann::json j = {{"T", m.size()},
                      {"cum_cost", m.final_cost()},
                      {"soft_violation", m.final_soft()},
                      {"hard_violation", m.final_hard()},
                      {"max_static_violation", m.size() ? nlohmann::json(m.final_max_l()) : nlohmann::json(nullptr)},
                      {"regret", nullptr},
                      {"baseline_K", nullptr},
                      {"baseline_cost", nullptr},
                      {"baseline_feasible", nullptr},
                      {"feasibility_margin", nullptr}};
  if (base) {
    std::vector<std::vector<double>> K;
    for (Eigen::Index r = 0; r < base->K.rows(); ++r) {
      K.emplace_back();
      for (Eigen::Index c = 0; c < base->K.cols(); ++c) K.back().push_back(base->K(r, c));
    }
    j["regret"] = regret(log, *base);
    j["baseline_K"] = K;
    j["baseline_cost"] = base->cost;
    j["baseline_feasible"] = base->feasible;
    j["feasibility_margin"] = base->margin;
  }
  return j;
}

/// |Psi_{t,i}| <= kappa^2 (1-rho)^{i-1} [i <= H] + H a kappa^2 kappa_B (1-rho)^{i-1}
inline double transfer_bound(int i, double kappa, double rho, int H, double a, double kappa_B) {
  const double decay = std::pow(1.0 - rho, i - 1);
  return kappa * kappa * decay * (i <= H ? 1.0 : 0.0) + H * a * kappa * kappa * kappa_B * decay;
}

struct DiagnosticsBounds {
  double D = 0.0;                 // |x_t| <= D, |u_t| <= (kappa + 1) D
  double approx_state_error = 0.0;  // |x_t - x~_t|
  double approx_input_error = 0.0;  // |u_t - u~_t|
  double set_diameter = 0.0;      // 2a / rho
  double L = 0.0;
  double E = 0.0;
  double xi = 0.0;
  double kappa_B = 0.0;
  double W = 0.0;
};

inline DiagnosticsBounds diagnostics(double kappa, double rho, int H, double a, double W, double kappa_B, double C0,
                                     double C1, double delta) {
  const double k2 = kappa * kappa;
  const double contraction = k2 * std::pow(1.0 - rho, H + 1);
  if (!(contraction < 1.0))
    throw ConfigError("bounds are vacuous: kappa^2 (1-rho)^(H+1) = " + fmt17(contraction) + " >= 1");
  DiagnosticsBounds b;
  b.kappa_B = kappa_B;
  b.W = W;
  b.D = W * (k2 + H * a * kappa_B * k2) / (rho * (1.0 - contraction));
  b.approx_state_error = std::pow(1.0 - rho, H) * k2 * b.D;
  b.approx_input_error = kappa * b.approx_state_error;
  b.set_diameter = 2.0 * a / rho;
  b.L = 2.0 * C0 * W * (1.0 + kappa) * (k2 + H * a * kappa_B * k2) / rho + 2.0 * a * C0 * W / rho;
  b.E = (C0 + C1) * b.D;
  b.xi = delta / 2.0;
  return b;
}

inline DiagnosticsBounds diagnostics(const LinearSystem& sys, const StrongStabilityCert& cert, int H, double a,
                                     double W, double C0 = 0.0, double C1 = 0.0, double delta = 0.0) {
  return diagnostics(cert.kappa, cert.rho, H, a, W, spectral_norm(sys.B()), C0, C1, delta);
}

}  // namespace coca

#endif  // COCA_METRICS_HPP
