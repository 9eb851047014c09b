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
#ifndef COCA_COCO_HPP
#define COCA_COCO_HPP

/**
 * @file
 * @brief Constrained online convex optimization with memory: the Soft (virtual queue),
 * Hard (proximal hinge penalty) and Best2Worlds solvers, their learning-rate schedules,
 * and the inner minimizer of the per-step surrogate
 *
 *     F(M) = <G, M - M_t> + sum_j w_j h_j^+(M) + alpha |M - M_t|^2,   M in the weight set.
 *
 * The surrogate is 2 alpha-strongly convex. The default inner method is a proximal
 * cutting-plane scheme: each hinge h_j is replaced by the max of its tangent cuts, the
 * resulting model is solved exactly through its dual (coordinate ascent with exact
 * line searches, the weight-set projection staying inside), and cuts are added at the
 * model minimizer until the certified gap closes. Piecewise-affine hinges are captured
 * exactly after finitely many cuts.
 */

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "coca/common.hpp"
#include "coca/dac.hpp"

namespace coca {

// ---------------------------------------------------------------------------
// Learning rates

struct SoftRates {
  double V = 1.0;
  double eta = 1.0;
  double alpha = 1.0;
  double epsilon = 0.0;
};

struct HardRates {
  double V = 1.0;
  double gamma = 1.0;
  double eta = 1.0;
  double alpha = 1.0;
};

/// coef * t^exponent
struct PowerSchedule {
  double coef = 1.0;
  double exponent = 0.0;

  double at(std::int64_t t) const { return coef * std::pow(static_cast<double>(t), exponent); }
};

struct B2WRates {
  PowerSchedule V{1.0, 0.5};
  PowerSchedule gamma{1.0, 1.5};
  PowerSchedule eta{1.0, 1.5};
  PowerSchedule alpha{0.5, 1.5};
  double epsilon = 0.0;
};

enum class SolverKind { Soft, Hard, B2W };

using Rates = std::variant<SoftRates, HardRates, B2WRates>;

inline std::string to_string(SolverKind k) {
  switch (k) {
    case SolverKind::Soft: return "soft";
    case SolverKind::Hard: return "hard";
    case SolverKind::B2W: return "b2w";
  }
  return "?";
}

inline void validate(const SoftRates& r) {
  if (!(r.V > 0 && r.eta > 0 && r.alpha > 0 && r.epsilon > 0)) throw ConfigError("soft rates must be positive");
}
inline void validate(const HardRates& r) {
  if (!(r.V > 0 && r.gamma > 0 && r.eta > 0 && r.alpha > 0)) throw ConfigError("hard rates must be positive");
}
inline void validate(const B2WRates& r) {
  for (const auto* s : {&r.V, &r.gamma, &r.eta, &r.alpha})
    if (!(s->coef > 0 && s->exponent >= 0)) throw ConfigError("best2worlds schedules must be positive and nondecreasing");
  if (!(r.epsilon > 0)) throw ConfigError("best2worlds epsilon must be positive");
}

/// Rates from the quadrotor experiment table; every solver uses memory H = 7.
inline Rates default_rates(SolverKind kind, std::int64_t T) {
  if (T < 1) throw ConfigError("horizon T must be >= 1");
  const double Td = static_cast<double>(T);
  switch (kind) {
    case SolverKind::Soft: return SoftRates{std::sqrt(Td), std::pow(Td, 1.5), Td, 1.0 / std::sqrt(Td)};
    case SolverKind::Hard: return HardRates{1.0, std::pow(Td, 2.0 / 3.0), std::pow(Td, 1.5), std::pow(Td, 2.0 / 3.0)};
    case SolverKind::B2W:
      return B2WRates{{1.0, 0.5}, {1.0, 1.5}, {1.0, 1.5}, {0.5, 1.5}, 1.0 / std::sqrt(Td)};
  }
  throw ConfigError("unknown solver");
}

inline constexpr int kDefaultMemory = 7;

/// Thermal-control rates: V = 0.1 with the Hard solver's gamma, eta, alpha. The Soft and
/// Best2Worlds variants reuse the same constants (the experiment has no adversarial constraint).
inline Rates hvac_rates(SolverKind kind, std::int64_t T) {
  if (T < 1) throw ConfigError("horizon T must be >= 1");
  const double Td = static_cast<double>(T);
  const double g = std::pow(Td, 2.0 / 3.0);
  const double eta = std::pow(Td, 1.5);
  switch (kind) {
    case SolverKind::Soft: return SoftRates{0.1, eta, g, 1.0 / std::sqrt(Td)};
    case SolverKind::Hard: return HardRates{0.1, g, eta, g};
    case SolverKind::B2W: return B2WRates{{0.1, 0.0}, {g, 0.0}, {eta, 0.0}, {g, 0.0}, 1.0 / std::sqrt(Td)};
  }
  throw ConfigError("unknown solver");
}

/// Hard-solver rates trading regret against violation: V = 1, gamma = T^{2c}, eta = T^{3/2}, alpha = T^c.
inline HardRates tradeoff_rates_hard(double c, std::int64_t T) {
  if (!(c >= 0.5 && c < 1.0)) throw ConfigError("trade-off exponent c must lie in [0.5, 1)");
  if (T < 1) throw ConfigError("horizon T must be >= 1");
  const double Td = static_cast<double>(T);
  return HardRates{1.0, std::pow(Td, 2.0 * c), std::pow(Td, 1.5), std::pow(Td, c)};
}

/// Rates carrying the log factors of the regret analysis. Not used by the experiments.
inline SoftRates theory_soft_rates(std::int64_t T, double set_diameter) {
  const double Td = static_cast<double>(T);
  const double lg = std::log(Td);
  return SoftRates{std::sqrt(Td) * std::pow(lg, 4), std::pow(Td, 1.5) * lg * lg, Td * std::pow(lg, 7),
                   (1.0 + set_diameter * set_diameter) * std::pow(lg, 3) / std::sqrt(Td)};
}

inline B2WRates theory_b2w_rates(std::int64_t T, double strong_convexity) {
  const double Td = static_cast<double>(T);
  return B2WRates{{1.0, 0.5}, {1.0, 1.5}, {1.0, 1.5}, {strong_convexity / 2.0, 1.5},
                  std::pow(std::log(Td), 3) / std::sqrt(Td)};
}

// ---------------------------------------------------------------------------
// Surrogate

/// Convex scalar function of the flattened weights with a (sub)gradient oracle.
using HingeOracle = std::function<TildeEval(const Vec& flat)>;

struct HingeTerm {
  double weight = 0.0;
  HingeOracle oracle;
};

struct SurrogateProblem {
  DacWeights anchor;  // M_t; also carries the set parameters (H, a, rho)
  Vec linear;         // G
  std::vector<HingeTerm> hinges;
  double alpha = 1.0;

  double value(const Vec& flat) const {
    const Vec anchor_flat = anchor.flatten();
    const Vec diff = flat - anchor_flat;
    double v = linear.dot(diff) + alpha * diff.squaredNorm();
    for (const auto& h : hinges) v += h.weight * positive_part(h.oracle(flat).value);
    return v;
  }
};

enum class InnerMethod { CuttingPlane, ProjectedSubgradient };

struct InnerSolverConfig {
  int max_iters = 300;
  /// Target accuracy in the weights: the solver stops once |M - M*| <= tol is certified
  /// (or the gap reaches floating-point resolution). The subgradient method stops on
  /// weight change < tol instead.
  double tol = 1e-9;
  /// Test-only cross-check of 1-D instances against a dense grid.
  bool grid_check = false;
  InnerMethod method = InnerMethod::CuttingPlane;
};

struct SurrogateResult {
  DacWeights weights;
  double value = 0.0;         // F(M+)
  double anchor_value = 0.0;  // F(M_t)
  /// Certified upper bound on F(M+) - min F (infinity when no bound is available).
  double gap = std::numeric_limits<double>::infinity();
  int iterations = 0;
  /// Dense-grid minimum of F, filled in by the 1-D grid cross-check.
  std::optional<double> grid_value;
};

namespace detail {

struct Cut {
  std::size_t hinge;
  Vec g;
  double beta;
  double lambda = 0.0;
};

/// Exact dual coordinate ascent for
///   min_{M in set} <G, M - a> + alpha |M - a|^2 + sum_j w_j max(0, max_{k in j} g_k'M + beta_k).
class CutModel {
 public:
  CutModel(const SurrogateProblem& p, const Vec& anchor)
      : p_(p), anchor_(anchor), shift_(Vec::Zero(anchor.size())), used_(p.hinges.size(), 0.0) {}

  std::vector<Cut>& cuts() { return cuts_; }

  bool add_cut(std::size_t hinge, Vec g, double beta) {
    for (const auto& c : cuts_) {
      if (c.hinge != hinge) continue;
      const double scale = 1.0 + c.g.lpNorm<Eigen::Infinity>();
      if ((c.g - g).lpNorm<Eigen::Infinity>() <= 1e-13 * scale && std::abs(c.beta - beta) <= 1e-12 * (1.0 + std::abs(beta)))
        return false;
    }
    cuts_.push_back(Cut{hinge, std::move(g), beta, 0.0});
    return true;
  }

  Vec primal() const { return primal_from(shift_); }

  double dual_value() const {
    const Vec M = primal();
    const Vec diff = M - anchor_;
    double q = p_.linear.dot(diff) + p_.alpha * diff.squaredNorm();
    for (const auto& c : cuts_) q += c.lambda * (c.g.dot(M) + c.beta);
    return q;
  }

  double model_value(const Vec& M) const {
    const Vec diff = M - anchor_;
    double v = p_.linear.dot(diff) + p_.alpha * diff.squaredNorm();
    std::vector<double> best(p_.hinges.size(), 0.0);
    for (const auto& c : cuts_) best[c.hinge] = std::max(best[c.hinge], c.g.dot(M) + c.beta);
    for (std::size_t j = 0; j < best.size(); ++j) v += p_.hinges[j].weight * best[j];
    return v;
  }

  /// Model value of hinge j (without weight), clipped at zero.
  double model_hinge(std::size_t j, const Vec& M) const {
    double best = 0.0;
    for (const auto& c : cuts_)
      if (c.hinge == j) best = std::max(best, c.g.dot(M) + c.beta);
    return best;
  }

  void solve(int max_sweeps, double gap_tol) {
    std::fill(used_.begin(), used_.end(), 0.0);
    shift_.setZero();
    for (const auto& c : cuts_) {
      used_[c.hinge] += c.lambda;
      shift_ += c.lambda * c.g;
    }
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      for (std::size_t k = 0; k < cuts_.size(); ++k) {
        auto& c = cuts_[k];
        const double cap = p_.hinges[c.hinge].weight - (used_[c.hinge] - c.lambda);
        move(c.g, c.beta, -c.lambda, std::max(0.0, cap - c.lambda), [&](double t) {
          c.lambda += t;
          used_[c.hinge] += t;
          shift_ += t * c.g;
        });
      }
      // Mass transfer between cuts of the same hinge (needed when its cap is tight).
      for (std::size_t k = 0; k < cuts_.size(); ++k) {
        for (std::size_t l = 0; l < cuts_.size(); ++l) {
          if (k == l || cuts_[k].hinge != cuts_[l].hinge || cuts_[l].lambda <= 0.0) continue;
          const Vec dir = cuts_[k].g - cuts_[l].g;
          move(dir, cuts_[k].beta - cuts_[l].beta, 0.0, cuts_[l].lambda, [&](double t) {
            cuts_[k].lambda += t;
            cuts_[l].lambda -= t;
            shift_ += t * dir;
          });
        }
      }
      const Vec M = primal();
      if (model_value(M) - dual_value() <= gap_tol) break;
    }
  }

 private:
  Vec primal_from(const Vec& shift) const {
    Vec M = anchor_ - (p_.linear + shift) / (2.0 * p_.alpha);
    project_flat(M, p_.anchor);
    return M;
  }

  /// Maximizes the dual along shift += t dir, t in [lo, hi] (lo <= 0 <= hi); the
  /// directional derivative dir'M(t) + beta is nonincreasing in t.
  template <typename Apply>
  void move(const Vec& dir, double beta, double lo, double hi, Apply&& apply) {
    const double dn = dir.squaredNorm();
    if (dn == 0.0 || !(hi > lo)) return;
    auto slope = [&](double t) { return dir.dot(primal_from(shift_ + t * dir)) + beta; };
    const double scale = std::sqrt(dn) * (1.0 + anchor_.norm() + shift_.norm() / (2.0 * p_.alpha)) + std::abs(beta);
    const double flat = 1e-14 * scale;
    const double s0 = slope(0.0);
    if (std::abs(s0) <= flat) return;
    const double sign = s0 > 0.0 ? 1.0 : -1.0;
    const double end = sign > 0.0 ? hi : lo;
    if (end == 0.0) return;
    // Unprojected root as the first probe.
    double probe = 2.0 * p_.alpha * s0 / dn;
    if (sign * probe >= sign * end) probe = end;
    double sp = slope(probe);
    if (sign * sp >= -flat && probe == end) {
      apply(end);
      return;
    }
    if (std::abs(sp) <= flat) {
      apply(probe);
      return;
    }
    double a = 0.0, sa = s0, b = probe, sb = sp;
    if (sign * sp > 0.0) {
      const double se = slope(end);
      if (sign * se >= 0.0) {
        apply(end);
        return;
      }
      a = probe;
      sa = sp;
      b = end;
      sb = se;
    }
    // Illinois regula falsi on the sign change between a and b.
    int side = 0;
    double t = b;
    for (int it = 0; it < 100; ++it) {
      t = (a * sb - b * sa) / (sb - sa);
      const double st = slope(t);
      if (std::abs(st) <= flat || std::abs(b - a) <= 1e-15 * (std::abs(a) + std::abs(b))) break;
      if ((st > 0.0) == (sa > 0.0)) {
        a = t;
        sa = st;
        if (side == -1) sb *= 0.5;
        side = -1;
      } else {
        b = t;
        sb = st;
        if (side == 1) sa *= 0.5;
        side = 1;
      }
    }
    apply(t);
  }

  const SurrogateProblem& p_;
  Vec anchor_;
  std::vector<Cut> cuts_;
  Vec shift_;
  std::vector<double> used_;
};

inline double surrogate_at(const SurrogateProblem& p, const Vec& anchor, const Vec& flat, std::vector<TildeEval>* evals) {
  const Vec diff = flat - anchor;
  double v = p.linear.dot(diff) + p.alpha * diff.squaredNorm();
  for (std::size_t j = 0; j < p.hinges.size(); ++j) {
    TildeEval e = p.hinges[j].oracle(flat);
    if (!std::isfinite(e.value) || !e.grad.allFinite()) throw NumericError("non-finite hinge oracle in surrogate");
    v += p.hinges[j].weight * positive_part(e.value);
    if (evals) (*evals)[j] = std::move(e);
  }
  return v;
}

inline SurrogateResult minimize_cutting_plane(const SurrogateProblem& p, const InnerSolverConfig& cfg) {
  const Vec anchor = p.anchor.flatten();
  std::vector<TildeEval> evals(p.hinges.size());
  const double anchor_value = surrogate_at(p, anchor, anchor, &evals);
  if (!std::isfinite(anchor_value)) throw NumericError("non-finite surrogate at the anchor");

  CutModel model(p, anchor);
  for (std::size_t j = 0; j < p.hinges.size(); ++j)
    model.add_cut(j, evals[j].grad, evals[j].value - evals[j].grad.dot(anchor));

  Vec best = anchor;
  double best_value = anchor_value;
  double lower = -std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    const double floor = 1e-13 * (1.0 + std::abs(best_value));
    model.solve(2000, std::max(floor, 0.25 * p.alpha * cfg.tol * cfg.tol));
    const Vec M = model.primal();
    lower = std::max(lower, model.dual_value());
    const double value = surrogate_at(p, anchor, M, &evals);
    if (!std::isfinite(value)) throw NumericError("non-finite surrogate value");
    if (value < best_value) {
      best_value = value;
      best = M;
    }
    const double gap = best_value - lower;
    if (gap <= std::max(p.alpha * cfg.tol * cfg.tol, 1e-12 * (1.0 + std::abs(best_value)))) {
      ++it;
      break;
    }
    bool added = false;
    for (std::size_t j = 0; j < p.hinges.size(); ++j) {
      const double h = evals[j].value;
      if (h > model.model_hinge(j, M) + 1e-14 * (1.0 + std::abs(h)))
        added |= model.add_cut(j, evals[j].grad, h - evals[j].grad.dot(M));
    }
    if (!added && gap <= 1e-9 * (1.0 + std::abs(best_value))) {
      ++it;
      break;
    }
  }
  SurrogateResult out;
  out.weights = p.anchor.with_flat(best);
  out.value = best_value;
  out.anchor_value = anchor_value;
  out.gap = std::max(0.0, best_value - lower);
  out.iterations = it;
  return out;
}

inline SurrogateResult minimize_subgradient(const SurrogateProblem& p, const InnerSolverConfig& cfg) {
  const Vec anchor = p.anchor.flatten();
  std::vector<TildeEval> evals(p.hinges.size());
  const double anchor_value = surrogate_at(p, anchor, anchor, &evals);
  Vec M = anchor;
  Vec best = anchor;
  double best_value = anchor_value;
  int it = 1;
  for (; it <= cfg.max_iters; ++it) {
    if (it > 1) surrogate_at(p, anchor, M, &evals);
    Vec g = p.linear + 2.0 * p.alpha * (M - anchor);
    for (std::size_t j = 0; j < p.hinges.size(); ++j)
      if (evals[j].value > 0.0) g += p.hinges[j].weight * evals[j].grad;
    Vec next = M - g / (2.0 * p.alpha * it);
    project_flat(next, p.anchor);
    const double change = (next - M).norm();
    M = std::move(next);
    const double value = surrogate_at(p, anchor, M, nullptr);
    if (!std::isfinite(value)) throw NumericError("non-finite surrogate value");
    if (value < best_value) {
      best_value = value;
      best = M;
    }
    if (change < cfg.tol) break;
  }
  SurrogateResult out;
  out.weights = p.anchor.with_flat(best);
  out.value = best_value;
  out.anchor_value = anchor_value;
  out.iterations = std::min(it, cfg.max_iters);
  return out;
}

}  // namespace detail

/// Minimizes the surrogate over the weight set. The result never scores worse than the anchor.
inline SurrogateResult minimize_surrogate(const SurrogateProblem& p, const InnerSolverConfig& cfg = {}) {
  if (!(p.alpha > 0.0)) throw ConfigError("surrogate needs alpha > 0");
  if (cfg.max_iters < 1 || !(cfg.tol > 0.0)) throw ConfigError("inner solver needs max_iters >= 1 and tol > 0");
  detail::require_dims(p.linear.size() == p.anchor.dim(), "surrogate linear term");
  for (const auto& h : p.hinges)
    if (!(h.weight >= 0.0)) throw ConfigError("hinge weights must be nonnegative");
  SurrogateResult out = cfg.method == InnerMethod::CuttingPlane ? detail::minimize_cutting_plane(p, cfg)
                                                                 : detail::minimize_subgradient(p, cfg);
  if (cfg.grid_check && p.anchor.dim() == 1) {
    constexpr int kPoints = 200000;
    const double r = p.anchor.radius(1);
    const Vec anchor = p.anchor.flatten();
    double best = std::numeric_limits<double>::infinity();
    Vec m(1);
    for (int k = 0; k <= kPoints; ++k) {
      m(0) = -r + 2.0 * r * k / kPoints;
      best = std::min(best, detail::surrogate_at(p, anchor, m, nullptr));
    }
    out.grid_value = best;
    if (out.value > best + 1e-6)
      throw NumericError("inner solver value " + fmt17(out.value) + " exceeds the grid minimum " + fmt17(best));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Solver steps

inline constexpr double kQueueLimit = 1e12;

struct StepOutcome {
  DacWeights weights;
  double queue = 0.0;
  double drift = 0.0;  // <M_{t+1} - M_t, grad d~_t(M_t)>
  SurrogateResult solve;
};

namespace detail {

inline double queue_update(double Q, double d_val, double drift, double epsilon) {
  const double next = positive_part(Q + d_val + drift + epsilon);
  if (!std::isfinite(next) || next > kQueueLimit)
    throw NumericError("virtual queue overflow: Q = " + fmt17(next) + " (check learning rates)");
  return next;
}

/// Shared body of the queue-based solvers; gamma = 0 drops the hinge on d~.
inline StepOutcome queue_step(const DacWeights& M, double Q, double V, double gamma, double eta, double alpha,
                              double epsilon, const Vec& grad_c, const Vec& grad_d, double d_val,
                              const HingeOracle* d_hinge, const HingeOracle& l_hinge, const InnerSolverConfig& cfg) {
  if (!(Q >= 0.0)) throw NumericError("virtual queue must be nonnegative");
  if (!grad_c.allFinite() || !grad_d.allFinite() || !std::isfinite(d_val)) throw NumericError("non-finite feedback");
  SurrogateProblem p;
  p.anchor = M;
  p.linear = V * grad_c;
  if (Q != 0.0) p.linear += Q * grad_d;
  if (gamma != 0.0 && d_hinge) p.hinges.push_back({gamma, *d_hinge});
  p.hinges.push_back({eta, l_hinge});
  p.alpha = alpha;
  StepOutcome out;
  out.solve = minimize_surrogate(p, cfg);
  out.weights = out.solve.weights;
  out.drift = (out.weights.flatten() - M.flatten()).dot(grad_d);
  out.queue = queue_update(Q, d_val, out.drift, epsilon);
  return out;
}

}  // namespace detail

/// Lyapunov drift-plus-penalty step.
inline StepOutcome soft_step(const DacWeights& M, double Q, const SoftRates& r, const Vec& grad_c, const Vec& grad_d,
                             double d_val, const HingeOracle& l_hinge, const InnerSolverConfig& cfg = {}) {
  return detail::queue_step(M, Q, r.V, 0.0, r.eta, r.alpha, r.epsilon, grad_c, grad_d, d_val, nullptr, l_hinge, cfg);
}

/// Proximal penalty step; there is no queue (the returned queue is 0).
inline StepOutcome hard_step(const DacWeights& M, const HardRates& r, const Vec& grad_c, const HingeOracle& d_hinge,
                             const HingeOracle& l_hinge, const InnerSolverConfig& cfg = {}) {
  if (!grad_c.allFinite()) throw NumericError("non-finite feedback");
  SurrogateProblem p;
  p.anchor = M;
  p.linear = r.V * grad_c;
  p.hinges.push_back({r.gamma, d_hinge});
  p.hinges.push_back({r.eta, l_hinge});
  p.alpha = r.alpha;
  StepOutcome out;
  out.solve = minimize_surrogate(p, cfg);
  out.weights = out.solve.weights;
  return out;
}

/// Queue term and hinge on d~ together, with rates evaluated at step t.
inline StepOutcome b2w_step(const DacWeights& M, double Q, const B2WRates& r, std::int64_t t, const Vec& grad_c,
                            const Vec& grad_d, double d_val, const HingeOracle& d_hinge, const HingeOracle& l_hinge,
                            const InnerSolverConfig& cfg = {}) {
  if (t < 1) throw ConfigError("best2worlds step index starts at 1");
  return detail::queue_step(M, Q, r.V.at(t), r.gamma.at(t), r.eta.at(t), r.alpha.at(t), r.epsilon, grad_c, grad_d,
                            d_val, &d_hinge, l_hinge, cfg);
}

/// One round of a memoryless constrained OCO problem: loss and adversarial constraint as
/// functions of the (flattened) weights directly.
struct OcoRound {
  HingeOracle loss;
  HingeOracle constraint;
};

struct OcoRun {
  std::vector<Vec> decisions;  // M_t played at round t
  std::vector<double> loss, constraint, queue;
};

/// COCO-Soft on a memoryless instance; the static constraint is absent.
inline OcoRun run_soft_oco(DacWeights M, const SoftRates& r, std::int64_t T,
                           const std::function<OcoRound(std::int64_t)>& round, const InnerSolverConfig& cfg = {}) {
  validate(r);
  const HingeOracle none = [](const Vec& m) { return TildeEval{-1.0, Vec::Zero(m.size())}; };
  OcoRun run;
  double Q = 0.0;
  for (std::int64_t t = 1; t <= T; ++t) {
    const OcoRound rd = round(t);
    const Vec flat = M.flatten();
    const TildeEval f = rd.loss(flat);
    const TildeEval g = rd.constraint(flat);
    run.decisions.push_back(flat);
    run.loss.push_back(f.value);
    run.constraint.push_back(g.value);
    run.queue.push_back(Q);
    StepOutcome out = soft_step(M, Q, r, f.grad, g.grad, g.value, none, cfg);
    M = std::move(out.weights);
    Q = out.queue;
  }
  return run;
}

}  // namespace coca

#endif  // COCA_COCO_HPP
