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
#ifndef COCA_CONTROLLER_HPP
#define COCA_CONTROLLER_HPP

/**
 * @file
 * @brief The online loop: observe x_t, infer w_{t-1}, act with the disturbance-action
 * policy, receive c_t / d_t / l, and hand the approximated functions to a COCO solver.
 */

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "coca/coco.hpp"
#include "coca/dac.hpp"
#include "coca/feedback.hpp"
#include "coca/linsys.hpp"

namespace coca {

struct ControllerConfig {
  SolverKind kind = SolverKind::Soft;
  Rates rates = SoftRates{};
  int H = kDefaultMemory;
  /// Weight-set radius; <= 0 selects 2 kappa from the certificate.
  double a = 0.0;
  InnerSolverConfig inner{};
  /// Replace the eta-penalty on l~ by a feasibility projection.
  bool project_static = false;
  /// Weights pinned at zero: the plain u = -K x controller.
  bool frozen = false;
};

/// Per-step solver diagnostics. Q is the queue entering step t.
struct StepTrace {
  std::int64_t t = 0;
  double Q = 0.0;
  double surr_before = 0.0;
  double surr_after = 0.0;
  int iters = 0;
  double gap = 0.0;
  double d_tilde = 0.0;    // d~_t(M_t)
  double drift = 0.0;      // <M_{t+1} - M_t, grad d~_t(M_t)>
  double epsilon = 0.0;
  double l_tilde_next = 0.0;  // l~_t(M_{t+1})
  bool projection_fallback = false;
};

inline void write_trace_csv(std::ostream& os, const std::vector<StepTrace>& trace) {
  os << "t,Q,surr_before,surr_after,iters\n";
  for (const auto& s : trace)
    os << s.t << ',' << fmt17(s.Q) << ',' << fmt17(s.surr_before) << ',' << fmt17(s.surr_after) << ',' << s.iters
       << '\n';
}

class Controller {
 public:
  Controller(LinearSystem sys, StrongStabilityCert cert, ControllerConfig cfg)
      : sys_(std::move(sys)), cert_(std::move(cert)), cfg_(std::move(cfg)), hist_(cfg_.H, sys_.n()) {
    detail::require_dims(cert_.K.rows() == sys_.m() && cert_.K.cols() == sys_.n(), "certificate gain vs system");
    if (cfg_.H < 1) throw ConfigError("memory H must be >= 1");
    const double a = cfg_.a > 0.0 ? cfg_.a : 2.0 * cert_.kappa;
    weights_ = DacWeights::zero(cfg_.H, sys_.m(), sys_.n(), a, cert_.rho);
    std::visit([](const auto& r) { validate(r); }, cfg_.rates);
    const bool match = (cfg_.kind == SolverKind::Soft && std::holds_alternative<SoftRates>(cfg_.rates)) ||
                       (cfg_.kind == SolverKind::Hard && std::holds_alternative<HardRates>(cfg_.rates)) ||
                       (cfg_.kind == SolverKind::B2W && std::holds_alternative<B2WRates>(cfg_.rates));
    if (!match) throw ConfigError("learning rates do not match the selected solver");
  }

  const LinearSystem& system() const { return sys_; }
  const StrongStabilityCert& cert() const { return cert_; }
  const Mat& K() const { return cert_.K; }
  const ControllerConfig& config() const { return cfg_; }
  const DacWeights& weights() const { return weights_; }
  double queue() const { return queue_; }
  const DisturbanceHistory& history() const { return hist_; }
  /// Index of the step in progress (1-based); 0 before the first act().
  std::int64_t t() const { return t_; }

  /// Infers w_{t-1} from the observed transition (t >= 2) and returns the DAC action.
  Vec act(const Vec& x) {
    detail::require_dims(x.size() == sys_.n(), "observed state");
    if (acted_) throw Error("act() called twice without update()");
    ++t_;
    if (prev_) hist_.push(infer_disturbance(sys_, x, prev_->first, prev_->second));
    Vec u = coca::act(cert_.K, weights_, x, hist_);
    prev_ = std::make_pair(x, u);
    acted_ = true;
    return u;
  }

  StepTrace update(const FeedbackBundle& fb) {
    if (!acted_) throw Error("update() called before act()");
    acted_ = false;
    StepTrace tr;
    tr.t = t_;
    tr.Q = queue_;
    if (cfg_.frozen) return tr;
    if (cfg_.kind == SolverKind::B2W && !fb.is_strongly_convex)
      throw ConfigError("Best2Worlds requires a strongly convex cost");

    const SensitivityMap J = sensitivity(sys_, cert_.K, hist_);
    const Vec flat = weights_.flatten();
    const TildeEval c = grad_tilde(fb.cost, J, flat);
    const TildeEval d = grad_tilde(fb.adversarial, J, flat);
    const HingeOracle d_hinge = [&J, &fb](const Vec& m) { return grad_tilde(fb.adversarial, J, m); };
    const HingeOracle l_hinge = [&J, &fb](const Vec& m) { return grad_tilde(fb.static_constraint, J, m); };
    tr.d_tilde = d.value;

    bool project = false;
    if (cfg_.project_static) {
      project = l_hinge(Vec::Zero(flat.size())).value <= 0.0;
      tr.projection_fallback = !project;
      if (!project) ++fallbacks_;
    }

    StepOutcome out = std::visit(
        [&](const auto& r) -> StepOutcome {
          using R = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<R, SoftRates>) {
            SoftRates rr = r;
            tr.epsilon = rr.epsilon;
            if (project) rr.eta = 0.0;
            return soft_step(weights_, queue_, rr, c.grad, d.grad, d.value, l_hinge, cfg_.inner);
          } else if constexpr (std::is_same_v<R, HardRates>) {
            HardRates rr = r;
            if (project) rr.eta = 0.0;
            return hard_step(weights_, rr, c.grad, d_hinge, l_hinge, cfg_.inner);
          } else {
            B2WRates rr = r;
            tr.epsilon = rr.epsilon;
            if (project) rr.eta.coef = 0.0;
            return b2w_step(weights_, queue_, rr, t_, c.grad, d.grad, d.value, d_hinge, l_hinge, cfg_.inner);
          }
        },
        cfg_.rates);

    DacWeights next = std::move(out.weights);
    if (project) next = static_projection_variant(next, l_hinge);
    tr.surr_before = out.solve.anchor_value;
    tr.surr_after = out.solve.value;
    tr.iters = out.solve.iterations;
    tr.gap = out.solve.gap;
    tr.l_tilde_next = l_hinge(next.flatten()).value;
    if (cfg_.kind != SolverKind::Hard) {
      // The queue sees the weights actually applied next step.
      tr.drift = (next.flatten() - flat).dot(d.grad);
      queue_ = detail::queue_update(queue_, d.value, tr.drift, tr.epsilon);
    }
    weights_ = std::move(next);
    return tr;
  }

  /// Pulls a candidate back along the segment toward an l~-feasible point (the current
  /// weights when feasible, otherwise M = 0) until l~ <= 0.
  DacWeights static_projection_variant(const DacWeights& candidate, const HingeOracle& l_hinge) const {
    const Vec cand = candidate.flatten();
    if (l_hinge(cand).value <= 0.0) return candidate;
    Vec anchor = weights_.flatten();
    if (l_hinge(anchor).value > 0.0) anchor.setZero();
    if (l_hinge(anchor).value > 0.0) return candidate;
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-9) {
      const double mid = 0.5 * (lo + hi);
      if (l_hinge(anchor + mid * (cand - anchor)).value <= 0.0)
        lo = mid;
      else
        hi = mid;
    }
    return candidate.with_flat(anchor + lo * (cand - anchor));
  }

  std::int64_t projection_fallbacks() const { return fallbacks_; }

 private:
  LinearSystem sys_;
  StrongStabilityCert cert_;
  ControllerConfig cfg_;
  DacWeights weights_;
  double queue_ = 0.0;
  DisturbanceHistory hist_;
  std::optional<std::pair<Vec, Vec>> prev_;
  std::int64_t t_ = 0;
  bool acted_ = false;
  std::int64_t fallbacks_ = 0;
};

using Environment = std::function<FeedbackBundle(std::int64_t t)>;

struct EpisodeResult {
  TrajectoryLog traj;
  std::vector<StepTrace> trace;
  std::vector<DacWeights> weights;  // M_t applied at step t
};

/// T steps of observe -> act -> feedback -> update -> plant step, starting from x0.
inline EpisodeResult run_episode(const LinearSystem& sys, const DisturbanceModel& dm, const Environment& env,
                                 Controller& ctrl, std::int64_t T, const Vec& x0, bool keep_weights = false) {
  if (T < 1) throw ConfigError("episode horizon must be >= 1");
  detail::require_dims(x0.size() == sys.n() && dm.dim() == sys.n(), "initial state / disturbance dimension");
  EpisodeResult res;
  res.traj.records.reserve(static_cast<std::size_t>(T));
  res.trace.reserve(static_cast<std::size_t>(T));
  Vec x = x0;
  for (std::int64_t t = 1; t <= T; ++t) {
    try {
      if (keep_weights) res.weights.push_back(ctrl.weights());
      const Vec u = ctrl.act(x);
      const FeedbackBundle fb = env(t);
      StepRecord rec;
      rec.t = t;
      rec.x = x;
      rec.u = u;
      rec.w = dm.sample(t);
      rec.cost = fb.cost(x, u).value;
      rec.d = fb.adversarial(x, u).value;
      rec.l = fb.static_constraint(x, u).value;
      res.trace.push_back(ctrl.update(fb));
      x = step(sys, x, u, rec.w);
      res.traj.records.push_back(std::move(rec));
    } catch (const NumericError& e) {
      throw NumericError("step " + std::to_string(t) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError("step " + std::to_string(t) + ": " + e.what());
    } catch (const Error& e) {
      throw Error("step " + std::to_string(t) + ": " + e.what());
    }
  }
  return res;
}

}  // namespace coca

#endif  // COCA_CONTROLLER_HPP
