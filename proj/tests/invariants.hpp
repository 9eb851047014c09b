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
#ifndef COCA_TESTS_INVARIANTS_HPP
#define COCA_TESTS_INVARIANTS_HPP

// Property checks shared by the unit tests and the acceptance binary. Each returns ok plus
// a one-line description of the worst case seen.

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "coca.hpp"

namespace coca::checks {

struct Outcome {
  bool ok = true;
  std::string detail;
};

inline Vec random_vec(std::mt19937_64& gen, Eigen::Index n, double scale = 1.0) {
  std::normal_distribution<double> N(0.0, 1.0);
  Vec v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = scale * N(gen);
  return v;
}

/// Random member of the weight set; roughly half the blocks sit on their boundary.
inline DacWeights random_member(std::mt19937_64& gen, int H, int m, int n, double a, double rho) {
  DacWeights w = DacWeights::zero(H, m, n, a, rho);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 1; i <= H; ++i) {
    Mat b = Eigen::Map<Mat>(random_vec(gen, m * n).data(), m, n);
    const double target = w.radius(i) * (U(gen) < 0.5 ? 1.0 : U(gen));
    w.block(i) = b * (target / std::max(b.norm(), 1e-300));
  }
  return w;
}

struct Plant {
  std::string name;
  LinearSystem sys;
  StableGain gain;
  double W;
  DisturbanceModel dm;
};

inline std::vector<Plant> plants() {
  std::vector<Plant> out;
  for (auto cfg : {bench::qvf_config(1, {0}), bench::hvac_config(1, {0}), bench::synthetic_scalar_config(1, {0})}) {
    // Zero-mean versions of the benchmark noise keep the bounds informative.
    const Vec half = 0.5 * (cfg.w_hi - cfg.w_lo);
    auto dm = DisturbanceModel::uniform(-half, half, 7);
    out.push_back({cfg.name, cfg.sys, bench::prepare_gain(cfg), dm.bound(), dm});
  }
  return out;
}

inline double kappa_B(const LinearSystem& sys) { return spectral_norm(sys.B()); }

/// |Psi_i| <= kappa^2 (1-rho)^{i-1}[i<=H] + H a kappa^2 kappa_B (1-rho)^{i-1} on random members.
inline Outcome transfer_bound_holds(int trials = 200) {
  std::mt19937_64 gen(11);
  Outcome o;
  double worst = -1e300;
  for (const auto& p : plants()) {
    const auto& c = p.gain.cert;
    for (int H : {1, 3, 7}) {
      const double a = 2.0 * c.kappa;
      for (int k = 0; k < trials; ++k) {
        const DacWeights M = random_member(gen, H, p.sys.m(), p.sys.n(), a, c.rho);
        const TransferStack st = transfer_stack(p.sys, c.K, M);
        for (int i = 1; i <= 2 * H; ++i) {
          const double lhs = spectral_norm(st[i]);
          const double rhs = transfer_bound(i, c.kappa, c.rho, H, a, kappa_B(p.sys));
          worst = std::max(worst, lhs - rhs);
          if (lhs > rhs * (1.0 + 1e-12) + 1e-12) {
            o.ok = false;
            o.detail = p.name + ": |Psi_" + std::to_string(i) + "| = " + fmt17(lhs) + " > " + fmt17(rhs);
            return o;
          }
        }
      }
    }
  }
  o.detail = "max(|Psi| - bound) = " + fmt17(worst);
  return o;
}

/// Rollouts with weights redrawn from the set every step stay within |x| <= D, |u| <= (kappa+1) D.
inline Outcome state_action_bounds_hold(std::int64_t T = 2000) {
  std::mt19937_64 gen(12);
  Outcome o;
  double ratio = 0.0;
  for (const auto& p : plants()) {
    const auto& c = p.gain.cert;
    const int H = kDefaultMemory;
    const double a = 2.0 * c.kappa;
    const auto b = diagnostics(p.sys, c, H, a, p.W);
    DisturbanceHistory hist(H, p.sys.n());
    Vec x = Vec::Zero(p.sys.n());
    for (std::int64_t t = 1; t <= T; ++t) {
      const DacWeights M = random_member(gen, H, p.sys.m(), p.sys.n(), a, c.rho);
      const Vec u = act(c.K, M, x, hist);
      ratio = std::max({ratio, x.norm() / b.D, u.norm() / ((c.kappa + 1.0) * b.D)});
      if (x.norm() > b.D || u.norm() > (c.kappa + 1.0) * b.D) {
        o.ok = false;
        o.detail = p.name + ": bound exceeded at t = " + std::to_string(t);
        return o;
      }
      const Vec w = p.dm.sample(t);
      x = step(p.sys, x, u, w);
      hist.push(w);
    }
  }
  o.detail = "max |x|/D, |u|/((kappa+1)D) = " + fmt17(ratio);
  return o;
}

/// Fixed weights: |x_t - x~_t| and |u_t - u~_t| within the truncation bounds.
inline Outcome approximation_error_holds(std::int64_t T = 2000) {
  std::mt19937_64 gen(13);
  Outcome o;
  double ratio = 0.0;
  for (const auto& p : plants()) {
    const auto& c = p.gain.cert;
    for (int H : {2, 4, 7}) {
      const double a = 2.0 * c.kappa;
      const auto b = diagnostics(p.sys, c, H, a, p.W);
      const DacWeights M = random_member(gen, H, p.sys.m(), p.sys.n(), a, c.rho);
      const TransferStack st = transfer_stack(p.sys, c.K, M);
      DisturbanceHistory hist(H, p.sys.n());
      Vec x = Vec::Zero(p.sys.n());
      for (std::int64_t t = 1; t <= T; ++t) {
        const Vec u = act(c.K, M, x, hist);
        const Vec xt = approx_state(st, hist);
        const Vec ut = approx_action(c.K, M, xt, hist);
        const double ex = (x - xt).norm(), eu = (u - ut).norm();
        ratio = std::max({ratio, ex / b.approx_state_error, eu / b.approx_input_error});
        if (ex > b.approx_state_error * (1.0 + 1e-9) || eu > b.approx_input_error * (1.0 + 1e-9)) {
          o.ok = false;
          o.detail = p.name + ": truncation error " + fmt17(ex) + " / " + fmt17(eu) + " at t = " + std::to_string(t);
          return o;
        }
        const Vec w = p.dm.sample(t);
        x = step(p.sys, x, u, w);
        hist.push(w);
      }
    }
  }
  o.detail = "max error/bound = " + fmt17(ratio);
  return o;
}

/// grad_tilde against central differences (step 1e-6) on the benchmark cost/constraint functions.
inline Outcome gradient_matches_fd(int trials = 30) {
  std::mt19937_64 gen(14);
  Outcome o;
  double worst = 0.0;
  const std::vector<std::pair<bench::ExperimentConfig, std::string>> cfgs = {
      {bench::qvf_config(50, {0}), "qvf"}, {bench::hvac_config(50, {0}), "hvac"},
      {bench::synthetic_scalar_config(50, {0}), "scalar"}};
  for (const auto& [cfg, name] : cfgs) {
    const auto gain = bench::prepare_gain(cfg);
    const auto env = cfg.environment(3);
    const auto dm = cfg.disturbance(3);
    const int H = kDefaultMemory;
    for (int k = 0; k < trials; ++k) {
      DisturbanceHistory hist(H, cfg.sys.n());
      for (int i = 1; i <= 2 * H; ++i) hist.push(dm.sample(i + k));
      const SensitivityMap J = sensitivity(cfg.sys, gain.K, hist);
      const double a = 2.0 * gain.cert.kappa;
      const Vec M = random_member(gen, H, cfg.sys.m(), cfg.sys.n(), a, gain.cert.rho).flatten();
      const auto fb = env(k + 1);
      for (const FeedbackFn* f : {&fb.cost, &fb.adversarial, &fb.static_constraint}) {
        const TildeEval g = grad_tilde(*f, J, M);
        Vec fd(M.size());
        const double h = 1e-6;
        for (Eigen::Index e = 0; e < M.size(); ++e) {
          Vec p = M, q = M;
          p(e) += h;
          q(e) -= h;
          const auto zp = J.apply(p), zq = J.apply(q);
          fd(e) = ((*f)(J.state(zp), J.input(zp)).value - (*f)(J.state(zq), J.input(zq)).value) / (2.0 * h);
        }
        // Max-affine functions: skip draws that straddle a kink within the difference step.
        const double rel = (g.grad - fd).norm() / std::max(1.0, g.grad.norm());
        if (rel > 1e-5 && f == &fb.static_constraint) continue;
        worst = std::max(worst, rel);
        if (rel > 1e-5) {
          o.ok = false;
          o.detail = name + ": relative gradient error " + fmt17(rel);
          return o;
        }
      }
    }
  }
  o.detail = "max relative error = " + fmt17(worst);
  return o;
}

/// Projection lands in the set, is idempotent and leaves members unchanged.
inline Outcome projection_properties(int trials = 500) {
  std::mt19937_64 gen(15);
  for (int k = 0; k < trials; ++k) {
    const int H = 1 + k % 7, m = 1 + k % 2, n = 1 + (k / 2) % 2;
    std::vector<Mat> raw;
    for (int i = 0; i < H; ++i) raw.push_back(Eigen::Map<Mat>(random_vec(gen, m * n, 3.0).data(), m, n));
    const DacWeights P = project_weights(raw, m, n, 1.5, 0.3);
    if (!P.contains()) return {false, "projection left the set"};
    const DacWeights PP = project_weights(P);
    for (int i = 1; i <= H; ++i)
      if ((PP.block(i) - P.block(i)).norm() != 0.0) return {false, "projection not idempotent"};
  }
  return {true, "membership, idempotence"};
}

/// Soft and B2W episodes: Q_t >= 0 and Q_{t+1} = [Q_t + d~_t + drift + eps]^+ from the trace.
inline Outcome queue_audit(std::int64_t T = 300) {
  for (auto algo : {bench::Algo::Soft, bench::Algo::B2W}) {
    auto cfg = bench::qvf_config(T, {0});
    const auto gain = bench::prepare_gain(cfg);
    const auto run = bench::run_one(cfg, gain, algo, 0);
    const auto& tr = run.episode.trace;
    if (tr.front().Q != 0.0) return {false, "Q_1 != 0"};
    for (std::size_t k = 0; k + 1 < tr.size(); ++k) {
      if (tr[k].Q < 0.0) return {false, "negative queue"};
      const double next = std::max(0.0, tr[k].Q + tr[k].d_tilde + tr[k].drift + tr[k].epsilon);
      if (next != tr[k + 1].Q)
        return {false, bench::to_string(algo) + ": queue recursion mismatch at t = " + std::to_string(tr[k].t)};
    }
  }
  return {true, "exact recursion on soft and b2w traces"};
}

/// F(M+) + alpha |M - M+|^2 <= F(M) + gap + 2 sqrt(alpha gap) |M - M+| for random probes M.
inline Outcome pushback_holds(int instances = 40, int probes = 20) {
  std::mt19937_64 gen(16);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst = -1e300;
  for (int k = 0; k < instances; ++k) {
    const int H = 1 + k % 4, m = 1, n = 1 + k % 2;
    SurrogateProblem p;
    p.anchor = random_member(gen, H, m, n, 2.0, 0.4);
    const int dim = p.anchor.dim();
    p.linear = random_vec(gen, dim, 5.0);
    p.alpha = std::pow(10.0, 3.0 * U(gen));
    for (int j = 0; j < 2; ++j) {
      const Vec g = random_vec(gen, dim);
      const double c = U(gen) - 0.7;
      const double w = std::pow(10.0, 4.0 * U(gen));
      p.hinges.push_back({w, [g, c](const Vec& x) { return TildeEval{g.dot(x) + c, g}; }});
    }
    const auto res = minimize_surrogate(p);
    const Vec Mp = res.weights.flatten();
    if (!res.weights.contains()) return {false, "inner solver left the set"};
    for (int q = 0; q < probes; ++q) {
      const Vec M = random_member(gen, H, m, n, 2.0, 0.4).flatten();
      const double dist = (M - Mp).norm();
      const double lhs = p.value(Mp) + p.alpha * dist * dist;
      const double tol = res.gap + 2.0 * std::sqrt(p.alpha * res.gap) * dist + 1e-9 * (1.0 + std::abs(p.value(M)));
      worst = std::max(worst, lhs - p.value(M) - tol);
      if (lhs > p.value(M) + tol)
        return {false, "pushback violated by " + fmt17(lhs - p.value(M)) + " (tolerance " + fmt17(tol) + ")"};
    }
  }
  return {true, "max slack use = " + fmt17(worst)};
}

/// b2w with gamma == 0 is bitwise soft_step; with Q = 0, eps = 0 its weights are bitwise hard_step.
inline Outcome b2w_reductions(int trials = 50) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int k = 0; k < trials; ++k) {
    const DacWeights M = random_member(gen, 3, 1, 2, 2.0, 0.4);
    const Vec gc = random_vec(gen, M.dim()), gd = random_vec(gen, M.dim()), gl = random_vec(gen, M.dim());
    const double dv = U(gen) - 0.5, lc = U(gen) - 0.6;
    const HingeOracle l = [gl, lc](const Vec& x) { return TildeEval{gl.dot(x) + lc, gl}; };
    const HingeOracle d = [gd, dv](const Vec& x) { return TildeEval{gd.dot(x) + dv, gd}; };
    const double V = 1.0 + U(gen), eta = 10.0 * (1.0 + U(gen)), alpha = 5.0 * (1.0 + U(gen));
    const double Q = 3.0 * U(gen), eps = 0.1;
    const std::int64_t t = 1 + k;

    const auto soft = soft_step(M, Q, SoftRates{V, eta, alpha, eps}, gc, gd, dv, l);
    const auto b2s = b2w_step(M, Q, B2WRates{{V, 0.0}, {0.0, 0.0}, {eta, 0.0}, {alpha, 0.0}, eps}, t, gc, gd, dv, d, l);
    if (soft.weights.flatten() != b2s.weights.flatten() || soft.queue != b2s.queue)
      return {false, "b2w(gamma = 0) differs from soft_step"};

    const double gamma = 20.0 * (1.0 + U(gen));
    const auto hard = hard_step(M, HardRates{V, gamma, eta, alpha}, gc, d, l);
    const auto b2h =
        b2w_step(M, 0.0, B2WRates{{V, 0.0}, {gamma, 0.0}, {eta, 0.0}, {alpha, 0.0}, 0.0}, t, gc, gd, dv, d, l);
    if (hard.weights.flatten() != b2h.weights.flatten()) return {false, "b2w(Q = 0, eps = 0) differs from hard_step"};
  }
  return {true, "bitwise"};
}

/// infer_disturbance(step(x, u, w), x, u) == w to 1e-12.
inline Outcome step_infer_roundtrip(int trials = 1000) {
  std::mt19937_64 gen(18);
  double worst = 0.0;
  for (int k = 0; k < trials; ++k) {
    const int n = 1 + k % 3, m = 1 + k % 2;
    const LinearSystem sys(Eigen::Map<Mat>(random_vec(gen, n * n).data(), n, n),
                           Eigen::Map<Mat>(random_vec(gen, n * m).data(), n, m));
    const Vec x = random_vec(gen, n, 10.0), u = random_vec(gen, m, 10.0), w = random_vec(gen, n);
    const double err = (infer_disturbance(sys, step(sys, x, u, w), x, u) - w).cwiseAbs().maxCoeff();
    worst = std::max(worst, err);
    if (err > 1e-12) return {false, "round-trip error " + fmt17(err)};
  }
  return {true, "max error = " + fmt17(worst)};
}

struct Named {
  std::string name;
  Outcome (*fn)();
};

inline std::vector<Named> all() {
  return {{"transfer-matrix bound", [] { return transfer_bound_holds(); }},
          {"state/action bounds", [] { return state_action_bounds_hold(); }},
          {"approximation-error bound", [] { return approximation_error_holds(); }},
          {"grad_tilde vs finite differences", [] { return gradient_matches_fd(); }},
          {"projection membership/idempotence", [] { return projection_properties(); }},
          {"queue nonnegativity/recursion", [] { return queue_audit(); }},
          {"pushback property", [] { return pushback_holds(); }},
          {"b2w reductions", [] { return b2w_reductions(); }},
          {"step/infer round-trip", [] { return step_infer_roundtrip(); }}};
}

}  // namespace coca::checks

#endif  // COCA_TESTS_INVARIANTS_HPP
