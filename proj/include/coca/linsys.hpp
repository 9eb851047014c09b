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
#ifndef COCA_LINSYS_HPP
#define COCA_LINSYS_HPP

/**
 * @file
 * @brief Linear time-invariant plant x_{t+1} = A x_t + B u_t + w_t, strong-stability
 * certificates for linear gains, and seeded disturbance streams.
 */

#include <algorithm>
#include <array>
#include <complex>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "coca/common.hpp"

namespace coca {

class LinearSystem {
 public:
  LinearSystem(Mat A, Mat B) : A_(std::move(A)), B_(std::move(B)) {
    detail::require_dims(A_.rows() >= 1 && A_.rows() == A_.cols(), "A must be square, got " + detail::dims(A_));
    detail::require_dims(B_.rows() == A_.rows() && B_.cols() >= 1,
                         "B must be n x m with n = " + std::to_string(A_.rows()) + ", got " + detail::dims(B_));
    if (!A_.allFinite() || !B_.allFinite()) throw Error("system matrices must be finite");
  }

  const Mat& A() const { return A_; }
  const Mat& B() const { return B_; }
  int n() const { return static_cast<int>(A_.rows()); }
  int m() const { return static_cast<int>(B_.cols()); }

 private:
  Mat A_;
  Mat B_;
};

inline Vec step(const LinearSystem& sys, const Vec& x, const Vec& u, const Vec& w) {
  detail::require_dims(x.size() == sys.n() && u.size() == sys.m() && w.size() == sys.n(), "step(x, u, w)");
  return sys.A() * x + sys.B() * u + w;
}

/// Recovers w from an observed transition; exact inverse of step().
inline Vec infer_disturbance(const LinearSystem& sys, const Vec& x_next, const Vec& x, const Vec& u) {
  detail::require_dims(x_next.size() == sys.n() && x.size() == sys.n() && u.size() == sys.m(),
                       "infer_disturbance(x_next, x, u)");
  return x_next - sys.A() * x - sys.B() * u;
}

// ---------------------------------------------------------------------------
// Strong stability

/// (kappa, rho)-strong stability witness: A - BK = U L U^{-1} with
/// max(|U|, |U^{-1}|, |K|) <= kappa and |L| <= 1 - rho (spectral norms).
struct StrongStabilityCert {
  Mat K;
  double kappa = 1.0;
  double rho = 1.0;
  CMat U;
  CMat L;
};

struct StabilityCheck {
  std::optional<StrongStabilityCert> cert;
  /// Smallest kappa this decomposition supports, and the contraction |L|.
  double achieved_kappa = std::numeric_limits<double>::infinity();
  double contraction = std::numeric_limits<double>::infinity();
  /// Positive means the corresponding inequality holds with that much room.
  double kappa_margin = -std::numeric_limits<double>::infinity();
  double rho_margin = -std::numeric_limits<double>::infinity();
  std::string failure;

  bool ok() const { return cert.has_value(); }
};

namespace detail {

struct Decomposition {
  bool diagonalizable = false;
  CMat U;
  CMat L;
  double kappa_u = 0.0;  // max(|U|, |U^{-1}|) after balancing
};

inline Decomposition decompose_closed_loop(const Mat& closed) {
  Decomposition out;
  Eigen::ComplexEigenSolver<CMat> es(closed.cast<std::complex<double>>());
  if (es.info() != Eigen::Success) return out;
  CMat U = es.eigenvectors();
  Eigen::JacobiSVD<CMat> svd(U);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smin > 1e-9 * smax)) return out;
  // Uniform rescaling balances |U| against |U^{-1}|; the product is scale invariant.
  const double s = std::sqrt(smax / smin) / smax;
  out.U = U * s;
  out.L = es.eigenvalues().asDiagonal();
  out.kappa_u = std::sqrt(smax / smin);
  out.diagonalizable = true;
  return out;
}

}  // namespace detail

inline Mat closed_loop(const LinearSystem& sys, const Mat& K) {
  detail::require_dims(K.rows() == sys.m() && K.cols() == sys.n(),
                       "gain K must be m x n, got " + detail::dims(K));
  return sys.A() - sys.B() * K;
}

inline StabilityCheck verify_strong_stability(const LinearSystem& sys, const Mat& K, double kappa, double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("rho must lie in (0, 1]");
  if (!(kappa >= 1.0)) throw ConfigError("kappa must be >= 1");
  StabilityCheck out;
  const Mat closed = closed_loop(sys, K);
  const auto dec = detail::decompose_closed_loop(closed);
  if (!dec.diagonalizable) {
    out.failure = "closed-loop matrix A - BK is not diagonalizable";
    return out;
  }
  const double k_norm = spectral_norm(K);
  out.achieved_kappa = std::max(dec.kappa_u, k_norm);
  out.contraction = dec.L.diagonal().cwiseAbs().maxCoeff();
  constexpr double slack = 1e-12;
  out.kappa_margin = kappa - out.achieved_kappa;
  out.rho_margin = (1.0 - rho) - out.contraction;
  if (out.kappa_margin < -slack) {
    out.failure = "max(|U|, |U^-1|, |K|) = " + fmt17(out.achieved_kappa) + " exceeds kappa = " + fmt17(kappa) +
                  " by " + fmt17(-out.kappa_margin);
    return out;
  }
  if (out.rho_margin < -slack) {
    out.failure = "|L| = " + fmt17(out.contraction) + " exceeds 1 - rho = " + fmt17(1.0 - rho) + " by " +
                  fmt17(-out.rho_margin);
    return out;
  }
  out.cert = StrongStabilityCert{K, kappa, rho, dec.U, dec.L};
  return out;
}

/// Certificate with the tightest kappa the eigendecomposition supports at the given rho.
inline StabilityCheck certify(const LinearSystem& sys, const Mat& K, double rho) {
  const auto dec = detail::decompose_closed_loop(closed_loop(sys, K));
  if (!dec.diagonalizable) {
    StabilityCheck out;
    out.failure = "closed-loop matrix A - BK is not diagonalizable";
    return out;
  }
  const double kappa = std::max({1.0, dec.kappa_u, spectral_norm(K)});
  return verify_strong_stability(sys, K, kappa * (1.0 + 1e-12), rho);
}

inline bool is_controllable(const LinearSystem& sys) {
  const int n = sys.n();
  Mat ctrb(n, n * sys.m());
  Mat block = sys.B();
  for (int k = 0; k < n; ++k) {
    ctrb.middleCols(k * sys.m(), sys.m()) = block;
    block = sys.A() * block;
  }
  Eigen::FullPivLU<Mat> lu(ctrb);
  lu.setThreshold(1e-10);
  return lu.rank() == n;
}

namespace detail {

/// Ackermann's formula for single-input pole placement; poles given as monic polynomial roots.
inline Mat ackermann(const Mat& A, const Vec& b, const std::vector<std::complex<double>>& poles) {
  const int n = static_cast<int>(A.rows());
  // Coefficients of prod (s - p_k), highest degree first.
  std::vector<std::complex<double>> coeff{1.0};
  for (const auto& p : poles) {
    std::vector<std::complex<double>> next(coeff.size() + 1, 0.0);
    for (std::size_t i = 0; i < coeff.size(); ++i) {
      next[i] += coeff[i];
      next[i + 1] -= coeff[i] * p;
    }
    coeff = std::move(next);
  }
  Mat phi = Mat::Zero(n, n);
  Mat power = Mat::Identity(n, n);
  for (int k = n; k >= 0; --k) {
    phi += coeff[static_cast<std::size_t>(k)].real() * power;
    power = power * A;
  }
  Mat ctrb(n, n);
  Vec col = b;
  for (int k = 0; k < n; ++k) {
    ctrb.col(k) = col;
    col = A * col;
  }
  Eigen::RowVectorXd last = Eigen::RowVectorXd::Zero(n);
  last(n - 1) = 1.0;
  return last * ctrb.inverse() * phi;
}

}  // namespace detail

struct StableGain {
  Mat K;
  StrongStabilityCert cert;
};

/// Pole placement onto the circle of radius 1 - target_rho (and inside it), keeping the
/// candidate whose certificate has the smallest kappa.
inline StableGain synthesize_stable_K(const LinearSystem& sys, double target_rho) {
  if (!(target_rho > 0.0 && target_rho <= 1.0)) throw ConfigError("target_rho must lie in (0, 1]");
  if (!is_controllable(sys)) throw ConfigError("(A, B) is not controllable");
  const int n = sys.n();
  const double r = 1.0 - target_rho;

  // Multi-input plants are reduced to a single input direction b = B v.
  Vec v = Vec::Ones(sys.m()) / std::sqrt(static_cast<double>(sys.m()));
  Vec b = sys.B() * v;
  if (!is_controllable(LinearSystem(sys.A(), b))) {
    for (int j = 0; j < sys.m(); ++j) {
      Vec e = Vec::Zero(sys.m());
      e(j) = 1.0;
      if (is_controllable(LinearSystem(sys.A(), sys.B() * e))) {
        v = e;
        b = sys.B() * e;
        break;
      }
    }
  }

  std::vector<std::vector<std::complex<double>>> candidates;
  if (n == 1) {
    candidates.push_back({r});
  } else {
    for (int k = 1; k <= 19; ++k) {
      const double spread = 0.05 * k;
      std::vector<std::complex<double>> poles;
      for (int i = 0; i < n; ++i) poles.emplace_back(r * (1.0 - spread * i / std::max(1, n - 1)));
      candidates.push_back(poles);
    }
    if (n == 2) {
      for (int k = 1; k <= 17; ++k) {
        const double theta = 0.05 * k;
        candidates.push_back({std::polar(r, theta), std::polar(r, -theta)});
      }
    }
  }

  std::optional<StableGain> best;
  for (const auto& poles : candidates) {
    Mat k_row = detail::ackermann(sys.A(), b, poles);
    if (!k_row.allFinite()) continue;
    Mat K = v * k_row;
    auto check = certify(sys, K, target_rho);
    if (!check.ok()) continue;
    if (!best || check.cert->kappa < best->cert.kappa) best = StableGain{K, *check.cert};
  }
  if (!best) throw Error("pole placement failed to produce a certified gain");
  return *best;
}

// ---------------------------------------------------------------------------
// Disturbances

/// Deterministic uniform draws on [0, 1) keyed by (seed, stream, t).
inline std::vector<double> keyed_uniforms(std::uint64_t seed, std::uint32_t stream, std::int64_t t, int count) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream,
                    static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(static_cast<std::uint64_t>(t) >> 32)};
  std::mt19937_64 gen(seq);
  std::vector<double> out(static_cast<std::size_t>(count));
  for (auto& v : out) v = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return out;
}

class DisturbanceModel {
 public:
  enum class Kind { Uniform, FixedSequence };

  static constexpr std::uint32_t kStream = 0;

  /// Coordinates with mask[k] == false are identically zero.
  static DisturbanceModel uniform(Vec lo, Vec hi, std::vector<bool> mask, std::uint64_t seed) {
    detail::require_dims(lo.size() == hi.size() && static_cast<std::size_t>(lo.size()) == mask.size(),
                         "uniform disturbance bounds");
    for (Eigen::Index k = 0; k < lo.size(); ++k)
      if (mask[static_cast<std::size_t>(k)] && !(lo(k) <= hi(k))) throw ConfigError("uniform disturbance needs lo <= hi");
    DisturbanceModel dm;
    dm.kind_ = Kind::Uniform;
    dm.lo_ = std::move(lo);
    dm.hi_ = std::move(hi);
    dm.mask_ = std::move(mask);
    dm.seed_ = seed;
    double sq = 0.0;
    for (Eigen::Index k = 0; k < dm.lo_.size(); ++k)
      if (dm.mask_[static_cast<std::size_t>(k)]) sq += std::max(dm.lo_(k) * dm.lo_(k), dm.hi_(k) * dm.hi_(k));
    dm.bound_ = std::sqrt(sq);
    return dm;
  }

  static DisturbanceModel uniform(Vec lo, Vec hi, std::uint64_t seed) {
    std::vector<bool> mask(static_cast<std::size_t>(lo.size()), true);
    return uniform(std::move(lo), std::move(hi), std::move(mask), seed);
  }

  /// sequence[0] is w_1.
  static DisturbanceModel fixed(std::vector<Vec> sequence) {
    if (sequence.empty()) throw ConfigError("fixed disturbance sequence is empty");
    DisturbanceModel dm;
    dm.kind_ = Kind::FixedSequence;
    dm.bound_ = 0.0;
    for (const auto& w : sequence) {
      detail::require_dims(w.size() == sequence.front().size(), "fixed disturbance sequence");
      dm.bound_ = std::max(dm.bound_, w.norm());
    }
    dm.sequence_ = std::move(sequence);
    return dm;
  }

  Kind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }
  int dim() const { return static_cast<int>(kind_ == Kind::Uniform ? lo_.size() : sequence_.front().size()); }
  /// W with |w_t| <= W for every t.
  double bound() const { return bound_; }

  /// w_t for t >= 1; a pure function of (seed, t).
  Vec sample(std::int64_t t) const {
    if (t < 1) throw Error("disturbance index starts at t = 1");
    if (kind_ == Kind::FixedSequence) {
      if (t > static_cast<std::int64_t>(sequence_.size())) throw Error("fixed disturbance sequence exhausted");
      return sequence_[static_cast<std::size_t>(t - 1)];
    }
    const auto draws = keyed_uniforms(seed_, kStream, t, static_cast<int>(lo_.size()));
    Vec w = Vec::Zero(lo_.size());
    for (Eigen::Index k = 0; k < lo_.size(); ++k)
      if (mask_[static_cast<std::size_t>(k)]) w(k) = lo_(k) + (hi_(k) - lo_(k)) * draws[static_cast<std::size_t>(k)];
    return w;
  }

 private:
  Kind kind_ = Kind::Uniform;
  Vec lo_, hi_;
  std::vector<bool> mask_;
  std::vector<Vec> sequence_;
  std::uint64_t seed_ = 0;
  double bound_ = 0.0;
};

// ---------------------------------------------------------------------------
// Trajectory log

/// One step: x_t, the applied u_t, the disturbance w_t that produced x_{t+1}, and the
/// revealed cost / adversarial constraint / static constraint at (x_t, u_t).
struct StepRecord {
  std::int64_t t = 0;
  Vec x, u, w;
  double cost = 0.0;
  double d = 0.0;
  double l = 0.0;
};

struct TrajectoryLog {
  std::vector<StepRecord> records;

  std::size_t size() const { return records.size(); }

  /// Largest |x_{t+1} - (A x_t + B u_t + w_t)|_inf over consecutive records.
  double dynamics_residual(const LinearSystem& sys) const {
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < records.size(); ++k) {
      const auto& r = records[k];
      const Vec pred = step(sys, r.x, r.u, r.w);
      worst = std::max(worst, (records[k + 1].x - pred).cwiseAbs().maxCoeff());
    }
    return worst;
  }

  void write_csv(std::ostream& os) const {
    if (records.empty()) return;
    const auto n = records.front().x.size();
    const auto m = records.front().u.size();
    os << "t";
    for (Eigen::Index i = 0; i < n; ++i) os << ",x_" << i;
    for (Eigen::Index i = 0; i < m; ++i) os << ",u_" << i;
    for (Eigen::Index i = 0; i < n; ++i) os << ",w_" << i;
    os << ",cost,d,l\n";
    for (const auto& r : records) {
      os << r.t;
      for (Eigen::Index i = 0; i < n; ++i) os << ',' << fmt17(r.x(i));
      for (Eigen::Index i = 0; i < m; ++i) os << ',' << fmt17(r.u(i));
      for (Eigen::Index i = 0; i < n; ++i) os << ',' << fmt17(r.w(i));
      os << ',' << fmt17(r.cost) << ',' << fmt17(r.d) << ',' << fmt17(r.l) << '\n';
    }
  }

  static TrajectoryLog read_csv(std::istream& is) {
    TrajectoryLog log;
    std::string line;
    if (!std::getline(is, line)) return log;
    int n = 0, m = 0;
    {
      std::stringstream hs(line);
      std::string cell;
      while (std::getline(hs, cell, ',')) {
        if (cell.rfind("x_", 0) == 0) ++n;
        if (cell.rfind("u_", 0) == 0) ++m;
      }
    }
    if (n == 0 || m == 0) throw Error("trajectory CSV header lacks x_/u_ columns");
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::stringstream ls(line);
      std::string cell;
      std::vector<double> vals;
      std::getline(ls, cell, ',');
      StepRecord r;
      r.t = std::stoll(cell);
      while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
      if (vals.size() != static_cast<std::size_t>(2 * n + m + 3)) throw Error("malformed trajectory CSV row");
      r.x = Eigen::Map<const Vec>(vals.data(), n);
      r.u = Eigen::Map<const Vec>(vals.data() + n, m);
      r.w = Eigen::Map<const Vec>(vals.data() + n + m, n);
      r.cost = vals[static_cast<std::size_t>(2 * n + m)];
      r.d = vals[static_cast<std::size_t>(2 * n + m + 1)];
      r.l = vals[static_cast<std::size_t>(2 * n + m + 2)];
      log.records.push_back(std::move(r));
    }
    return log;
  }
};

}  // namespace coca

#endif  // COCA_LINSYS_HPP
