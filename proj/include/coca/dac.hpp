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
#ifndef COCA_DAC_HPP
#define COCA_DAC_HPP

/**
 * @file
 * @brief Disturbance-action controllers u_t = -K x_t + sum_{i=1}^H M^[i] w_{t-i}.
 *
 * Besides the policy itself this header provides the truncated ("approximated")
 * state and action that depend on the last 2H disturbances only. Both are affine in
 * the weights, which SensitivityMap makes explicit so that gradients of
 * f(x~(M), u~(M)) with respect to M are a single transposed product.
 */

#include <cmath>
#include <vector>

#include "json.hpp"

#include "coca/common.hpp"
#include "coca/feedback.hpp"
#include "coca/linsys.hpp"

namespace coca {

namespace detail {

using RowMajorMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Frobenius norm summed in a fixed row-major order, so a block and its flattened
/// segment give the same bits.
template <class Derived>
inline double block_norm(const Eigen::MatrixBase<Derived>& b) {
  double sq = 0.0;
  for (Eigen::Index r = 0; r < b.rows(); ++r)
    for (Eigen::Index c = 0; c < b.cols(); ++c) sq += b(r, c) * b(r, c);
  return std::sqrt(sq);
}

}  // namespace detail

/// Weights M^[1..H] (each m x n) with the set parameters a and rho. Block i lives in
/// the Frobenius ball of radius a (1 - rho)^i.
struct DacWeights {
  int H = 0;
  int m = 0;
  int n = 0;
  double a = 1.0;
  double rho = 1.0;
  std::vector<Mat> blocks;

  static DacWeights zero(int H, int m, int n, double a, double rho) {
    if (H < 1 || m < 1 || n < 1) throw ConfigError("DAC weights need H, m, n >= 1");
    if (!(a > 0.0)) throw ConfigError("set radius a must be positive");
    if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("rho must lie in (0, 1]");
    DacWeights w;
    w.H = H;
    w.m = m;
    w.n = n;
    w.a = a;
    w.rho = rho;
    w.blocks.assign(static_cast<std::size_t>(H), Mat::Zero(m, n));
    return w;
  }

  /// 1-based block index.
  const Mat& block(int i) const { return blocks[static_cast<std::size_t>(i - 1)]; }
  Mat& block(int i) { return blocks[static_cast<std::size_t>(i - 1)]; }

  /// a (1 - rho)^i, as a running product so every projection path agrees bit for bit.
  double radius(int i) const {
    double r = a;
    for (int k = 0; k < i; ++k) r *= 1.0 - rho;
    return r;
  }
  int dim() const { return H * m * n; }

  /// Row-major within a block, blocks in order.
  Vec flatten() const {
    Vec v(dim());
    Eigen::Index k = 0;
    for (const auto& b : blocks)
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < n; ++c) v(k++) = b(r, c);
    return v;
  }

  DacWeights with_flat(const Vec& v) const {
    detail::require_dims(v.size() == dim(), "flattened DAC weights");
    DacWeights out = *this;
    Eigen::Index k = 0;
    for (auto& b : out.blocks)
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < n; ++c) b(r, c) = v(k++);
    return out;
  }

  bool contains(double tol = 1e-12) const {
    for (int i = 1; i <= H; ++i)
      if (detail::block_norm(block(i)) > radius(i) * (1.0 + tol) + tol) return false;
    return true;
  }
};

inline void to_json(nlohmann::json& j, const DacWeights& w) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : w.blocks) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < w.m; ++r) {
      std::vector<double> row(static_cast<std::size_t>(w.n));
      for (int c = 0; c < w.n; ++c) row[static_cast<std::size_t>(c)] = b(r, c);
      rows.push_back(row);
    }
    blocks.push_back(rows);
  }
  j = nlohmann::json{{"H", w.H}, {"a", w.a}, {"rho", w.rho}, {"blocks", blocks}};
}

inline void from_json(const nlohmann::json& j, DacWeights& w) {
  const auto& blocks = j.at("blocks");
  const int H = j.at("H").get<int>();
  if (H < 1 || blocks.size() != static_cast<std::size_t>(H)) throw ConfigError("DAC weights JSON: H/blocks mismatch");
  const int m = static_cast<int>(blocks.at(0).size());
  const int n = static_cast<int>(blocks.at(0).at(0).size());
  w = DacWeights::zero(H, m, n, j.at("a").get<double>(), j.at("rho").get<double>());
  for (int i = 1; i <= H; ++i) {
    const auto& rows = blocks.at(static_cast<std::size_t>(i - 1));
    detail::require_dims(rows.size() == static_cast<std::size_t>(m), "DAC weights JSON block rows");
    for (int r = 0; r < m; ++r) {
      const auto& row = rows.at(static_cast<std::size_t>(r));
      detail::require_dims(row.size() == static_cast<std::size_t>(n), "DAC weights JSON block cols");
      for (int c = 0; c < n; ++c) w.block(i)(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
  }
}

namespace detail {

/// Scales `b` into the Frobenius ball of radius r. The result satisfies block_norm <= r
/// exactly, so projecting twice is a no-op.
template <class Derived>
inline void shrink_into_ball(Eigen::MatrixBase<Derived>& b, double r) {
  const double norm = block_norm(b);
  if (norm <= r) return;
  b *= r / norm;
  while (block_norm(b) > r) b *= 1.0 - 0x1.0p-52;
}

}  // namespace detail

/// Euclidean projection onto the weight set: each block is shrunk into its Frobenius ball.
inline DacWeights project_weights(std::vector<Mat> blocks, int m, int n, double a, double rho) {
  DacWeights w = DacWeights::zero(static_cast<int>(blocks.size()), m, n, a, rho);
  for (int i = 1; i <= w.H; ++i) {
    Mat& b = blocks[static_cast<std::size_t>(i - 1)];
    detail::require_dims(b.rows() == m && b.cols() == n, "weight block " + std::to_string(i));
    detail::shrink_into_ball(b, w.radius(i));
    w.block(i) = std::move(b);
  }
  return w;
}

inline DacWeights project_weights(const DacWeights& w) { return project_weights(w.blocks, w.m, w.n, w.a, w.rho); }

/// In-place projection of a flattened weight vector.
inline void project_flat(Vec& v, const DacWeights& shape) {
  const Eigen::Index len = shape.m * shape.n;
  const double decay = 1.0 - shape.rho;
  double r = shape.a;
  for (int i = 1; i <= shape.H; ++i) {
    r *= decay;
    Eigen::Map<detail::RowMajorMat> block(v.data() + (i - 1) * len, shape.m, shape.n);
    detail::shrink_into_ball(block, r);
  }
}

/// Last 2H disturbances. Entries not yet observed are zero.
class DisturbanceHistory {
 public:
  DisturbanceHistory(int H, int n) : H_(H), n_(n), buf_(static_cast<std::size_t>(2 * H), Vec::Zero(n)) {
    if (H < 1 || n < 1) throw ConfigError("disturbance history needs H, n >= 1");
  }

  int H() const { return H_; }
  int n() const { return n_; }
  int capacity() const { return 2 * H_; }

  /// Records w_{t-1} at the start of step t.
  void push(const Vec& w) {
    detail::require_dims(w.size() == n_, "disturbance history push");
    head_ = (head_ + 1) % buf_.size();
    buf_[head_] = w;
    if (count_ < buf_.size()) ++count_;
  }

  /// w_{t-i} for i in 1..2H.
  const Vec& lag(int i) const {
    detail::require_dims(i >= 1 && i <= capacity(), "history lag " + std::to_string(i));
    const std::size_t idx = (head_ + buf_.size() - static_cast<std::size_t>(i - 1)) % buf_.size();
    return buf_[idx];
  }

  /// Oldest first.
  std::vector<Vec> ordered() const {
    std::vector<Vec> out;
    for (int i = capacity(); i >= 1; --i) out.push_back(lag(i));
    return out;
  }

  std::size_t observed() const { return count_; }

 private:
  int H_;
  int n_;
  std::vector<Vec> buf_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
};

inline void check_weights(const Mat& K, const DacWeights& M) {
  detail::require_dims(K.rows() == M.m && K.cols() == M.n,
                       "gain " + detail::dims(K) + " vs weights " + std::to_string(M.m) + "x" + std::to_string(M.n));
}

/// -K x + sum_{i=1}^H M^[i] w_{t-i}
inline Vec act(const Mat& K, const DacWeights& M, const Vec& x, const DisturbanceHistory& hist) {
  check_weights(K, M);
  detail::require_dims(x.size() == M.n && hist.n() == M.n && hist.H() >= M.H, "act(x, history)");
  Vec u = -K * x;
  for (int i = 1; i <= M.H; ++i) u.noalias() += M.block(i) * hist.lag(i);
  return u;
}

/// Psi_{t,i} for i = 1..2H under a single repeated weight.
struct TransferStack {
  std::vector<Mat> psi;

  int H() const { return static_cast<int>(psi.size() / 2); }
  const Mat& operator[](int i) const { return psi[static_cast<std::size_t>(i - 1)]; }
};

namespace detail {

inline std::vector<Mat> closed_loop_powers(const Mat& closed, int count) {
  std::vector<Mat> p;
  p.reserve(static_cast<std::size_t>(count));
  p.push_back(Mat::Identity(closed.rows(), closed.cols()));
  for (int k = 1; k < count; ++k) p.push_back(closed * p.back());
  return p;
}

}  // namespace detail

inline TransferStack transfer_stack(const LinearSystem& sys, const Mat& K, const DacWeights& M) {
  check_weights(K, M);
  detail::require_dims(M.n == sys.n() && M.m == sys.m(), "weights vs system");
  const int H = M.H;
  const auto pw = detail::closed_loop_powers(closed_loop(sys, K), H);
  TransferStack s;
  s.psi.reserve(static_cast<std::size_t>(2 * H));
  for (int i = 1; i <= 2 * H; ++i) {
    Mat psi = i <= H ? pw[static_cast<std::size_t>(i - 1)] : Mat::Zero(sys.n(), sys.n());
    for (int j = 1; j <= H; ++j) {
      const int k = i - j;
      if (k >= 1 && k <= H) psi.noalias() += pw[static_cast<std::size_t>(j - 1)] * sys.B() * M.block(k);
    }
    s.psi.push_back(std::move(psi));
  }
  return s;
}

/// x~ = sum_{i=1}^{2H} Psi_i w_{t-i}
inline Vec approx_state(const TransferStack& stack, const DisturbanceHistory& hist) {
  detail::require_dims(hist.H() == stack.H(), "transfer stack vs history memory");
  Vec x = Vec::Zero(hist.n());
  for (int i = 1; i <= 2 * stack.H(); ++i) x.noalias() += stack[i] * hist.lag(i);
  return x;
}

inline Vec approx_action(const Mat& K, const DacWeights& M, const Vec& x_tilde, const DisturbanceHistory& hist) {
  return act(K, M, x_tilde, hist);
}

/// z(M) = (x~, u~) = J vec(M) + offset.
struct SensitivityMap {
  int n = 0;
  int m = 0;
  Mat J;       // (n + m) x (H m n)
  Vec offset;  // (x~, u~) at M = 0

  Vec apply(const Vec& flat) const { return J * flat + offset; }
  Vec state(const Vec& z) const { return z.head(n); }
  Vec input(const Vec& z) const { return z.tail(m); }
};

/// Column k of J is the response of (x~, u~) to the k-th unit weight entry. For entry
/// (r, c) of M^[k] that response is sum_{j=1}^H A~^{j-1} B e_r w_{t-k-j}(c) in the state,
/// composed with -K for the input plus the direct term w_{t-k}(c) e_r.
inline SensitivityMap sensitivity(const LinearSystem& sys, const Mat& K, const DisturbanceHistory& hist) {
  const int n = sys.n();
  const int m = sys.m();
  const int H = hist.H();
  detail::require_dims(K.rows() == m && K.cols() == n, "sensitivity gain");
  detail::require_dims(hist.n() == n, "sensitivity history");
  const auto pw = detail::closed_loop_powers(closed_loop(sys, K), H);

  SensitivityMap s;
  s.n = n;
  s.m = m;
  s.offset = Vec::Zero(n + m);
  for (int i = 1; i <= H; ++i) s.offset.head(n).noalias() += pw[static_cast<std::size_t>(i - 1)] * hist.lag(i);
  s.offset.tail(m) = -K * s.offset.head(n);

  // G[j-1] = A~^{j-1} B
  std::vector<Mat> G;
  G.reserve(static_cast<std::size_t>(H));
  for (int j = 1; j <= H; ++j) G.push_back(pw[static_cast<std::size_t>(j - 1)] * sys.B());

  s.J = Mat::Zero(n + m, H * m * n);
  Eigen::Index col = 0;
  for (int k = 1; k <= H; ++k) {
    // dx~/dM^[k]_{rc} = sum_j G[j-1].col(r) * w_{t-k-j}(c)
    Mat resp = Mat::Zero(n, m * n);  // column r*n + c
    for (int j = 1; j <= H; ++j) {
      const Vec& w = hist.lag(k + j);
      for (int r = 0; r < m; ++r)
        for (int c = 0; c < n; ++c) resp.col(r * n + c).noalias() += G[static_cast<std::size_t>(j - 1)].col(r) * w(c);
    }
    const Vec& wk = hist.lag(k);
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < n; ++c, ++col) {
        s.J.col(col).head(n) = resp.col(r * n + c);
        s.J.col(col).tail(m).noalias() = -K * resp.col(r * n + c);
        s.J(n + r, col) += wk(c);
      }
    }
  }
  return s;
}

/// Value and weight-gradient of M -> f(x~(M), u~(M)).
struct TildeEval {
  double value = 0.0;
  Vec grad;
};

inline TildeEval grad_tilde(const FeedbackFn& f, const SensitivityMap& J, const Vec& flat_weights) {
  const Vec z = J.apply(flat_weights);
  const FnEval e = f(J.state(z), J.input(z));
  detail::require_dims(e.grad_x.size() == J.n && e.grad_u.size() == J.m, "feedback gradient");
  Vec g(J.n + J.m);
  g << e.grad_x, e.grad_u;
  TildeEval out{e.value, J.J.transpose() * g};
  if (!std::isfinite(out.value) || !out.grad.allFinite()) throw NumericError("non-finite value or gradient in grad_tilde");
  return out;
}

inline TildeEval grad_tilde(const FeedbackFn& f, const SensitivityMap& J, const DacWeights& M) {
  return grad_tilde(f, J, M.flatten());
}

}  // namespace coca

#endif  // COCA_DAC_HPP
