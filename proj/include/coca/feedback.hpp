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
#ifndef COCA_FEEDBACK_HPP
#define COCA_FEEDBACK_HPP

#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "coca/common.hpp"

namespace coca {

/// Value and partial gradients of a convex function f(x, u).
struct FnEval {
  double value = 0.0;
  Vec grad_x;
  Vec grad_u;
};

using FeedbackFn = std::function<FnEval(const Vec& x, const Vec& u)>;

/// Functions revealed to the controller after it acts at step t.
struct FeedbackBundle {
  FeedbackFn cost;
  FeedbackFn adversarial;        // d_t
  FeedbackFn static_constraint;  // l
  bool is_strongly_convex = false;
};

namespace fn {

/// scale * [ (x-xc)' diag(qx) (x-xc) + (u-uc)' diag(ru) (u-uc) ]
inline FeedbackFn quadratic(Vec qx, Vec xc, Vec ru, Vec uc) {
  return [qx = std::move(qx), xc = std::move(xc), ru = std::move(ru), uc = std::move(uc)](const Vec& x, const Vec& u) {
    const Vec dx = x - xc;
    const Vec du = u - uc;
    FnEval e;
    e.value = dx.dot(qx.cwiseProduct(dx)) + du.dot(ru.cwiseProduct(du));
    e.grad_x = 2.0 * qx.cwiseProduct(dx);
    e.grad_u = 2.0 * ru.cwiseProduct(du);
    return e;
  };
}

/// a'x + b'u + c
inline FeedbackFn affine(Vec a, Vec b, double c) {
  return [a = std::move(a), b = std::move(b), c](const Vec& x, const Vec& u) {
    return FnEval{a.dot(x) + b.dot(u) + c, a, b};
  };
}

struct AffinePiece {
  Vec a;
  Vec b;
  double c = 0.0;
};

/// max_k (a_k'x + b_k'u + c_k); the gradient is that of the first maximizing piece.
inline FeedbackFn max_affine(std::vector<AffinePiece> pieces) {
  if (pieces.empty()) throw ConfigError("max_affine needs at least one piece");
  return [pieces = std::move(pieces)](const Vec& x, const Vec& u) {
    std::size_t arg = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      const double v = pieces[k].a.dot(x) + pieces[k].b.dot(u) + pieces[k].c;
      if (v > best) {
        best = v;
        arg = k;
      }
    }
    return FnEval{best, pieces[arg].a, pieces[arg].b};
  };
}

inline FeedbackFn constant(double value, int n, int m) {
  return [value, n, m](const Vec&, const Vec&) { return FnEval{value, Vec::Zero(n), Vec::Zero(m)}; };
}

}  // namespace fn

}  // namespace coca

#endif  // COCA_FEEDBACK_HPP
