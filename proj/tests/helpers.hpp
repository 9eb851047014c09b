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
#ifndef COCA_TESTS_HELPERS_HPP
#define COCA_TESTS_HELPERS_HPP

#include <initializer_list>

#include "coca/common.hpp"

namespace coca::testkit {

inline Mat mat(std::initializer_list<std::initializer_list<double>> rows) {
  Mat M(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) M(r, c++) = v;
    ++r;
  }
  return M;
}

inline Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) v(k++) = x;
  return v;
}

inline Mat scalar(double v) { return Mat::Constant(1, 1, v); }

}  // namespace coca::testkit

#endif  // COCA_TESTS_HELPERS_HPP
