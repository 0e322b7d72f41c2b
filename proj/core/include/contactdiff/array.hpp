// Copyright 2026 The contactdiff Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CONTACTDIFF_ARRAY_HPP_
#define CONTACTDIFF_ARRAY_HPP_

#include <cmath>
#include <cstddef>
#include <vector>

#include "contactdiff/error.hpp"

namespace contactdiff {

// Dense row-major matrix of doubles. The trajectory object tau is an Array2
// of shape H x (act_dim + obs_dim); network weight blocks reuse the type.
struct Array2 {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Array2() = default;
  Array2(int r, int c) : rows(r), cols(c), data(size_t(r) * size_t(c), 0.0) {}

  double& operator()(int r, int c) { return data[size_t(r) * cols + c]; }
  double operator()(int r, int c) const { return data[size_t(r) * cols + c]; }

  size_t size() const { return data.size(); }
  bool same_shape(const Array2& other) const {
    return rows == other.rows && cols == other.cols;
  }
};

inline void require_shape(const Array2& a, int rows, int cols,
                          const char* what) {
  if (a.rows != rows || a.cols != cols) {
    throw ShapeError(std::string(what) + ": expected " +
                     std::to_string(rows) + "x" + std::to_string(cols) +
                     ", got " + std::to_string(a.rows) + "x" +
                     std::to_string(a.cols));
  }
}

inline bool all_finite(const Array2& a) {
  for (double v : a.data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

// y += s * x
inline void axpy(double s, const Array2& x, Array2& y) {
  if (!x.same_shape(y)) throw ShapeError("axpy: shape mismatch");
  for (size_t i = 0; i < x.data.size(); ++i) y.data[i] += s * x.data[i];
}

inline double squared_norm(const Array2& a) {
  double s = 0.0;
  for (double v : a.data) s += v * v;
  return s;
}

}  // namespace contactdiff

#endif  // CONTACTDIFF_ARRAY_HPP_
