// Copyright 2026 The SimTrack Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "simtrack/geometry.hpp"

namespace simtrack {

// Dense row-major cost matrix.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Cost used for forbidden (gated) pairs. Large but finite so that the
// potentials stay finite.
inline constexpr double kGatedCost = 1e9;

struct Assignment {
  std::vector<int> row_to_col;  // -1 when a row is left unassigned
  double cost = 0.0;            // summed in row order
};

namespace detail {

// Shortest augmenting path with potentials; requires rows <= cols.
inline std::vector<int> solve_wide(const CostMatrix& a) {
  const int n = a.rows();
  const int m = a.cols();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace detail

/// Minimum-cost assignment. Rectangular inputs leave max(rows, cols) -
/// min(rows, cols) entries unassigned.
inline Assignment hungarian(const CostMatrix& cost) {
  Assignment out;
  out.row_to_col.assign(cost.rows(), -1);
  if (cost.rows() == 0 || cost.cols() == 0) return out;
  for (int r = 0; r < cost.rows(); ++r) {
    for (int c = 0; c < cost.cols(); ++c) {
      if (!std::isfinite(cost(r, c))) throw Error("hungarian: costs must be finite");
    }
  }
  if (cost.rows() <= cost.cols()) {
    out.row_to_col = detail::solve_wide(cost);
  } else {
    CostMatrix t(cost.cols(), cost.rows());
    for (int r = 0; r < cost.rows(); ++r) {
      for (int c = 0; c < cost.cols(); ++c) t(c, r) = cost(r, c);
    }
    const std::vector<int> col_to_row = detail::solve_wide(t);
    for (int c = 0; c < cost.cols(); ++c) {
      if (col_to_row[c] >= 0) out.row_to_col[col_to_row[c]] = c;
    }
  }
  for (int r = 0; r < cost.rows(); ++r) {
    if (out.row_to_col[r] >= 0) out.cost += cost(r, out.row_to_col[r]);
  }
  return out;
}

}  // namespace simtrack
