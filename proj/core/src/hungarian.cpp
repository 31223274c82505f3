// Copyright 2026 The fpk Authors
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

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fpk/multiview.hpp"

namespace fpk
{

namespace
{

// Shortest-augmenting-path assignment with potentials, for n <= m. Exact for
// finite costs. a is 1-indexed logically: a(i-1, j-1) is the cost of row i,
// column j. Returns per-row assigned column (0-based).
std::vector<int> solve_rows_le_cols(const Eigen::MatrixXd & a)
{
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(a.cols());
  const double inf = std::numeric_limits<double>::infinity();

  std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> v(static_cast<std::size_t>(m) + 1, 0.0);
  std::vector<int> col_to_row(static_cast<std::size_t>(m) + 1, 0);
  std::vector<int> way(static_cast<std::size_t>(m) + 1, 0);

  for (int i = 1; i <= n; ++i) {
    col_to_row[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(m) + 1, inf);
    std::vector<char> used(static_cast<std::size_t>(m) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = col_to_row[static_cast<std::size_t>(j0)];
      double delta = inf;
      int j1 = -1;
      for (int j = 1; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          continue;
        }
        const double cur = a(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] -
                           v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(col_to_row[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (col_to_row[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      col_to_row[static_cast<std::size_t>(j0)] = col_to_row[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= m; ++j) {
    const int i = col_to_row[static_cast<std::size_t>(j)];
    if (i > 0) {
      row_to_col[static_cast<std::size_t>(i - 1)] = j - 1;
    }
  }
  return row_to_col;
}

}  // namespace

HungarianResult hungarian_solve(const Eigen::MatrixXd & cost)
{
  if (cost.rows() == 0 || cost.cols() == 0) {
    throw std::invalid_argument("hungarian_solve: empty cost matrix");
  }
  for (Eigen::Index i = 0; i < cost.rows(); ++i) {
    for (Eigen::Index j = 0; j < cost.cols(); ++j) {
      if (std::isnan(cost(i, j)) || cost(i, j) == -std::numeric_limits<double>::infinity()) {
        throw std::invalid_argument("hungarian_solve: costs must be finite or +inf");
      }
    }
  }

  const bool transposed = cost.rows() > cost.cols();
  Eigen::MatrixXd a = transposed ? Eigen::MatrixXd(cost.transpose()) : cost;

  // Gated (+inf) entries become a dominating finite sentinel so that the
  // potentials stay finite; any all-admissible assignment beats a sentinel.
  double max_abs = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (std::isfinite(a(i, j))) {
        max_abs = std::max(max_abs, std::fabs(a(i, j)));
      }
    }
  }
  const double sentinel = (max_abs + 1.0) * (static_cast<double>(a.rows()) + 1.0);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (!std::isfinite(a(i, j))) {
        a(i, j) = sentinel;
      }
    }
  }

  const std::vector<int> row_to_col = solve_rows_le_cols(a);

  HungarianResult result;
  for (std::size_t r = 0; r < row_to_col.size(); ++r) {
    const int c = row_to_col[r];
    if (c < 0) {
      continue;
    }
    const int row = transposed ? c : static_cast<int>(r);
    const int col = transposed ? static_cast<int>(r) : c;
    const double original = cost(row, col);
    if (!std::isfinite(original)) {
      continue;  // gated pair forced by feasibility; not a real assignment
    }
    result.pairs.emplace_back(row, col);
    result.total_cost += original;
  }
  std::sort(result.pairs.begin(), result.pairs.end());
  return result;
}

}  // namespace fpk
