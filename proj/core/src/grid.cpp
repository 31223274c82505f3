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

#include "fpk/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace fpk
{

namespace
{
BeliefObserver g_belief_observer;

void check_spec(const GridSpec & spec)
{
  if (spec.rows < 1 || spec.cols < 1) {
    throw std::invalid_argument("GridSpec: rows and cols must be >= 1");
  }
  if (!(spec.extent_x > 0.0) || !(spec.extent_y > 0.0)) {
    throw std::invalid_argument("GridSpec: extent must be strictly positive");
  }
}
}  // namespace

double BeliefMap::sum() const
{
  double total = 0.0;
  for (double v : values) {
    total += v;
  }
  return total;
}

CellIndex BeliefMap::argmax() const
{
  if (values.empty()) {
    throw std::invalid_argument("BeliefMap::argmax: empty map");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) {
      best = i;
    }
  }
  return static_cast<CellIndex>(best);
}

void set_belief_observer(BeliefObserver observer)
{
  g_belief_observer = std::move(observer);
}

const BeliefMap & notify_belief(const BeliefMap & belief)
{
  if (g_belief_observer) {
    g_belief_observer(belief);
  }
  return belief;
}

QuantizedCell quantize(const Vec2 & p, const GridSpec & spec)
{
  check_spec(spec);
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
    throw std::invalid_argument("quantize: non-finite point");
  }
  const double fx = (p.x - spec.origin_x) / spec.cell_width();
  const double fy = (p.y - spec.origin_y) / spec.cell_height();
  int col = static_cast<int>(std::floor(fx));
  int row = static_cast<int>(std::floor(fy));
  QuantizedCell out;
  out.clamped = col < 0 || col >= spec.cols || row < 0 || row >= spec.rows;
  col = std::clamp(col, 0, spec.cols - 1);
  row = std::clamp(row, 0, spec.rows - 1);
  out.index = spec.flat(row, col);
  return out;
}

Vec2 cell_center(CellIndex i, const GridSpec & spec)
{
  check_spec(spec);
  if (!spec.in_range(i)) {
    throw std::out_of_range("cell_center: cell index out of range");
  }
  return {
    spec.origin_x + (spec.col_of(i) + 0.5) * spec.cell_width(),
    spec.origin_y + (spec.row_of(i) + 0.5) * spec.cell_height()};
}

Vec2 offset_target(const Vec2 & location, CellIndex i, const GridSpec & spec)
{
  return location - cell_center(i, spec);
}

BeliefMap one_hot(CellIndex i, const GridSpec & spec)
{
  check_spec(spec);
  if (!spec.in_range(i)) {
    throw std::out_of_range("one_hot: cell index out of range");
  }
  BeliefMap b;
  b.rows = spec.rows;
  b.cols = spec.cols;
  b.values.assign(static_cast<std::size_t>(spec.size()), 0.0);
  b.values[static_cast<std::size_t>(i)] = 1.0;
  notify_belief(b);
  return b;
}

}  // namespace fpk
