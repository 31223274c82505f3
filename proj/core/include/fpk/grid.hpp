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

#ifndef FPK__GRID_HPP_
#define FPK__GRID_HPP_

#include <cstddef>
#include <functional>
#include <vector>

namespace fpk
{

struct Vec2
{
  double x{0.0};
  double y{0.0};
};

inline Vec2 operator+(const Vec2 & a, const Vec2 & b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(const Vec2 & a, const Vec2 & b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, const Vec2 & a) { return {s * a.x, s * a.y}; }

/// Flat index of a grid cell, row-major (row from y, column from x).
using CellIndex = int;

/**
 * @brief A rectangular grid over a bounded region of the scene.
 *
 * Cells are indexed row-major: i = row * cols + col. Row 0 covers the lowest
 * y band, column 0 the lowest x band.
 */
struct GridSpec
{
  double origin_x{0.0};
  double origin_y{0.0};
  double extent_x{1.0};  // width in scene units, > 0
  double extent_y{1.0};  // height in scene units, > 0
  int rows{1};
  int cols{1};

  int size() const { return rows * cols; }
  double cell_width() const { return extent_x / cols; }
  double cell_height() const { return extent_y / rows; }
  int row_of(CellIndex i) const { return i / cols; }
  int col_of(CellIndex i) const { return i % cols; }
  CellIndex flat(int row, int col) const { return row * cols + col; }
  bool in_range(CellIndex i) const { return i >= 0 && i < size(); }
};

/// A list of grid scales; each consumer takes one spec at a time.
using GridScales = std::vector<GridSpec>;

/// Result of quantizing a continuous point. `clamped` is set when the point
/// fell outside the grid extent and was snapped to the nearest boundary cell.
struct QuantizedCell
{
  CellIndex index{0};
  bool clamped{false};
};

/**
 * @brief A probability distribution over grid cells ("belief state").
 *
 * Invariant: values non-negative and summing to 1 within 1e-9. Every library
 * function that produces a BeliefMap routes it through notify_belief(), so a
 * test hook can audit normalization globally.
 */
struct BeliefMap
{
  int rows{0};
  int cols{0};
  std::vector<double> values;  // rows * cols, row-major

  double at(CellIndex i) const { return values[static_cast<std::size_t>(i)]; }
  double sum() const;
  CellIndex argmax() const;  // lowest index wins ties
};

/// Per-cell 2D offsets in scene units.
struct OffsetMap
{
  int rows{0};
  int cols{0};
  std::vector<Vec2> values;  // rows * cols, row-major
};

// Observer invoked for every BeliefMap the library emits. Used by the test
// suites to assert the unit-sum invariant globally; no-op when unset.
using BeliefObserver = std::function<void(const BeliefMap &)>;
void set_belief_observer(BeliefObserver observer);
const BeliefMap & notify_belief(const BeliefMap & belief);

// Quantize a point to the cell containing it. Out-of-extent points clamp to
// the nearest boundary cell with the clamped flag set. Throws on non-finite
// input or invalid spec.
QuantizedCell quantize(const Vec2 & p, const GridSpec & spec);

// Geometric center of cell i. Throws if i is out of range.
Vec2 cell_center(CellIndex i, const GridSpec & spec);

// Regression target: location minus the center of cell i.
Vec2 offset_target(const Vec2 & location, CellIndex i, const GridSpec & spec);

// BeliefMap with all mass on cell i.
BeliefMap one_hot(CellIndex i, const GridSpec & spec);

}  // namespace fpk

#endif  // FPK__GRID_HPP_
