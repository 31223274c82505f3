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

#include "fpk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fpk
{

namespace
{

constexpr double kNllFloor = 1e-12;

double step_error(const TrajPoint & a, const TrajPoint & b)
{
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Mean step error of pred truncated to gt's length; frames must align.
double truncated_ade(const Trajectory & pred, const Trajectory & gt)
{
  if (gt.points.empty()) {
    throw std::invalid_argument("ade: empty ground truth");
  }
  if (pred.points.size() < gt.points.size()) {
    throw std::invalid_argument("ade: prediction shorter than ground truth");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < gt.points.size(); ++t) {
    if (pred.points[t].frame != gt.points[t].frame) {
      throw std::invalid_argument("ade: misaligned frame indices");
    }
    total += step_error(pred.points[t], gt.points[t]);
  }
  return total / static_cast<double>(gt.points.size());
}

double truncated_fde(const Trajectory & pred, const Trajectory & gt)
{
  if (gt.points.empty()) {
    throw std::invalid_argument("fde: empty ground truth");
  }
  if (pred.points.size() < gt.points.size()) {
    throw std::invalid_argument("fde: prediction shorter than ground truth");
  }
  const std::size_t last = gt.points.size() - 1;
  if (pred.points[last].frame != gt.points[last].frame) {
    throw std::invalid_argument("fde: misaligned frame indices");
  }
  return step_error(pred.points[last], gt.points[last]);
}

void check_candidates(const PredictionSet & preds, std::size_t minimum = 1)
{
  if (preds.trajectories.size() < minimum) {
    throw std::invalid_argument("metric requires at least " + std::to_string(minimum) +
                                " candidate trajectories");
  }
}

}  // namespace

double ade(const Trajectory & pred, const Trajectory & gt)
{
  if (pred.points.size() != gt.points.size()) {
    throw std::invalid_argument("ade: length mismatch");
  }
  return truncated_ade(pred, gt);
}

double fde(const Trajectory & pred, const Trajectory & gt)
{
  if (pred.points.size() != gt.points.size()) {
    throw std::invalid_argument("fde: length mismatch");
  }
  return truncated_fde(pred, gt);
}

double min_ade_k(const PredictionSet & preds, const Trajectory & gt)
{
  check_candidates(preds);
  double best = std::numeric_limits<double>::infinity();
  for (const auto & p : preds.trajectories) {
    best = std::min(best, truncated_ade(p, gt));
  }
  return best;
}

double min_fde_k(const PredictionSet & preds, const Trajectory & gt)
{
  check_candidates(preds);
  double best = std::numeric_limits<double>::infinity();
  for (const auto & p : preds.trajectories) {
    best = std::min(best, truncated_fde(p, gt));
  }
  return best;
}

double min_ade_multi(const PredictionSet & preds, const std::vector<Trajectory> & futures)
{
  if (futures.empty()) {
    throw std::invalid_argument("min_ade_multi: empty futures");
  }
  double total = 0.0;
  for (const auto & f : futures) {
    total += min_ade_k(preds, f);
  }
  return total / static_cast<double>(futures.size());
}

double min_fde_multi(const PredictionSet & preds, const std::vector<Trajectory> & futures)
{
  if (futures.empty()) {
    throw std::invalid_argument("min_fde_multi: empty futures");
  }
  double total = 0.0;
  for (const auto & f : futures) {
    total += min_fde_k(preds, f);
  }
  return total / static_cast<double>(futures.size());
}

double nll_grid(const std::vector<BeliefMap> & beliefs, const std::vector<CellIndex> & gt_cells)
{
  if (beliefs.size() != gt_cells.size()) {
    throw std::invalid_argument("nll_grid: length mismatch");
  }
  if (beliefs.empty()) {
    throw std::invalid_argument("nll_grid: empty sequence");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < beliefs.size(); ++t) {
    const auto & b = beliefs[t];
    const CellIndex c = gt_cells[t];
    if (c < 0 || static_cast<std::size_t>(c) >= b.values.size()) {
      throw std::out_of_range("nll_grid: cell index out of range");
    }
    total += -std::log(std::max(b.at(c), kNllFloor));
  }
  return total / static_cast<double>(beliefs.size());
}

double grid_acc(const std::vector<CellIndex> & pred_cells, const std::vector<CellIndex> & gt_cells)
{
  if (pred_cells.size() != gt_cells.size()) {
    throw std::invalid_argument("grid_acc: length mismatch");
  }
  if (pred_cells.empty()) {
    throw std::invalid_argument("grid_acc: empty sequence");
  }
  std::size_t hits = 0;
  for (std::size_t t = 0; t < pred_cells.size(); ++t) {
    if (pred_cells[t] == gt_cells[t]) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(pred_cells.size());
}

namespace
{

// Self distance of prediction k to its nearest other prediction, using the
// given per-pair reducer (average-step or final-step distance).
template <typename PairDist>
double mean_nearest_neighbor(const PredictionSet & preds, PairDist dist)
{
  check_candidates(preds, 2);
  const std::size_t k = preds.trajectories.size();
  double total = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < k; ++b) {
      if (a == b) {
        continue;
      }
      nearest = std::min(nearest, dist(preds.trajectories[a], preds.trajectories[b]));
    }
    total += nearest;
  }
  return total / static_cast<double>(k);
}

double pair_avg_dist(const Trajectory & a, const Trajectory & b)
{
  if (a.points.size() != b.points.size() || a.points.empty()) {
    throw std::invalid_argument("self-distance: predictions must share a length >= 1");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < a.points.size(); ++t) {
    total += step_error(a.points[t], b.points[t]);
  }
  return total / static_cast<double>(a.points.size());
}

double pair_final_dist(const Trajectory & a, const Trajectory & b)
{
  if (a.points.size() != b.points.size() || a.points.empty()) {
    throw std::invalid_argument("self-distance: predictions must share a length >= 1");
  }
  return step_error(a.points.back(), b.points.back());
}

}  // namespace

double min_asd(const PredictionSet & preds)
{
  return mean_nearest_neighbor(preds, pair_avg_dist);
}

double min_fsd(const PredictionSet & preds)
{
  return mean_nearest_neighbor(preds, pair_final_dist);
}

BeliefMap belief_from_cell_samples(
  const std::vector<CellIndex> & cells, const GridSpec & spec, double smoothing)
{
  if (smoothing < 0.0) {
    throw std::invalid_argument("belief_from_cell_samples: negative smoothing");
  }
  BeliefMap b;
  b.rows = spec.rows;
  b.cols = spec.cols;
  b.values.assign(static_cast<std::size_t>(spec.size()), smoothing);
  for (CellIndex c : cells) {
    if (!spec.in_range(c)) {
      throw std::out_of_range("belief_from_cell_samples: cell index out of range");
    }
    b.values[static_cast<std::size_t>(c)] += 1.0;
  }
  const double total = static_cast<double>(cells.size()) + smoothing * spec.size();
  if (total <= 0.0) {
    throw std::invalid_argument("belief_from_cell_samples: no mass (empty cells, zero smoothing)");
  }
  for (double & v : b.values) {
    v /= total;
  }
  notify_belief(b);
  return b;
}

MetricValues aggregate_metric(std::vector<std::pair<std::string, double>> per_sample)
{
  std::sort(per_sample.begin(), per_sample.end(), [](const auto & a, const auto & b) {
    return a.first < b.first;
  });
  MetricValues out;
  out.per_sample = std::move(per_sample);
  if (!out.per_sample.empty()) {
    double total = 0.0;
    for (const auto & [id, v] : out.per_sample) {
      total += v;
    }
    out.mean = total / static_cast<double>(out.per_sample.size());
  }
  return out;
}

}  // namespace fpk
