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

#ifndef FPK__METRICS_HPP_
#define FPK__METRICS_HPP_

#include <map>
#include <string>
#include <vector>

#include "fpk/grid.hpp"
#include "fpk/types.hpp"

namespace fpk
{

/// Average Euclidean distance over all aligned timesteps.
double ade(const Trajectory & pred, const Trajectory & gt);

/// Euclidean distance at the final timestep only.
double fde(const Trajectory & pred, const Trajectory & gt);

// Best-of-K variants: minimum over the candidate set of ade / fde against a
// single ground-truth future. Predictions longer than gt are truncated.
double min_ade_k(const PredictionSet & preds, const Trajectory & gt);
double min_fde_k(const PredictionSet & preds, const Trajectory & gt);

// Multi-modal ground truth: for each true future pick the closest of the K
// predictions, then average over the futures. Each prediction is truncated
// to the future's actual length and normalized by that length.
double min_ade_multi(const PredictionSet & preds, const std::vector<Trajectory> & futures);
double min_fde_multi(const PredictionSet & preds, const std::vector<Trajectory> & futures);

/// Negative log-likelihood of the true cells under per-step beliefs,
/// -(1/T) sum_t ln C_t(y*_t). Probabilities floored at 1e-12 before the log.
double nll_grid(const std::vector<BeliefMap> & beliefs, const std::vector<CellIndex> & gt_cells);

/// Fraction of timesteps whose predicted cell matches the true cell.
double grid_acc(const std::vector<CellIndex> & pred_cells, const std::vector<CellIndex> & gt_cells);

// Diversity: distance of each prediction to its closest neighbor prediction
// (average over steps / final step), then mean over predictions. K >= 2.
double min_asd(const PredictionSet & preds);
double min_fsd(const PredictionSet & preds);

/// Convert a set of predicted cells at one timestep into a belief by
/// histogramming with add-one smoothing. Used when evaluating NLL for models
/// that emit samples instead of distributions; the smoothing constant is the
/// evaluate pipeline's own choice and is tunable.
BeliefMap belief_from_cell_samples(
  const std::vector<CellIndex> & cells, const GridSpec & spec, double smoothing = 1.0);

/// Per-sample values plus the dataset mean for one metric.
struct MetricValues
{
  double mean{0.0};
  std::vector<std::pair<std::string, double>> per_sample;  // (sample_id, value)
};

using MetricReport = std::map<std::string, MetricValues>;

/// Aggregate per-sample values (aggregation order: sorted sample_id).
MetricValues aggregate_metric(std::vector<std::pair<std::string, double>> per_sample);

}  // namespace fpk

#endif  // FPK__METRICS_HPP_
