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

#ifndef FPK__GRIDNET_HPP_
#define FPK__GRIDNET_HPP_

#include <cstdint>
#include <memory>
#include <vector>

#include "fpk/grid.hpp"
#include "fpk/types.hpp"

namespace fpk
{

/**
 * @brief Dense per-cell scene features, one weight per semantic class.
 *
 * For plain class maps each cell holds the one-hot encoding of its class;
 * augmentation produces arbitrary real-valued maps. Scene features enter the
 * transition logits linearly, which keeps input gradients exact.
 */
struct SceneFeatures
{
  int rows{0};
  int cols{0};
  int num_classes{0};
  std::vector<double> values;  // cell-major, then class: values[cell * num_classes + k]

  double at(CellIndex cell, int k) const
  {
    return values[static_cast<std::size_t>(cell) * num_classes + k];
  }
  double & at(CellIndex cell, int k)
  {
    return values[static_cast<std::size_t>(cell) * num_classes + k];
  }

  static SceneFeatures from_class_map(const SceneClassMap & map);
};

/**
 * @brief Learnable parameters of the grid predictor.
 *
 * The coarse stage is a first-order transition model: from cell j, the logit
 * of destination cell i within the (2r+1)^2 neighborhood is
 *   z_j(i) = kernel[drow, dcol] + scene_bias . features(i)
 * and the belief over destinations is the softmax over the in-grid
 * neighborhood (mass outside the neighborhood is exactly zero, so the belief
 * diffuses to nearby cells only). The fine stage maps the last observed
 * velocity v to a constant per-step offset A v + c added to cell centers.
 */
struct ModelParams
{
  GridSpec grid;
  int radius{2};                    // neighborhood radius r >= 1
  int num_classes{13};
  std::vector<double> kernel;       // (2r+1)^2 logits, row-major over (drow, dcol)
  std::vector<double> scene_bias;   // num_classes weights on destination-cell features
  double offset_affine[4]{0, 0, 0, 0};  // A, row-major 2x2
  double offset_bias[2]{0, 0};          // c

  int kernel_span() const { return 2 * radius + 1; }

  static ModelParams zeros(const GridSpec & grid, int radius, int num_classes);
  /// Uniform(-sigma, sigma) initialization for multi-model multi-future runs.
  static ModelParams random_init(
    const GridSpec & grid, int radius, int num_classes, double sigma, std::uint64_t seed);
};

/// Gradients with the same shape as the learnable parameters.
struct ParamGradients
{
  std::vector<double> kernel;
  std::vector<double> scene_bias;
  double offset_affine[4]{0, 0, 0, 0};
  double offset_bias[2]{0, 0};
};

struct TrainConfig
{
  double learning_rate{0.1};
  int epochs{100};
  double lambda1{0.1};        // regression loss weight
  double lambda2{0.0};        // weight decay
  double smooth_l1_break{1.0};
  std::uint64_t seed{0};
  double init_sigma{0.0};     // 0 = zero init (deterministic)
};

/**
 * @brief One supervised trajectory for the grid predictor.
 *
 * future_cells always holds the hard ground-truth cells; soft_labels, when
 * non-empty, replaces them as the classification target (mixup). Offset
 * targets always refer to the hard cells. Features are shared between
 * samples where possible so the transition table can be reused in a batch.
 */
struct TrainSample
{
  CellIndex start_cell{0};
  Vec2 start_velocity;
  std::vector<CellIndex> future_cells;     // length T_pred
  std::vector<double> soft_labels;         // empty, or T_pred * (rows*cols)
  std::vector<Vec2> offset_targets;        // length T_pred
  std::shared_ptr<const SceneFeatures> features;

  int steps() const { return static_cast<int>(future_cells.size()); }
  bool has_soft_labels() const { return !soft_labels.empty(); }
};

/// Build single-future training samples (one per ground-truth future) from a
/// dataset on the given grid.
std::vector<TrainSample> make_train_samples(
  const std::vector<MultiFutureSample> & dataset, const SceneClassMap & scene,
  const GridSpec & spec);

/// One-step transition distribution from `prev`. Throws if dimensions of the
/// features do not match the grid.
BeliefMap transition_distribution(
  CellIndex prev, const ModelParams & params, const SceneFeatures & features);
BeliefMap transition_distribution(
  CellIndex prev, const ModelParams & params, const SceneClassMap & scene);

/// Belief-state recurrence C_{t+1}(i) = sum_j C_t(j) p(i|j), starting from a
/// one-hot at the last observed cell. Returns beliefs for steps 1..steps.
std::vector<BeliefMap> rollout_beliefs(
  CellIndex start, const ModelParams & params, const SceneFeatures & features, int steps);
std::vector<BeliefMap> rollout_beliefs(
  CellIndex start, const ModelParams & params, const SceneClassMap & scene, int steps);

/// The fine-stage offsets: A v + c from the last observed step, repeated for
/// every future step.
std::vector<Vec2> predict_offsets(const Trajectory & obs, const ModelParams & params, int steps);

struct LossResult
{
  double loss{0.0};
  double cls{0.0};
  double reg{0.0};
  ParamGradients grads;
  /// dL/d(features) per sample; filled only when requested.
  std::vector<SceneFeatures> feature_grads;
};

/**
 * @brief Joint loss and exact analytic gradients over a batch.
 *
 * cls: -(1/T) sum_t sum_c y_t(c) ln C_t(c) per sample, summed over the batch,
 * with C_t from the belief rollout; probabilities are floored at 1e-12 so
 * labels outside the reachable support stay finite (the floored term is
 * constant in the parameters). reg: smoothed L1 between predicted and target
 * offsets, averaged over steps, summed over the batch. Total:
 * cls + lambda1 * reg + lambda2 * ||theta||^2. Gradients are hand-derived
 * backprop through the rollout and softmax.
 */
LossResult loss_and_gradients(
  const std::vector<TrainSample> & batch, const ModelParams & params, double lambda1,
  double lambda2 = 0.0, double smooth_l1_break = 1.0, bool want_feature_grads = false);

struct TrainResult
{
  ModelParams params;
  std::vector<double> loss_trace;  // loss at the start of each epoch
};

/// Plain full-batch gradient descent; deterministic given the seed. Throws
/// with a diagnostic if the loss turns non-finite.
TrainResult train(
  const std::vector<TrainSample> & dataset, const GridSpec & grid, int radius, int num_classes,
  const TrainConfig & config);

/// Per-beam cell sequence with its accumulated log-probability.
struct BeamState
{
  std::vector<CellIndex> cells;
  double log_prob{0.0};
};

struct BeamResult
{
  std::vector<BeamState> beams;  // ranked; size min(K, reachable sequences)
  bool truncated{false};         // fewer than K sequences exist
};

/**
 * @brief Diverse beam search over cell sequences.
 *
 * Beams are grown one step at a time; at each step the next beam set is
 * selected greedily from all (beam, cell) continuations by
 *   score = P_{t-1} + ln p(i | prev) + gamma(i)
 * where gamma(i) = -gamma0 * (number of higher-ranked beams that already
 * picked cell i at this step). Ties break on (lower source beam index, lower
 * cell index). Stored log-probabilities exclude the penalty. K = 1 with the
 * default width reduces to stepwise argmax.
 *
 * `width` is the number of partial sequences kept per step; 0 means width =
 * K (the usual beam search). A width at least the number of reachable
 * sequences makes the search exhaustive.
 */
BeamResult beam_search_cells(
  CellIndex start, const ModelParams & params, const SceneFeatures & features, int steps, int k,
  double gamma0, int width = 0);

/// Full decoder: beam cells to trajectories via cell centers plus the
/// predicted offsets. Start cell and velocity come from the observation.
PredictionSet diverse_beam_search(
  const Trajectory & obs, const ModelParams & params, const SceneFeatures & features, int steps,
  int k, double gamma0, int width = 0);
PredictionSet diverse_beam_search(
  const Trajectory & obs, const ModelParams & params, const SceneClassMap & scene, int steps,
  int k, double gamma0, int width = 0);

}  // namespace fpk

#endif  // FPK__GRIDNET_HPP_
