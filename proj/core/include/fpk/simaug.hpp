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

#ifndef FPK__SIMAUG_HPP_
#define FPK__SIMAUG_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fpk/gridnet.hpp"

namespace fpk
{

/// One rendering of a trajectory: per-step scene features plus the future
/// cell labels in that view's coordinates.
struct ViewSample
{
  std::string view_id;
  std::vector<SceneFeatures> step_features;  // length >= 1
  std::vector<CellIndex> future_cells;       // length T_pred
};

/// A trajectory under its anchor view together with the additional views of
/// the same trajectory. Rollouts start from the anchor's last observed cell;
/// offset targets are the anchor's.
struct MultiViewSample
{
  std::string sample_id;
  CellIndex start_cell{0};
  Vec2 start_velocity;
  std::vector<Vec2> offset_targets;
  ViewSample anchor;
  std::vector<ViewSample> views;
};

struct AugConfig
{
  double alpha{0.2};    // Beta(alpha, alpha) mixing
  double epsilon{0.1};  // signed attack step
  double delta{0.1};    // l-infinity bound of the random perturbation
  std::uint64_t seed{0};
  std::optional<double> lambda_override;  // test hook: force the mixing weight
};

/// The output of one augmentation step, ready for loss computation. The
/// embedded TrainSample carries the mixed features and soft labels.
struct AugmentedSample
{
  TrainSample sample;
  double lambda{1.0};
  std::size_t hardest_view{0};
};

/// Mean of the per-step feature maps (the static scene summary consumed by
/// the transition model).
SceneFeatures average_step_features(const std::vector<SceneFeatures> & steps);

/// Classification loss of a rollout from `start` under the given per-step
/// features, scored against `labels`. This is the view-selection criterion.
double view_cls_loss(
  const ModelParams & params, const std::vector<SceneFeatures> & step_features, CellIndex start,
  const std::vector<CellIndex> & labels);

/// Add i.i.d. uniform(-delta, delta) noise to every feature entry. No
/// renormalization.
std::vector<SceneFeatures> perturb_random(
  const std::vector<SceneFeatures> & features, double delta, std::mt19937_64 & rng);

/// Index of the view whose labels maximize the classification loss of the
/// perturbed anchor features. Ties break to the lowest index. Pass the
/// perturbation actually used so selection and attack share one draw.
std::size_t select_hardest_view(
  const MultiViewSample & sample, const ModelParams & params,
  const std::vector<SceneFeatures> & perturbed_anchor);

/// Targeted signed-gradient step: V - epsilon * sign(grad_V cls(V + noise,
/// target labels)), evaluated at the perturbed features but applied to the
/// originals. sign(0) = 0.
std::vector<SceneFeatures> fgsm_targeted(
  const MultiViewSample & sample, const ModelParams & params,
  const std::vector<SceneFeatures> & perturbed_anchor, const std::vector<CellIndex> & target_cells,
  double epsilon);

/// Convex combination of the adversarial anchor and the hardest view:
/// features lambda*adv + (1-lambda)*hardest, per-step soft labels
/// lambda*onehot(anchor) + (1-lambda)*onehot(hardest).
AugmentedSample mixup_augment(
  const MultiViewSample & sample, const std::vector<SceneFeatures> & adversarial,
  const ViewSample & hardest, std::size_t hardest_index, double lambda);

/// The full augmentation step: random perturbation, hardest-view selection,
/// targeted attack, mixup — in that order. With no additional views the
/// anchor serves as its own candidate view.
AugmentedSample simaug_step(
  const MultiViewSample & sample, const ModelParams & params, const AugConfig & config,
  std::mt19937_64 & rng);

/// Gradient-descent training where every sample is re-augmented each epoch.
TrainResult train_with_simaug(
  const std::vector<MultiViewSample> & dataset, const GridSpec & grid, int radius,
  int num_classes, const TrainConfig & config, const AugConfig & aug);

}  // namespace fpk

#endif  // FPK__SIMAUG_HPP_
