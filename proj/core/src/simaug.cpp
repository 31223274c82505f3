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

#include "fpk/simaug.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace fpk
{

namespace
{

void check_aug_config(const AugConfig & config)
{
  if (!(config.alpha > 0.0)) {
    throw std::invalid_argument("AugConfig: alpha must be > 0");
  }
  if (config.epsilon < 0.0 || config.delta < 0.0) {
    throw std::invalid_argument("AugConfig: epsilon and delta must be >= 0");
  }
}

void check_same_shape(const std::vector<SceneFeatures> & a, const std::vector<SceneFeatures> & b,
                      const char * what)
{
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": step count mismatch");
  }
  for (std::size_t s = 0; s < a.size(); ++s) {
    if (a[s].rows != b[s].rows || a[s].cols != b[s].cols ||
        a[s].num_classes != b[s].num_classes) {
      throw std::invalid_argument(std::string(what) + ": feature shape mismatch");
    }
  }
}

double sample_beta(double alpha, std::mt19937_64 & rng)
{
  std::gamma_distribution<double> gamma(alpha, 1.0);
  const double x = gamma(rng);
  const double y = gamma(rng);
  const double total = x + y;
  return total > 0.0 ? x / total : 0.5;
}

// Build a cls-only TrainSample against the given labels. lambda1 = 0 in the
// loss call makes the offset part irrelevant; targets are placeholders.
TrainSample cls_probe(
  CellIndex start, const std::vector<CellIndex> & labels,
  std::shared_ptr<const SceneFeatures> features)
{
  TrainSample ts;
  ts.start_cell = start;
  ts.future_cells = labels;
  ts.offset_targets.assign(labels.size(), Vec2{0.0, 0.0});
  ts.features = std::move(features);
  return ts;
}

}  // namespace

SceneFeatures average_step_features(const std::vector<SceneFeatures> & steps)
{
  if (steps.empty()) {
    throw std::invalid_argument("average_step_features: no steps");
  }
  SceneFeatures avg = steps.front();
  for (std::size_t s = 1; s < steps.size(); ++s) {
    if (steps[s].values.size() != avg.values.size()) {
      throw std::invalid_argument("average_step_features: step shape mismatch");
    }
    for (std::size_t i = 0; i < avg.values.size(); ++i) {
      avg.values[i] += steps[s].values[i];
    }
  }
  const double inv = 1.0 / static_cast<double>(steps.size());
  for (double & v : avg.values) {
    v *= inv;
  }
  return avg;
}

double view_cls_loss(
  const ModelParams & params, const std::vector<SceneFeatures> & step_features, CellIndex start,
  const std::vector<CellIndex> & labels)
{
  if (labels.empty()) {
    throw std::invalid_argument("view_cls_loss: empty labels");
  }
  auto avg = std::make_shared<const SceneFeatures>(average_step_features(step_features));
  const TrainSample probe = cls_probe(start, labels, avg);
  return loss_and_gradients({probe}, params, 0.0).cls;
}

std::vector<SceneFeatures> perturb_random(
  const std::vector<SceneFeatures> & features, double delta, std::mt19937_64 & rng)
{
  if (delta < 0.0) {
    throw std::invalid_argument("perturb_random: delta must be >= 0");
  }
  std::vector<SceneFeatures> out = features;
  if (delta == 0.0) {
    return out;
  }
  std::uniform_real_distribution<double> noise(-delta, delta);
  for (auto & step : out) {
    for (double & v : step.values) {
      v += noise(rng);
    }
  }
  return out;
}

std::size_t select_hardest_view(
  const MultiViewSample & sample, const ModelParams & params,
  const std::vector<SceneFeatures> & perturbed_anchor)
{
  if (sample.views.empty()) {
    throw std::invalid_argument("select_hardest_view: empty view list");
  }
  std::size_t best = 0;
  double best_loss = -1.0;
  for (std::size_t j = 0; j < sample.views.size(); ++j) {
    const double loss =
      view_cls_loss(params, perturbed_anchor, sample.start_cell, sample.views[j].future_cells);
    if (loss > best_loss) {
      best_loss = loss;
      best = j;
    }
  }
  return best;
}

std::vector<SceneFeatures> fgsm_targeted(
  const MultiViewSample & sample, const ModelParams & params,
  const std::vector<SceneFeatures> & perturbed_anchor, const std::vector<CellIndex> & target_cells,
  double epsilon)
{
  if (epsilon < 0.0) {
    throw std::invalid_argument("fgsm_targeted: epsilon must be >= 0");
  }
  check_same_shape(sample.anchor.step_features, perturbed_anchor, "fgsm_targeted");

  std::vector<SceneFeatures> adv = sample.anchor.step_features;
  if (epsilon == 0.0) {
    return adv;
  }

  auto avg = std::make_shared<const SceneFeatures>(average_step_features(perturbed_anchor));
  const TrainSample probe = cls_probe(sample.start_cell, target_cells, avg);
  const LossResult res = loss_and_gradients(
    {probe}, params, 0.0, 0.0, 1.0, /*want_feature_grads=*/true);
  const SceneFeatures & avg_grad = res.feature_grads.front();

  // The per-step gradient is avg_grad / n_steps; the sign is unaffected.
  for (auto & step : adv) {
    for (std::size_t i = 0; i < step.values.size(); ++i) {
      const double gsign =
        avg_grad.values[i] > 0.0 ? 1.0 : (avg_grad.values[i] < 0.0 ? -1.0 : 0.0);
      step.values[i] -= epsilon * gsign;
    }
  }
  return adv;
}

AugmentedSample mixup_augment(
  const MultiViewSample & sample, const std::vector<SceneFeatures> & adversarial,
  const ViewSample & hardest, std::size_t hardest_index, double lambda)
{
  check_same_shape(adversarial, hardest.step_features, "mixup_augment");
  if (hardest.future_cells.size() != sample.anchor.future_cells.size()) {
    throw std::invalid_argument("mixup_augment: label length mismatch");
  }

  std::vector<SceneFeatures> mixed = adversarial;
  for (std::size_t s = 0; s < mixed.size(); ++s) {
    const auto & other = hardest.step_features[s].values;
    for (std::size_t i = 0; i < mixed[s].values.size(); ++i) {
      mixed[s].values[i] = lambda * mixed[s].values[i] + (1.0 - lambda) * other[i];
    }
  }

  const SceneFeatures avg = average_step_features(mixed);
  const std::size_t n = static_cast<std::size_t>(avg.rows) * avg.cols;
  const std::size_t steps = sample.anchor.future_cells.size();

  AugmentedSample out;
  out.lambda = lambda;
  out.hardest_view = hardest_index;
  out.sample.start_cell = sample.start_cell;
  out.sample.start_velocity = sample.start_velocity;
  out.sample.future_cells = sample.anchor.future_cells;
  out.sample.offset_targets = sample.offset_targets;
  out.sample.features = std::make_shared<const SceneFeatures>(avg);
  out.sample.soft_labels.assign(steps * n, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    const auto anchor_cell = static_cast<std::size_t>(sample.anchor.future_cells[t]);
    const auto hardest_cell = static_cast<std::size_t>(hardest.future_cells[t]);
    out.sample.soft_labels[t * n + anchor_cell] += lambda;
    out.sample.soft_labels[t * n + hardest_cell] += 1.0 - lambda;
  }
  return out;
}

AugmentedSample simaug_step(
  const MultiViewSample & sample, const ModelParams & params, const AugConfig & config,
  std::mt19937_64 & rng)
{
  check_aug_config(config);
  // With no additional views the anchor is its own candidate.
  MultiViewSample effective = sample;
  if (effective.views.empty()) {
    effective.views.push_back(effective.anchor);
  }

  const std::vector<SceneFeatures> perturbed =
    perturb_random(effective.anchor.step_features, config.delta, rng);
  const std::size_t hardest = select_hardest_view(effective, params, perturbed);
  const std::vector<SceneFeatures> adv = fgsm_targeted(
    effective, params, perturbed, effective.views[hardest].future_cells, config.epsilon);
  const double lambda = config.lambda_override ? *config.lambda_override
                                               : sample_beta(config.alpha, rng);
  return mixup_augment(effective, adv, effective.views[hardest], hardest, lambda);
}

TrainResult train_with_simaug(
  const std::vector<MultiViewSample> & dataset, const GridSpec & grid, int radius,
  int num_classes, const TrainConfig & config, const AugConfig & aug)
{
  if (dataset.empty()) {
    throw std::invalid_argument("train_with_simaug: empty dataset");
  }
  check_aug_config(aug);

  TrainResult result;
  result.params = config.init_sigma > 0.0
    ? ModelParams::random_init(grid, radius, num_classes, config.init_sigma, config.seed)
    : ModelParams::zeros(grid, radius, num_classes);

  std::mt19937_64 rng(aug.seed);
  std::vector<TrainSample> batch;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    batch.clear();
    for (const auto & mv : dataset) {
      batch.push_back(simaug_step(mv, result.params, aug, rng).sample);
    }
    const LossResult step = loss_and_gradients(
      batch, result.params, config.lambda1, config.lambda2, config.smooth_l1_break);
    if (!std::isfinite(step.loss)) {
      throw std::runtime_error("train_with_simaug: loss diverged (non-finite)");
    }
    result.loss_trace.push_back(step.loss);
    const double lr = config.learning_rate;
    for (std::size_t i = 0; i < result.params.kernel.size(); ++i) {
      result.params.kernel[i] -= lr * step.grads.kernel[i];
    }
    for (std::size_t i = 0; i < result.params.scene_bias.size(); ++i) {
      result.params.scene_bias[i] -= lr * step.grads.scene_bias[i];
    }
    for (int i = 0; i < 4; ++i) {
      result.params.offset_affine[i] -= lr * step.grads.offset_affine[i];
    }
    for (int i = 0; i < 2; ++i) {
      result.params.offset_bias[i] -= lr * step.grads.offset_bias[i];
    }
  }
  return result;
}

}  // namespace fpk
