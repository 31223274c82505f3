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

#include "fpk/gridnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace fpk
{

namespace
{

constexpr double kProbFloor = 1e-12;

void check_features(const ModelParams & params, const SceneFeatures & features)
{
  if (features.rows != params.grid.rows || features.cols != params.grid.cols ||
      features.num_classes != params.num_classes) {
    throw std::invalid_argument("scene features do not match the model grid");
  }
}

// Sparse transition table: per source cell, the in-grid neighborhood with
// kernel slots and softmax probabilities.
struct TransitionTable
{
  int span{0};
  std::vector<std::vector<CellIndex>> dest;    // per source cell
  std::vector<std::vector<int>> slot;          // kernel slot per entry
  std::vector<std::vector<double>> prob;       // softmax per entry
};

TransitionTable build_table(const ModelParams & params, const SceneFeatures & features)
{
  check_features(params, features);
  const GridSpec & g = params.grid;
  const int r = params.radius;
  const int span = params.kernel_span();
  const int n = g.size();
  const int k_cls = params.num_classes;

  // Per-destination scene term, shared by every source cell.
  std::vector<double> scene_term(static_cast<std::size_t>(n), 0.0);
  for (CellIndex i = 0; i < n; ++i) {
    double s = 0.0;
    for (int m = 0; m < k_cls; ++m) {
      s += params.scene_bias[static_cast<std::size_t>(m)] * features.at(i, m);
    }
    scene_term[static_cast<std::size_t>(i)] = s;
  }

  TransitionTable table;
  table.span = span;
  table.dest.resize(static_cast<std::size_t>(n));
  table.slot.resize(static_cast<std::size_t>(n));
  table.prob.resize(static_cast<std::size_t>(n));

  std::vector<double> logits;
  for (CellIndex j = 0; j < n; ++j) {
    const int rj = g.row_of(j);
    const int cj = g.col_of(j);
    auto & dests = table.dest[static_cast<std::size_t>(j)];
    auto & slots = table.slot[static_cast<std::size_t>(j)];
    auto & probs = table.prob[static_cast<std::size_t>(j)];
    logits.clear();
    for (int dr = -r; dr <= r; ++dr) {
      const int ri = rj + dr;
      if (ri < 0 || ri >= g.rows) {
        continue;
      }
      for (int dc = -r; dc <= r; ++dc) {
        const int ci = cj + dc;
        if (ci < 0 || ci >= g.cols) {
          continue;
        }
        const CellIndex i = g.flat(ri, ci);
        const int s = (dr + r) * span + (dc + r);
        dests.push_back(i);
        slots.push_back(s);
        logits.push_back(params.kernel[static_cast<std::size_t>(s)] +
                         scene_term[static_cast<std::size_t>(i)]);
      }
    }
    // Stable softmax over the supported destinations.
    const double zmax = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    probs.resize(logits.size());
    for (std::size_t e = 0; e < logits.size(); ++e) {
      probs[e] = std::exp(logits[e] - zmax);
      total += probs[e];
    }
    for (double & p : probs) {
      p /= total;
    }
  }
  return table;
}

void check_cell(const GridSpec & g, CellIndex i, const char * what)
{
  if (!g.in_range(i)) {
    throw std::out_of_range(std::string(what) + ": cell index out of range");
  }
}

BeliefMap to_belief(const GridSpec & g, std::vector<double> values)
{
  BeliefMap b;
  b.rows = g.rows;
  b.cols = g.cols;
  b.values = std::move(values);
  notify_belief(b);
  return b;
}

// One rollout step: next(i) = sum_j cur(j) p(i|j). Skips empty sources.
void advance(const TransitionTable & table, const std::vector<double> & cur,
             std::vector<double> & next)
{
  std::fill(next.begin(), next.end(), 0.0);
  for (std::size_t j = 0; j < cur.size(); ++j) {
    const double mass = cur[j];
    if (mass == 0.0) {
      continue;
    }
    const auto & dests = table.dest[j];
    const auto & probs = table.prob[j];
    for (std::size_t e = 0; e < dests.size(); ++e) {
      next[static_cast<std::size_t>(dests[e])] += mass * probs[e];
    }
  }
}

double smooth_l1(double x, double beta)
{
  const double a = std::fabs(x);
  return a < beta ? 0.5 * x * x / beta : a - 0.5 * beta;
}

double smooth_l1_grad(double x, double beta)
{
  const double a = std::fabs(x);
  return a < beta ? x / beta : (x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0));
}

}  // namespace

SceneFeatures SceneFeatures::from_class_map(const SceneClassMap & map)
{
  SceneFeatures f;
  f.rows = map.rows;
  f.cols = map.cols;
  f.num_classes = map.num_classes;
  f.values.assign(static_cast<std::size_t>(map.rows) * map.cols * map.num_classes, 0.0);
  for (int cell = 0; cell < map.rows * map.cols; ++cell) {
    const int k = map.classes[static_cast<std::size_t>(cell)];
    if (k < 0 || k >= map.num_classes) {
      throw std::invalid_argument("SceneClassMap: class label out of range");
    }
    f.at(cell, k) = 1.0;
  }
  return f;
}

ModelParams ModelParams::zeros(const GridSpec & grid, int radius, int num_classes)
{
  if (radius < 1) {
    throw std::invalid_argument("ModelParams: radius must be >= 1");
  }
  if (num_classes < 1) {
    throw std::invalid_argument("ModelParams: num_classes must be >= 1");
  }
  ModelParams p;
  p.grid = grid;
  p.radius = radius;
  p.num_classes = num_classes;
  const int span = p.kernel_span();
  p.kernel.assign(static_cast<std::size_t>(span) * span, 0.0);
  p.scene_bias.assign(static_cast<std::size_t>(num_classes), 0.0);
  return p;
}

ModelParams ModelParams::random_init(
  const GridSpec & grid, int radius, int num_classes, double sigma, std::uint64_t seed)
{
  ModelParams p = zeros(grid, radius, num_classes);
  if (sigma <= 0.0) {
    return p;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-sigma, sigma);
  for (double & v : p.kernel) {
    v = u(rng);
  }
  for (double & v : p.scene_bias) {
    v = u(rng);
  }
  for (double & v : p.offset_affine) {
    v = u(rng);
  }
  for (double & v : p.offset_bias) {
    v = u(rng);
  }
  return p;
}

std::vector<TrainSample> make_train_samples(
  const std::vector<MultiFutureSample> & dataset, const SceneClassMap & scene,
  const GridSpec & spec)
{
  auto features = std::make_shared<const SceneFeatures>(SceneFeatures::from_class_map(scene));
  std::vector<TrainSample> out;
  for (const auto & sample : dataset) {
    if (sample.observation.points.empty()) {
      throw std::invalid_argument("make_train_samples: empty observation");
    }
    for (const auto & future : sample.futures) {
      TrainSample ts;
      ts.start_cell = quantize(sample.observation.back().pos(), spec).index;
      ts.start_velocity = sample.observation.last_step();
      ts.features = features;
      for (const auto & p : future.points) {
        const CellIndex cell = quantize(p.pos(), spec).index;
        ts.future_cells.push_back(cell);
        ts.offset_targets.push_back(offset_target(p.pos(), cell, spec));
      }
      out.push_back(std::move(ts));
    }
  }
  return out;
}

BeliefMap transition_distribution(
  CellIndex prev, const ModelParams & params, const SceneFeatures & features)
{
  check_cell(params.grid, prev, "transition_distribution");
  const TransitionTable table = build_table(params, features);
  std::vector<double> values(static_cast<std::size_t>(params.grid.size()), 0.0);
  const auto & dests = table.dest[static_cast<std::size_t>(prev)];
  const auto & probs = table.prob[static_cast<std::size_t>(prev)];
  for (std::size_t e = 0; e < dests.size(); ++e) {
    values[static_cast<std::size_t>(dests[e])] = probs[e];
  }
  return to_belief(params.grid, std::move(values));
}

BeliefMap transition_distribution(
  CellIndex prev, const ModelParams & params, const SceneClassMap & scene)
{
  return transition_distribution(prev, params, SceneFeatures::from_class_map(scene));
}

std::vector<BeliefMap> rollout_beliefs(
  CellIndex start, const ModelParams & params, const SceneFeatures & features, int steps)
{
  check_cell(params.grid, start, "rollout_beliefs");
  if (steps < 1) {
    throw std::invalid_argument("rollout_beliefs: steps must be >= 1");
  }
  const TransitionTable table = build_table(params, features);
  const std::size_t n = static_cast<std::size_t>(params.grid.size());
  std::vector<double> cur(n, 0.0);
  cur[static_cast<std::size_t>(start)] = 1.0;
  std::vector<double> next(n, 0.0);

  std::vector<BeliefMap> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (int t = 0; t < steps; ++t) {
    advance(table, cur, next);
    cur = next;
    out.push_back(to_belief(params.grid, cur));
  }
  return out;
}

std::vector<BeliefMap> rollout_beliefs(
  CellIndex start, const ModelParams & params, const SceneClassMap & scene, int steps)
{
  return rollout_beliefs(start, params, SceneFeatures::from_class_map(scene), steps);
}

std::vector<Vec2> predict_offsets(const Trajectory & obs, const ModelParams & params, int steps)
{
  if (obs.points.empty()) {
    throw std::invalid_argument("predict_offsets: empty observation");
  }
  if (steps < 0) {
    throw std::invalid_argument("predict_offsets: negative steps");
  }
  const Vec2 v = obs.last_step();
  const Vec2 offset = {
    params.offset_affine[0] * v.x + params.offset_affine[1] * v.y + params.offset_bias[0],
    params.offset_affine[2] * v.x + params.offset_affine[3] * v.y + params.offset_bias[1]};
  return std::vector<Vec2>(static_cast<std::size_t>(steps), offset);
}

LossResult loss_and_gradients(
  const std::vector<TrainSample> & batch, const ModelParams & params, double lambda1,
  double lambda2, double smooth_l1_break, bool want_feature_grads)
{
  if (lambda1 < 0.0) {
    throw std::invalid_argument("loss_and_gradients: lambda1 must be >= 0");
  }
  const GridSpec & g = params.grid;
  const std::size_t n = static_cast<std::size_t>(g.size());
  const int k_cls = params.num_classes;

  LossResult result;
  result.grads.kernel.assign(params.kernel.size(), 0.0);
  result.grads.scene_bias.assign(params.scene_bias.size(), 0.0);
  if (want_feature_grads) {
    result.feature_grads.resize(batch.size());
  }

  // Transition tables are rebuilt per distinct feature map; samples sharing
  // one map (the common case outside augmentation) share one table.
  const SceneFeatures * cached_features = nullptr;
  TransitionTable table;

  std::vector<std::vector<double>> beliefs;   // C_0..C_T for the current sample
  std::vector<std::vector<double>> adjoint;   // dL/dC_t
  std::vector<std::vector<double>> g_prob;    // dL/dM per source-cell entry
  std::vector<char> touched;

  for (std::size_t si = 0; si < batch.size(); ++si) {
    const TrainSample & sample = batch[si];
    if (!sample.features) {
      throw std::invalid_argument("loss_and_gradients: sample has no scene features");
    }
    const int steps = sample.steps();
    if (steps < 1) {
      throw std::invalid_argument("loss_and_gradients: sample has no future steps");
    }
    if (sample.has_soft_labels() &&
        sample.soft_labels.size() != static_cast<std::size_t>(steps) * n) {
      throw std::invalid_argument("loss_and_gradients: soft label shape mismatch");
    }
    check_cell(g, sample.start_cell, "loss_and_gradients");
    if (sample.offset_targets.size() != static_cast<std::size_t>(steps)) {
      throw std::invalid_argument("loss_and_gradients: offset target length mismatch");
    }

    if (cached_features != sample.features.get()) {
      table = build_table(params, *sample.features);
      cached_features = sample.features.get();
    }

    // Forward rollout, keeping every belief for the backward pass.
    beliefs.assign(static_cast<std::size_t>(steps) + 1, std::vector<double>(n, 0.0));
    beliefs[0][static_cast<std::size_t>(sample.start_cell)] = 1.0;
    for (int t = 1; t <= steps; ++t) {
      advance(table, beliefs[static_cast<std::size_t>(t - 1)],
              beliefs[static_cast<std::size_t>(t)]);
    }

    // Classification loss. Soft labels are validated as distributions; mass
    // on cells outside the reachable support hits the probability floor and
    // contributes a constant.
    const double inv_steps = 1.0 / static_cast<double>(steps);
    double cls = 0.0;
    for (int t = 1; t <= steps; ++t) {
      const auto & c = beliefs[static_cast<std::size_t>(t)];
      if (sample.has_soft_labels()) {
        const double * y = sample.soft_labels.data() + static_cast<std::size_t>(t - 1) * n;
        double mass = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (y[i] < 0.0) {
            throw std::invalid_argument("loss_and_gradients: negative soft label");
          }
          mass += y[i];
          if (y[i] != 0.0) {
            cls -= inv_steps * y[i] * std::log(std::max(c[i], kProbFloor));
          }
        }
        if (std::fabs(mass - 1.0) > 1e-9) {
          throw std::invalid_argument("loss_and_gradients: soft label is not a distribution");
        }
      } else {
        const CellIndex label = sample.future_cells[static_cast<std::size_t>(t - 1)];
        check_cell(g, label, "loss_and_gradients label");
        cls -= inv_steps * std::log(std::max(c[static_cast<std::size_t>(label)], kProbFloor));
      }
    }
    result.cls += cls;

    // Backward pass through the rollout: the adjoint of C_t collects the
    // label term plus the propagated term, and the transition-probability
    // adjoint accumulates over time (the table is shared across steps).
    adjoint.assign(static_cast<std::size_t>(steps) + 1, std::vector<double>(n, 0.0));
    g_prob.assign(n, {});
    touched.assign(n, 0);
    for (int t = steps; t >= 1; --t) {
      auto & gt = adjoint[static_cast<std::size_t>(t)];
      const auto & c = beliefs[static_cast<std::size_t>(t)];
      if (sample.has_soft_labels()) {
        const double * y = sample.soft_labels.data() + static_cast<std::size_t>(t - 1) * n;
        for (std::size_t i = 0; i < n; ++i) {
          if (y[i] != 0.0 && c[i] > kProbFloor) {
            gt[i] -= inv_steps * y[i] / c[i];
          }
        }
      } else {
        const auto label = static_cast<std::size_t>(sample.future_cells[t - 1]);
        if (c[label] > kProbFloor) {
          gt[label] -= inv_steps / c[label];
        }
      }
      auto & gprev = adjoint[static_cast<std::size_t>(t - 1)];
      const auto & cprev = beliefs[static_cast<std::size_t>(t - 1)];
      for (std::size_t j = 0; j < n; ++j) {
        const auto & dests = table.dest[j];
        const auto & probs = table.prob[j];
        const bool active = cprev[j] != 0.0;
        if (!active) {
          continue;
        }
        if (!touched[j]) {
          g_prob[j].assign(dests.size(), 0.0);
          touched[j] = 1;
        }
        double back = 0.0;
        auto & gm = g_prob[j];
        for (std::size_t e = 0; e < dests.size(); ++e) {
          const double gi = gt[static_cast<std::size_t>(dests[e])];
          back += probs[e] * gi;
          gm[e] += cprev[j] * gi;
        }
        gprev[j] += back;
      }
    }

    // Softmax Jacobian per source cell, scattered into kernel / bias /
    // feature gradients.
    SceneFeatures * fg = nullptr;
    if (want_feature_grads) {
      auto & slot_fg = result.feature_grads[si];
      slot_fg.rows = g.rows;
      slot_fg.cols = g.cols;
      slot_fg.num_classes = k_cls;
      slot_fg.values.assign(n * static_cast<std::size_t>(k_cls), 0.0);
      fg = &slot_fg;
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!touched[j]) {
        continue;
      }
      const auto & dests = table.dest[j];
      const auto & slots = table.slot[j];
      const auto & probs = table.prob[j];
      const auto & gm = g_prob[j];
      double inner = 0.0;
      for (std::size_t e = 0; e < dests.size(); ++e) {
        inner += gm[e] * probs[e];
      }
      for (std::size_t e = 0; e < dests.size(); ++e) {
        const double gz = probs[e] * (gm[e] - inner);
        if (gz == 0.0) {
          continue;
        }
        result.grads.kernel[static_cast<std::size_t>(slots[e])] += gz;
        const CellIndex i = dests[e];
        for (int m = 0; m < k_cls; ++m) {
          result.grads.scene_bias[static_cast<std::size_t>(m)] +=
            gz * sample.features->at(i, m);
          if (fg) {
            fg->at(i, m) += gz * params.scene_bias[static_cast<std::size_t>(m)];
          }
        }
      }
    }

    // Regression loss on the offsets of the true cells.
    const Vec2 v = sample.start_velocity;
    const Vec2 o = {
      params.offset_affine[0] * v.x + params.offset_affine[1] * v.y + params.offset_bias[0],
      params.offset_affine[2] * v.x + params.offset_affine[3] * v.y + params.offset_bias[1]};
    double reg = 0.0;
    Vec2 go{0.0, 0.0};
    for (int t = 0; t < steps; ++t) {
      const Vec2 e = o - sample.offset_targets[static_cast<std::size_t>(t)];
      reg += inv_steps * (smooth_l1(e.x, smooth_l1_break) + smooth_l1(e.y, smooth_l1_break));
      go.x += inv_steps * smooth_l1_grad(e.x, smooth_l1_break);
      go.y += inv_steps * smooth_l1_grad(e.y, smooth_l1_break);
    }
    result.reg += reg;
    result.grads.offset_affine[0] += lambda1 * go.x * v.x;
    result.grads.offset_affine[1] += lambda1 * go.x * v.y;
    result.grads.offset_affine[2] += lambda1 * go.y * v.x;
    result.grads.offset_affine[3] += lambda1 * go.y * v.y;
    result.grads.offset_bias[0] += lambda1 * go.x;
    result.grads.offset_bias[1] += lambda1 * go.y;
  }

  result.loss = result.cls + lambda1 * result.reg;

  if (lambda2 > 0.0) {
    double sq = 0.0;
    for (double w : params.kernel) {
      sq += w * w;
    }
    for (double w : params.scene_bias) {
      sq += w * w;
    }
    for (double w : params.offset_affine) {
      sq += w * w;
    }
    for (double w : params.offset_bias) {
      sq += w * w;
    }
    result.loss += lambda2 * sq;
    for (std::size_t i = 0; i < params.kernel.size(); ++i) {
      result.grads.kernel[i] += 2.0 * lambda2 * params.kernel[i];
    }
    for (std::size_t i = 0; i < params.scene_bias.size(); ++i) {
      result.grads.scene_bias[i] += 2.0 * lambda2 * params.scene_bias[i];
    }
    for (int i = 0; i < 4; ++i) {
      result.grads.offset_affine[i] += 2.0 * lambda2 * params.offset_affine[i];
    }
    for (int i = 0; i < 2; ++i) {
      result.grads.offset_bias[i] += 2.0 * lambda2 * params.offset_bias[i];
    }
  }
  return result;
}

TrainResult train(
  const std::vector<TrainSample> & dataset, const GridSpec & grid, int radius, int num_classes,
  const TrainConfig & config)
{
  if (dataset.empty()) {
    throw std::invalid_argument("train: empty dataset");
  }
  if (!(config.learning_rate > 0.0)) {
    throw std::invalid_argument("train: learning rate must be positive");
  }
  if (config.epochs < 0) {
    throw std::invalid_argument("train: negative epoch count");
  }

  TrainResult result;
  result.params = config.init_sigma > 0.0
    ? ModelParams::random_init(grid, radius, num_classes, config.init_sigma, config.seed)
    : ModelParams::zeros(grid, radius, num_classes);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const LossResult step = loss_and_gradients(
      dataset, result.params, config.lambda1, config.lambda2, config.smooth_l1_break);
    if (!std::isfinite(step.loss)) {
      std::ostringstream os;
      os << "train: loss diverged (non-finite) at epoch " << epoch;
      throw std::runtime_error(os.str());
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

namespace
{

struct BeamCandidate
{
  double score;      // selection score (log-prob plus diversity penalty)
  double log_prob;   // penalty-free accumulated log-probability
  int source;        // rank of the source beam
  CellIndex cell;
};

bool candidate_before(const BeamCandidate & a, const BeamCandidate & b)
{
  if (a.score != b.score) {
    return a.score > b.score;
  }
  if (a.source != b.source) {
    return a.source < b.source;
  }
  return a.cell < b.cell;
}

}  // namespace

BeamResult beam_search_cells(
  CellIndex start, const ModelParams & params, const SceneFeatures & features, int steps, int k,
  double gamma0, int width)
{
  check_cell(params.grid, start, "beam_search_cells");
  if (steps < 1) {
    throw std::invalid_argument("beam_search_cells: steps must be >= 1");
  }
  if (k < 1) {
    throw std::invalid_argument("beam_search_cells: K must be >= 1");
  }
  if (gamma0 < 0.0) {
    throw std::invalid_argument("beam_search_cells: gamma0 must be >= 0");
  }
  if (width <= 0) {
    width = k;
  }
  width = std::max(width, k);

  const TransitionTable table = build_table(params, features);

  std::vector<BeamState> beam(1);  // root: empty sequence at the start cell
  std::vector<BeamCandidate> candidates;
  std::vector<BeamCandidate> picked;

  for (int t = 0; t < steps; ++t) {
    candidates.clear();
    for (std::size_t b = 0; b < beam.size(); ++b) {
      const CellIndex prev = beam[b].cells.empty() ? start : beam[b].cells.back();
      const auto & dests = table.dest[static_cast<std::size_t>(prev)];
      const auto & probs = table.prob[static_cast<std::size_t>(prev)];
      for (std::size_t e = 0; e < dests.size(); ++e) {
        const double lp = beam[b].log_prob + std::log(probs[e]);
        candidates.push_back({lp, lp, static_cast<int>(b), dests[e]});
      }
    }

    picked.clear();
    if (gamma0 == 0.0) {
      // No penalty: greedy sequential selection is plain sorting.
      std::sort(candidates.begin(), candidates.end(), candidate_before);
      const std::size_t take = std::min<std::size_t>(candidates.size(),
                                                     static_cast<std::size_t>(width));
      picked.assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take));
    } else {
      // Sequential selection: each pick discounts cells already chosen at
      // this step by earlier-ranked picks.
      std::vector<char> used(candidates.size(), 0);
      std::vector<int> picks_per_cell(static_cast<std::size_t>(params.grid.size()), 0);
      const std::size_t take = std::min<std::size_t>(candidates.size(),
                                                     static_cast<std::size_t>(width));
      for (std::size_t round = 0; round < take; ++round) {
        std::ptrdiff_t best = -1;
        BeamCandidate best_cand{};
        for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
          if (used[ci]) {
            continue;
          }
          BeamCandidate cand = candidates[ci];
          cand.score = cand.log_prob -
                       gamma0 * picks_per_cell[static_cast<std::size_t>(cand.cell)];
          if (best < 0 || candidate_before(cand, best_cand)) {
            best = static_cast<std::ptrdiff_t>(ci);
            best_cand = cand;
          }
        }
        used[static_cast<std::size_t>(best)] = 1;
        ++picks_per_cell[static_cast<std::size_t>(best_cand.cell)];
        picked.push_back(best_cand);
      }
    }

    std::vector<BeamState> next;
    next.reserve(picked.size());
    for (const auto & c : picked) {
      BeamState s;
      s.cells = beam[static_cast<std::size_t>(c.source)].cells;
      s.cells.push_back(c.cell);
      s.log_prob = c.log_prob;
      next.push_back(std::move(s));
    }
    beam = std::move(next);
  }

  BeamResult result;
  result.truncated = static_cast<int>(beam.size()) < k;
  const std::size_t take = std::min<std::size_t>(beam.size(), static_cast<std::size_t>(k));
  result.beams.assign(beam.begin(), beam.begin() + static_cast<std::ptrdiff_t>(take));
  return result;
}

PredictionSet diverse_beam_search(
  const Trajectory & obs, const ModelParams & params, const SceneFeatures & features, int steps,
  int k, double gamma0, int width)
{
  if (obs.points.empty()) {
    throw std::invalid_argument("diverse_beam_search: empty observation");
  }
  const CellIndex start = quantize(obs.back().pos(), params.grid).index;
  const BeamResult beams = beam_search_cells(start, params, features, steps, k, gamma0, width);
  const std::vector<Vec2> offsets = predict_offsets(obs, params, steps);

  PredictionSet out;
  out.truncated = beams.truncated;
  for (const auto & beam : beams.beams) {
    Trajectory traj;
    traj.agent_id = obs.agent_id;
    long long frame = obs.back().frame;
    for (std::size_t t = 0; t < beam.cells.size(); ++t) {
      const Vec2 p = cell_center(beam.cells[t], params.grid) + offsets[t];
      ++frame;
      traj.points.push_back({frame, p.x, p.y});
    }
    out.trajectories.push_back(std::move(traj));
    out.log_probs.push_back(beam.log_prob);
  }
  out.step_beliefs = rollout_beliefs(start, params, features, steps);
  return out;
}

PredictionSet diverse_beam_search(
  const Trajectory & obs, const ModelParams & params, const SceneClassMap & scene, int steps,
  int k, double gamma0, int width)
{
  return diverse_beam_search(
    obs, params, SceneFeatures::from_class_map(scene), steps, k, gamma0, width);
}

}  // namespace fpk
