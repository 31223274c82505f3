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

#ifndef FPK__IO_HPP_
#define FPK__IO_HPP_

#include <string>
#include <vector>

#include "fpk/gridnet.hpp"
#include "fpk/metrics.hpp"
#include "fpk/multiview.hpp"
#include "fpk/scenario.hpp"
#include "fpk/simaug.hpp"
#include "fpk/types.hpp"

namespace fpk
{

// Trajectory file: one line per point, `frame<TAB>agent<TAB>x<TAB>y`.
// Doubles are written in shortest round-trip form.
void save_trajectories_tsv(const std::string & path, const std::vector<Trajectory> & trajectories);
std::vector<Trajectory> load_trajectories_tsv(const std::string & path);

// Multi-future ground truth: JSON array of scenario documents with fields
// sample_id, observation, futures, scene_ref.
void save_dataset_json(const std::string & path, const std::vector<MultiFutureSample> & samples);
std::vector<MultiFutureSample> load_dataset_json(const std::string & path);

// Scene class map: text header `H W K` then H rows of W integers.
void save_scene_map(const std::string & path, const SceneClassMap & map);
SceneClassMap load_scene_map(const std::string & path);

// Homography file: 9 whitespace-separated reals, row-major.
void save_homography(const std::string & path, const Homography & h);
Homography load_homography(const std::string & path);

struct ModelCheckpoint
{
  ModelParams params;
  TrainConfig train_config;
  std::vector<double> loss_trace;
};

// Checkpoint document: {grid, r, kernel, scene_bias, A, c, train_config,
// loss_trace}.
void save_model_json(const std::string & path, const ModelCheckpoint & checkpoint);
ModelCheckpoint load_model_json(const std::string & path);

struct SamplePredictions
{
  std::string sample_id;
  PredictionSet preds;
};

void save_predictions_json(
  const std::string & path, const std::vector<SamplePredictions> & predictions,
  const GridSpec & grid);
std::vector<SamplePredictions> load_predictions_json(
  const std::string & path, GridSpec * grid_out = nullptr);

// Metric report: {metric: {mean, per_sample: {id: value}}}.
void save_metric_report_json(const std::string & path, const MetricReport & report);
MetricReport load_metric_report_json(const std::string & path);

// Global tracks: `frame<TAB>global_id<TAB>x<TAB>y` (fused ground plane).
void save_global_tracks_tsv(const std::string & path, const std::vector<GlobalTrack> & tracks);
std::vector<GlobalTrack> load_global_tracks_tsv(const std::string & path);

// Belief heatmaps: plain-text grid (one row of probabilities per line, one
// blank-line-separated block per step) and ASCII PGM scaled to the peak.
void save_belief_text(const std::string & path, const std::vector<BeliefMap> & beliefs);
void save_belief_pgm(const std::string & path, const BeliefMap & belief);

// Generator output directory: per-view dataset.json + scene.txt, a
// views.json with the transforms, and truth.json for oracle tests.
void save_generate_result(
  const std::string & dir, const GenerateResult & data, const GridSpec & grid);
GenerateResult load_generate_result(const std::string & dir);
void save_truth_json(const std::string & path, const GenerateResult & data);

// Augmented dataset (checkpoint-adjacent JSON): mixed features plus soft
// labels, loadable as training samples.
void save_augmented_json(
  const std::string & path, const std::vector<AugmentedSample> & samples, const GridSpec & grid);
std::vector<TrainSample> load_augmented_json(const std::string & path);

}  // namespace fpk

#endif  // FPK__IO_HPP_
