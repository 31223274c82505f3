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

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "fpk/baselines.hpp"
#include "fpk/gridnet.hpp"
#include "fpk/io.hpp"
#include "fpk/metrics.hpp"
#include "fpk/multiview.hpp"
#include "fpk/scenario.hpp"
#include "fpk/simaug.hpp"
#include "fpk/types.hpp"
#include "fpk/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

json default_config()
{
  return json{
    {"seed", 0},
    {"horizon", {{"preset", "short"}}},
    {"grid",
     {{"origin", {0.0, 0.0}}, {"extent", {36.0, 18.0}}, {"rows", 18}, {"cols", 36}}},
    {"model", {{"radius", 2}, {"num_classes", 13}, {"init_sigma", 0.0}}},
    {"train",
     {{"learning_rate", 0.2},
      {"epochs", 200},
      {"lambda1", 0.1},
      {"lambda2", 0.0},
      {"smooth_l1_break", 1.0},
      {"simaug", false}}},
    {"augment", {{"alpha", 0.2}, {"epsilon", 0.1}, {"delta", 0.1}}},
    {"predict",
     {{"model", "gridnet"}, {"k", 20}, {"gamma0", 1.0}, {"beam_width", 0},
      {"with_beliefs", true}}},
    {"evaluate",
     {{"metrics", {"ade", "fde", "min_ade_k", "min_fde_k", "min_ade_multi", "min_fde_multi",
                   "grid_acc", "nll"}},
      {"nll_smoothing", 1.0}}},
    {"scenario",
     {{"layout", "bimodal_fork"},
      {"n_agents", 10},
      {"destinations_per_agent", 2},
      {"futures_per_agent", 4},
      {"noise_sigma", 0.05},
      {"n_views", 1},
      {"obstacle_density", 0.1}}},
    {"associate",
     {{"max_dist", 1.0}, {"max_time_gap", 100.0}, {"w_spatial", 1.0}, {"w_appearance", 0.0}}},
    {"smooth", {{"window", 200}}},
    {"paths",
     {{"out_dir", "out"},
      {"dataset", ""},
      {"scene", ""},
      {"checkpoint", ""},
      {"predictions", ""},
      {"report", ""},
      {"train_dataset", ""},
      {"multiview_dir", ""},
      {"augmented", ""},
      {"cameras", json::array()},
      {"global_tracks", ""},
      {"smoothed", ""}}}};
}

void deep_merge(json & base, const json & overlay)
{
  if (!overlay.is_object() || !base.is_object()) {
    base = overlay;
    return;
  }
  for (const auto & [key, value] : overlay.items()) {
    if (base.contains(key) && base[key].is_object() && value.is_object()) {
      deep_merge(base[key], value);
    } else {
      base[key] = value;
    }
  }
}

void apply_set_option(json & config, const std::string & assignment)
{
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw std::invalid_argument("--set expects key.path=value, got '" + assignment + "'");
  }
  std::string pointer = "/" + assignment.substr(0, eq);
  for (auto & ch : pointer) {
    if (ch == '.') {
      ch = '/';
    }
  }
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error &) {
    value = raw;  // plain string
  }
  config[json::json_pointer(pointer)] = value;
}

std::uint64_t fnv1a(const std::string & text)
{
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

struct Horizon
{
  int obs;
  int pred;
};

Horizon horizon_from(const json & config)
{
  const json & h = config.at("horizon");
  // explicit lengths win over a (possibly merged-in) preset
  if (h.contains("obs") && h.contains("pred")) {
    return {h.at("obs").get<int>(), h.at("pred").get<int>()};
  }
  if (h.contains("preset")) {
    const std::string preset = h.at("preset").get<std::string>();
    if (preset == "short") {
      return {8, 12};
    }
    if (preset == "long") {
      return {12, 30};
    }
    throw std::invalid_argument("unknown horizon preset '" + preset + "'");
  }
  return {h.at("obs").get<int>(), h.at("pred").get<int>()};
}

fpk::GridSpec grid_from(const json & config)
{
  const json & g = config.at("grid");
  fpk::GridSpec spec;
  spec.origin_x = g.at("origin").at(0).get<double>();
  spec.origin_y = g.at("origin").at(1).get<double>();
  spec.extent_x = g.at("extent").at(0).get<double>();
  spec.extent_y = g.at("extent").at(1).get<double>();
  spec.rows = g.at("rows").get<int>();
  spec.cols = g.at("cols").get<int>();
  return spec;
}

fpk::ScenarioLayout layout_from(const std::string & name)
{
  if (name == "open") {
    return fpk::ScenarioLayout::kOpen;
  }
  if (name == "bimodal_fork") {
    return fpk::ScenarioLayout::kBimodalFork;
  }
  if (name == "graded_corridor") {
    return fpk::ScenarioLayout::kGradedCorridor;
  }
  if (name == "obstacle_field") {
    return fpk::ScenarioLayout::kObstacleField;
  }
  throw std::invalid_argument("unknown scenario layout '" + name + "'");
}

std::string path_or(const json & config, const std::string & key, const std::string & fallback)
{
  const std::string value = config.at("paths").at(key).get<std::string>();
  if (!value.empty()) {
    return value;
  }
  const std::string out_dir = config.at("paths").at("out_dir").get<std::string>();
  return (fs::path(out_dir) / fallback).string();
}

void write_manifest(const json & config, const std::string & command)
{
  const std::string out_dir = config.at("paths").at("out_dir").get<std::string>();
  fs::create_directories(out_dir);
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(fnv1a(config.dump())));
  const auto now = std::chrono::system_clock::now();
  json manifest{
    {"command", command},
    {"config", config},
    {"config_hash", std::string(hash_hex)},
    {"seed", config.at("seed")},
    {"version", fpk::kVersion},
    {"timestamp_ms",
     std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count()}};
  std::ofstream out((fs::path(out_dir) / ("manifest_" + command + ".json")).string());
  out << manifest.dump(2) << "\n";
}

fpk::ScenarioConfig scenario_config_from(const json & config)
{
  const Horizon horizon = horizon_from(config);
  const json & s = config.at("scenario");
  fpk::ScenarioConfig cfg;
  cfg.grid = grid_from(config);
  cfg.n_agents = s.at("n_agents").get<int>();
  cfg.destinations_per_agent = s.at("destinations_per_agent").get<int>();
  cfg.futures_per_agent = s.at("futures_per_agent").get<int>();
  cfg.noise_sigma = s.at("noise_sigma").get<double>();
  cfg.obs_len = horizon.obs;
  cfg.pred_len = horizon.pred;
  cfg.n_views = s.at("n_views").get<int>();
  cfg.num_classes = config.at("model").at("num_classes").get<int>();
  cfg.obstacle_density = s.at("obstacle_density").get<double>();
  cfg.seed = config.at("seed").get<std::uint64_t>();
  cfg.layout = layout_from(s.at("layout").get<std::string>());
  return cfg;
}

fpk::TrainConfig train_config_from(const json & config)
{
  const json & t = config.at("train");
  fpk::TrainConfig cfg;
  cfg.learning_rate = t.at("learning_rate").get<double>();
  cfg.epochs = t.at("epochs").get<int>();
  cfg.lambda1 = t.at("lambda1").get<double>();
  cfg.lambda2 = t.at("lambda2").get<double>();
  cfg.smooth_l1_break = t.at("smooth_l1_break").get<double>();
  cfg.seed = config.at("seed").get<std::uint64_t>();
  cfg.init_sigma = config.at("model").at("init_sigma").get<double>();
  return cfg;
}

fpk::AugConfig aug_config_from(const json & config)
{
  const json & a = config.at("augment");
  fpk::AugConfig cfg;
  cfg.alpha = a.at("alpha").get<double>();
  cfg.epsilon = a.at("epsilon").get<double>();
  cfg.delta = a.at("delta").get<double>();
  cfg.seed = config.at("seed").get<std::uint64_t>();
  return cfg;
}

// Resolve the scene map for a dataset: explicit path wins, otherwise the
// scene_ref names a file next to the dataset.
fpk::SceneClassMap resolve_scene(
  const json & config, const std::string & dataset_path, const std::string & scene_ref)
{
  const std::string explicit_path = config.at("paths").at("scene").get<std::string>();
  if (!explicit_path.empty()) {
    return fpk::load_scene_map(explicit_path);
  }
  const fs::path dir = fs::path(dataset_path).parent_path();
  return fpk::load_scene_map((dir / (scene_ref + ".txt")).string());
}

int cmd_generate(const json & config)
{
  const fpk::ScenarioConfig cfg = scenario_config_from(config);
  const fpk::GenerateResult data = fpk::generate(cfg);
  const std::string out_dir = config.at("paths").at("out_dir").get<std::string>();
  fpk::save_generate_result(out_dir, data, cfg.grid);
  write_manifest(config, "generate");
  std::cout << "generated " << data.views.front().samples.size() << " samples in "
            << data.views.size() << " view(s) under " << out_dir << "\n";
  if (!data.infeasible.empty()) {
    std::cout << data.infeasible.size() << " agent(s) had no obstacle-free route\n";
  }
  return 0;
}

int cmd_train(const json & config)
{
  const fpk::GridSpec grid = grid_from(config);
  const json & model = config.at("model");
  const int radius = model.at("radius").get<int>();
  const int num_classes = model.at("num_classes").get<int>();
  const fpk::TrainConfig tcfg = train_config_from(config);
  const std::string checkpoint_path = path_or(config, "checkpoint", "model.json");
  fs::create_directories(fs::path(checkpoint_path).parent_path());

  fpk::TrainResult result;
  const std::string multiview_dir = config.at("paths").at("multiview_dir").get<std::string>();
  const std::string augmented = config.at("paths").at("augmented").get<std::string>();
  if (config.at("train").at("simaug").get<bool>()) {
    if (multiview_dir.empty()) {
      throw std::invalid_argument("train: simaug mode needs paths.multiview_dir");
    }
    const fpk::GenerateResult data = fpk::load_generate_result(multiview_dir);
    const auto mv = fpk::make_multiview_samples(data, grid);
    result = fpk::train_with_simaug(mv, grid, radius, num_classes, tcfg,
                                    aug_config_from(config));
  } else if (!augmented.empty()) {
    const auto samples = fpk::load_augmented_json(augmented);
    result = fpk::train(samples, grid, radius, num_classes, tcfg);
  } else {
    const std::string dataset_path = config.at("paths").at("dataset").get<std::string>();
    if (dataset_path.empty()) {
      throw std::invalid_argument("train: need paths.dataset (or multiview_dir / augmented)");
    }
    const auto dataset = fpk::load_dataset_json(dataset_path);
    if (dataset.empty()) {
      throw std::invalid_argument("train: dataset is empty");
    }
    const fpk::SceneClassMap scene = resolve_scene(config, dataset_path, dataset[0].scene_ref);
    const auto samples = fpk::make_train_samples(dataset, scene, grid);
    result = fpk::train(samples, grid, radius, num_classes, tcfg);
  }

  fpk::ModelCheckpoint ckpt;
  ckpt.params = result.params;
  ckpt.train_config = tcfg;
  ckpt.loss_trace = result.loss_trace;
  fpk::save_model_json(checkpoint_path, ckpt);
  write_manifest(config, "train");
  std::cout << "trained " << tcfg.epochs << " epochs; final loss "
            << (result.loss_trace.empty() ? 0.0 : result.loss_trace.back()) << "; wrote "
            << checkpoint_path << "\n";
  return 0;
}

int cmd_predict(const json & config)
{
  const std::string dataset_path = config.at("paths").at("dataset").get<std::string>();
  if (dataset_path.empty()) {
    throw std::invalid_argument("predict: need paths.dataset");
  }
  const auto dataset = fpk::load_dataset_json(dataset_path);
  const Horizon horizon = horizon_from(config);
  const json & p = config.at("predict");
  const std::string model = p.at("model").get<std::string>();
  const std::string predictions_path = path_or(config, "predictions", "predictions.json");
  fs::create_directories(fs::path(predictions_path).parent_path());

  fpk::GridSpec grid = grid_from(config);
  std::vector<fpk::SamplePredictions> out;

  if (model == "gridnet") {
    const std::string checkpoint_path = config.at("paths").at("checkpoint").get<std::string>();
    if (checkpoint_path.empty()) {
      throw std::invalid_argument("predict: gridnet needs paths.checkpoint");
    }
    const fpk::ModelCheckpoint ckpt = fpk::load_model_json(checkpoint_path);
    grid = ckpt.params.grid;
    std::map<std::string, fpk::SceneFeatures> features_by_ref;
    for (const auto & sample : dataset) {
      auto it = features_by_ref.find(sample.scene_ref);
      if (it == features_by_ref.end()) {
        const fpk::SceneClassMap scene = resolve_scene(config, dataset_path, sample.scene_ref);
        it = features_by_ref
               .emplace(sample.scene_ref, fpk::SceneFeatures::from_class_map(scene))
               .first;
      }
      fpk::SamplePredictions sp;
      sp.sample_id = sample.sample_id;
      sp.preds = fpk::diverse_beam_search(
        sample.observation, ckpt.params, it->second, horizon.pred, p.at("k").get<int>(),
        p.at("gamma0").get<double>(), p.at("beam_width").get<int>());
      if (!p.at("with_beliefs").get<bool>()) {
        sp.preds.step_beliefs.clear();
      }
      out.push_back(std::move(sp));
    }
  } else {
    fpk::TrainBank bank;
    if (model == "nn") {
      const std::string bank_path = config.at("paths").at("train_dataset").get<std::string>();
      if (bank_path.empty()) {
        throw std::invalid_argument("predict: nn needs paths.train_dataset");
      }
      bank = fpk::make_train_bank(fpk::load_dataset_json(bank_path));
    }
    for (const auto & sample : dataset) {
      fpk::SamplePredictions sp;
      sp.sample_id = sample.sample_id;
      fpk::Trajectory pred;
      if (model == "cv") {
        pred = fpk::constant_velocity(sample.observation, horizon.pred);
      } else if (model == "linear") {
        pred = fpk::linear_extrapolate(sample.observation, horizon.pred);
      } else if (model == "nn") {
        pred = fpk::nearest_neighbor(sample.observation, bank, horizon.pred);
      } else {
        throw std::invalid_argument("predict: unknown model '" + model + "'");
      }
      sp.preds.trajectories.push_back(std::move(pred));
      out.push_back(std::move(sp));
    }
  }

  fpk::save_predictions_json(predictions_path, out, grid);
  write_manifest(config, "predict");
  std::cout << "predicted " << out.size() << " samples with model '" << model << "'; wrote "
            << predictions_path << "\n";
  return 0;
}

int cmd_evaluate(const json & config)
{
  const std::string dataset_path = config.at("paths").at("dataset").get<std::string>();
  const std::string predictions_path = path_or(config, "predictions", "predictions.json");
  if (dataset_path.empty()) {
    throw std::invalid_argument("evaluate: need paths.dataset");
  }
  const auto dataset = fpk::load_dataset_json(dataset_path);
  fpk::GridSpec grid;
  const auto predictions = fpk::load_predictions_json(predictions_path, &grid);
  std::map<std::string, const fpk::PredictionSet *> by_id;
  for (const auto & sp : predictions) {
    by_id[sp.sample_id] = &sp.preds;
  }

  const json & e = config.at("evaluate");
  const auto metric_names = e.at("metrics").get<std::vector<std::string>>();
  const double smoothing = e.at("nll_smoothing").get<double>();

  std::map<std::string, std::vector<std::pair<std::string, double>>> values;
  for (const auto & sample : dataset) {
    const auto it = by_id.find(sample.sample_id);
    if (it == by_id.end()) {
      throw std::invalid_argument("evaluate: no predictions for sample '" + sample.sample_id +
                                  "'");
    }
    const fpk::PredictionSet & preds = *it->second;
    const fpk::Trajectory & first_future = sample.futures.at(0);

    for (const auto & name : metric_names) {
      double value = 0.0;
      if (name == "ade") {
        fpk::Trajectory top = preds.trajectories.at(0);
        top.points.resize(first_future.points.size());
        value = fpk::ade(top, first_future);
      } else if (name == "fde") {
        fpk::Trajectory top = preds.trajectories.at(0);
        top.points.resize(first_future.points.size());
        value = fpk::fde(top, first_future);
      } else if (name == "min_ade_k") {
        value = fpk::min_ade_k(preds, first_future);
      } else if (name == "min_fde_k") {
        value = fpk::min_fde_k(preds, first_future);
      } else if (name == "min_ade_multi") {
        value = fpk::min_ade_multi(preds, sample.futures);
      } else if (name == "min_fde_multi") {
        value = fpk::min_fde_multi(preds, sample.futures);
      } else if (name == "min_asd") {
        value = fpk::min_asd(preds);
      } else if (name == "min_fsd") {
        value = fpk::min_fsd(preds);
      } else if (name == "grid_acc" || name == "nll") {
        // cell-level metrics; beliefs when present, else quantized samples
        double acc = 0.0;
        for (const auto & future : sample.futures) {
          std::vector<fpk::CellIndex> gt_cells;
          for (const auto & pt : future.points) {
            gt_cells.push_back(fpk::quantize(pt.pos(), grid).index);
          }
          if (name == "grid_acc") {
            std::vector<fpk::CellIndex> pred_cells;
            for (std::size_t t = 0; t < future.points.size(); ++t) {
              if (!preds.step_beliefs.empty()) {
                pred_cells.push_back(preds.step_beliefs.at(t).argmax());
              } else {
                pred_cells.push_back(
                  fpk::quantize(preds.trajectories.at(0).points.at(t).pos(), grid).index);
              }
            }
            acc += fpk::grid_acc(pred_cells, gt_cells);
          } else {
            std::vector<fpk::BeliefMap> beliefs;
            for (std::size_t t = 0; t < future.points.size(); ++t) {
              if (!preds.step_beliefs.empty()) {
                beliefs.push_back(preds.step_beliefs.at(t));
              } else {
                std::vector<fpk::CellIndex> cells;
                for (const auto & traj : preds.trajectories) {
                  cells.push_back(fpk::quantize(traj.points.at(t).pos(), grid).index);
                }
                beliefs.push_back(fpk::belief_from_cell_samples(cells, grid, smoothing));
              }
            }
            acc += fpk::nll_grid(beliefs, gt_cells);
          }
        }
        value = acc / static_cast<double>(sample.futures.size());
      } else {
        throw std::invalid_argument("evaluate: unknown metric '" + name + "'");
      }
      values[name].emplace_back(sample.sample_id, value);
    }
  }

  fpk::MetricReport report;
  for (auto & [name, per_sample] : values) {
    report[name] = fpk::aggregate_metric(std::move(per_sample));
  }
  const std::string report_path = path_or(config, "report", "report.json");
  fs::create_directories(fs::path(report_path).parent_path());
  fpk::save_metric_report_json(report_path, report);
  write_manifest(config, "evaluate");
  for (const auto & [name, vals] : report) {
    std::cout << name << " mean " << vals.mean << "\n";
  }
  std::cout << "wrote " << report_path << "\n";
  return 0;
}

int cmd_augment(const json & config)
{
  const std::string multiview_dir = config.at("paths").at("multiview_dir").get<std::string>();
  if (multiview_dir.empty()) {
    throw std::invalid_argument("augment: need paths.multiview_dir");
  }
  const fpk::GridSpec grid = grid_from(config);
  const json & model = config.at("model");
  const fpk::GenerateResult data = fpk::load_generate_result(multiview_dir);
  const auto mv = fpk::make_multiview_samples(data, grid);

  // The hardest-view criterion needs a model; fall back to the uniform
  // zero model when no checkpoint is given.
  fpk::ModelParams params = fpk::ModelParams::zeros(
    grid, model.at("radius").get<int>(), model.at("num_classes").get<int>());
  const std::string checkpoint_path = config.at("paths").at("checkpoint").get<std::string>();
  if (!checkpoint_path.empty()) {
    params = fpk::load_model_json(checkpoint_path).params;
  }

  const fpk::AugConfig acfg = aug_config_from(config);
  std::mt19937_64 rng(acfg.seed);
  std::vector<fpk::AugmentedSample> augmented;
  for (const auto & sample : mv) {
    augmented.push_back(fpk::simaug_step(sample, params, acfg, rng));
  }
  const std::string out_path = path_or(config, "augmented", "augmented.json");
  fs::create_directories(fs::path(out_path).parent_path());
  fpk::save_augmented_json(out_path, augmented, grid);
  write_manifest(config, "augment");
  std::cout << "augmented " << augmented.size() << " samples; wrote " << out_path << "\n";
  return 0;
}

int cmd_associate(const json & config)
{
  const json & cameras = config.at("paths").at("cameras");
  if (cameras.empty()) {
    throw std::invalid_argument(
      "associate: need paths.cameras = [{id, tracks, homography}, ...]");
  }
  std::vector<fpk::Tracklet> tracklets;
  std::map<std::string, fpk::Homography> homographies;
  for (const auto & cam : cameras) {
    const std::string id = cam.at("id").get<std::string>();
    homographies[id] = fpk::load_homography(cam.at("homography").get<std::string>());
    for (auto & traj : fpk::load_trajectories_tsv(cam.at("tracks").get<std::string>())) {
      fpk::Tracklet t;
      t.camera_id = id;
      t.traj = std::move(traj);
      tracklets.push_back(std::move(t));
    }
  }
  const json & a = config.at("associate");
  fpk::AssociationConfig cfg;
  cfg.max_dist = a.at("max_dist").get<double>();
  cfg.max_time_gap = a.at("max_time_gap").get<double>();
  cfg.w_spatial = a.at("w_spatial").get<double>();
  cfg.w_appearance = a.at("w_appearance").get<double>();
  const auto tracks = fpk::associate_tracklets(tracklets, homographies, cfg);
  const std::string out_path = path_or(config, "global_tracks", "global_tracks.tsv");
  fs::create_directories(fs::path(out_path).parent_path());
  fpk::save_global_tracks_tsv(out_path, tracks);
  write_manifest(config, "associate");
  std::cout << "associated " << tracklets.size() << " tracklets into " << tracks.size()
            << " global tracks; wrote " << out_path << "\n";
  return 0;
}

int cmd_smooth(const json & config)
{
  const std::string in_path = path_or(config, "global_tracks", "global_tracks.tsv");
  const int window = config.at("smooth").at("window").get<int>();
  auto tracks = fpk::load_global_tracks_tsv(in_path);
  for (auto & t : tracks) {
    t = fpk::smooth_global(t, window);
  }
  const std::string out_path = path_or(config, "smoothed", "smoothed_tracks.tsv");
  fs::create_directories(fs::path(out_path).parent_path());
  fpk::save_global_tracks_tsv(out_path, tracks);
  write_manifest(config, "smooth");
  std::cout << "smoothed " << tracks.size() << " tracks with window " << window << "; wrote "
            << out_path << "\n";
  return 0;
}

int cmd_plot_heatmap(const json & config)
{
  const std::string dataset_path = config.at("paths").at("dataset").get<std::string>();
  const std::string checkpoint_path = config.at("paths").at("checkpoint").get<std::string>();
  if (dataset_path.empty() || checkpoint_path.empty()) {
    throw std::invalid_argument("plot-heatmap: need paths.dataset and paths.checkpoint");
  }
  const auto dataset = fpk::load_dataset_json(dataset_path);
  const fpk::ModelCheckpoint ckpt = fpk::load_model_json(checkpoint_path);
  const Horizon horizon = horizon_from(config);
  const std::string out_dir =
    (fs::path(config.at("paths").at("out_dir").get<std::string>()) / "heatmaps").string();
  fs::create_directories(out_dir);

  std::map<std::string, fpk::SceneFeatures> features_by_ref;
  for (const auto & sample : dataset) {
    auto it = features_by_ref.find(sample.scene_ref);
    if (it == features_by_ref.end()) {
      const fpk::SceneClassMap scene = resolve_scene(config, dataset_path, sample.scene_ref);
      it = features_by_ref
             .emplace(sample.scene_ref, fpk::SceneFeatures::from_class_map(scene))
             .first;
    }
    const fpk::CellIndex start =
      fpk::quantize(sample.observation.back().pos(), ckpt.params.grid).index;
    const auto beliefs =
      fpk::rollout_beliefs(start, ckpt.params, it->second, horizon.pred);
    fpk::save_belief_text((fs::path(out_dir) / (sample.sample_id + ".txt")).string(), beliefs);
    for (std::size_t t = 0; t < beliefs.size(); ++t) {
      fpk::save_belief_pgm(
        (fs::path(out_dir) / (sample.sample_id + "_t" + std::to_string(t + 1) + ".pgm"))
          .string(),
        beliefs[t]);
    }
  }
  write_manifest(config, "plot-heatmap");
  std::cout << "wrote heatmaps for " << dataset.size() << " samples under " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"fpk: grid-based multi-future trajectory prediction toolkit"};
  app.set_version_flag("--version", fpk::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::int64_t seed_flag = -1;
  app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--set", overrides, "override a config key, e.g. --set train.epochs=50");
  app.add_option("--seed", seed_flag, "override the config seed");

  const char * names[] = {"generate", "train",     "predict", "evaluate",
                          "augment",  "associate", "smooth",  "plot-heatmap"};
  const char * descriptions[] = {
    "write a synthetic forking-paths dataset",
    "fit the grid predictor",
    "run a predictor over a dataset",
    "score predictions against ground truth",
    "write an augmented (mixed-view) training set",
    "merge per-camera tracklets into global tracks",
    "moving-average smoothing of global tracks",
    "write per-sample belief heatmaps"};
  for (std::size_t i = 0; i < 8; ++i) {
    app.add_subcommand(names[i], descriptions[i])->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    json config = default_config();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      json user;
      in >> user;
      deep_merge(config, user);
    }
    for (const auto & assignment : overrides) {
      apply_set_option(config, assignment);
    }
    if (seed_flag >= 0) {
      config["seed"] = seed_flag;
    }
    if (const char * env_seed = std::getenv("FPK_SEED")) {
      config["seed"] = std::stoull(env_seed);
    }

    const std::string command = app.get_subcommands().front()->get_name();
    if (command == "generate") {
      return cmd_generate(config);
    }
    if (command == "train") {
      return cmd_train(config);
    }
    if (command == "predict") {
      return cmd_predict(config);
    }
    if (command == "evaluate") {
      return cmd_evaluate(config);
    }
    if (command == "augment") {
      return cmd_augment(config);
    }
    if (command == "associate") {
      return cmd_associate(config);
    }
    if (command == "smooth") {
      return cmd_smooth(config);
    }
    if (command == "plot-heatmap") {
      return cmd_plot_heatmap(config);
    }
    throw std::invalid_argument("unknown subcommand '" + command + "'");
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
