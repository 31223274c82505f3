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

#include "fpk/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fpk
{

namespace
{

using nlohmann::json;

std::string format_double(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string & s)
{
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc()) {
    throw std::runtime_error("failed to parse number '" + s + "'");
  }
  return v;
}

std::ofstream open_out(const std::string & path)
{
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  return out;
}

std::ifstream open_in(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "' for reading");
  }
  return in;
}

json load_json_file(const std::string & path)
{
  auto in = open_in(path);
  json j;
  in >> j;
  return j;
}

void save_json_file(const std::string & path, const json & j)
{
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

json grid_to_json(const GridSpec & g)
{
  return json{
    {"origin", {g.origin_x, g.origin_y}},
    {"extent", {g.extent_x, g.extent_y}},
    {"rows", g.rows},
    {"cols", g.cols}};
}

GridSpec grid_from_json(const json & j)
{
  GridSpec g;
  g.origin_x = j.at("origin").at(0).get<double>();
  g.origin_y = j.at("origin").at(1).get<double>();
  g.extent_x = j.at("extent").at(0).get<double>();
  g.extent_y = j.at("extent").at(1).get<double>();
  g.rows = j.at("rows").get<int>();
  g.cols = j.at("cols").get<int>();
  return g;
}

json traj_to_json(const Trajectory & t)
{
  json points = json::array();
  for (const auto & p : t.points) {
    points.push_back({p.frame, p.x, p.y});
  }
  return json{{"agent_id", t.agent_id}, {"points", points}};
}

Trajectory traj_from_json(const json & j)
{
  Trajectory t;
  t.agent_id = j.at("agent_id").get<std::string>();
  for (const auto & p : j.at("points")) {
    t.points.push_back({p.at(0).get<long long>(), p.at(1).get<double>(), p.at(2).get<double>()});
  }
  return t;
}

json features_to_json(const SceneFeatures & f)
{
  return json{
    {"rows", f.rows}, {"cols", f.cols}, {"num_classes", f.num_classes}, {"values", f.values}};
}

SceneFeatures features_from_json(const json & j)
{
  SceneFeatures f;
  f.rows = j.at("rows").get<int>();
  f.cols = j.at("cols").get<int>();
  f.num_classes = j.at("num_classes").get<int>();
  f.values = j.at("values").get<std::vector<double>>();
  return f;
}

}  // namespace

void save_trajectories_tsv(const std::string & path, const std::vector<Trajectory> & trajectories)
{
  auto out = open_out(path);
  for (const auto & t : trajectories) {
    for (const auto & p : t.points) {
      out << p.frame << '\t' << t.agent_id << '\t' << format_double(p.x) << '\t'
          << format_double(p.y) << '\n';
    }
  }
}

std::vector<Trajectory> load_trajectories_tsv(const std::string & path)
{
  auto in = open_in(path);
  // Preserve first-seen agent order.
  std::vector<Trajectory> out;
  std::map<std::string, std::size_t> index;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::istringstream fields(line);
    std::string frame_s, agent, x_s, y_s;
    if (!std::getline(fields, frame_s, '\t') || !std::getline(fields, agent, '\t') ||
        !std::getline(fields, x_s, '\t') || !std::getline(fields, y_s)) {
      throw std::runtime_error("malformed trajectory line in '" + path + "': " + line);
    }
    auto it = index.find(agent);
    if (it == index.end()) {
      it = index.emplace(agent, out.size()).first;
      out.push_back(Trajectory{agent, {}});
    }
    out[it->second].points.push_back(
      {std::stoll(frame_s), parse_double(x_s), parse_double(y_s)});
  }
  return out;
}

void save_dataset_json(const std::string & path, const std::vector<MultiFutureSample> & samples)
{
  json root = json::array();
  for (const auto & s : samples) {
    json futures = json::array();
    for (const auto & f : s.futures) {
      futures.push_back(traj_to_json(f));
    }
    root.push_back(json{
      {"sample_id", s.sample_id},
      {"observation", traj_to_json(s.observation)},
      {"futures", futures},
      {"scene_ref", s.scene_ref}});
  }
  save_json_file(path, root);
}

std::vector<MultiFutureSample> load_dataset_json(const std::string & path)
{
  const json root = load_json_file(path);
  std::vector<MultiFutureSample> out;
  for (const auto & j : root) {
    MultiFutureSample s;
    s.sample_id = j.at("sample_id").get<std::string>();
    s.observation = traj_from_json(j.at("observation"));
    for (const auto & f : j.at("futures")) {
      s.futures.push_back(traj_from_json(f));
    }
    s.scene_ref = j.at("scene_ref").get<std::string>();
    out.push_back(std::move(s));
  }
  return out;
}

void save_scene_map(const std::string & path, const SceneClassMap & map)
{
  auto out = open_out(path);
  out << map.rows << ' ' << map.cols << ' ' << map.num_classes << '\n';
  for (int r = 0; r < map.rows; ++r) {
    for (int c = 0; c < map.cols; ++c) {
      out << map.at(r, c) << (c + 1 == map.cols ? '\n' : ' ');
    }
  }
}

SceneClassMap load_scene_map(const std::string & path)
{
  auto in = open_in(path);
  SceneClassMap map;
  if (!(in >> map.rows >> map.cols >> map.num_classes)) {
    throw std::runtime_error("malformed scene map header in '" + path + "'");
  }
  map.classes.resize(static_cast<std::size_t>(map.rows) * map.cols);
  for (auto & c : map.classes) {
    if (!(in >> c)) {
      throw std::runtime_error("truncated scene map in '" + path + "'");
    }
    if (c < 0 || c >= map.num_classes) {
      throw std::runtime_error("scene map class out of range in '" + path + "'");
    }
  }
  return map;
}

void save_homography(const std::string & path, const Homography & h)
{
  auto out = open_out(path);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      out << format_double(h(r, c)) << (c == 2 ? '\n' : ' ');
    }
  }
}

Homography load_homography(const std::string & path)
{
  auto in = open_in(path);
  Homography h;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (!(in >> h(r, c))) {
        throw std::runtime_error("malformed homography file '" + path + "'");
      }
    }
  }
  return h;
}

void save_model_json(const std::string & path, const ModelCheckpoint & checkpoint)
{
  const ModelParams & p = checkpoint.params;
  const TrainConfig & tc = checkpoint.train_config;
  json j{
    {"grid", grid_to_json(p.grid)},
    {"r", p.radius},
    {"kernel", p.kernel},
    {"scene_bias", p.scene_bias},
    {"A", {p.offset_affine[0], p.offset_affine[1], p.offset_affine[2], p.offset_affine[3]}},
    {"c", {p.offset_bias[0], p.offset_bias[1]}},
    {"train_config",
     {{"learning_rate", tc.learning_rate},
      {"epochs", tc.epochs},
      {"lambda1", tc.lambda1},
      {"lambda2", tc.lambda2},
      {"smooth_l1_break", tc.smooth_l1_break},
      {"seed", tc.seed},
      {"init_sigma", tc.init_sigma}}},
    {"loss_trace", checkpoint.loss_trace}};
  save_json_file(path, j);
}

ModelCheckpoint load_model_json(const std::string & path)
{
  const json j = load_json_file(path);
  ModelCheckpoint out;
  const auto bias = j.at("scene_bias").get<std::vector<double>>();
  out.params = ModelParams::zeros(
    grid_from_json(j.at("grid")), j.at("r").get<int>(), static_cast<int>(bias.size()));
  out.params.kernel = j.at("kernel").get<std::vector<double>>();
  if (out.params.kernel.size() !=
      static_cast<std::size_t>(out.params.kernel_span()) * out.params.kernel_span()) {
    throw std::runtime_error("checkpoint kernel size does not match radius in '" + path + "'");
  }
  out.params.scene_bias = bias;
  for (int i = 0; i < 4; ++i) {
    out.params.offset_affine[i] = j.at("A").at(i).get<double>();
  }
  for (int i = 0; i < 2; ++i) {
    out.params.offset_bias[i] = j.at("c").at(i).get<double>();
  }
  const json & tc = j.at("train_config");
  out.train_config.learning_rate = tc.at("learning_rate").get<double>();
  out.train_config.epochs = tc.at("epochs").get<int>();
  out.train_config.lambda1 = tc.at("lambda1").get<double>();
  out.train_config.lambda2 = tc.at("lambda2").get<double>();
  out.train_config.smooth_l1_break = tc.at("smooth_l1_break").get<double>();
  out.train_config.seed = tc.at("seed").get<std::uint64_t>();
  out.train_config.init_sigma = tc.at("init_sigma").get<double>();
  out.loss_trace = j.at("loss_trace").get<std::vector<double>>();
  return out;
}

void save_predictions_json(
  const std::string & path, const std::vector<SamplePredictions> & predictions,
  const GridSpec & grid)
{
  json samples = json::array();
  for (const auto & sp : predictions) {
    json trajs = json::array();
    for (const auto & t : sp.preds.trajectories) {
      trajs.push_back(traj_to_json(t));
    }
    json entry{
      {"sample_id", sp.sample_id},
      {"trajectories", trajs},
      {"truncated", sp.preds.truncated}};
    if (!sp.preds.log_probs.empty()) {
      entry["log_probs"] = sp.preds.log_probs;
    }
    if (!sp.preds.step_beliefs.empty()) {
      json beliefs = json::array();
      for (const auto & b : sp.preds.step_beliefs) {
        beliefs.push_back(b.values);
      }
      entry["beliefs"] = beliefs;
    }
    samples.push_back(std::move(entry));
  }
  save_json_file(path, json{{"grid", grid_to_json(grid)}, {"samples", samples}});
}

std::vector<SamplePredictions> load_predictions_json(const std::string & path, GridSpec * grid_out)
{
  const json j = load_json_file(path);
  const GridSpec grid = grid_from_json(j.at("grid"));
  if (grid_out != nullptr) {
    *grid_out = grid;
  }
  std::vector<SamplePredictions> out;
  for (const auto & entry : j.at("samples")) {
    SamplePredictions sp;
    sp.sample_id = entry.at("sample_id").get<std::string>();
    for (const auto & t : entry.at("trajectories")) {
      sp.preds.trajectories.push_back(traj_from_json(t));
    }
    sp.preds.truncated = entry.value("truncated", false);
    if (entry.contains("log_probs")) {
      sp.preds.log_probs = entry.at("log_probs").get<std::vector<double>>();
    }
    if (entry.contains("beliefs")) {
      for (const auto & b : entry.at("beliefs")) {
        BeliefMap belief;
        belief.rows = grid.rows;
        belief.cols = grid.cols;
        belief.values = b.get<std::vector<double>>();
        sp.preds.step_beliefs.push_back(std::move(belief));
      }
    }
    out.push_back(std::move(sp));
  }
  return out;
}

void save_metric_report_json(const std::string & path, const MetricReport & report)
{
  json j = json::object();
  for (const auto & [name, values] : report) {
    json per = json::object();
    for (const auto & [id, v] : values.per_sample) {
      per[id] = v;
    }
    j[name] = json{{"mean", values.mean}, {"per_sample", per}};
  }
  save_json_file(path, j);
}

MetricReport load_metric_report_json(const std::string & path)
{
  const json j = load_json_file(path);
  MetricReport report;
  for (const auto & [name, body] : j.items()) {
    MetricValues values;
    values.mean = body.at("mean").get<double>();
    for (const auto & [id, v] : body.at("per_sample").items()) {
      values.per_sample.emplace_back(id, v.get<double>());
    }
    report[name] = std::move(values);
  }
  return report;
}

void save_global_tracks_tsv(const std::string & path, const std::vector<GlobalTrack> & tracks)
{
  auto out = open_out(path);
  for (const auto & t : tracks) {
    for (const auto & p : t.fused.points) {
      out << p.frame << '\t' << t.global_id << '\t' << format_double(p.x) << '\t'
          << format_double(p.y) << '\n';
    }
  }
}

std::vector<GlobalTrack> load_global_tracks_tsv(const std::string & path)
{
  auto in = open_in(path);
  std::map<int, GlobalTrack> by_id;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::istringstream fields(line);
    std::string frame_s, id_s, x_s, y_s;
    if (!std::getline(fields, frame_s, '\t') || !std::getline(fields, id_s, '\t') ||
        !std::getline(fields, x_s, '\t') || !std::getline(fields, y_s)) {
      throw std::runtime_error("malformed global track line in '" + path + "': " + line);
    }
    const int id = std::stoi(id_s);
    auto & track = by_id[id];
    track.global_id = id;
    track.fused.agent_id = "global_" + id_s;
    track.fused.points.push_back({std::stoll(frame_s), parse_double(x_s), parse_double(y_s)});
  }
  std::vector<GlobalTrack> out;
  for (auto & [id, t] : by_id) {
    out.push_back(std::move(t));
  }
  return out;
}

void save_belief_text(const std::string & path, const std::vector<BeliefMap> & beliefs)
{
  auto out = open_out(path);
  for (std::size_t t = 0; t < beliefs.size(); ++t) {
    const auto & b = beliefs[t];
    out << "step " << t + 1 << '\n';
    for (int r = b.rows - 1; r >= 0; --r) {
      for (int c = 0; c < b.cols; ++c) {
        out << format_double(b.values[static_cast<std::size_t>(r * b.cols + c)])
            << (c + 1 == b.cols ? '\n' : ' ');
      }
    }
    out << '\n';
  }
}

void save_belief_pgm(const std::string & path, const BeliefMap & belief)
{
  auto out = open_out(path);
  double peak = 0.0;
  for (double v : belief.values) {
    peak = std::max(peak, v);
  }
  out << "P2\n" << belief.cols << ' ' << belief.rows << "\n255\n";
  for (int r = belief.rows - 1; r >= 0; --r) {
    for (int c = 0; c < belief.cols; ++c) {
      const double v = belief.values[static_cast<std::size_t>(r * belief.cols + c)];
      const int gray = peak > 0.0 ? static_cast<int>(std::lround(255.0 * v / peak)) : 0;
      out << gray << (c + 1 == belief.cols ? '\n' : ' ');
    }
  }
}

void save_truth_json(const std::string & path, const GenerateResult & data)
{
  json agents = json::array();
  for (const auto & t : data.truth) {
    json dests = json::array();
    for (const auto & d : t.destinations) {
      dests.push_back({d.x, d.y});
    }
    agents.push_back(json{
      {"agent_id", t.agent_id},
      {"spawn", {t.spawn.x, t.spawn.y}},
      {"destinations", dests},
      {"future_destination", t.future_destination}});
  }
  save_json_file(path, json{{"agents", agents}, {"infeasible", data.infeasible}});
}

void save_generate_result(
  const std::string & dir, const GenerateResult & data, const GridSpec & grid)
{
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  json views = json::array();
  for (const auto & v : data.views) {
    const std::string scene_file = "scene_" + v.view_id + ".txt";
    const std::string dataset_file = "dataset_" + v.view_id + ".json";
    save_scene_map((fs::path(dir) / scene_file).string(), v.scene);
    save_dataset_json((fs::path(dir) / dataset_file).string(), v.samples);
    std::vector<double> transform;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        transform.push_back(v.transform(r, c));
      }
    }
    views.push_back(json{
      {"view_id", v.view_id},
      {"scene_ref", v.scene_ref},
      {"scene", scene_file},
      {"dataset", dataset_file},
      {"transform", transform}});
  }
  save_json_file(
    (fs::path(dir) / "views.json").string(),
    json{{"grid", grid_to_json(grid)}, {"views", views}, {"infeasible", data.infeasible}});
  save_truth_json((fs::path(dir) / "truth.json").string(), data);
}

GenerateResult load_generate_result(const std::string & dir)
{
  namespace fs = std::filesystem;
  const json root = load_json_file((fs::path(dir) / "views.json").string());
  GenerateResult out;
  for (const auto & vj : root.at("views")) {
    ViewData v;
    v.view_id = vj.at("view_id").get<std::string>();
    v.scene_ref = vj.at("scene_ref").get<std::string>();
    const auto transform = vj.at("transform").get<std::vector<double>>();
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        v.transform(r, c) = transform[static_cast<std::size_t>(r * 3 + c)];
      }
    }
    v.scene = load_scene_map((fs::path(dir) / vj.at("scene").get<std::string>()).string());
    v.samples = load_dataset_json((fs::path(dir) / vj.at("dataset").get<std::string>()).string());
    out.views.push_back(std::move(v));
  }
  out.infeasible = root.at("infeasible").get<std::vector<std::string>>();
  const json truth = load_json_file((fs::path(dir) / "truth.json").string());
  for (const auto & aj : truth.at("agents")) {
    AgentTruth t;
    t.agent_id = aj.at("agent_id").get<std::string>();
    t.spawn = {aj.at("spawn").at(0).get<double>(), aj.at("spawn").at(1).get<double>()};
    for (const auto & d : aj.at("destinations")) {
      t.destinations.push_back({d.at(0).get<double>(), d.at(1).get<double>()});
    }
    t.future_destination = aj.at("future_destination").get<std::vector<int>>();
    out.truth.push_back(std::move(t));
  }
  return out;
}

void save_augmented_json(
  const std::string & path, const std::vector<AugmentedSample> & samples, const GridSpec & grid)
{
  json arr = json::array();
  for (const auto & a : samples) {
    const TrainSample & s = a.sample;
    arr.push_back(json{
      {"start_cell", s.start_cell},
      {"start_velocity", {s.start_velocity.x, s.start_velocity.y}},
      {"future_cells", s.future_cells},
      {"soft_labels", s.soft_labels},
      {"offset_targets",
       [&s] {
         json t = json::array();
         for (const auto & o : s.offset_targets) {
           t.push_back({o.x, o.y});
         }
         return t;
       }()},
      {"features", features_to_json(*s.features)},
      {"lambda", a.lambda},
      {"hardest_view", a.hardest_view}});
  }
  save_json_file(path, json{{"grid", grid_to_json(grid)}, {"samples", arr}});
}

std::vector<TrainSample> load_augmented_json(const std::string & path)
{
  const json root = load_json_file(path);
  std::vector<TrainSample> out;
  for (const auto & j : root.at("samples")) {
    TrainSample s;
    s.start_cell = j.at("start_cell").get<int>();
    s.start_velocity = {
      j.at("start_velocity").at(0).get<double>(), j.at("start_velocity").at(1).get<double>()};
    s.future_cells = j.at("future_cells").get<std::vector<int>>();
    s.soft_labels = j.at("soft_labels").get<std::vector<double>>();
    for (const auto & o : j.at("offset_targets")) {
      s.offset_targets.push_back({o.at(0).get<double>(), o.at(1).get<double>()});
    }
    s.features = std::make_shared<const SceneFeatures>(features_from_json(j.at("features")));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace fpk
