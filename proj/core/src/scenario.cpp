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

#include "fpk/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <stdexcept>

#include "fpk/multiview.hpp"

namespace fpk
{

namespace
{

std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool is_obstacle(const SceneClassMap & scene, CellIndex cell)
{
  return scene.classes[static_cast<std::size_t>(cell)] == kClassObstacle;
}

// 8-connected shortest route between cells, avoiding obstacle cells.
// Deterministic: fixed neighbor scan order. Empty result = unreachable.
std::vector<CellIndex> bfs_route(
  const GridSpec & g, const SceneClassMap & scene, CellIndex from, CellIndex to)
{
  if (from == to) {
    return {from};
  }
  std::vector<int> parent(static_cast<std::size_t>(g.size()), -1);
  std::deque<CellIndex> queue{from};
  parent[static_cast<std::size_t>(from)] = from;
  while (!queue.empty()) {
    const CellIndex cur = queue.front();
    queue.pop_front();
    const int r = g.row_of(cur);
    const int c = g.col_of(cur);
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (dr == 0 && dc == 0) {
          continue;
        }
        const int nr = r + dr;
        const int nc = c + dc;
        if (nr < 0 || nr >= g.rows || nc < 0 || nc >= g.cols) {
          continue;
        }
        const CellIndex next = g.flat(nr, nc);
        if (parent[static_cast<std::size_t>(next)] >= 0 || is_obstacle(scene, next)) {
          continue;
        }
        parent[static_cast<std::size_t>(next)] = cur;
        if (next == to) {
          std::vector<CellIndex> route{to};
          CellIndex walk = to;
          while (walk != from) {
            walk = parent[static_cast<std::size_t>(walk)];
            route.push_back(walk);
          }
          std::reverse(route.begin(), route.end());
          return route;
        }
        queue.push_back(next);
      }
    }
  }
  return {};
}

// True when the straight segment between two points crosses no obstacle
// cell, sampled at a quarter-cell resolution.
bool line_of_sight(
  const GridSpec & g, const SceneClassMap & scene, const Vec2 & from, const Vec2 & to)
{
  const Vec2 d = to - from;
  const double span = std::max(
    std::fabs(d.x) / g.cell_width(), std::fabs(d.y) / g.cell_height());
  const int samples = std::max(1, static_cast<int>(std::ceil(span * 4.0)));
  for (int s = 0; s <= samples; ++s) {
    const double w = static_cast<double>(s) / samples;
    const QuantizedCell q = quantize(from + w * d, g);
    if (q.clamped || is_obstacle(scene, q.index)) {
      return false;
    }
  }
  return true;
}

// Waypoint route: the straight segment when it is free, otherwise a BFS
// route simplified by greedy line-of-sight skipping.
std::vector<Vec2> plan_route(
  const GridSpec & g, const SceneClassMap & scene, const Vec2 & from, const Vec2 & to)
{
  if (line_of_sight(g, scene, from, to)) {
    return {from, to};
  }
  const std::vector<CellIndex> cells =
    bfs_route(g, scene, quantize(from, g).index, quantize(to, g).index);
  if (cells.empty()) {
    return {};
  }
  std::vector<Vec2> dense;
  dense.push_back(from);
  for (std::size_t i = 1; i + 1 < cells.size(); ++i) {
    dense.push_back(cell_center(cells[i], g));
  }
  dense.push_back(to);
  std::vector<Vec2> route{dense.front()};
  std::size_t anchor = 0;
  while (anchor + 1 < dense.size()) {
    std::size_t reach = anchor + 1;
    for (std::size_t j = dense.size() - 1; j > anchor; --j) {
      if (line_of_sight(g, scene, dense[anchor], dense[j])) {
        reach = j;
        break;
      }
    }
    route.push_back(dense[reach]);
    anchor = reach;
  }
  return route;
}

// Resample a polyline at equally spaced arc-length fractions (i+1)/steps.
std::vector<Vec2> resample_polyline(const std::vector<Vec2> & poly, int steps)
{
  std::vector<double> cum{0.0};
  for (std::size_t i = 1; i < poly.size(); ++i) {
    const Vec2 d = poly[i] - poly[i - 1];
    cum.push_back(cum.back() + std::hypot(d.x, d.y));
  }
  const double total = cum.back();
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (int s = 1; s <= steps; ++s) {
    const double target = total * static_cast<double>(s) / static_cast<double>(steps);
    if (total == 0.0) {
      out.push_back(poly.back());
      continue;
    }
    std::size_t seg = 1;
    while (seg + 1 < cum.size() && cum[seg] < target) {
      ++seg;
    }
    const double seg_len = cum[seg] - cum[seg - 1];
    const double w = seg_len > 0.0 ? (target - cum[seg - 1]) / seg_len : 1.0;
    out.push_back(poly[seg - 1] + w * (poly[seg] - poly[seg - 1]));
  }
  return out;
}

struct LayoutPlan
{
  Vec2 spawn;
  Vec2 obs_step;                   // per-step displacement of the approach
  std::vector<Vec2> destinations;  // cell centers
  bool feasible{true};
};

int rand_int(std::mt19937_64 & rng, int lo, int hi)  // inclusive bounds
{
  std::uniform_int_distribution<int> d(lo, hi);
  return d(rng);
}

double cheb(const Vec2 & v)
{
  return std::max(std::fabs(v.x), std::fabs(v.y));
}

}  // namespace

GenerateResult generate(const ScenarioConfig & config)
{
  const GridSpec & g = config.grid;
  if (config.n_agents < 1 || config.futures_per_agent < 1 ||
      config.destinations_per_agent < 1) {
    throw std::invalid_argument("generate: counts must be >= 1");
  }
  if (config.obs_len < 1 || config.pred_len < 1) {
    throw std::invalid_argument("generate: horizon lengths must be >= 1");
  }
  if (config.n_views < 1 || config.n_views > 4) {
    throw std::invalid_argument("generate: n_views must be in [1, 4]");
  }
  if (config.num_classes < 4) {
    throw std::invalid_argument("generate: need at least the 4 painted classes");
  }

  const double cw = g.cell_width();

  // Base scene map. Destination cells are painted after sampling.
  SceneClassMap scene;
  scene.rows = g.rows;
  scene.cols = g.cols;
  scene.num_classes = config.num_classes;
  scene.classes.assign(static_cast<std::size_t>(g.size()), kClassGround);

  if (config.layout == ScenarioLayout::kGradedCorridor) {
    for (int r = 0; r < g.rows; ++r) {
      for (int c = 0; c < g.cols; ++c) {
        const int ramp = std::min(config.num_classes - 1, c * config.num_classes / g.cols);
        scene.classes[static_cast<std::size_t>(g.flat(r, c))] = ramp;
      }
    }
  } else if (config.layout == ScenarioLayout::kObstacleField) {
    std::mt19937_64 obstacle_rng(splitmix64(config.seed));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int r = 1; r + 1 < g.rows; ++r) {
      for (int c = 1; c + 1 < g.cols; ++c) {
        if (u(obstacle_rng) < config.obstacle_density) {
          scene.classes[static_cast<std::size_t>(g.flat(r, c))] = kClassObstacle;
        }
      }
    }
  }

  GenerateResult result;

  // Per-agent plans and base-view trajectories.
  std::vector<MultiFutureSample> base_samples;
  for (int ai = 0; ai < config.n_agents; ++ai) {
    std::mt19937_64 rng(splitmix64(config.seed ^ splitmix64(static_cast<std::uint64_t>(ai) + 1)));
    const std::string agent_id = "agent_" + std::to_string(ai);

    LayoutPlan plan;
    switch (config.layout) {
      case ScenarioLayout::kBimodalFork: {
        // Fixed fork: shared eastward approach, then two diagonal corridors.
        // The corridors get distinct semantic classes below, which is what
        // lets the scene bias carry the mode commitment a first-order
        // transition kernel cannot express on its own.
        const int spawn_col = config.obs_len;
        if (spawn_col + config.pred_len >= g.cols || 2 * config.pred_len + 2 >= g.rows) {
          throw std::invalid_argument("generate: grid too small for the bimodal fork layout");
        }
        const int row = g.rows / 2;
        plan.spawn = cell_center(g.flat(row, spawn_col), g);
        plan.obs_step = {cw, 0.0};
        plan.destinations = {
          cell_center(g.flat(row + config.pred_len, spawn_col + config.pred_len), g),
          cell_center(g.flat(row - config.pred_len, spawn_col + config.pred_len), g)};
        break;
      }
      case ScenarioLayout::kGradedCorridor: {
        const int spawn_col = g.cols / 2;
        if (spawn_col + config.pred_len >= g.cols || spawn_col - config.obs_len < 0) {
          throw std::invalid_argument("generate: grid too small for the corridor layout");
        }
        const int row = rand_int(rng, 1, g.rows - 2);
        plan.spawn = cell_center(g.flat(row, spawn_col), g);
        plan.obs_step = {cw, 0.0};
        plan.destinations = {cell_center(g.flat(row, spawn_col + config.pred_len), g)};
        break;
      }
      case ScenarioLayout::kOpen:
      case ScenarioLayout::kObstacleField: {
        const int margin = 1;
        bool placed = false;
        for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
          const int row = rand_int(rng, margin, g.rows - 1 - margin);
          const int col = rand_int(rng, margin, g.cols - 1 - margin);
          const CellIndex spawn_cell = g.flat(row, col);
          if (is_obstacle(scene, spawn_cell)) {
            continue;
          }
          std::vector<Vec2> dests;
          for (int d = 0; d < config.destinations_per_agent && dests.size() ==
               static_cast<std::size_t>(d); ++d) {
            for (int tr = 0; tr < 64; ++tr) {
              const int drow = rand_int(rng, -config.pred_len, config.pred_len);
              const int dcol = rand_int(rng, -config.pred_len, config.pred_len);
              const int nr = row + drow;
              const int nc = col + dcol;
              const double far = std::max(std::abs(drow), std::abs(dcol));
              if (nr < margin || nr >= g.rows - margin || nc < margin ||
                  nc >= g.cols - margin || far < config.pred_len / 2.0) {
                continue;
              }
              const CellIndex dest_cell = g.flat(nr, nc);
              if (is_obstacle(scene, dest_cell) ||
                  bfs_route(g, scene, spawn_cell, dest_cell).empty()) {
                continue;
              }
              dests.push_back(cell_center(dest_cell, g));
              break;
            }
          }
          if (dests.size() == static_cast<std::size_t>(config.destinations_per_agent)) {
            plan.spawn = cell_center(spawn_cell, g);
            plan.destinations = dests;
            Vec2 mean{0.0, 0.0};
            for (const auto & d : dests) {
              mean = mean + (1.0 / static_cast<double>(dests.size())) * (d - plan.spawn);
            }
            plan.obs_step = cheb(mean) > 0.0 ? (cw / cheb(mean)) * mean : Vec2{cw, 0.0};
            placed = true;
          }
        }
        plan.feasible = placed;
        break;
      }
    }
    if (!plan.feasible) {
      result.infeasible.push_back(agent_id);
      continue;
    }

    // Shared observation prefix; shrink the approach step if the earliest
    // point would leave the grid.
    if (config.obs_len > 1) {
      double scale = 1.0;
      const double eps = 1e-9;
      const double n = static_cast<double>(config.obs_len - 1);
      // obs point i = spawn - (obs_len - 1 - i) * step; the extreme is at
      // i = 0 with offset -n * step in each coordinate.
      const auto clamp_scale = [&](double spawn, double step, double lo, double hi) {
        if (step == 0.0) {
          return 1.0;
        }
        const double reach = spawn - n * step;
        if (reach >= lo + eps && reach <= hi - eps) {
          return 1.0;
        }
        const double bound = step > 0.0 ? (spawn - lo - eps) : (spawn - hi + eps);
        return std::max(0.0, bound / (n * step));
      };
      scale = std::min(scale, clamp_scale(plan.spawn.x, plan.obs_step.x, g.origin_x,
                                          g.origin_x + g.extent_x));
      scale = std::min(scale, clamp_scale(plan.spawn.y, plan.obs_step.y, g.origin_y,
                                          g.origin_y + g.extent_y));
      plan.obs_step = scale * plan.obs_step;
    }

    Trajectory observation;
    observation.agent_id = agent_id;
    for (int i = 0; i < config.obs_len; ++i) {
      const Vec2 p =
        plan.spawn - static_cast<double>(config.obs_len - 1 - i) * plan.obs_step;
      observation.points.push_back({i, p.x, p.y});
    }

    AgentTruth truth;
    truth.agent_id = agent_id;
    truth.spawn = plan.spawn;
    truth.destinations = plan.destinations;

    MultiFutureSample sample;
    sample.sample_id = "s" + std::to_string(ai);
    sample.observation = observation;
    sample.scene_ref = "scene_view0";

    std::normal_distribution<double> gauss(0.0, config.noise_sigma);
    bool all_routes_ok = true;
    for (int f = 0; f < config.futures_per_agent; ++f) {
      const int dest_idx = f % static_cast<int>(plan.destinations.size());
      const Vec2 dest = plan.destinations[static_cast<std::size_t>(dest_idx)];
      std::vector<Vec2> poly = plan_route(g, scene, plan.spawn, dest);
      if (poly.empty()) {
        all_routes_ok = false;
        break;
      }
      if (poly.size() == 1) {
        poly.push_back(plan.spawn);
      }
      std::vector<Vec2> pts = resample_polyline(poly, config.pred_len);
      // Noise with obstacle rejection: resample a point's jitter a few
      // times, then fall back to the clean point.
      if (config.noise_sigma > 0.0) {
        for (auto & p : pts) {
          const Vec2 clean = p;
          for (int attempt = 0; attempt < 8; ++attempt) {
            const Vec2 jittered = {clean.x + gauss(rng), clean.y + gauss(rng)};
            const QuantizedCell q = quantize(jittered, g);
            if (!q.clamped && !is_obstacle(scene, q.index)) {
              p = jittered;
              break;
            }
          }
        }
      }
      Trajectory future;
      future.agent_id = agent_id;
      for (int t = 0; t < config.pred_len; ++t) {
        future.points.push_back(
          {static_cast<long long>(config.obs_len + t), pts[static_cast<std::size_t>(t)].x,
           pts[static_cast<std::size_t>(t)].y});
      }
      sample.futures.push_back(std::move(future));
      truth.future_destination.push_back(dest_idx);
    }
    if (!all_routes_ok) {
      result.infeasible.push_back(agent_id);
      continue;
    }
    base_samples.push_back(std::move(sample));
    result.truth.push_back(std::move(truth));
  }

  // Paint destination cells in the layouts that mark goals.
  if (config.layout == ScenarioLayout::kOpen || config.layout == ScenarioLayout::kObstacleField) {
    for (const auto & truth : result.truth) {
      for (const auto & d : truth.destinations) {
        scene.classes[static_cast<std::size_t>(quantize(d, g).index)] = kClassGoal;
      }
    }
  }
  // The fork layout paints one corridor class per destination along the
  // straight route.
  if (config.layout == ScenarioLayout::kBimodalFork) {
    for (const auto & truth : result.truth) {
      const CellIndex spawn_cell = quantize(truth.spawn, g).index;
      for (std::size_t d = 0; d < truth.destinations.size(); ++d) {
        const CellIndex dest_cell = quantize(truth.destinations[d], g).index;
        const int dr = g.row_of(dest_cell) - g.row_of(spawn_cell);
        const int dc = g.col_of(dest_cell) - g.col_of(spawn_cell);
        const int cls = kClassGoal + 1 + static_cast<int>(d % static_cast<std::size_t>(
                                                            config.num_classes - kClassGoal - 1));
        for (int k = 1; k <= config.pred_len; ++k) {
          const int r = g.row_of(spawn_cell) + dr * k / config.pred_len;
          const int c = g.col_of(spawn_cell) + dc * k / config.pred_len;
          scene.classes[static_cast<std::size_t>(g.flat(r, c))] = cls;
        }
      }
    }
  }

  // View transforms: identity, x mirror, y mirror, 180-degree rotation.
  const double cx = 2.0 * g.origin_x + g.extent_x;
  const double cy = 2.0 * g.origin_y + g.extent_y;
  std::vector<std::pair<std::string, Eigen::Matrix3d>> transforms;
  {
    Eigen::Matrix3d identity = Eigen::Matrix3d::Identity();
    Eigen::Matrix3d mx = Eigen::Matrix3d::Identity();
    mx(0, 0) = -1.0;
    mx(0, 2) = cx;
    Eigen::Matrix3d my = Eigen::Matrix3d::Identity();
    my(1, 1) = -1.0;
    my(1, 2) = cy;
    Eigen::Matrix3d rot = mx * my;
    transforms = {{"view0", identity}, {"mirror_x", mx}, {"mirror_y", my}, {"rot180", rot}};
  }
  transforms.resize(static_cast<std::size_t>(config.n_views));

  for (const auto & [view_id, transform] : transforms) {
    ViewData view;
    view.view_id = view_id;
    view.transform = transform;
    view.scene_ref = "scene_" + view_id;

    // Scene classes move with the cells; mirrors map centers onto centers.
    view.scene = scene;
    for (CellIndex i = 0; i < g.size(); ++i) {
      const Vec2 moved = apply_homography(transform, cell_center(i, g));
      const CellIndex target = quantize(moved, g).index;
      view.scene.classes[static_cast<std::size_t>(target)] =
        scene.classes[static_cast<std::size_t>(i)];
    }

    auto map_traj = [&](const Trajectory & t) {
      Trajectory out = t;
      for (auto & p : out.points) {
        const Vec2 moved = apply_homography(transform, p.pos());
        p.x = moved.x;
        p.y = moved.y;
      }
      return out;
    };
    for (const auto & s : base_samples) {
      MultiFutureSample mapped;
      mapped.sample_id = s.sample_id;
      mapped.scene_ref = view.scene_ref;
      mapped.observation = map_traj(s.observation);
      for (const auto & f : s.futures) {
        mapped.futures.push_back(map_traj(f));
      }
      view.samples.push_back(std::move(mapped));
    }
    result.views.push_back(std::move(view));
  }
  return result;
}

std::vector<MultiViewSample> make_multiview_samples(
  const GenerateResult & data, const GridSpec & grid)
{
  if (data.views.empty()) {
    throw std::invalid_argument("make_multiview_samples: no views");
  }
  std::vector<SceneFeatures> view_features;
  for (const auto & v : data.views) {
    view_features.push_back(SceneFeatures::from_class_map(v.scene));
  }

  auto cells_of = [&grid](const Trajectory & t) {
    std::vector<CellIndex> cells;
    for (const auto & p : t.points) {
      cells.push_back(quantize(p.pos(), grid).index);
    }
    return cells;
  };

  std::vector<MultiViewSample> out;
  const auto & base = data.views.front();
  for (std::size_t si = 0; si < base.samples.size(); ++si) {
    const auto & anchor_sample = base.samples[si];
    for (std::size_t fi = 0; fi < anchor_sample.futures.size(); ++fi) {
      MultiViewSample mv;
      mv.sample_id = anchor_sample.sample_id + "_f" + std::to_string(fi);
      mv.start_cell = quantize(anchor_sample.observation.back().pos(), grid).index;
      mv.start_velocity = anchor_sample.observation.last_step();
      const Trajectory & anchor_future = anchor_sample.futures[fi];
      for (const auto & p : anchor_future.points) {
        const CellIndex cell = quantize(p.pos(), grid).index;
        mv.offset_targets.push_back(offset_target(p.pos(), cell, grid));
      }
      mv.anchor.view_id = base.view_id;
      mv.anchor.step_features = {view_features.front()};
      mv.anchor.future_cells = cells_of(anchor_future);
      for (std::size_t vi = 1; vi < data.views.size(); ++vi) {
        ViewSample vs;
        vs.view_id = data.views[vi].view_id;
        vs.step_features = {view_features[vi]};
        vs.future_cells = cells_of(data.views[vi].samples[si].futures[fi]);
        mv.views.push_back(std::move(vs));
      }
      out.push_back(std::move(mv));
    }
  }
  return out;
}

}  // namespace fpk
