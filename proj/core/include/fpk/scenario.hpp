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

#ifndef FPK__SCENARIO_HPP_
#define FPK__SCENARIO_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "fpk/simaug.hpp"
#include "fpk/types.hpp"

namespace fpk
{

// Semantic classes painted by the generator.
inline constexpr int kClassGround = 0;
inline constexpr int kClassWalkway = 1;
inline constexpr int kClassObstacle = 2;
inline constexpr int kClassGoal = 3;

enum class ScenarioLayout
{
  kOpen,            // free field, destinations marked with the goal class
  kBimodalFork,     // shared eastward approach, two diagonal destinations
  kGradedCorridor,  // single row walk with a column-wise class ramp
  kObstacleField,   // random obstacles, routes detour around them
};

struct ScenarioConfig
{
  GridSpec grid;
  int n_agents{10};
  int destinations_per_agent{3};
  int futures_per_agent{6};
  double noise_sigma{0.1};
  int obs_len{8};
  int pred_len{12};
  int n_views{1};                // identity, then x mirror, then y mirror
  int num_classes{13};
  double obstacle_density{0.1};  // kObstacleField only
  std::uint64_t seed{0};
  ScenarioLayout layout{ScenarioLayout::kOpen};
};

struct ViewData
{
  std::string view_id;
  Eigen::Matrix3d transform;  // base -> view, affine in homogeneous form
  SceneClassMap scene;
  std::string scene_ref;
  std::vector<MultiFutureSample> samples;
};

struct AgentTruth
{
  std::string agent_id;
  Vec2 spawn;
  std::vector<Vec2> destinations;
  std::vector<int> future_destination;  // destination index of each future
};

struct GenerateResult
{
  std::vector<ViewData> views;  // views[0] is the base view
  std::vector<AgentTruth> truth;
  std::vector<std::string> infeasible;  // agents with no obstacle-free route
};

/**
 * @brief Seeded synthetic forking-paths generator.
 *
 * Agents walk from a spawn toward sampled destinations along obstacle-free
 * piecewise-linear routes with Gaussian waypoint noise; every future of an
 * agent shares the identical observation prefix. Views beyond the first are
 * mirror transforms of the base scene. Fully deterministic per seed.
 */
GenerateResult generate(const ScenarioConfig & config);

/// Bundle the per-view renderings of each sample for augmentation. The base
/// view is the anchor; scene maps become single-step one-hot features.
std::vector<MultiViewSample> make_multiview_samples(
  const GenerateResult & data, const GridSpec & grid);

}  // namespace fpk

#endif  // FPK__SCENARIO_HPP_
