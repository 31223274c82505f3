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

#ifndef FPK__TYPES_HPP_
#define FPK__TYPES_HPP_

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "fpk/grid.hpp"

namespace fpk
{

/// One observed position. Coordinates are in scene units (meters, feet or
/// pixels); the unit is dataset metadata, never implicit.
struct TrajPoint
{
  long long frame{0};
  double x{0.0};
  double y{0.0};

  Vec2 pos() const { return {x, y}; }
};

/// Time-ordered positions of one agent. Frame indices strictly increasing.
struct Trajectory
{
  std::string agent_id;
  std::vector<TrajPoint> points;

  std::size_t length() const { return points.size(); }
  const TrajPoint & front() const { return points.front(); }
  const TrajPoint & back() const { return points.back(); }
  /// Displacement over the last observed step; zero for single-point tracks.
  Vec2 last_step() const;
};

/**
 * @brief One observation history paired with one or many ground-truth futures.
 *
 * Single-future datasets are simply samples with |futures| = 1. Every future
 * starts exactly one frame after the observation ends.
 */
struct MultiFutureSample
{
  std::string sample_id;
  Trajectory observation;
  std::vector<Trajectory> futures;
  std::string scene_ref;
};

/// Per-cell semantic class labels paired with a GridSpec of the same shape.
struct SceneClassMap
{
  int rows{0};
  int cols{0};
  int num_classes{0};  // labels live in [0, num_classes)
  std::vector<int> classes;  // rows * cols, row-major

  int at(int row, int col) const { return classes[static_cast<std::size_t>(row * cols + col)]; }
  int at_cell(CellIndex i) const { return classes[static_cast<std::size_t>(i)]; }
};

/**
 * @brief Extrinsic camera model plus the shared ground plane.
 *
 * Convention: X_cam = rotation * X_world + translation. The plane is
 * expressed in THIS camera's frame as {X : n^T X + d = 0} with unit normal n
 * and d > 0 the camera-to-plane distance.
 */
struct CameraModel
{
  Eigen::Matrix3d rotation{Eigen::Matrix3d::Identity()};
  Eigen::Vector3d translation{Eigen::Vector3d::Zero()};
  Eigen::Vector3d plane_normal{Eigen::Vector3d::UnitZ()};
  double plane_distance{1.0};
};

// Returns false if rotation is not orthonormal within 1e-9 or d <= 0.
bool camera_model_valid(const CameraModel & cam);

/// A bundle of K predicted trajectories, optionally with per-step beliefs
/// (probabilistic models) and per-trajectory log-probabilities.
struct PredictionSet
{
  std::vector<Trajectory> trajectories;
  std::vector<BeliefMap> step_beliefs;   // empty when not available
  std::vector<double> log_probs;         // empty when not available
  bool truncated{false};  // beam could not produce the requested K

  std::size_t k() const { return trajectories.size(); }
};

struct ValidationIssue
{
  std::string sample_id;
  std::string message;
};

struct ValidationReport
{
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
};

/**
 * @brief Check a dataset against the horizon contract (h observed steps,
 * up to total - h future steps), monotone frames and scene references.
 *
 * Side-effect free; valid datasets yield an empty report. When known_scenes
 * is non-empty, scene_ref values outside it are reported.
 */
ValidationReport validate_dataset(
  const std::vector<MultiFutureSample> & samples, int horizon_obs, int horizon_total,
  const std::vector<std::string> & known_scenes = {});

}  // namespace fpk

#endif  // FPK__TYPES_HPP_
