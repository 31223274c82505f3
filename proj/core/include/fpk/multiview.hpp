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

#ifndef FPK__MULTIVIEW_HPP_
#define FPK__MULTIVIEW_HPP_

#include <Eigen/Dense>

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fpk/types.hpp"

namespace fpk
{

/// Nonsingular 3x3 plane-induced map between two camera views.
using Homography = Eigen::Matrix3d;

/// A per-camera fragment of one object's track, in that camera's image
/// coordinates. The appearance handle indexes externally supplied
/// re-identification costs; -1 when absent.
struct Tracklet
{
  std::string camera_id;
  Trajectory traj;
  int appearance_handle{-1};
};

/// A fused multi-camera track on the ground plane.
struct GlobalTrack
{
  int global_id{0};
  std::vector<Tracklet> members;
  Trajectory fused;  // ground-plane points sorted by frame
};

/**
 * @brief Plane-induced homography H_ab = Ra Rb^T - (ta - Ra Rb^T tb) n^T / d.
 *
 * Cameras follow X_cam = R X_world + t; the plane (n, d) lives in camera b's
 * frame as {X : n^T X + d = 0}. Throws if the result is singular.
 */
Homography homography_between(const CameraModel & a, const CameraModel & b);

/// Projective application: H [x y 1]^T, perspective-divided. Throws when the
/// homogeneous w component falls below 1e-12 (point at infinity).
Vec2 apply_homography(const Homography & h, const Vec2 & p);

struct HungarianResult
{
  std::vector<std::pair<int, int>> pairs;  // (row, col), sorted by row
  double total_cost{0.0};
};

/**
 * @brief Minimum-cost one-to-one assignment of min(n, m) pairs.
 *
 * Rectangular matrices are padded internally; padded pairs and pairs whose
 * cost is +infinity (gated) are dropped from the output.
 */
HungarianResult hungarian_solve(const Eigen::MatrixXd & cost);

struct AssociationConfig
{
  double max_dist{1.0};        // ground-plane gate
  double max_time_gap{100.0};  // frames between disjoint tracklets
  double w_spatial{1.0};
  double w_appearance{0.0};
};

/**
 * @brief Merge per-camera tracklets into global tracks.
 *
 * Pairwise cost: w_spatial * ground-plane distance (mean over overlapping
 * frames, endpoint gap when disjoint) + w_appearance * appearance cost.
 * Gated pairs get infinite cost. Merging proceeds in Hungarian rounds until
 * no admissible pair remains; the output partitions the input tracklets.
 *
 * `homographies` maps camera ids to full image-to-ground 3x3 matrices. The
 * optional appearance matrix is indexed by tracklet appearance handles.
 */
std::vector<GlobalTrack> associate_tracklets(
  const std::vector<Tracklet> & tracklets, const std::map<std::string, Homography> & homographies,
  const AssociationConfig & config, const Eigen::MatrixXd * appearance_cost = nullptr);

/// Centered moving average over the fused trajectory, window truncated at
/// the ends. Window 1 is the identity.
GlobalTrack smooth_global(const GlobalTrack & track, int window);

}  // namespace fpk

#endif  // FPK__MULTIVIEW_HPP_
