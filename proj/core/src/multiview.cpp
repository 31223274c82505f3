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

#include "fpk/multiview.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

namespace fpk
{

Homography homography_between(const CameraModel & a, const CameraModel & b)
{
  if (!camera_model_valid(a) || !camera_model_valid(b)) {
    throw std::invalid_argument("homography_between: invalid camera model");
  }
  const Eigen::Matrix3d r_ab = a.rotation * b.rotation.transpose();
  const Eigen::Vector3d t = -r_ab * b.translation + a.translation;
  const Homography h =
    r_ab - (t * b.plane_normal.transpose()) / b.plane_distance;
  if (std::fabs(h.determinant()) <= 1e-12) {
    throw std::invalid_argument("homography_between: singular result");
  }
  return h;
}

Vec2 apply_homography(const Homography & h, const Vec2 & p)
{
  const Eigen::Vector3d mapped = h * Eigen::Vector3d(p.x, p.y, 1.0);
  if (std::fabs(mapped.z()) < 1e-12) {
    throw std::invalid_argument("apply_homography: point maps to infinity");
  }
  return {mapped.x() / mapped.z(), mapped.y() / mapped.z()};
}

namespace
{

Trajectory to_ground_plane(const Tracklet & t, const Homography & h)
{
  Trajectory out;
  out.agent_id = t.traj.agent_id;
  out.points.reserve(t.traj.points.size());
  for (const auto & p : t.traj.points) {
    const Vec2 g = apply_homography(h, p.pos());
    out.points.push_back({p.frame, g.x, g.y});
  }
  return out;
}

// Linear interpolation at `frame`; the trajectory must cover it.
Vec2 position_at(const Trajectory & t, long long frame)
{
  const auto it = std::lower_bound(
    t.points.begin(), t.points.end(), frame,
    [](const TrajPoint & p, long long f) { return p.frame < f; });
  if (it == t.points.end()) {
    return t.points.back().pos();
  }
  if (it->frame == frame || it == t.points.begin()) {
    return it->pos();
  }
  const auto & hi = *it;
  const auto & lo = *(it - 1);
  const double w = static_cast<double>(frame - lo.frame) /
                   static_cast<double>(hi.frame - lo.frame);
  return {lo.x + w * (hi.x - lo.x), lo.y + w * (hi.y - lo.y)};
}

double dist(const Vec2 & a, const Vec2 & b)
{
  return std::hypot(a.x - b.x, a.y - b.y);
}

// Gated pairwise cost between two tracklets on the ground plane.
double pair_cost(
  const Tracklet & ta, const Trajectory & ga, const Tracklet & tb, const Trajectory & gb,
  const AssociationConfig & cfg, const Eigen::MatrixXd * appearance)
{
  const double inf = std::numeric_limits<double>::infinity();
  const long long lo = std::max(ga.front().frame, gb.front().frame);
  const long long hi = std::min(ga.back().frame, gb.back().frame);

  double spatial = 0.0;
  if (lo <= hi) {
    // Overlapping tracklets of the same camera are distinct objects by the
    // per-camera tracker's construction.
    if (ta.camera_id == tb.camera_id) {
      return inf;
    }
    std::set<long long> frames;
    for (const auto & p : ga.points) {
      if (p.frame >= lo && p.frame <= hi) {
        frames.insert(p.frame);
      }
    }
    for (const auto & p : gb.points) {
      if (p.frame >= lo && p.frame <= hi) {
        frames.insert(p.frame);
      }
    }
    double total = 0.0;
    for (long long f : frames) {
      total += dist(position_at(ga, f), position_at(gb, f));
    }
    spatial = total / static_cast<double>(frames.size());
  } else {
    const bool a_first = ga.back().frame < gb.front().frame;
    const Trajectory & earlier = a_first ? ga : gb;
    const Trajectory & later = a_first ? gb : ga;
    const long long gap = later.front().frame - earlier.back().frame;
    if (static_cast<double>(gap) > cfg.max_time_gap) {
      return inf;
    }
    spatial = dist(earlier.back().pos(), later.front().pos());
  }
  if (spatial > cfg.max_dist) {
    return inf;
  }

  double app = 0.0;
  if (appearance != nullptr && cfg.w_appearance != 0.0 && ta.appearance_handle >= 0 &&
      tb.appearance_handle >= 0) {
    app = (*appearance)(ta.appearance_handle, tb.appearance_handle);
  }
  return cfg.w_spatial * spatial + cfg.w_appearance * app;
}

}  // namespace

std::vector<GlobalTrack> associate_tracklets(
  const std::vector<Tracklet> & tracklets, const std::map<std::string, Homography> & homographies,
  const AssociationConfig & config, const Eigen::MatrixXd * appearance_cost)
{
  const std::size_t n = tracklets.size();
  std::vector<Trajectory> ground(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (tracklets[i].traj.points.empty()) {
      throw std::invalid_argument("associate_tracklets: empty tracklet");
    }
    const auto it = homographies.find(tracklets[i].camera_id);
    if (it == homographies.end()) {
      throw std::invalid_argument(
        "associate_tracklets: missing homography for camera '" + tracklets[i].camera_id + "'");
    }
    ground[i] = to_ground_plane(tracklets[i], it->second);
  }

  // Single-linkage cluster cost over member tracklet pairs.
  std::vector<std::vector<std::size_t>> clusters(n);
  for (std::size_t i = 0; i < n; ++i) {
    clusters[i] = {i};
  }
  auto cluster_cost = [&](const std::vector<std::size_t> & a,
                          const std::vector<std::size_t> & b) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i : a) {
      for (std::size_t j : b) {
        best = std::min(best, pair_cost(tracklets[i], ground[i], tracklets[j], ground[j],
                                        config, appearance_cost));
      }
    }
    return best;
  };

  // Hungarian rounds: assign clusters to each other, merge the admissible
  // pairs cheapest-first, repeat until nothing merges.
  while (clusters.size() > 1) {
    const std::size_t k = clusters.size();
    Eigen::MatrixXd cost(k, k);
    cost.setConstant(std::numeric_limits<double>::infinity());
    bool any_admissible = false;
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) {
        const double c = cluster_cost(clusters[i], clusters[j]);
        cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
        cost(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = c;
        any_admissible = any_admissible || std::isfinite(c);
      }
    }
    if (!any_admissible) {
      break;
    }

    const HungarianResult assignment = hungarian_solve(cost);
    std::vector<std::tuple<double, std::size_t, std::size_t>> merges;
    for (const auto & [r, c] : assignment.pairs) {
      const auto i = static_cast<std::size_t>(std::min(r, c));
      const auto j = static_cast<std::size_t>(std::max(r, c));
      if (i == j) {
        continue;
      }
      merges.emplace_back(cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), i, j);
    }
    std::sort(merges.begin(), merges.end());
    std::vector<char> taken(k, 0);
    std::vector<std::vector<std::size_t>> next;
    bool merged_any = false;
    for (const auto & [c, i, j] : merges) {
      if (taken[i] || taken[j] || !std::isfinite(c)) {
        continue;
      }
      taken[i] = taken[j] = 1;
      auto unioned = clusters[i];
      unioned.insert(unioned.end(), clusters[j].begin(), clusters[j].end());
      std::sort(unioned.begin(), unioned.end());
      next.push_back(std::move(unioned));
      merged_any = true;
    }
    for (std::size_t i = 0; i < k; ++i) {
      if (!taken[i]) {
        next.push_back(clusters[i]);
      }
    }
    clusters = std::move(next);
    if (!merged_any) {
      break;
    }
  }

  // Deterministic output order: by smallest member index.
  std::sort(clusters.begin(), clusters.end(), [](const auto & a, const auto & b) {
    return a.front() < b.front();
  });

  std::vector<GlobalTrack> out;
  for (std::size_t gi = 0; gi < clusters.size(); ++gi) {
    GlobalTrack track;
    track.global_id = static_cast<int>(gi);
    // Fused trajectory: per-frame mean of all member ground-plane points.
    std::map<long long, std::pair<Vec2, int>> by_frame;
    for (std::size_t idx : clusters[gi]) {
      track.members.push_back(tracklets[idx]);
      for (const auto & p : ground[idx].points) {
        auto & slot = by_frame[p.frame];
        slot.first = slot.first + p.pos();
        slot.second += 1;
      }
    }
    track.fused.agent_id = "global_" + std::to_string(gi);
    for (const auto & [frame, acc] : by_frame) {
      track.fused.points.push_back(
        {frame, acc.first.x / acc.second, acc.first.y / acc.second});
    }
    out.push_back(std::move(track));
  }
  return out;
}

GlobalTrack smooth_global(const GlobalTrack & track, int window)
{
  if (window < 1) {
    throw std::invalid_argument("smooth_global: window must be >= 1");
  }
  if (track.fused.points.empty()) {
    throw std::invalid_argument("smooth_global: empty track");
  }
  GlobalTrack out = track;
  const auto & pts = track.fused.points;
  const int n = static_cast<int>(pts.size());
  const int half_lo = (window - 1) / 2;
  const int half_hi = window / 2;
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half_lo);
    const int hi = std::min(n - 1, i + half_hi);
    double sx = 0.0;
    double sy = 0.0;
    for (int j = lo; j <= hi; ++j) {
      sx += pts[static_cast<std::size_t>(j)].x;
      sy += pts[static_cast<std::size_t>(j)].y;
    }
    const double count = static_cast<double>(hi - lo + 1);
    out.fused.points[static_cast<std::size_t>(i)].x = sx / count;
    out.fused.points[static_cast<std::size_t>(i)].y = sy / count;
  }
  return out;
}

}  // namespace fpk
