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

#include "fpk/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fpk
{

Vec2 Trajectory::last_step() const
{
  if (points.size() < 2) {
    return {0.0, 0.0};
  }
  const auto & a = points[points.size() - 2];
  const auto & b = points.back();
  return {b.x - a.x, b.y - a.y};
}

bool camera_model_valid(const CameraModel & cam)
{
  if (!(cam.plane_distance > 0.0)) {
    return false;
  }
  const Eigen::Matrix3d delta =
    cam.rotation * cam.rotation.transpose() - Eigen::Matrix3d::Identity();
  return delta.cwiseAbs().maxCoeff() <= 1e-9;
}

namespace
{

bool frames_strictly_increasing(const Trajectory & t)
{
  for (std::size_t i = 1; i < t.points.size(); ++i) {
    if (t.points[i].frame <= t.points[i - 1].frame) {
      return false;
    }
  }
  return true;
}

bool all_finite(const Trajectory & t)
{
  return std::all_of(t.points.begin(), t.points.end(), [](const TrajPoint & p) {
    return std::isfinite(p.x) && std::isfinite(p.y);
  });
}

}  // namespace

ValidationReport validate_dataset(
  const std::vector<MultiFutureSample> & samples, int horizon_obs, int horizon_total,
  const std::vector<std::string> & known_scenes)
{
  ValidationReport report;
  auto add = [&report](const std::string & id, const std::string & msg) {
    report.issues.push_back({id, msg});
  };
  const long long max_future = horizon_total - horizon_obs;

  for (const auto & s : samples) {
    if (s.observation.points.empty()) {
      add(s.sample_id, "observation is empty");
      continue;
    }
    if (static_cast<long long>(s.observation.length()) != horizon_obs) {
      std::ostringstream os;
      os << "observation length " << s.observation.length() << " != horizon " << horizon_obs;
      add(s.sample_id, os.str());
    }
    if (!frames_strictly_increasing(s.observation)) {
      add(s.sample_id, "observation frames not strictly increasing");
    }
    if (!all_finite(s.observation)) {
      add(s.sample_id, "observation has non-finite coordinates");
    }
    if (s.futures.empty()) {
      add(s.sample_id, "futures list is empty");
    }
    const long long obs_end = s.observation.back().frame;
    for (std::size_t j = 0; j < s.futures.size(); ++j) {
      const auto & f = s.futures[j];
      std::ostringstream tag;
      tag << "future " << j;
      if (f.points.empty()) {
        add(s.sample_id, tag.str() + " is empty");
        continue;
      }
      if (static_cast<long long>(f.length()) > max_future) {
        std::ostringstream os;
        os << tag.str() << " length " << f.length() << " exceeds horizon " << max_future;
        add(s.sample_id, os.str());
      }
      if (f.front().frame != obs_end + 1) {
        add(s.sample_id, tag.str() + " does not start one frame after the observation");
      }
      if (!frames_strictly_increasing(f)) {
        add(s.sample_id, tag.str() + " frames not strictly increasing");
      }
      if (!all_finite(f)) {
        add(s.sample_id, tag.str() + " has non-finite coordinates");
      }
    }
    if (!known_scenes.empty() &&
        std::find(known_scenes.begin(), known_scenes.end(), s.scene_ref) == known_scenes.end()) {
      add(s.sample_id, "unknown scene_ref '" + s.scene_ref + "'");
    }
  }
  return report;
}

}  // namespace fpk
