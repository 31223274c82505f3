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

#include "fpk/baselines.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fpk
{

namespace
{

void check_steps(int steps)
{
  if (steps < 1) {
    throw std::invalid_argument("prediction steps must be >= 1");
  }
}

double origin_translated_ade(const Trajectory & a, const Trajectory & b)
{
  if (a.points.size() != b.points.size() || a.points.empty()) {
    throw std::invalid_argument("nearest_neighbor: observation length mismatch with bank");
  }
  const Vec2 oa = a.back().pos();
  const Vec2 ob = b.back().pos();
  double total = 0.0;
  for (std::size_t t = 0; t < a.points.size(); ++t) {
    const Vec2 pa = a.points[t].pos() - oa;
    const Vec2 pb = b.points[t].pos() - ob;
    total += std::hypot(pa.x - pb.x, pa.y - pb.y);
  }
  return total / static_cast<double>(a.points.size());
}

}  // namespace

TrainBank make_train_bank(const std::vector<MultiFutureSample> & samples)
{
  TrainBank bank;
  for (const auto & s : samples) {
    for (const auto & f : s.futures) {
      bank.pairs.emplace_back(s.observation, f);
    }
  }
  return bank;
}

Trajectory constant_velocity(const Trajectory & obs, int steps)
{
  check_steps(steps);
  if (obs.points.empty()) {
    throw std::invalid_argument("constant_velocity: empty observation");
  }
  const Vec2 v = obs.last_step();
  Trajectory out;
  out.agent_id = obs.agent_id;
  out.points.reserve(static_cast<std::size_t>(steps));
  Vec2 p = obs.back().pos();
  long long frame = obs.back().frame;
  for (int i = 0; i < steps; ++i) {
    p = p + v;
    ++frame;
    out.points.push_back({frame, p.x, p.y});
  }
  return out;
}

Trajectory linear_extrapolate(const Trajectory & obs, int steps)
{
  check_steps(steps);
  if (obs.points.size() < 2) {
    throw std::invalid_argument("linear_extrapolate: need at least 2 observed points");
  }
  // Closed-form least squares over the frame index.
  const double n = static_cast<double>(obs.points.size());
  double st = 0.0, sx = 0.0, sy = 0.0, stt = 0.0, stx = 0.0, sty = 0.0;
  for (const auto & p : obs.points) {
    const double t = static_cast<double>(p.frame);
    st += t;
    sx += p.x;
    sy += p.y;
    stt += t * t;
    stx += t * p.x;
    sty += t * p.y;
  }
  const double denom = n * stt - st * st;
  if (denom == 0.0) {
    throw std::invalid_argument("linear_extrapolate: degenerate frame indices");
  }
  const double slope_x = (n * stx - st * sx) / denom;
  const double slope_y = (n * sty - st * sy) / denom;
  const double icept_x = (sx - slope_x * st) / n;
  const double icept_y = (sy - slope_y * st) / n;

  Trajectory out;
  out.agent_id = obs.agent_id;
  long long frame = obs.back().frame;
  for (int i = 0; i < steps; ++i) {
    ++frame;
    const double t = static_cast<double>(frame);
    out.points.push_back({frame, icept_x + slope_x * t, icept_y + slope_y * t});
  }
  return out;
}

Trajectory nearest_neighbor(const Trajectory & obs, const TrainBank & bank, int steps)
{
  check_steps(steps);
  if (bank.pairs.empty()) {
    throw std::invalid_argument("nearest_neighbor: empty bank");
  }
  std::size_t best = 0;
  double best_sim = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < bank.pairs.size(); ++i) {
    const double sim = origin_translated_ade(obs, bank.pairs[i].first);
    if (sim < best_sim) {
      best_sim = sim;
      best = i;
    }
  }
  const Trajectory & stored = bank.pairs[best].second;
  if (static_cast<int>(stored.points.size()) < steps) {
    throw std::invalid_argument("nearest_neighbor: bank futures shorter than requested steps");
  }
  // Re-translate the retrieved future onto the query's endpoint.
  const Vec2 shift = obs.back().pos() - bank.pairs[best].first.back().pos();
  Trajectory out;
  out.agent_id = obs.agent_id;
  long long frame = obs.back().frame;
  for (int i = 0; i < steps; ++i) {
    const auto & p = stored.points[static_cast<std::size_t>(i)];
    ++frame;
    out.points.push_back({frame, p.x + shift.x, p.y + shift.y});
  }
  return out;
}

}  // namespace fpk
