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

#ifndef FPK__BASELINES_HPP_
#define FPK__BASELINES_HPP_

#include <vector>

#include "fpk/types.hpp"

namespace fpk
{

/// Bank of (observation, future) pairs for nearest-neighbor stitching.
/// All pairs share the same observation and future lengths.
struct TrainBank
{
  std::vector<std::pair<Trajectory, Trajectory>> pairs;
};

TrainBank make_train_bank(const std::vector<MultiFutureSample> & samples);

/// Extrapolate with the velocity of the last observation step (zero velocity
/// for a single-point observation).
Trajectory constant_velocity(const Trajectory & obs, int steps);

/// Independent least-squares fits x(t) and y(t) over the observed frames,
/// evaluated at the future frames. Requires at least 2 observed points.
Trajectory linear_extrapolate(const Trajectory & obs, int steps);

/// Return the bank future whose observation is most similar to the query
/// (ADE between origin-translated observations, both shifted so the last
/// observed point is the origin), re-translated onto the query's endpoint.
/// Ties break towards the lowest bank index.
Trajectory nearest_neighbor(const Trajectory & obs, const TrainBank & bank, int steps);

}  // namespace fpk

#endif  // FPK__BASELINES_HPP_
