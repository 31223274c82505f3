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

#ifndef FPK__FUSION_HPP_
#define FPK__FUSION_HPP_

#include <array>
#include <vector>

namespace fpk
{

/// M feature streams over T_obs steps of dimension d, row-major.
struct FeatureBank
{
  int streams{0};
  int steps{0};
  int dim{0};
  std::vector<double> q;  // streams * steps * dim

  const double * at(int stream, int step) const
  {
    return q.data() + (static_cast<std::size_t>(stream) * steps + step) * dim;
  }
};

/**
 * @brief Attention over multiple encoded feature streams.
 *
 * Correlations S_jk = query . Q_jk. Stream weights are a softmax over the
 * per-stream maximum correlation; within each stream, step weights are a
 * softmax over time. The output sum_j A_j sum_k B_jk Q_jk is a convex
 * combination of the bank vectors.
 */
std::vector<double> focal_attention(const std::vector<double> & query, const FeatureBank & bank);

struct Box
{
  double x{0.0};
  double y{0.0};
  double w{1.0};
  double h{1.0};
};

/**
 * @brief Log-space geometric relation of each box to the subject box:
 * [ln(|dx|/w_b), ln(|dy|/h_b), ln(w_k/w_b), ln(h_k/h_b)], with coordinate
 * distances floored at 1e-6 to keep coincident boxes finite.
 */
std::vector<std::array<double, 4>> geometric_relation(
  const Box & subject, const std::vector<Box> & others);

}  // namespace fpk

#endif  // FPK__FUSION_HPP_
