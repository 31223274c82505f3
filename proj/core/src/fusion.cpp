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

#include "fpk/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fpk
{

namespace
{

constexpr double kGeomFloor = 1e-6;

void softmax_inplace(std::vector<double> & v)
{
  const double m = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (double & x : v) {
    x = std::exp(x - m);
    total += x;
  }
  for (double & x : v) {
    x /= total;
  }
}

}  // namespace

std::vector<double> focal_attention(const std::vector<double> & query, const FeatureBank & bank)
{
  if (bank.streams < 1 || bank.steps < 1 || bank.dim < 1) {
    throw std::invalid_argument("focal_attention: empty feature bank");
  }
  if (static_cast<int>(query.size()) != bank.dim) {
    throw std::invalid_argument("focal_attention: query dimension mismatch");
  }
  if (bank.q.size() !=
      static_cast<std::size_t>(bank.streams) * bank.steps * bank.dim) {
    throw std::invalid_argument("focal_attention: bank storage mismatch");
  }

  // Correlation matrix S (streams x steps).
  std::vector<std::vector<double>> s(static_cast<std::size_t>(bank.streams),
                                     std::vector<double>(static_cast<std::size_t>(bank.steps)));
  std::vector<double> per_stream_max(static_cast<std::size_t>(bank.streams),
                                     -std::numeric_limits<double>::infinity());
  for (int j = 0; j < bank.streams; ++j) {
    for (int k = 0; k < bank.steps; ++k) {
      const double * f = bank.at(j, k);
      double dot = 0.0;
      for (int d = 0; d < bank.dim; ++d) {
        dot += query[static_cast<std::size_t>(d)] * f[d];
      }
      s[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] = dot;
      per_stream_max[static_cast<std::size_t>(j)] =
        std::max(per_stream_max[static_cast<std::size_t>(j)], dot);
    }
  }

  std::vector<double> stream_weights = per_stream_max;
  softmax_inplace(stream_weights);

  std::vector<double> out(static_cast<std::size_t>(bank.dim), 0.0);
  for (int j = 0; j < bank.streams; ++j) {
    std::vector<double> step_weights = s[static_cast<std::size_t>(j)];
    softmax_inplace(step_weights);
    for (int k = 0; k < bank.steps; ++k) {
      const double w =
        stream_weights[static_cast<std::size_t>(j)] * step_weights[static_cast<std::size_t>(k)];
      const double * f = bank.at(j, k);
      for (int d = 0; d < bank.dim; ++d) {
        out[static_cast<std::size_t>(d)] += w * f[d];
      }
    }
  }
  return out;
}

std::vector<std::array<double, 4>> geometric_relation(
  const Box & subject, const std::vector<Box> & others)
{
  if (!(subject.w > 0.0) || !(subject.h > 0.0)) {
    throw std::invalid_argument("geometric_relation: subject box must have positive size");
  }
  std::vector<std::array<double, 4>> out;
  out.reserve(others.size());
  for (const Box & b : others) {
    if (!(b.w > 0.0) || !(b.h > 0.0)) {
      throw std::invalid_argument("geometric_relation: box must have positive size");
    }
    out.push_back({
      std::log(std::max(std::fabs(subject.x - b.x), kGeomFloor) / subject.w),
      std::log(std::max(std::fabs(subject.y - b.y), kGeomFloor) / subject.h),
      std::log(b.w / subject.w),
      std::log(b.h / subject.h)});
  }
  return out;
}

}  // namespace fpk
