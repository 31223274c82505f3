#include <benchmark/benchmark.h>

#include <random>

#include "fpk/metrics.hpp"

namespace
{

fpk::Trajectory random_traj(std::mt19937_64 & rng, int len)
{
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  fpk::Trajectory t;
  for (int i = 0; i < len; ++i) {
    t.points.push_back({1 + i, u(rng), u(rng)});
  }
  return t;
}

void BM_MinAdeMulti(benchmark::State & state)
{
  std::mt19937_64 rng(17);
  fpk::PredictionSet preds;
  for (int k = 0; k < 20; ++k) {
    preds.trajectories.push_back(random_traj(rng, 12));
  }
  std::vector<fpk::Trajectory> futures;
  for (int j = 0; j < static_cast<int>(state.range(0)); ++j) {
    futures.push_back(random_traj(rng, 12));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(fpk::min_ade_multi(preds, futures));
    benchmark::DoNotOptimize(fpk::min_fde_multi(preds, futures));
  }
}
BENCHMARK(BM_MinAdeMulti)->Arg(1)->Arg(6);

void BM_MinSelfDistance(benchmark::State & state)
{
  std::mt19937_64 rng(18);
  fpk::PredictionSet preds;
  for (int k = 0; k < static_cast<int>(state.range(0)); ++k) {
    preds.trajectories.push_back(random_traj(rng, 30));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(fpk::min_asd(preds));
    benchmark::DoNotOptimize(fpk::min_fsd(preds));
  }
}
BENCHMARK(BM_MinSelfDistance)->Arg(10)->Arg(20);

}  // namespace
