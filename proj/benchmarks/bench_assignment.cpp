#include <benchmark/benchmark.h>

#include <random>

#include "fpk/multiview.hpp"

namespace
{

void BM_HungarianSolve(benchmark::State & state)
{
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  Eigen::MatrixXd cost(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      cost(r, c) = u(rng);
    }
  }
  for (auto _ : state) {
    auto result = fpk::hungarian_solve(cost);
    benchmark::DoNotOptimize(result);
  }
  state.SetComplexityN(n);
}
BENCHMARK(BM_HungarianSolve)->RangeMultiplier(4)->Range(8, 512)->Complexity();

void BM_AssociateTracklets(benchmark::State & state)
{
  const int tracklets_per_camera = static_cast<int>(state.range(0));
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::map<std::string, fpk::Homography> homographies;
  homographies["cam0"] = Eigen::Matrix3d::Identity();
  homographies["cam1"] = Eigen::Matrix3d::Identity();
  std::vector<fpk::Tracklet> tracklets;
  for (int i = 0; i < tracklets_per_camera; ++i) {
    const double x = u(rng);
    const double y = u(rng);
    for (int cam = 0; cam < 2; ++cam) {
      fpk::Tracklet t;
      t.camera_id = cam == 0 ? "cam0" : "cam1";
      t.traj.agent_id = "a" + std::to_string(i);
      for (int f = 0; f < 10; ++f) {
        t.traj.points.push_back({f, x + f, y});
      }
      tracklets.push_back(std::move(t));
    }
  }
  fpk::AssociationConfig cfg;
  cfg.max_dist = 1.0;
  cfg.max_time_gap = 20.0;
  for (auto _ : state) {
    auto tracks = fpk::associate_tracklets(tracklets, homographies, cfg);
    benchmark::DoNotOptimize(tracks);
  }
}
BENCHMARK(BM_AssociateTracklets)->Arg(8)->Arg(32);

}  // namespace
