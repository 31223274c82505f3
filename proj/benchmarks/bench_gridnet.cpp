#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "fpk/gridnet.hpp"

namespace
{

fpk::GridSpec grid_18x36()
{
  fpk::GridSpec g;
  g.extent_x = 36.0;
  g.extent_y = 18.0;
  g.rows = 18;
  g.cols = 36;
  return g;
}

fpk::SceneClassMap random_scene(const fpk::GridSpec & g, int num_classes)
{
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> cls(0, num_classes - 1);
  fpk::SceneClassMap m;
  m.rows = g.rows;
  m.cols = g.cols;
  m.num_classes = num_classes;
  for (int i = 0; i < g.size(); ++i) {
    m.classes.push_back(cls(rng));
  }
  return m;
}

std::vector<fpk::TrainSample> random_batch(
  const fpk::GridSpec & g, const fpk::SceneClassMap & scene, int radius, int steps, int count)
{
  std::mt19937_64 rng(11);
  auto features =
    std::make_shared<const fpk::SceneFeatures>(fpk::SceneFeatures::from_class_map(scene));
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  std::vector<fpk::TrainSample> batch;
  for (int i = 0; i < count; ++i) {
    fpk::TrainSample s;
    s.start_cell = g.flat(g.rows / 2, g.cols / 2);
    s.start_velocity = {1.0, 0.0};
    fpk::CellIndex cur = s.start_cell;
    for (int t = 0; t < steps; ++t) {
      const int dr = std::uniform_int_distribution<int>(-radius, radius)(rng);
      const int dc = std::uniform_int_distribution<int>(-radius, radius)(rng);
      const int r = std::clamp(g.row_of(cur) + dr, 0, g.rows - 1);
      const int c = std::clamp(g.col_of(cur) + dc, 0, g.cols - 1);
      cur = g.flat(r, c);
      s.future_cells.push_back(cur);
      s.offset_targets.push_back({u(rng), u(rng)});
    }
    s.features = features;
    batch.push_back(std::move(s));
  }
  return batch;
}

void BM_RolloutBeliefs(benchmark::State & state)
{
  const fpk::GridSpec g = grid_18x36();
  const fpk::SceneClassMap scene = random_scene(g, 13);
  const fpk::SceneFeatures features = fpk::SceneFeatures::from_class_map(scene);
  const fpk::ModelParams params = fpk::ModelParams::random_init(g, 2, 13, 0.3, 3);
  const int steps = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto beliefs = fpk::rollout_beliefs(g.flat(9, 18), params, features, steps);
    benchmark::DoNotOptimize(beliefs);
  }
}
BENCHMARK(BM_RolloutBeliefs)->Arg(12)->Arg(30);

void BM_LossAndGradients(benchmark::State & state)
{
  const fpk::GridSpec g = grid_18x36();
  const fpk::SceneClassMap scene = random_scene(g, 13);
  const fpk::ModelParams params = fpk::ModelParams::random_init(g, 2, 13, 0.3, 3);
  const auto batch =
    random_batch(g, scene, 2, 12, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto result = fpk::loss_and_gradients(batch, params, 0.1);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_LossAndGradients)->Arg(1)->Arg(32);

void BM_DiverseBeamSearch(benchmark::State & state)
{
  const fpk::GridSpec g = grid_18x36();
  const fpk::SceneClassMap scene = random_scene(g, 13);
  const fpk::SceneFeatures features = fpk::SceneFeatures::from_class_map(scene);
  const fpk::ModelParams params = fpk::ModelParams::random_init(g, 2, 13, 0.3, 3);
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) {
    auto beams = fpk::beam_search_cells(g.flat(9, 18), params, features, 12, k, 1.0);
    benchmark::DoNotOptimize(beams);
  }
}
BENCHMARK(BM_DiverseBeamSearch)->Arg(1)->Arg(20);

}  // namespace

BENCHMARK_MAIN();
