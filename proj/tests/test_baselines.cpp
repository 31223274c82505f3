#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

#include "fpk/baselines.hpp"
#include "fpk/metrics.hpp"

using namespace fpk;

namespace
{

Trajectory traj_from(const std::vector<Vec2> & pts, long long first_frame = 0)
{
  Trajectory t;
  t.agent_id = "a";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    t.points.push_back({first_frame + static_cast<long long>(i), pts[i].x, pts[i].y});
  }
  return t;
}

}  // namespace

TEST_CASE("constant_velocity extrapolates the last step")
{
  const Trajectory obs = traj_from({{0, 0}, {1, 0}});
  const Trajectory pred = constant_velocity(obs, 3);
  REQUIRE(pred.points.size() == 3);
  CHECK(pred.points[0].x == doctest::Approx(2.0));
  CHECK(pred.points[1].x == doctest::Approx(3.0));
  CHECK(pred.points[2].x == doctest::Approx(4.0));
  CHECK(pred.points[0].frame == 2);

  const Trajectory diag = constant_velocity(traj_from({{0, 0}, {1, 1}}), 2);
  CHECK(diag.points[1].x == doctest::Approx(3.0));
  CHECK(diag.points[1].y == doctest::Approx(3.0));
}

TEST_CASE("constant_velocity degenerates to repeating a single point")
{
  const Trajectory single = traj_from({{4, 2}});
  const Trajectory pred = constant_velocity(single, 2);
  CHECK(pred.points[0].x == 4.0);
  CHECK(pred.points[1].y == 2.0);
  CHECK_THROWS_AS(constant_velocity(single, 0), std::invalid_argument);
}

TEST_CASE("constant_velocity is equivariant under rotation and translation")
{
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int it = 0; it < 20; ++it) {
    Trajectory obs;
    for (int i = 0; i < 5; ++i) {
      obs.points.push_back({i, u(rng), u(rng)});
    }
    const double theta = u(rng);
    const double tx = u(rng), ty = u(rng);
    auto transform = [&](const TrajPoint & p) {
      return Vec2{std::cos(theta) * p.x - std::sin(theta) * p.y + tx,
                  std::sin(theta) * p.x + std::cos(theta) * p.y + ty};
    };
    Trajectory moved = obs;
    for (auto & p : moved.points) {
      const Vec2 q = transform(p);
      p.x = q.x;
      p.y = q.y;
    }
    const Trajectory direct = constant_velocity(moved, 4);
    Trajectory via = constant_velocity(obs, 4);
    for (std::size_t i = 0; i < via.points.size(); ++i) {
      const Vec2 q = transform(via.points[i]);
      CHECK(direct.points[i].x == doctest::Approx(q.x).epsilon(1e-9));
      CHECK(direct.points[i].y == doctest::Approx(q.y).epsilon(1e-9));
    }
  }
}

TEST_CASE("linear_extrapolate fits exactly linear observations with zero error")
{
  const Trajectory obs = traj_from({{0, 0}, {1, 2}, {2, 4}, {3, 6}});
  const Trajectory pred = linear_extrapolate(obs, 3);
  const Trajectory cv = constant_velocity(obs, 3);
  for (std::size_t i = 0; i < pred.points.size(); ++i) {
    CHECK(pred.points[i].x == doctest::Approx(cv.points[i].x).epsilon(1e-9));
    CHECK(pred.points[i].y == doctest::Approx(cv.points[i].y).epsilon(1e-9));
  }
}

TEST_CASE("linear_extrapolate slope matches the normal-equation oracle")
{
  // y = 2t with alternating noise -0.1, +0.1
  Trajectory obs;
  for (int i = 0; i < 8; ++i) {
    obs.points.push_back({i, 1.0 * i, 2.0 * i + (i % 2 == 0 ? -0.1 : 0.1)});
  }
  // Independent oracle: solve the normal equations directly.
  const int n = 8;
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (const auto & p : obs.points) {
    st += static_cast<double>(p.frame);
    sy += p.y;
    stt += static_cast<double>(p.frame) * p.frame;
    sty += static_cast<double>(p.frame) * p.y;
  }
  const double slope = (n * sty - st * sy) / (n * stt - st * st);
  const double icept = (sy - slope * st) / n;

  const Trajectory pred = linear_extrapolate(obs, 2);
  CHECK(pred.points[0].y == doctest::Approx(icept + slope * 8.0).epsilon(1e-12));
  CHECK(pred.points[1].y == doctest::Approx(icept + slope * 9.0).epsilon(1e-12));
}

TEST_CASE("linear_extrapolate on constant observations stays constant")
{
  const Trajectory obs = traj_from({{2, 3}, {2, 3}, {2, 3}});
  const Trajectory pred = linear_extrapolate(obs, 2);
  CHECK(pred.points[0].x == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(pred.points[1].y == doctest::Approx(3.0).epsilon(1e-12));
  CHECK_THROWS_AS(linear_extrapolate(traj_from({{0, 0}}), 2), std::invalid_argument);
}

TEST_CASE("nearest_neighbor retrieves the most similar observation")
{
  TrainBank bank;
  // entry 0: walking east, future continues east
  bank.pairs.emplace_back(traj_from({{0, 0}, {1, 0}}), traj_from({{2, 0}, {3, 0}}, 2));
  // entry 1: walking north, future continues north
  bank.pairs.emplace_back(traj_from({{0, 0}, {0, 1}}), traj_from({{0, 2}, {0, 3}}, 2));

  SUBCASE("exact match returns its future translated to the query endpoint")
  {
    const Trajectory query = traj_from({{10, 5}, {11, 5}});  // east, shifted
    const Trajectory pred = nearest_neighbor(query, bank, 2);
    CHECK(pred.points[0].x == doctest::Approx(12.0));
    CHECK(pred.points[0].y == doctest::Approx(5.0));
    CHECK(pred.points[1].x == doctest::Approx(13.0));
    CHECK(pred.points[0].frame == query.points.back().frame + 1);
  }

  SUBCASE("selection matches an exhaustive scan, ties to the lowest index")
  {
    const Trajectory query = traj_from({{0, 0}, {0.7, 0.7}});
    double best = 1e300;
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < bank.pairs.size(); ++i) {
      const auto & cand = bank.pairs[i].first;
      const Vec2 oc = cand.points.back().pos();
      const Vec2 oq = query.points.back().pos();
      double s = 0.0;
      for (std::size_t t = 0; t < cand.points.size(); ++t) {
        const double dx = (query.points[t].x - oq.x) - (cand.points[t].x - oc.x);
        const double dy = (query.points[t].y - oq.y) - (cand.points[t].y - oc.y);
        s += std::sqrt(dx * dx + dy * dy);
      }
      if (s / 2.0 < best) {
        best = s / 2.0;
        best_idx = i;
      }
    }
    const Trajectory pred = nearest_neighbor(query, bank, 2);
    const Vec2 shift = query.points.back().pos() - bank.pairs[best_idx].first.points.back().pos();
    CHECK(pred.points[0].x ==
          doctest::Approx(bank.pairs[best_idx].second.points[0].x + shift.x));
  }

  SUBCASE("empty bank is an error")
  {
    TrainBank empty;
    CHECK_THROWS_AS(nearest_neighbor(traj_from({{0, 0}, {1, 0}}), empty, 2),
                    std::invalid_argument);
  }
}

TEST_CASE("nearest_neighbor output is a translate of a bank future")
{
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  TrainBank bank;
  for (int i = 0; i < 5; ++i) {
    Trajectory o, f;
    for (int t = 0; t < 4; ++t) {
      o.points.push_back({t, u(rng), u(rng)});
    }
    for (int t = 0; t < 3; ++t) {
      f.points.push_back({4 + t, u(rng), u(rng)});
    }
    bank.pairs.emplace_back(o, f);
  }
  Trajectory query;
  for (int t = 0; t < 4; ++t) {
    query.points.push_back({t, u(rng), u(rng)});
  }
  const Trajectory pred = nearest_neighbor(query, bank, 3);
  bool is_translate = false;
  for (const auto & [obs, fut] : bank.pairs) {
    const double dx = pred.points[0].x - fut.points[0].x;
    const double dy = pred.points[0].y - fut.points[0].y;
    bool all = true;
    for (std::size_t t = 0; t < pred.points.size(); ++t) {
      all = all && std::fabs(pred.points[t].x - fut.points[t].x - dx) < 1e-9 &&
            std::fabs(pred.points[t].y - fut.points[t].y - dy) < 1e-9;
    }
    is_translate = is_translate || all;
  }
  CHECK(is_translate);
}

TEST_CASE("make_train_bank flattens samples into pairs")
{
  MultiFutureSample s;
  s.observation = traj_from({{0, 0}, {1, 0}});
  s.futures.push_back(traj_from({{2, 0}}, 2));
  s.futures.push_back(traj_from({{1, 1}}, 2));
  const TrainBank bank = make_train_bank({s});
  CHECK(bank.pairs.size() == 2);
}
