#include <doctest.h>

#include <functional>
#include <stdexcept>

#include <cmath>
#include <limits>
#include <random>

#include "fpk/multiview.hpp"

using namespace fpk;

namespace
{

Eigen::Matrix3d random_rotation(std::mt19937_64 & rng)
{
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      m(r, c) = n(rng);
    }
  }
  Eigen::HouseholderQR<Eigen::Matrix3d> qr(m);
  Eigen::Matrix3d q = qr.householderQ();
  if (q.determinant() < 0.0) {
    q.col(0) *= -1.0;
  }
  return q;
}

// Exhaustive assignment over injections rows -> cols.
double brute_force_assignment(const Eigen::MatrixXd & cost)
{
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  const bool flip = n > m;
  const int rows = flip ? m : n;
  const int cols = flip ? n : m;
  std::vector<char> used(static_cast<std::size_t>(cols), 0);
  double best = std::numeric_limits<double>::infinity();
  std::function<void(int, double)> recurse = [&](int row, double acc) {
    if (row == rows) {
      best = std::min(best, acc);
      return;
    }
    for (int c = 0; c < cols; ++c) {
      if (used[static_cast<std::size_t>(c)]) {
        continue;
      }
      used[static_cast<std::size_t>(c)] = 1;
      recurse(row + 1, acc + (flip ? cost(c, row) : cost(row, c)));
      used[static_cast<std::size_t>(c)] = 0;
    }
  };
  recurse(0, 0.0);
  return best;
}

Tracklet make_tracklet(
  const std::string & camera, const std::string & agent, long long first_frame,
  const std::vector<Vec2> & pts)
{
  Tracklet t;
  t.camera_id = camera;
  t.traj.agent_id = agent;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    t.traj.points.push_back(
      {first_frame + static_cast<long long>(i), pts[i].x, pts[i].y});
  }
  return t;
}

}  // namespace

TEST_CASE("homography of a camera with itself is the identity")
{
  std::mt19937_64 rng(61);
  CameraModel cam;
  cam.rotation = random_rotation(rng);
  cam.translation = Eigen::Vector3d(1.0, -2.0, 0.5);
  cam.plane_normal = Eigen::Vector3d(0.0, 0.0, 1.0);
  cam.plane_distance = 3.0;
  const Homography h = homography_between(cam, cam);
  CHECK((h - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pure translation along the plane normal matches the closed form")
{
  // R_a = R_b = I and t_a - t_b = s n gives H = I - s n n^T / d.
  CameraModel b;
  b.plane_normal = Eigen::Vector3d(0.0, 1.0, 0.0);
  b.plane_distance = 2.0;
  CameraModel a = b;
  const double s = 0.7;
  a.translation = b.translation + s * b.plane_normal;
  const Homography h = homography_between(a, b);
  const Eigen::Matrix3d expect =
    Eigen::Matrix3d::Identity() -
    (s / 2.0) * (b.plane_normal * b.plane_normal.transpose());
  CHECK((h - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("homography agrees with the two-camera projection of plane points")
{
  std::mt19937_64 rng(62);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  while (checked < 20) {
    CameraModel b;
    b.rotation = random_rotation(rng);
    b.translation = Eigen::Vector3d(u(rng), u(rng), u(rng));
    Eigen::Vector3d n(u(rng), u(rng), 1.5 + std::fabs(u(rng)));
    b.plane_normal = n.normalized();
    b.plane_distance = 2.0 + std::fabs(u(rng));

    CameraModel a = b;
    a.rotation = random_rotation(rng) * b.rotation;
    a.translation = b.translation + 0.3 * Eigen::Vector3d(u(rng), u(rng), u(rng));

    Homography h;
    try {
      h = homography_between(a, b);
    } catch (const std::invalid_argument &) {
      continue;
    }

    // Plane points in b's frame satisfy n^T X + d = 0.
    int used = 0;
    for (int i = 0; i < 10; ++i) {
      Eigen::Vector3d tangent(u(rng), u(rng), u(rng));
      tangent -= tangent.dot(b.plane_normal) * b.plane_normal;
      const Eigen::Vector3d xb = -b.plane_distance * b.plane_normal + 2.0 * tangent;
      const Eigen::Vector3d xa =
        a.rotation * b.rotation.transpose() * (xb - b.translation) + a.translation;
      if (std::fabs(xb.z()) < 0.4 || std::fabs(xa.z()) < 0.4) {
        continue;
      }
      const Vec2 img_b{xb.x() / xb.z(), xb.y() / xb.z()};
      const Vec2 img_a{xa.x() / xa.z(), xa.y() / xa.z()};
      const Vec2 mapped = apply_homography(h, img_b);
      CHECK(std::fabs(mapped.x - img_a.x) < 1e-6);
      CHECK(std::fabs(mapped.y - img_a.y) < 1e-6);
      ++used;
    }
    if (used >= 5) {
      ++checked;
    }
  }
}

TEST_CASE("apply_homography basics")
{
  CHECK(apply_homography(Eigen::Matrix3d::Identity(), {3.0, -2.0}).x == 3.0);
  Eigen::Matrix3d scale = Eigen::Vector3d(2.0, 2.0, 1.0).asDiagonal();
  const Vec2 doubled = apply_homography(scale, {1.5, -1.0});
  CHECK(doubled.x == doctest::Approx(3.0));
  CHECK(doubled.y == doctest::Approx(-2.0));

  std::mt19937_64 rng(63);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::Matrix3d h;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      h(r, c) = u(rng);
    }
  }
  h(2, 2) = 3.0;  // keep w away from zero
  const Vec2 p{u(rng), u(rng)};
  const Eigen::Vector3d manual = h * Eigen::Vector3d(p.x, p.y, 1.0);
  const Vec2 mapped = apply_homography(h, p);
  CHECK(mapped.x == doctest::Approx(manual.x() / manual.z()).epsilon(1e-12));
  CHECK(mapped.y == doctest::Approx(manual.y() / manual.z()).epsilon(1e-12));

  Eigen::Matrix3d drop = Eigen::Matrix3d::Identity();
  drop(2, 2) = 0.0;
  drop(2, 0) = 1.0;
  CHECK_THROWS_AS(apply_homography(drop, {0.0, 5.0}), std::invalid_argument);
}

TEST_CASE("round trip through a homography and its inverse")
{
  std::mt19937_64 rng(64);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  Eigen::Matrix3d h = Eigen::Matrix3d::Identity();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      h(r, c) += u(rng) * 0.2;
    }
  }
  const Eigen::Matrix3d inv = h.inverse();
  for (int i = 0; i < 50; ++i) {
    const Vec2 p{u(rng) * 10.0, u(rng) * 10.0};
    const Vec2 back = apply_homography(inv, apply_homography(h, p));
    CHECK(std::fabs(back.x - p.x) < 1e-9);
    CHECK(std::fabs(back.y - p.y) < 1e-9);
  }
}

TEST_CASE("hungarian_solve basic cases")
{
  SUBCASE("diagonal zeros assign the diagonal")
  {
    Eigen::MatrixXd cost(3, 3);
    cost << 0, 5, 5, 5, 0, 5, 5, 5, 0;
    const HungarianResult r = hungarian_solve(cost);
    CHECK(r.total_cost == 0.0);
    CHECK(r.pairs == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}, {2, 2}});
  }

  SUBCASE("the classic 2x2 example")
  {
    Eigen::MatrixXd cost(2, 2);
    cost << 1, 2, 3, 1;
    const HungarianResult r = hungarian_solve(cost);
    CHECK(r.total_cost == doctest::Approx(2.0));
    CHECK(r.pairs == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}});
  }

  SUBCASE("empty matrices are rejected")
  {
    CHECK_THROWS_AS(hungarian_solve(Eigen::MatrixXd(0, 0)), std::invalid_argument);
  }
}

TEST_CASE("hungarian_solve matches permutation brute force on random matrices")
{
  std::mt19937_64 rng(65);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::uniform_int_distribution<int> dim(1, 7);
  for (int it = 0; it < 200; ++it) {
    const int n = dim(rng);
    const int m = dim(rng);
    Eigen::MatrixXd cost(n, m);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < m; ++c) {
        cost(r, c) = u(rng);
      }
    }
    const HungarianResult got = hungarian_solve(cost);
    CHECK(got.total_cost == doctest::Approx(brute_force_assignment(cost)).epsilon(1e-9));
    CHECK(static_cast<int>(got.pairs.size()) == std::min(n, m));
  }
}

TEST_CASE("hungarian_solve total cost is invariant to row permutation")
{
  std::mt19937_64 rng(66);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  Eigen::MatrixXd cost(5, 5);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 5; ++c) {
      cost(r, c) = u(rng);
    }
  }
  Eigen::MatrixXd permuted(5, 5);
  const int perm[5] = {3, 1, 4, 0, 2};
  for (int r = 0; r < 5; ++r) {
    permuted.row(r) = cost.row(perm[r]);
  }
  CHECK(hungarian_solve(cost).total_cost ==
        doctest::Approx(hungarian_solve(permuted).total_cost).epsilon(1e-9));
}

TEST_CASE("hungarian_solve drops gated pairs")
{
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd cost(2, 2);
  cost << 1.0, inf, inf, inf;
  const HungarianResult r = hungarian_solve(cost);
  CHECK(r.pairs == std::vector<std::pair<int, int>>{{0, 0}});
  CHECK(r.total_cost == doctest::Approx(1.0));
}

TEST_CASE("associate_tracklets merges the same path seen from two cameras")
{
  // Camera cam1 reports ground coordinates directly; cam0 reports them
  // shifted by (10, 0), undone by its homography.
  std::map<std::string, Homography> homographies;
  homographies["cam0"] = Eigen::Matrix3d::Identity();
  homographies["cam0"](0, 2) = -10.0;
  homographies["cam1"] = Eigen::Matrix3d::Identity();

  const std::vector<Vec2> path_a{{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  const std::vector<Vec2> path_b{{0, 30}, {0, 31}, {0, 32}, {0, 33}};
  std::vector<Vec2> path_a_cam0;
  for (const auto & p : path_a) {
    path_a_cam0.push_back({p.x + 10.0, p.y});
  }
  std::vector<Vec2> path_b_cam0;
  for (const auto & p : path_b) {
    path_b_cam0.push_back({p.x + 10.0, p.y});
  }

  const std::vector<Tracklet> tracklets{
    make_tracklet("cam0", "a", 0, path_a_cam0),
    make_tracklet("cam1", "a", 0, path_a),
    make_tracklet("cam0", "b", 0, path_b_cam0),
    make_tracklet("cam1", "b", 0, path_b),
  };

  AssociationConfig cfg;
  cfg.max_dist = 0.5;
  cfg.max_time_gap = 10.0;
  const auto tracks = associate_tracklets(tracklets, homographies, cfg);
  REQUIRE(tracks.size() == 2);
  for (const auto & t : tracks) {
    CHECK(t.members.size() == 2);
    CHECK(t.members[0].traj.agent_id == t.members[1].traj.agent_id);
  }
  // fused points average the two views
  CHECK(tracks[0].fused.points.size() == 4);
}

TEST_CASE("associate_tracklets respects the distance gate")
{
  std::map<std::string, Homography> homographies;
  homographies["cam0"] = Eigen::Matrix3d::Identity();
  homographies["cam1"] = Eigen::Matrix3d::Identity();
  const std::vector<Tracklet> tracklets{
    make_tracklet("cam0", "a", 0, {{0, 0}, {1, 0}}),
    make_tracklet("cam1", "b", 0, {{50, 50}, {51, 50}}),
  };
  AssociationConfig cfg;
  cfg.max_dist = 2.0;
  const auto tracks = associate_tracklets(tracklets, homographies, cfg);
  CHECK(tracks.size() == 2);
}

TEST_CASE("associate_tracklets stitches disjoint fragments in time")
{
  std::map<std::string, Homography> homographies;
  homographies["cam0"] = Eigen::Matrix3d::Identity();
  const std::vector<Tracklet> tracklets{
    make_tracklet("cam0", "a1", 0, {{0, 0}, {1, 0}}),
    make_tracklet("cam0", "a2", 4, {{1.2, 0}, {2.2, 0}}),
  };
  AssociationConfig cfg;
  cfg.max_dist = 1.0;
  cfg.max_time_gap = 5.0;
  const auto merged = associate_tracklets(tracklets, homographies, cfg);
  CHECK(merged.size() == 1);

  AssociationConfig strict = cfg;
  strict.max_time_gap = 1.0;
  const auto apart = associate_tracklets(tracklets, homographies, strict);
  CHECK(apart.size() == 2);

  CHECK_THROWS_AS(associate_tracklets(tracklets, {}, cfg), std::invalid_argument);
}

TEST_CASE("global tracks partition the input tracklets")
{
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  std::map<std::string, Homography> homographies;
  homographies["cam0"] = Eigen::Matrix3d::Identity();
  homographies["cam1"] = Eigen::Matrix3d::Identity();
  std::vector<Tracklet> tracklets;
  for (int i = 0; i < 9; ++i) {
    const Vec2 base{u(rng), u(rng)};
    tracklets.push_back(make_tracklet(
      i % 2 == 0 ? "cam0" : "cam1", "t" + std::to_string(i), i,
      {{base.x, base.y}, {base.x + 1.0, base.y}}));
  }
  AssociationConfig cfg;
  cfg.max_dist = 3.0;
  cfg.max_time_gap = 20.0;
  const auto tracks = associate_tracklets(tracklets, homographies, cfg);
  std::size_t members = 0;
  for (const auto & t : tracks) {
    members += t.members.size();
  }
  CHECK(members == tracklets.size());
}

TEST_CASE("smooth_global applies a truncated centered moving average")
{
  GlobalTrack track;
  track.fused.agent_id = "g";
  const std::vector<double> xs{0, 0, 0, 1, 1, 1};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    track.fused.points.push_back({static_cast<long long>(i), xs[i], 0.0});
  }

  SUBCASE("window one is the identity")
  {
    const GlobalTrack same = smooth_global(track, 1);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      CHECK(same.fused.points[i].x == xs[i]);
    }
  }

  SUBCASE("window three matches the hand-computed truncated average")
  {
    const GlobalTrack s = smooth_global(track, 3);
    const std::vector<double> expect{0.0, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, 1.0};
    for (std::size_t i = 0; i < expect.size(); ++i) {
      CHECK(s.fused.points[i].x == doctest::Approx(expect[i]).epsilon(1e-12));
    }
  }

  SUBCASE("constant trajectories are unchanged for any window")
  {
    GlobalTrack flat;
    for (int i = 0; i < 10; ++i) {
      flat.fused.points.push_back({i, 2.5, -1.0});
    }
    const GlobalTrack s = smooth_global(flat, 200);
    for (const auto & p : s.fused.points) {
      CHECK(p.x == doctest::Approx(2.5));
      CHECK(p.y == doctest::Approx(-1.0));
    }
  }

  SUBCASE("invalid inputs are rejected")
  {
    CHECK_THROWS_AS(smooth_global(track, 0), std::invalid_argument);
    CHECK_THROWS_AS(smooth_global(GlobalTrack{}, 3), std::invalid_argument);
  }
}
