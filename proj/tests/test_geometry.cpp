#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <Eigen/Geometry>

#include "pvcoat/geometry.hpp"

using namespace pvcoat;
using Catch::Approx;

namespace {

geom::Polygon2 unit_square() {
  return {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
}

// Monte-Carlo estimate of the disk/polygon overlap fraction.
double mc_overlap(const geom::Vec2& c, double r, const geom::Polygon2& poly,
                  std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::size_t hit = 0, total = 0;
  while (total < n) {
    const double x = uni(rng), y = uni(rng);
    if (x * x + y * y > 1.0) continue;
    ++total;
    if (geom::point_in_convex({c.x() + r * x, c.y() + r * y}, poly)) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("polygon area and orientation") {
  auto sq = unit_square();
  CHECK(geom::signed_area(sq) == Approx(1.0));
  std::reverse(sq.begin(), sq.end());
  CHECK(geom::signed_area(sq) == Approx(-1.0));
  geom::make_ccw(sq);
  CHECK(geom::signed_area(sq) == Approx(1.0));
}

TEST_CASE("point in convex polygon") {
  const auto sq = unit_square();
  CHECK(geom::point_in_convex({0.5, 0.5}, sq));
  CHECK(geom::point_in_convex({0.0, 0.5}, sq));  // boundary counts
  CHECK_FALSE(geom::point_in_convex({1.5, 0.5}, sq));
  CHECK_FALSE(geom::point_in_convex({-0.1, -0.1}, sq));
}

TEST_CASE("clip square against itself and against half overlap") {
  const auto sq = unit_square();
  CHECK(geom::area(geom::clip_convex(sq, sq)) == Approx(1.0));

  geom::Polygon2 shifted = {{0.5, 0.0}, {1.5, 0.0}, {1.5, 1.0}, {0.5, 1.0}};
  CHECK(geom::area(geom::clip_convex(sq, shifted)) == Approx(0.5));

  geom::Polygon2 disjoint = {{5.0, 5.0}, {6.0, 5.0}, {6.0, 6.0}, {5.0, 6.0}};
  CHECK(geom::clip_convex(sq, disjoint).size() < 3);
}

TEST_CASE("convex hull of noisy square") {
  std::vector<geom::Vec2> pts = {{0, 0}, {1, 0}, {1, 1}, {0, 1},
                                 {0.5, 0.5}, {0.2, 0.7}, {0.9, 0.1}};
  const auto hull = geom::convex_hull(pts);
  REQUIRE(hull.size() == 4);
  CHECK(geom::signed_area(hull) == Approx(1.0));
}

TEST_CASE("min-area rect recovers a rotated rectangle") {
  const double ang = 0.4;
  const geom::Vec2 u(std::cos(ang), std::sin(ang));
  const geom::Vec2 v(-std::sin(ang), std::cos(ang));
  const geom::Vec2 c(2.0, -1.0);
  std::vector<geom::Vec2> pts;
  for (int i = -11; i <= 11; ++i) {
    for (int j = -23; j <= 23; ++j) {
      pts.push_back(c + 0.05 * i * u + 0.05 * j * v);
    }
  }
  const auto rect = geom::min_area_rect(pts);
  const double lo = std::min(rect.half_u, rect.half_v);
  const double hi = std::max(rect.half_u, rect.half_v);
  CHECK(lo == Approx(0.55).margin(1e-9));
  CHECK(hi == Approx(1.15).margin(1e-9));
  CHECK((rect.center - c).norm() < 1e-9);
}

TEST_CASE("disk overlap trivial cases") {
  geom::Polygon2 big = {{-10, -10}, {10, -10}, {10, 10}, {-10, 10}};
  CHECK(geom::disk_polygon_overlap({0, 0}, 0.1, big) == 1.0);
  CHECK(geom::disk_polygon_overlap({50, 0}, 0.1, big) == 0.0);
  // center on a straight edge: central symmetry of the 64-gon gives 1/2
  CHECK(geom::disk_polygon_overlap({0.0, 10.0}, 0.1, big) ==
        Approx(0.5).margin(1e-3));
}

TEST_CASE("disk overlap matches Monte-Carlo on random poses") {
  std::mt19937_64 rng(91);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const geom::Vec2 c(uni(rng), uni(rng));
    const double r = 0.3 + 0.3 * std::abs(uni(rng));
    geom::Polygon2 rect = {{-0.8, -0.5}, {0.8, -0.5}, {0.8, 0.5}, {-0.8, 0.5}};
    const double est = geom::disk_polygon_overlap(c, r, rect);
    const double mc = mc_overlap(c, r, rect, 200000, 17 + trial);
    CHECK(est == Approx(mc).margin(5e-3));
  }
}

TEST_CASE("disk overlap invariant under rigid rotation of disk and polygon") {
  geom::Polygon2 rect = {{-0.6, -0.4}, {0.6, -0.4}, {0.6, 0.4}, {-0.6, 0.4}};
  const geom::Vec2 c(0.55, 0.35);
  const double r = 0.25;
  const double base = geom::disk_polygon_overlap(c, r, rect);
  for (const double ang : {0.3, 1.1, 2.7}) {
    const Eigen::Rotation2Dd rot(ang);
    geom::Polygon2 rrect;
    for (const auto& p : rect) rrect.push_back(rot * p);
    const double a = geom::disk_polygon_overlap(rot * c, r, rrect);
    CHECK(a == Approx(base).margin(2e-3));
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
  }
}
