// reachnav - safe navigation among non-convex obstacles
//
// Copyright (c) 2026 reachnav contributors
// SPDX-License-Identifier: MIT

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "reachnav/geometry.hpp"

using namespace reachnav;

namespace {

PolygonRegion unit_square() {
  return PolygonRegion{{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}}};
}

PolygonRegion square(double x0, double y0, double x1, double y1) {
  return PolygonRegion{{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}}};
}

/// C-shape opening right; mirrors tests/oracles/cluster_oracle.py.
PolygonRegion c_shape() {
  return PolygonRegion{{{{0, 0},
                         {5, 0},
                         {5, 1},
                         {1, 1},
                         {1, 4},
                         {5, 4},
                         {5, 5},
                         {0, 5}}}};
}

/// Random simple polygon: convex hull of random points jittered radially
/// (star-shaped around its centroid, hence simple).
PolygonRegion random_star_polygon(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> radius(0.5, 3.0);
  std::uniform_real_distribution<double> center(-5.0, 5.0);
  std::uniform_int_distribution<int> nverts(5, 12);
  const int n = nverts(rng);
  const Point2 c{center(rng), center(rng)};
  std::vector<Point2> ring;
  for (int i = 0; i < n; ++i) {
    const double ang = 2.0 * kPi * i / n;
    const double r = radius(rng);
    ring.push_back({c.x + r * std::cos(ang), c.y + r * std::sin(ang)});
  }
  return PolygonRegion{{ring}};
}

}  // namespace

TEST_CASE("distance to region: axis-aligned and vertex cases") {
  const auto sq = unit_square();
  CHECK(distance_to_region({2.0, 0.5}, sq) == Catch::Approx(1.0));
  CHECK(distance_to_region({0.5, 0.5}, sq) == 0.0);
  CHECK(distance_to_region({2.0, 2.0}, sq) ==
        Catch::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("distance to region: empty region and non-finite input rejected") {
  CHECK_THROWS_AS(distance_to_region({0, 0}, PolygonRegion{}), std::domain_error);
  const auto sq = unit_square();
  CHECK_THROWS_AS(
      distance_to_region({std::numeric_limits<double>::quiet_NaN(), 0.0}, sq),
      std::domain_error);
}

TEST_CASE("distance to region: region with a hole") {
  PolygonRegion donut;
  donut.rings.push_back({{0, 0}, {10, 0}, {10, 10}, {0, 10}});   // outer CCW
  donut.rings.push_back({{3, 3}, {3, 7}, {7, 7}, {7, 3}});       // hole CW
  CHECK(distance_to_region({5, 5}, donut) == Catch::Approx(2.0));  // in hole
  CHECK(distance_to_region({1, 5}, donut) == 0.0);                 // in material
  CHECK(distance_to_region({12, 5}, donut) == Catch::Approx(2.0)); // outside
}

TEST_CASE("projection set: mirror-symmetric squares give two clusters") {
  // Projection onto the union of squares [0,1]^2 and [3,4]x[0,1] from the
  // midpoint line.
  const auto s1 = square(0, 0, 1, 1);
  const auto s2 = square(3, 0, 4, 1);
  const auto res =
      detail::project_onto_regions({2.0, 0.5}, {&s1, &s2}, -1.0, 1e-3);
  REQUIRE(res.points.size() == 2);
  CHECK_FALSE(res.unique);
  CHECK(res.distance == Catch::Approx(1.0));
  // Representatives at (1,0.5) and (3,0.5), order by angle.
  const bool found_left = std::any_of(
      res.points.begin(), res.points.end(), [](Point2 p) {
        return std::abs(p.x - 1.0) < 1e-12 && std::abs(p.y - 0.5) < 1e-12;
      });
  const bool found_right = std::any_of(
      res.points.begin(), res.points.end(), [](Point2 p) {
        return std::abs(p.x - 3.0) < 1e-12 && std::abs(p.y - 0.5) < 1e-12;
      });
  CHECK(found_left);
  CHECK(found_right);
}

TEST_CASE("projection set: single square is unique") {
  const auto res = projection_set({2.0, 0.5}, unit_square());
  REQUIRE(res.points.size() == 1);
  CHECK(res.unique);
  CHECK(res.points[0].x == Catch::Approx(1.0));
  CHECK(res.points[0].y == Catch::Approx(0.5));
}

TEST_CASE("projection set: C-shape center ties into two clusters") {
  // Frozen from tests/oracles/cluster_oracle.py (dense boundary sampling):
  //   distance 1.50000000053335 (sampling bias ~5e-10), clusters 2,
  //   representatives near (3,1) and (3,4).
  const auto res = projection_set({3.0, 2.5}, c_shape());
  CHECK_FALSE(res.unique);
  REQUIRE(res.points.size() == 2);
  CHECK(res.distance == Catch::Approx(1.5).margin(1e-9));
  for (const auto& p : res.points) {
    CHECK(std::abs(p.x - 3.0) < 1e-4);
    CHECK((std::abs(p.y - 1.0) < 1e-4 || std::abs(p.y - 4.0) < 1e-4));
  }
}

TEST_CASE("projection set: interior point projects to itself") {
  const auto res = projection_set({0.25, 0.75}, unit_square());
  CHECK(res.distance == 0.0);
  REQUIRE(res.points.size() == 1);
  CHECK(res.points[0] == Point2{0.25, 0.75});
  CHECK(res.unique);
}

TEST_CASE("signed angle: quarter turn, identity, anti-parallel tie") {
  CHECK(signed_angle({1, 0}, {0, 1}) == Catch::Approx(kPi / 2));
  CHECK(signed_angle({1, 0}, {1, 0}) == 0.0);
  CHECK(signed_angle({1, 0}, {-1, 0}) == kPi);  // tie resolved to +pi
  CHECK(signed_angle({0, 1}, {0, -1}) == kPi);
  CHECK_THROWS_AS(signed_angle({0, 0}, {1, 0}), std::domain_error);
}

TEST_CASE("signed angle: antisymmetry off the anti-parallel ray") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Vector2 p{u(rng), u(rng)};
    const Vector2 q{u(rng), u(rng)};
    if (norm(p) < 1e-3 || norm(q) < 1e-3) continue;
    const double a = signed_angle(p, q);
    if (std::abs(a) > kPi - 1e-6) continue;  // skip the closed endpoint
    CHECK(signed_angle(q, p) == Catch::Approx(-a).margin(1e-12));
  }
}

TEST_CASE("segment interior intersection: crossing, grazing, missing") {
  const auto sq = unit_square();
  CHECK(segment_intersects_interior({{-2, 0.5}, {2, 0.5}}, sq));
  // Grazing exactly along the y=0 edge: boundary is not interior.
  CHECK_FALSE(segment_intersects_interior({{-1, 0.0}, {2, 0.0}}, sq));
  CHECK_FALSE(segment_intersects_interior({{-2, 2.5}, {2, 2.5}}, sq));
  // Fully inside.
  CHECK(segment_intersects_interior({{0.25, 0.5}, {0.75, 0.5}}, sq));
  // Touching a single vertex only (line x+y=2 meets the square just at (1,1)).
  CHECK_FALSE(segment_intersects_interior({{2, 0}, {0, 2}}, sq));
  // The anti-diagonal chord x+y=1 does pass through the interior.
  CHECK(segment_intersects_interior({{-1, 2}, {2, -1}}, sq));
}

TEST_CASE("conic hull: quadrant cone, ray case, scaling invariance") {
  const std::vector<Point2> gens{{1, 0}, {0, 1}};
  CHECK(conic_hull_contains({0, 0}, gens, {1, 1}));
  CHECK_FALSE(conic_hull_contains({0, 0}, gens, {-1, 0.1}));
  CHECK(conic_hull_contains({0, 0}, {{1, 0}}, {2, 0}));           // ray case
  CHECK_FALSE(conic_hull_contains({0, 0}, {{1, 0}}, {2, 0.1}));
  CHECK_THROWS_AS(conic_hull_contains({1, 1}, {{1, 1}}, {0, 0}),
                  std::domain_error);
  // Positive scaling of query - vertex never changes membership.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> s(0.01, 100.0);
  for (int i = 0; i < 500; ++i) {
    const Point2 q{u(rng), u(rng)};
    if (norm(q) < 1e-3) continue;
    const bool base = conic_hull_contains({0, 0}, gens, q);
    CHECK(conic_hull_contains({0, 0}, gens, s(rng) * q) == base);
  }
}

TEST_CASE("conic hull: spread above pi covers the plane") {
  const std::vector<Point2> gens{{1, 0}, {-1, 0.5}, {-1, -0.5}};
  CHECK(conic_hull_contains({0, 0}, gens, {0, 1}));
  CHECK(conic_hull_contains({0, 0}, gens, {0, -1}));
  CHECK(conic_hull_contains({0, 0}, gens, {-1, 0}));
}

TEST_CASE("ray cast: empty region, wall hit, interior start") {
  CHECK(ray_cast({0, 0}, 0.0, PolygonRegion{}, 5.0) == 5.0);
  const auto wall = square(1, -10, 2, 10);
  CHECK(ray_cast({0, 0}, 0.0, wall, 50.0) == Catch::Approx(1.0));
  CHECK(ray_cast({1.5, 0}, 0.0, wall, 50.0) == 0.0);
  // Pointing away: clamped at max range.
  CHECK(ray_cast({0, 0}, kPi, wall, 7.0) == 7.0);
  CHECK_THROWS_AS(ray_cast({0, 0}, 0.0, wall, 0.0), std::domain_error);
}

TEST_CASE("property: distance zero iff closed-set membership") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (int k = 0; k < 40; ++k) {
    const auto poly = random_star_polygon(rng);
    for (int i = 0; i < 50; ++i) {
      const Point2 p{u(rng), u(rng)};
      const double d = distance_to_region(p, poly);
      const bool member = point_in_region_even_odd(p, poly) ||
                          boundary_distance(p, poly) == 0.0;
      if (member) {
        CHECK(d == 0.0);
      } else {
        CHECK(d > 0.0);
      }
    }
  }
}

TEST_CASE("property: projection points achieve the distance on the boundary") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (int k = 0; k < 30; ++k) {
    const auto poly = random_star_polygon(rng);
    for (int i = 0; i < 30; ++i) {
      const Point2 p{u(rng), u(rng)};
      if (distance_to_region(p, poly) == 0.0) continue;
      const auto res = projection_set(p, poly);
      for (const auto& q : res.points) {
        CHECK(boundary_distance(q, poly) < 1e-9 * (1.0 + res.distance));
        CHECK(distance(p, q) ==
              Catch::Approx(res.distance).margin(1e-9 * (1.0 + res.distance)));
      }
    }
  }
}

TEST_CASE("property: ray toward the unique projection reproduces the distance") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  int checked = 0;
  for (int k = 0; k < 30 && checked < 200; ++k) {
    const auto poly = random_star_polygon(rng);
    for (int i = 0; i < 30; ++i) {
      const Point2 p{u(rng), u(rng)};
      if (distance_to_region(p, poly) == 0.0) continue;
      const auto res = projection_set(p, poly);
      if (!res.unique) continue;
      const Vector2 dir = res.points[0] - p;
      const double theta = std::atan2(dir.y, dir.x);
      CHECK(ray_cast(p, theta, poly, 100.0) ==
            Catch::Approx(res.distance).margin(1e-9));
      ++checked;
    }
  }
  CHECK(checked >= 100);
}
