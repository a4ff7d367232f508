// reachnav - safe navigation among non-convex obstacles
//
// Copyright (c) 2026 reachnav contributors
// SPDX-License-Identifier: MIT

#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "reachnav/grid.hpp"

namespace {

using namespace reachnav;

#ifndef REACHNAV_SOURCE_DIR
#error "REACHNAV_SOURCE_DIR must be defined by the build"
#endif

const std::string kOracleDir =
    std::string(REACHNAV_SOURCE_DIR) + "/tests/oracles/";

struct OracleCase {
  std::string name;
  double radius = 0.0;
  GridMask raw, dilated, closed;
};

std::vector<OracleCase> load_closing_oracle() {
  std::ifstream in(kOracleDir + "closing_oracle.txt");
  REQUIRE(in.good());
  std::vector<OracleCase> cases;
  std::string line;
  OracleCase* cur = nullptr;
  GridMask* target = nullptr;
  int row = 0;
  int width = 0, height = 0;
  while (std::getline(in, line)) {
    if (line.rfind("case ", 0) == 0) {
      std::istringstream ss(line.substr(5));
      cases.emplace_back();
      cur = &cases.back();
      ss >> cur->name >> width >> height >> cur->radius;
      target = nullptr;
    } else if (line == "raw" || line == "dilated" || line == "closed") {
      REQUIRE(cur != nullptr);
      target = (line == "raw") ? &cur->raw
               : (line == "dilated") ? &cur->dilated
                                     : &cur->closed;
      *target = GridMask::make({0.0, 0.0}, 1.0, width, height,
                               cur->name == "bounded");
      row = 0;
    } else if (!line.empty() && target != nullptr) {
      REQUIRE(static_cast<int>(line.size()) == width);
      for (int ix = 0; ix < width; ++ix) {
        target->set(ix, row, line[ix] == '1');
      }
      ++row;
    }
  }
  REQUIRE(cases.size() == 2);
  return cases;
}

GridMask random_mask(std::mt19937& rng, int max_side, double density,
                     bool outside_occupied) {
  std::uniform_int_distribution<int> side(4, max_side);
  const int w = side(rng), h = side(rng);
  GridMask m = GridMask::make({0.0, 0.0}, 1.0, w, h, outside_occupied);
  std::bernoulli_distribution bit(density);
  for (auto& b : m.bits) b = bit(rng) ? 1 : 0;
  return m;
}

bool subset_of(const GridMask& a, const GridMask& b) {
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    if (a.bits[i] && !b.bits[i]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("disk dilation and closing match the brute-force oracle bit for "
          "bit") {
  for (const auto& oc : load_closing_oracle()) {
    INFO("oracle case " << oc.name);
    const GridMask dilated = dilate_disk(oc.raw, oc.radius);
    CHECK(dilated.bits == oc.dilated.bits);
    const GridMask closed = closing(oc.raw, oc.radius);
    CHECK(closed.bits == oc.closed.bits);
  }
}

TEST_CASE("closing is extensive, idempotent, and increasing on random masks") {
  std::mt19937 rng(20260207);
  std::uniform_real_distribution<double> radius(0.0, 6.0);
  std::uniform_real_distribution<double> density(0.05, 0.5);
  for (int trial = 0; trial < 60; ++trial) {
    const bool bounded = (trial % 2) == 1;
    GridMask a = random_mask(rng, 48, density(rng), bounded);
    const double r = radius(rng);
    const GridMask ca = closing(a, r);
    INFO("trial " << trial << " radius " << r << " size " << a.width << "x"
                  << a.height);
    // Extensive: closing(A) contains A.
    CHECK(subset_of(a, ca));
    // Idempotent: closing twice changes nothing.
    CHECK(closing(ca, r).bits == ca.bits);
    // Increasing: add occupied cells to get B with A subset B.
    GridMask b = a;
    std::uniform_int_distribution<int> pick(
        0, static_cast<int>(b.bits.size()) - 1);
    for (int k = 0; k < 20; ++k) b.bits[pick(rng)] = 1;
    CHECK(subset_of(ca, closing(b, r)));
  }
}

TEST_CASE("closing agrees with its dual construction bit for bit") {
  std::mt19937 rng(8841);
  std::uniform_real_distribution<double> radius(0.5, 5.0);
  for (int trial = 0; trial < 40; ++trial) {
    const bool bounded = (trial % 2) == 1;
    GridMask a = random_mask(rng, 40, 0.3, bounded);
    const double r = radius(rng);
    if (!bounded) {
      // The dual order works on the input frame, so give the dilation room:
      // keep occupied content clear of the border by the disk radius.
      const int margin = static_cast<int>(std::ceil(r)) + 1;
      for (int iy = 0; iy < a.height; ++iy) {
        for (int ix = 0; ix < a.width; ++ix) {
          if (ix < margin || iy < margin || ix >= a.width - margin ||
              iy >= a.height - margin) {
            a.set(ix, iy, false);
          }
        }
      }
    }
    const GridMask direct = closing(a, r);
    // Dual order: complement, dilate twice around the free side.
    const GridMask dual =
        complement_mask(dilate_disk(free_space(a, r), r));
    CHECK(direct.bits == dual.bits);
    CHECK(direct.outside_occupied == dual.outside_occupied);
    // Erosion itself is the dual of dilation on the complement.
    const GridMask er = erode_disk(a, r);
    const GridMask er_dual = complement_mask(dilate_disk(complement_mask(a), r));
    CHECK(er.bits == er_dual.bits);
  }
}

TEST_CASE("radius zero morphology is the identity") {
  std::mt19937 rng(7);
  GridMask a = random_mask(rng, 30, 0.4, false);
  CHECK(dilate_disk(a, 0.0).bits == a.bits);
  CHECK(erode_disk(a, 0.0).bits == a.bits);
  CHECK(closing(a, 0.0).bits == a.bits);
}

TEST_CASE("dilating a single cell yields the discrete disk") {
  GridMask m = GridMask::make({0.0, 0.0}, 1.0, 15, 15, false);
  m.set(7, 7, true);
  const GridMask d = dilate_disk(m, 3.0);
  for (int iy = 0; iy < 15; ++iy) {
    for (int ix = 0; ix < 15; ++ix) {
      const int dx = ix - 7, dy = iy - 7;
      CHECK(d.at(ix, iy) == (dx * dx + dy * dy <= 9));
    }
  }
}

TEST_CASE("closing keeps a convex block unchanged") {
  GridMask m = GridMask::make({0.0, 0.0}, 0.1, 26, 24, false);
  for (int iy = 6; iy <= 17; ++iy) {
    for (int ix = 7; ix <= 18; ++ix) m.set(ix, iy, true);
  }
  CHECK(closing(m, 0.55).bits == m.bits);
}

TEST_CASE("closing fuses two blocks whose gap is below the disk diameter") {
  // Two 1x1 blocks with a 0.5 m gap, closed with alpha = 0.4 (gap < 2*alpha).
  const double res = 0.05;
  GridMask m = GridMask::make({-0.5, -0.5}, res, 70, 40, false);
  for (int iy = 0; iy < 40; ++iy) {
    for (int ix = 0; ix < 70; ++ix) {
      const Point2 c = m.cell_center(ix, iy);
      const bool in_a = c.x >= 0.0 && c.x <= 1.0 && c.y >= 0.0 && c.y <= 1.0;
      const bool in_b = c.x >= 1.5 && c.x <= 2.5 && c.y >= 0.0 && c.y <= 1.0;
      if (in_a || in_b) m.set(ix, iy, true);
    }
  }
  const auto [raw_labels, raw_count] = label_components(m, true, 4);
  (void)raw_labels;
  REQUIRE(raw_count == 2);
  const GridMask closed = closing(m, 0.4);
  const auto [labels, count] = label_components(closed, true, 4);
  (void)labels;
  CHECK(count == 1);
}

TEST_CASE("free space complements the dilated set and seals narrow "
          "corridors") {
  std::mt19937 rng(99);
  GridMask a = random_mask(rng, 30, 0.3, false);
  const GridMask f0 = free_space(a, 0.0);
  for (std::size_t i = 0; i < a.bits.size(); ++i) {
    CHECK(f0.bits[i] == (a.bits[i] ? 0 : 1));
  }
  CHECK(f0.outside_occupied == true);  // free set extends beyond the border

  // Corridor of width 2*r_a - resolution between two walls: the eroded free
  // space contains no corridor cell.
  const double res = 0.1, r_a = 0.45;
  const double gap = 2.0 * r_a - res;  // 0.8 m
  GridMask walls = GridMask::make({0.0, 0.0}, res, 40, 30, false);
  for (int iy = 0; iy < 30; ++iy) {
    for (int ix = 0; ix < 40; ++ix) {
      const Point2 c = walls.cell_center(ix, iy);
      if (c.x >= 1.0 && c.x <= 1.5) walls.set(ix, iy, true);
      if (c.x >= 1.5 + gap && c.x <= 2.0 + gap) walls.set(ix, iy, true);
    }
  }
  const GridMask wfree = free_space(walls, r_a);
  for (int iy = 0; iy < 30; ++iy) {
    for (int ix = 0; ix < 40; ++ix) {
      const Point2 c = walls.cell_center(ix, iy);
      if (c.x > 1.5 && c.x < 1.5 + gap) {
        CHECK_FALSE(wfree.at(ix, iy));
      }
    }
  }
}

TEST_CASE("distance transform respects the outside convention") {
  GridMask empty_bounded = GridMask::make({0.0, 0.0}, 1.0, 5, 5, true);
  const auto d2 = squared_edt(empty_bounded, /*to_occupied=*/true);
  CHECK(d2[empty_bounded.index(2, 2)] == 9.0);  // three cells to the border
  CHECK(d2[empty_bounded.index(0, 0)] == 1.0);
  CHECK(d2[empty_bounded.index(4, 2)] == 1.0);

  GridMask empty_open = GridMask::make({0.0, 0.0}, 1.0, 5, 5, false);
  const auto d2o = squared_edt(empty_open, /*to_occupied=*/true);
  for (double v : d2o) CHECK(v > 1e20);  // no occupied site anywhere

  // Erosion of a bounded all-free mask grows obstacles in from the border.
  const GridMask er = erode_disk(complement_mask(empty_bounded), 2.0);
  // complement of bounded-empty = all-free with outside free... build the
  // intended case directly: all-free mask whose outside counts occupied.
  GridMask all_free = GridMask::make({0.0, 0.0}, 1.0, 5, 5, true);
  const GridMask seeded = dilate_disk(all_free, 1.0);
  CHECK(seeded.at(0, 0));       // border cell within one cell of outside
  CHECK_FALSE(seeded.at(2, 2));  // center is two cells away
  (void)er;
}

TEST_CASE("component labeling distinguishes 4- and 8-connectivity") {
  GridMask m = GridMask::make({0.0, 0.0}, 1.0, 6, 6, false);
  // Two blocks touching only at a corner: (2,2) and (3,3) are diagonal.
  m.set(1, 1, true);
  m.set(1, 2, true);
  m.set(2, 1, true);
  m.set(2, 2, true);
  m.set(3, 3, true);
  m.set(3, 4, true);
  m.set(4, 3, true);
  const auto [l4, c4] = label_components(m, true, 4);
  (void)l4;
  CHECK(c4 == 2);
  const auto [l8, c8] = label_components(m, true, 8);
  (void)l8;
  CHECK(c8 == 1);
  CHECK_THROWS_AS(label_components(m, true, 6), std::domain_error);
}

TEST_CASE("contour extraction traces a block as one closed octagon") {
  const double res = 0.5;
  GridMask m = GridMask::make({1.0, 2.0}, res, 10, 10, false);
  for (int iy = 3; iy <= 5; ++iy) {
    for (int ix = 4; ix <= 6; ++ix) m.set(ix, iy, true);
  }
  const auto loops = extract_contours(m);
  REQUIRE(loops.size() == 1);
  CHECK(loops[0].closed);
  CHECK(loops[0].pts.size() == 8);  // four corner cuts, four straight runs
  // Octagon area: 3x3 cells minus four half-cell corner triangles.
  const double expect = (9.0 - 0.5) * res * res;
  CHECK(std::abs(std::abs(ring_signed_area(loops[0].pts)) - expect) < 1e-12);
  // The block's center cell lies inside the traced region.
  PolygonRegion region;
  region.rings.push_back(loops[0].pts);
  CHECK(point_in_region_even_odd(m.cell_center(5, 4), region));
  CHECK_FALSE(point_in_region_even_odd(m.cell_center(1, 1), region));
}

TEST_CASE("contours of a donut yield an outer loop and a hole") {
  GridMask m = GridMask::make({0.0, 0.0}, 1.0, 12, 12, false);
  for (int iy = 2; iy <= 8; ++iy) {
    for (int ix = 2; ix <= 8; ++ix) m.set(ix, iy, true);
  }
  for (int iy = 4; iy <= 6; ++iy) {
    for (int ix = 4; ix <= 6; ++ix) m.set(ix, iy, false);
  }
  const auto loops = extract_contours(m);
  REQUIRE(loops.size() == 2);
  const double a0 = std::abs(ring_signed_area(loops[0].pts));
  const double a1 = std::abs(ring_signed_area(loops[1].pts));
  CHECK(std::max(a0, a1) > 40.0);
  CHECK(std::min(a0, a1) < 10.0);
}
