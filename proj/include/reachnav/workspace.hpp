// reachnav - safe navigation among non-convex obstacles
//
// Copyright (c) 2026 reachnav contributors
// SPDX-License-Identifier: MIT

#pragma once

/// \file workspace.hpp
/// \brief Workspace models, rasterization, morphological obstacle reshaping
///        into chain components, assumption certificates, and the
///        parameter-selection formulas of the navigation scheme.
///
/// The target is always the origin: scenario ingestion translates worlds so
/// that the goal sits at (0,0).

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "reachnav/geometry.hpp"
#include "reachnav/grid.hpp"

namespace reachnav {

// ---------------------------------------------------------------------------
// WorkspaceModel
// ---------------------------------------------------------------------------

/// World description: a workspace polygon W (empty region = unbounded plane),
/// internal obstacles O_1..O_b, and the robot body/safety radii.  The
/// complement of W's interior acts as one more obstacle surrounding
/// everything.
struct WorkspaceModel {
  PolygonRegion workspace;                // empty -> unbounded world
  std::vector<PolygonRegion> obstacles;   // pairwise disjoint, inside W
  double robot_radius = 0.0;              // r
  double safety_margin = 0.0;             // r_s

  double r_a() const { return robot_radius + safety_margin; }
  bool bounded() const { return !workspace.empty(); }
};

/// Exact distance between two polygonal regions (0 when they touch or
/// overlap).  Considers every boundary ring of both regions plus mutual
/// containment of vertices.
inline double region_region_distance(const PolygonRegion& a,
                                     const PolygonRegion& b) {
  if (a.empty() || b.empty()) {
    throw std::domain_error("region_region_distance: empty region");
  }
  if (point_in_region_even_odd(a.rings[0][0], b) ||
      point_in_region_even_odd(b.rings[0][0], a)) {
    return 0.0;
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ra : a.rings) {
    const std::size_t na = ra.size();
    for (std::size_t i = 0; i < na; ++i) {
      const Segment sa{ra[i], ra[(i + 1) % na]};
      for (const auto& rb : b.rings) {
        const std::size_t nb = rb.size();
        for (std::size_t j = 0; j < nb; ++j) {
          const Segment sb{rb[j], rb[(j + 1) % nb]};
          best = std::min(best, segment_segment_distance(sa, sb));
          if (best == 0.0) return 0.0;
        }
      }
    }
  }
  return best;
}

/// Validates the structural invariants of a model: positive body radius,
/// non-negative margin, pairwise disjoint obstacles, obstacles inside the
/// workspace when one is given.  Throws std::invalid_argument on violation.
inline void validate_model(const WorkspaceModel& model) {
  if (!(model.robot_radius > 0.0)) {
    throw std::invalid_argument("workspace model: robot radius must be > 0");
  }
  if (model.safety_margin < 0.0) {
    throw std::invalid_argument("workspace model: safety margin must be >= 0");
  }
  const int b = static_cast<int>(model.obstacles.size());
  for (int i = 0; i < b; ++i) {
    if (model.obstacles[i].empty()) {
      throw std::invalid_argument("workspace model: empty obstacle region");
    }
    for (int j = i + 1; j < b; ++j) {
      if (region_region_distance(model.obstacles[i], model.obstacles[j]) <=
          0.0) {
        throw std::invalid_argument(
            "workspace model: obstacles must be pairwise disjoint");
      }
    }
    if (model.bounded()) {
      for (const auto& ring : model.obstacles[i].rings) {
        for (const auto& v : ring) {
          // Vertices exactly on the wall are admitted; the tolerance absorbs
          // the rounding of the closest-point computation at such vertices.
          const double tol = 1e-9 * (1.0 + std::abs(v.x) + std::abs(v.y));
          if (!point_in_region_even_odd(v, model.workspace) &&
              boundary_distance(v, model.workspace) > tol) {
            throw std::invalid_argument(
                "workspace model: obstacle outside the workspace");
          }
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Rasterization
// ---------------------------------------------------------------------------

namespace detail {

/// Scanline parity test: marks `inside` for each row cell center against one
/// region, toggling the accumulator bits (even-odd across calls).
inline void scanline_toggle(const GridMask& grid, const PolygonRegion& region,
                            std::vector<std::uint8_t>& parity) {
  std::vector<double> xs;
  for (int iy = 0; iy < grid.height; ++iy) {
    const double cy = grid.origin.y + grid.resolution * (iy + 0.5);
    xs.clear();
    for (const auto& ring : region.rings) {
      const std::size_t n = ring.size();
      for (std::size_t k = 0; k < n; ++k) {
        const Point2& p = ring[k];
        const Point2& q = ring[(k + 1) % n];
        const bool up = (p.y <= cy) && (q.y > cy);
        const bool down = (q.y <= cy) && (p.y > cy);
        if (up || down) {
          xs.push_back(p.x + (cy - p.y) * (q.x - p.x) / (q.y - p.y));
        }
      }
    }
    std::sort(xs.begin(), xs.end());
    // Walk crossing pairs; every [xs[2k], xs[2k+1]) span is inside.
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const double x0 = xs[k], x1 = xs[k + 1];
      // Cell centers cx = ox + res*(ix+0.5) with x0 <= cx < x1.
      int lo = static_cast<int>(
          std::ceil((x0 - grid.origin.x) / grid.resolution - 0.5));
      int hi = static_cast<int>(
          std::ceil((x1 - grid.origin.x) / grid.resolution - 0.5));
      lo = std::max(lo, 0);
      hi = std::min(hi, grid.width);
      for (int ix = lo; ix < hi; ++ix) {
        parity[grid.index(ix, iy)] ^= 1;
      }
    }
  }
}

/// Distance from a cell rectangle to a polygonal region (0 on overlap).
inline double cell_region_distance(const GridMask& grid, int ix, int iy,
                                   const PolygonRegion& region) {
  const double x0 = grid.origin.x + grid.resolution * ix;
  const double y0 = grid.origin.y + grid.resolution * iy;
  const double x1 = x0 + grid.resolution;
  const double y1 = y0 + grid.resolution;
  if (point_in_region_even_odd({0.5 * (x0 + x1), 0.5 * (y0 + y1)}, region)) {
    return 0.0;
  }
  const Point2 c00{x0, y0}, c10{x1, y0}, c11{x1, y1}, c01{x0, y1};
  const Segment rect[4] = {{c00, c10}, {c10, c11}, {c11, c01}, {c01, c00}};
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ring : region.rings) {
    const std::size_t n = ring.size();
    for (std::size_t k = 0; k < n; ++k) {
      const Segment e{ring[k], ring[(k + 1) % n]};
      for (const auto& re : rect) {
        best = std::min(best, segment_segment_distance(e, re));
        if (best == 0.0) return 0.0;
      }
    }
  }
  return best;
}

/// Axis-aligned bounding box over every ring vertex of a region.
inline void region_bbox(const PolygonRegion& region, Point2& lo, Point2& hi) {
  for (const auto& ring : region.rings) {
    for (const auto& v : ring) {
      lo.x = std::min(lo.x, v.x);
      lo.y = std::min(lo.y, v.y);
      hi.x = std::max(hi.x, v.x);
      hi.y = std::max(hi.y, v.y);
    }
  }
}

/// Smallest bounding-box side length over the obstacles, used to flag
/// under-resolved rasterizations.
inline double min_obstacle_feature(const WorkspaceModel& model) {
  double feature = std::numeric_limits<double>::infinity();
  for (const auto& obs : model.obstacles) {
    Point2 lo{std::numeric_limits<double>::infinity(),
              std::numeric_limits<double>::infinity()};
    Point2 hi{-std::numeric_limits<double>::infinity(),
              -std::numeric_limits<double>::infinity()};
    region_bbox(obs, lo, hi);
    feature = std::min(feature, std::min(hi.x - lo.x, hi.y - lo.y));
  }
  return feature;
}

}  // namespace detail

/// Rasterizes the occupied set O_W (obstacles plus workspace complement) on a
/// grid of the given resolution.  The grid covers the workspace (bounded
/// worlds) or the obstacles plus `include_points` (unbounded worlds), padded
/// by `pad` meters on every side.  A cell is occupied iff its center lies in
/// O_W; with `conservative` set, iff its rectangle overlaps O_W.  The
/// resolution warning flag is set when the resolution exceeds the smallest
/// obstacle bounding-box side.
inline GridMask rasterize(const WorkspaceModel& model, double resolution,
                          double pad = 0.0, bool conservative = false,
                          const std::vector<Point2>& include_points = {}) {
  if (!(resolution > 0.0)) {
    throw std::domain_error("rasterize: resolution must be > 0");
  }
  Point2 lo{std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
  Point2 hi{-std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};
  if (model.bounded()) {
    detail::region_bbox(model.workspace, lo, hi);
  } else {
    for (const auto& obs : model.obstacles) detail::region_bbox(obs, lo, hi);
    lo.x = std::min(lo.x, 0.0);
    lo.y = std::min(lo.y, 0.0);
    hi.x = std::max(hi.x, 0.0);
    hi.y = std::max(hi.y, 0.0);
    for (const auto& p : include_points) {
      lo.x = std::min(lo.x, p.x);
      lo.y = std::min(lo.y, p.y);
      hi.x = std::max(hi.x, p.x);
      hi.y = std::max(hi.y, p.y);
    }
  }
  if (!(lo.x <= hi.x)) {
    throw std::domain_error("rasterize: empty model");
  }
  // Snap the origin to the resolution lattice for reproducible grids.
  const double ox = std::floor((lo.x - pad) / resolution) * resolution;
  const double oy = std::floor((lo.y - pad) / resolution) * resolution;
  const int w = static_cast<int>(std::ceil((hi.x + pad - ox) / resolution));
  const int h = static_cast<int>(std::ceil((hi.y + pad - oy) / resolution));
  GridMask grid = GridMask::make({ox, oy}, resolution, std::max(w, 1),
                                 std::max(h, 1), model.bounded());
  grid.resolution_warning =
      !model.obstacles.empty() &&
      resolution > detail::min_obstacle_feature(model);

  if (!conservative) {
    // Center membership via scanline parity, region by region.
    std::vector<std::uint8_t> parity(grid.bits.size(), 0);
    for (const auto& obs : model.obstacles) {
      std::fill(parity.begin(), parity.end(), 0);
      detail::scanline_toggle(grid, obs, parity);
      for (std::size_t i = 0; i < grid.bits.size(); ++i) {
        if (parity[i]) grid.bits[i] = 1;
      }
    }
    if (model.bounded()) {
      std::fill(parity.begin(), parity.end(), 0);
      detail::scanline_toggle(grid, model.workspace, parity);
      for (std::size_t i = 0; i < grid.bits.size(); ++i) {
        if (!parity[i]) grid.bits[i] = 1;  // outside W -> occupied
      }
    }
  } else {
    // Any-overlap: cell rectangle touches an obstacle, or is not strictly
    // inside the workspace.
    for (int iy = 0; iy < grid.height; ++iy) {
      for (int ix = 0; ix < grid.width; ++ix) {
        bool occ = false;
        for (const auto& obs : model.obstacles) {
          if (detail::cell_region_distance(grid, ix, iy, obs) <= 0.0) {
            occ = true;
            break;
          }
        }
        if (!occ && model.bounded()) {
          const Point2 c = grid.cell_center(ix, iy);
          if (!point_in_region_even_odd(c, model.workspace) ||
              boundary_distance(c, model.workspace) <
                  grid.resolution * 0.7071067811865476) {
            occ = true;
          }
        }
        if (occ) grid.bits[grid.index(ix, iy)] = 1;
      }
    }
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Alpha chains
// ---------------------------------------------------------------------------

/// Partition of obstacle indices (0 stands for the workspace complement)
/// into chains linked by pairwise distance < 2*alpha.
struct AlphaChainPartition {
  std::vector<std::vector<int>> groups;
};

namespace detail {

/// Distance from an obstacle to the workspace complement: the distance from
/// its rings to the workspace boundary rings.
inline double obstacle_to_workspace_complement(const WorkspaceModel& model,
                                               int i) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ra : model.obstacles[i].rings) {
    const std::size_t na = ra.size();
    for (std::size_t k = 0; k < na; ++k) {
      const Segment sa{ra[k], ra[(k + 1) % na]};
      for (const auto& rb : model.workspace.rings) {
        const std::size_t nb = rb.size();
        for (std::size_t j = 0; j < nb; ++j) {
          const Segment sb{rb[j], rb[(j + 1) % nb]};
          best = std::min(best, segment_segment_distance(sa, sb));
        }
      }
    }
  }
  return best;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace detail

/// Groups obstacle indices (including 0 for the workspace complement) by the
/// transitive closure of d(O_k, O_j) < 2*alpha, using exact polygon-pair
/// distances.  In unbounded worlds index 0 is kept as a singleton group.
inline AlphaChainPartition alpha_chains(const WorkspaceModel& model,
                                        double alpha) {
  if (!(alpha > 0.0)) throw std::domain_error("alpha_chains: alpha must be > 0");
  const int b = static_cast<int>(model.obstacles.size());
  detail::UnionFind uf(b + 1);  // node 0 = workspace complement
  for (int i = 0; i < b; ++i) {
    for (int j = i + 1; j < b; ++j) {
      if (region_region_distance(model.obstacles[i], model.obstacles[j]) <
          2.0 * alpha) {
        uf.unite(i + 1, j + 1);
      }
    }
    if (model.bounded() &&
        detail::obstacle_to_workspace_complement(model, i) < 2.0 * alpha) {
      uf.unite(i + 1, 0);
    }
  }
  AlphaChainPartition part;
  std::vector<int> root_to_group(b + 1, -1);
  for (int node = 0; node <= b; ++node) {
    const int r = uf.find(node);
    if (root_to_group[r] < 0) {
      root_to_group[r] = static_cast<int>(part.groups.size());
      part.groups.emplace_back();
    }
    part.groups[root_to_group[r]].push_back(node);
  }
  return part;
}

// ---------------------------------------------------------------------------
// Parameter formulas
// ---------------------------------------------------------------------------

/// Upper bound on the hysteresis parameter epsilon given the target
/// clearance d0 = d(0, O_W^M) and the augmented radius r_a:
/// sqrt(d0^2 - r_a^2) - (d0 - r_a), evaluated in the cancellation-free
/// rationalized form.  Monotone increasing in d0 with limit r_a.
inline double epsilon_upper_bound(double d0, double r_a) {
  if (!(r_a > 0.0)) {
    throw std::domain_error("epsilon_upper_bound: r_a must be > 0");
  }
  if (!(d0 > r_a)) {
    throw std::domain_error("epsilon_upper_bound: d0 must exceed r_a");
  }
  const double root = std::sqrt((d0 - r_a) * (d0 + r_a));
  return 2.0 * r_a * (d0 - r_a) / (root + (d0 - r_a));
}

/// Largest reshaping radius that provably keeps every guarantee when all
/// obstacles (and the workspace) are convex: half the smallest pairwise
/// distance, the workspace complement included.
inline double bar_alpha_convex(const WorkspaceModel& model) {
  const auto convex_ring = [](const std::vector<Point2>& ring) {
    const std::size_t n = ring.size();
    if (n < 3) return false;
    double sign = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 a = ring[i], b = ring[(i + 1) % n], c = ring[(i + 2) % n];
      const double cr = cross(b - a, c - b);
      if (std::abs(cr) < 1e-12) continue;
      if (sign == 0.0) {
        sign = cr;
      } else if (sign * cr < 0.0) {
        return false;
      }
    }
    return true;
  };
  for (const auto& obs : model.obstacles) {
    if (obs.rings.size() != 1 || !convex_ring(obs.rings[0])) {
      throw std::invalid_argument("bar_alpha_convex: non-convex obstacle");
    }
  }
  if (model.bounded() && (model.workspace.rings.size() != 1 ||
                          !convex_ring(model.workspace.rings[0]))) {
    throw std::invalid_argument("bar_alpha_convex: non-convex workspace");
  }
  const int b = static_cast<int>(model.obstacles.size());
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < b; ++i) {
    for (int j = i + 1; j < b; ++j) {
      best = std::min(best, region_region_distance(model.obstacles[i],
                                                   model.obstacles[j]));
    }
    if (model.bounded()) {
      best =
          std::min(best, detail::obstacle_to_workspace_complement(model, i));
    }
  }
  if (!std::isfinite(best)) {
    throw std::domain_error("bar_alpha_convex: no obstacle pairs");
  }
  return 0.5 * best;
}

// ---------------------------------------------------------------------------
// Modified environment
// ---------------------------------------------------------------------------

/// One alpha-chain of the reshaped obstacle set: the obstacle indices it
/// groups and the polygonal parts traced from the closed mask.  Under the
/// interior-reach assumption a chain has exactly one part; degenerate worlds
/// may split into several.
struct ChainComponent {
  std::vector<int> obstacle_indices;      // 0 = workspace complement
  std::vector<PolygonRegion> parts;
};

/// The reshaped world: raw and closed occupancy masks, polygonal chain
/// components, and the target clearance d0 = d(0, O_W^M).
struct ModifiedEnvironment {
  WorkspaceModel model;
  double alpha = 0.0;
  double resolution = 0.0;
  GridMask raw_mask;
  GridMask closed_mask;
  AlphaChainPartition partition;          // exact-distance chain groups
  std::vector<ChainComponent> chains;     // grid-level components per chain
  double d0 = std::numeric_limits<double>::infinity();

  /// Pointers to every part of every chain (stable while *this lives).
  std::vector<const PolygonRegion*> all_parts() const {
    std::vector<const PolygonRegion*> out;
    for (const auto& c : chains) {
      for (const auto& p : c.parts) out.push_back(&p);
    }
    return out;
  }
};

namespace detail {

/// Builds a polygon region from marching-squares loops of one labeled
/// component.  Border-touching components of a bounded mask receive a
/// synthetic outer rectangle one cell beyond the grid.
inline PolygonRegion component_region(const GridMask& mask,
                                      const std::vector<int>& labels, int id,
                                      bool touches_border) {
  const bool outside_in_set = mask.outside_occupied && touches_border;
  auto loops = marching_squares(
      mask,
      [&](int ix, int iy) { return labels[mask.index(ix, iy)] == id; },
      outside_in_set);
  PolygonRegion region;
  if (outside_in_set) {
    // Outer boundary lies beyond the grid: use an enclosing rectangle.
    const double m = mask.resolution;
    const Point2 lo{mask.origin.x - m, mask.origin.y - m};
    const Point2 hi{mask.origin.x + m * (mask.width + 1),
                    mask.origin.y + m * (mask.height + 1)};
    region.rings.push_back({{lo.x, lo.y}, {hi.x, lo.y}, {hi.x, hi.y},
                            {lo.x, hi.y}});
    for (auto& loop : loops) {
      // Interfaces with free space become holes (clockwise).
      if (ring_signed_area(loop.pts) > 0.0) {
        std::reverse(loop.pts.begin(), loop.pts.end());
      }
      region.rings.push_back(std::move(loop.pts));
    }
    return region;
  }
  // Interior component: the largest-area loop is the outer boundary.
  std::size_t outer = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < loops.size(); ++i) {
    const double a = std::abs(ring_signed_area(loops[i].pts));
    if (a > best) {
      best = a;
      outer = i;
    }
  }
  for (std::size_t i = 0; i < loops.size(); ++i) {
    auto pts = std::move(loops[i].pts);
    const double a = ring_signed_area(pts);
    const bool want_ccw = (i == outer);
    if ((a > 0.0) != want_ccw) std::reverse(pts.begin(), pts.end());
    if (i == outer) {
      region.rings.insert(region.rings.begin(), std::move(pts));
    } else {
      region.rings.push_back(std::move(pts));
    }
  }
  return region;
}

/// Low-discrepancy radical-inverse sequence (Halton).
inline double halton(std::uint32_t i, std::uint32_t base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}

}  // namespace detail

/// Rasterizes, closes, and polygonizes the world at the given reshaping
/// radius.  resolution <= 0 selects the default alpha/20.  `extra_points`
/// are world positions the grid must cover (starts of planned runs); the
/// origin is always covered.
inline ModifiedEnvironment build_modified_environment(
    const WorkspaceModel& model, double alpha, double resolution = 0.0,
    const std::vector<Point2>& extra_points = {}) {
  if (!(alpha > 0.0)) {
    throw std::domain_error("build_modified_environment: alpha must be > 0");
  }
  validate_model(model);
  ModifiedEnvironment env;
  env.model = model;
  env.alpha = alpha;
  env.resolution = (resolution > 0.0) ? resolution : alpha / 20.0;
  const double pad = 2.0 * alpha + model.r_a() + 6.0 * env.resolution;
  env.raw_mask = rasterize(model, env.resolution, pad, false, extra_points);
  env.closed_mask = closing(env.raw_mask, alpha);
  env.partition = alpha_chains(model, alpha);

  // Map closed-mask components to chains via per-obstacle seed cells.
  const auto [labels, n_components] =
      label_components(env.closed_mask, /*value=*/true, 4);
  const int b = static_cast<int>(model.obstacles.size());
  const int n_chains = static_cast<int>(env.partition.groups.size());
  std::vector<int> chain_of_index(b + 1, -1);
  for (int g = 0; g < n_chains; ++g) {
    for (int idx : env.partition.groups[g]) chain_of_index[idx] = g;
  }
  // Which components does each obstacle index touch?  Work from the raw mask:
  // every raw occupied cell belongs to the closed set as well.
  std::vector<std::vector<std::uint8_t>> chain_hits(
      n_chains, std::vector<std::uint8_t>(std::max(n_components, 1), 0));
  {
    // Obstacle cells, one scanline pass per obstacle.
    std::vector<std::uint8_t> parity(env.raw_mask.bits.size(), 0);
    for (int i = 0; i < b; ++i) {
      std::fill(parity.begin(), parity.end(), 0);
      detail::scanline_toggle(env.raw_mask, model.obstacles[i], parity);
      const int g = chain_of_index[i + 1];
      for (std::size_t c = 0; c < parity.size(); ++c) {
        if (parity[c] && labels[c] >= 0) chain_hits[g][labels[c]] = 1;
      }
    }
    if (model.bounded()) {
      // Workspace-complement cells: raw occupied cells claimed by no obstacle.
      std::fill(parity.begin(), parity.end(), 0);
      detail::scanline_toggle(env.raw_mask, model.workspace, parity);
      const int g = chain_of_index[0];
      for (std::size_t c = 0; c < parity.size(); ++c) {
        if (!parity[c] && labels[c] >= 0) chain_hits[g][labels[c]] = 1;
      }
    }
  }
  // Components can glue chains together at grid scale (distances right at
  // 2*alpha); merge such chains so each component belongs to one chain.
  detail::UnionFind merge(n_chains);
  for (int c = 0; c < n_components; ++c) {
    int first = -1;
    for (int g = 0; g < n_chains; ++g) {
      if (!chain_hits[g][c]) continue;
      if (first < 0) {
        first = g;
      } else {
        merge.unite(g, first);
      }
    }
  }
  std::vector<int> merged_id(n_chains, -1);
  int n_merged = 0;
  for (int g = 0; g < n_chains; ++g) {
    const int r = merge.find(g);
    if (merged_id[r] < 0) merged_id[r] = n_merged++;
  }
  env.chains.assign(n_merged, {});
  for (int g = 0; g < n_chains; ++g) {
    auto& chain = env.chains[merged_id[merge.find(g)]];
    for (int idx : env.partition.groups[g]) {
      chain.obstacle_indices.push_back(idx);
    }
  }
  for (auto& chain : env.chains) {
    std::sort(chain.obstacle_indices.begin(), chain.obstacle_indices.end());
  }
  // Trace each component and attach its polygon to its chain.
  std::vector<std::uint8_t> touches_border(std::max(n_components, 1), 0);
  for (int ix = 0; ix < env.closed_mask.width; ++ix) {
    for (int iy : {0, env.closed_mask.height - 1}) {
      const int l = labels[env.closed_mask.index(ix, iy)];
      if (l >= 0) touches_border[l] = 1;
    }
  }
  for (int iy = 0; iy < env.closed_mask.height; ++iy) {
    for (int ix : {0, env.closed_mask.width - 1}) {
      const int l = labels[env.closed_mask.index(ix, iy)];
      if (l >= 0) touches_border[l] = 1;
    }
  }
  for (int c = 0; c < n_components; ++c) {
    int owner = -1;
    for (int g = 0; g < n_chains && owner < 0; ++g) {
      if (chain_hits[g][c]) owner = merged_id[merge.find(g)];
    }
    if (owner < 0) continue;  // closing artifact with no raw seed: skip
    env.chains[owner].parts.push_back(detail::component_region(
        env.closed_mask, labels, c, touches_border[c] != 0));
  }
  // Target clearance.
  for (const auto& chain : env.chains) {
    for (const auto& part : chain.parts) {
      env.d0 = std::min(env.d0, distance_to_region({0.0, 0.0}, part));
    }
  }
  return env;
}

/// Nearest chain to a point with its projection result (joint clustering
/// across every part of every chain).
struct NearestChain {
  int chain = -1;
  ProjectionResult proj;
};

inline NearestChain nearest_chain(const ModifiedEnvironment& env, Point2 x,
                                  double tol_angle = 1e-3) {
  NearestChain out;
  std::vector<const PolygonRegion*> parts;
  std::vector<int> owner;
  for (std::size_t g = 0; g < env.chains.size(); ++g) {
    for (const auto& p : env.chains[g].parts) {
      parts.push_back(&p);
      owner.push_back(static_cast<int>(g));
    }
  }
  if (parts.empty()) return out;
  int nearest_part = -1;
  out.proj =
      detail::project_onto_regions(x, parts, -1.0, tol_angle, &nearest_part);
  out.chain = (nearest_part >= 0) ? owner[nearest_part] : -1;
  return out;
}

// ---------------------------------------------------------------------------
// Assumption certificates
// ---------------------------------------------------------------------------

/// True iff the rasterized eroded free space W_{r_a} (interior, 8-connected)
/// forms a single component that contains the origin cell.  Throws when the
/// origin lies outside the rasterized grid.
inline bool check_assumption_connectivity(const WorkspaceModel& model,
                                          double resolution) {
  validate_model(model);
  const double pad = model.r_a() + 5.0 * resolution;
  const GridMask grid = rasterize(model, resolution, pad);
  const GridMask free = free_space(grid, model.r_a());
  const auto [ix, iy] = free.cell_of({0.0, 0.0});
  if (!free.contains(ix, iy)) {
    throw std::domain_error(
        "check_assumption_connectivity: origin outside the rasterized grid");
  }
  const auto [labels, count] = label_components(free, /*value=*/true, 8);
  return count == 1 && labels[free.index(ix, iy)] >= 0;
}

/// Decides whether one shell sample has a unique projection cluster onto the
/// reshaped boundary.  Exact equidistance is measure-zero under sampling, so
/// the candidate window is widened to a 2-cell distance band.  A reshaped
/// connected component cannot carry an equidistance locus strictly inside the
/// tube of radius alpha around itself (the reshaping fills exactly the necks
/// an alpha-disk cannot pass), so near-ties within one component are always
/// discretization artifacts: contour corners, staircase edges, or the centers
/// of the reshaping's fill arcs.  A genuine violation therefore needs a pair
/// of candidates on two DIFFERENT components that the sample views at a
/// near-antipodal angle (a channel midline; same-side artifact pairs stay
/// below a right angle) whose implied equidistance point lies strictly inside
/// the open shell (mean viewing distance below alpha - 3 cells; pairs meeting
/// at distance alpha, e.g. across a gap of exactly twice the radius, are the
/// legal boundary case of the reach condition).
inline bool reach_sample_unique(const ModifiedEnvironment& env,
                                const std::vector<const PolygonRegion*>& parts,
                                Point2 x, double dist) {
  const double tol_dist = 2.0 * env.resolution;
  const double tol_angle =
      std::min(0.5, 3.0 * env.resolution / std::max(dist, env.resolution) +
                        1e-3);
  struct Rep {
    Point2 p;
    double d;
    int part;
    int group;
  };
  std::vector<Rep> reps;
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (parts[k] == nullptr || parts[k]->empty()) continue;
    const ProjectionResult prk = detail::project_onto_regions(
        x, {parts[k]}, tol_dist, tol_angle);
    if (prk.distance == 0.0) return true;  // on/inside a component
    dmin = std::min(dmin, prk.distance);
    for (const auto& p : prk.points) {
      reps.push_back({p, distance(x, p), static_cast<int>(k), -1});
    }
  }
  std::erase_if(reps, [&](const Rep& r) { return r.d > dmin + tol_dist; });
  if (reps.size() <= 1) return true;
  // Transitive single-link merge: candidate chains along one boundary
  // stretch (and components separated by sub-cell gaps) collapse together.
  const double merge_dist = 4.0 * env.resolution;
  int groups = 0;
  for (std::size_t a = 0; a < reps.size(); ++a) {
    if (reps[a].group >= 0) continue;
    reps[a].group = groups++;
    bool grew = true;
    while (grew) {
      grew = false;
      for (std::size_t b = 0; b < reps.size(); ++b) {
        if (reps[b].group >= 0) continue;
        for (std::size_t c = 0; c < reps.size(); ++c) {
          if (reps[c].group == reps[a].group &&
              distance(reps[b].p, reps[c].p) <= merge_dist) {
            reps[b].group = reps[a].group;
            grew = true;
            break;
          }
        }
      }
    }
  }
  if (groups <= 1) return true;
  constexpr double kGenuineViewAngle = 2.0;  // radians, past any corner pair
  for (std::size_t a = 0; a < reps.size(); ++a) {
    for (std::size_t b = a + 1; b < reps.size(); ++b) {
      if (reps[a].group == reps[b].group) continue;
      if (reps[a].part == reps[b].part) continue;
      const double view = std::abs(
          signed_angle(reps[a].p - x, reps[b].p - x));
      if (view < kGenuineViewAngle) continue;
      const double mean_view = 0.5 * (reps[a].d + reps[b].d);
      if (mean_view < env.alpha - 3.0 * env.resolution) return false;
    }
  }
  return true;
}

/// Sampling certificate for the interior-reach assumption: quasi-random
/// points in the alpha-shell around the reshaped obstacles must all have a
/// unique projection cluster onto the reshaped boundary (see
/// reach_sample_unique for the multiplicity rule).  A chain whose reshaped
/// set splits into several parts fails outright.  Throws when W_alpha is
/// empty.
inline bool check_assumption_reach(const WorkspaceModel& model, double alpha,
                                   int samples = 10000) {
  if (!(alpha > 0.0)) {
    throw std::domain_error("check_assumption_reach: alpha must be > 0");
  }
  const ModifiedEnvironment env = build_modified_environment(model, alpha);
  const GridMask w_alpha = free_space(env.closed_mask, alpha);
  if (std::count(w_alpha.bits.begin(), w_alpha.bits.end(), 1) == 0) {
    throw std::domain_error("check_assumption_reach: W_alpha is empty");
  }
  // A chain split into several parts already violates the assumption (the
  // reshaped chain would otherwise be connected).
  for (const auto& chain : env.chains) {
    if (chain.parts.size() > 1) return false;
  }
  const auto parts = env.all_parts();
  if (parts.empty()) return true;
  // Sample the shell 0 < d(x, O^M) < alpha within the mask bbox.
  const Point2 lo = env.closed_mask.origin;
  const Point2 hi{env.closed_mask.origin.x +
                      env.closed_mask.resolution * env.closed_mask.width,
                  env.closed_mask.origin.y +
                      env.closed_mask.resolution * env.closed_mask.height};
  int accepted = 0;
  std::uint32_t i = 1;
  const std::uint32_t max_attempts = 400u * static_cast<std::uint32_t>(samples);
  for (; accepted < samples && i <= max_attempts; ++i) {
    const Point2 x{lo.x + detail::halton(i, 2) * (hi.x - lo.x),
                   lo.y + detail::halton(i, 3) * (hi.y - lo.y)};
    ProjectionResult probe = detail::project_onto_regions(
        x, parts, /*tol_dist=*/-1.0, /*tol_angle=*/0.5);
    if (!(probe.distance > 0.0) || probe.distance >= alpha) continue;
    ++accepted;
    if (!reach_sample_unique(env, parts, x, probe.distance)) return false;
  }
  return true;
}

/// Scans a descending candidate list and returns the largest reshaping
/// radius that keeps W_alpha connected, leaves the target strictly inside it
/// with clearance below alpha - r_a, and passes the reach certificate.
inline double select_alpha(const WorkspaceModel& model,
                           const std::vector<double>& candidates) {
  if (candidates.empty()) {
    throw std::domain_error("select_alpha: no candidates");
  }
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!(candidates[i] > model.r_a())) {
      throw std::domain_error("select_alpha: candidates must exceed r_a");
    }
    if (i > 0 && candidates[i] > candidates[i - 1]) {
      throw std::domain_error("select_alpha: candidates must be descending");
    }
  }
  for (const double alpha : candidates) {
    const ModifiedEnvironment env = build_modified_environment(model, alpha);
    const GridMask w_alpha = free_space(env.closed_mask, alpha);
    const auto [labels, count] = label_components(w_alpha, /*value=*/true, 8);
    if (count != 1) continue;  // empty or disconnected

    // Target condition: d(0, W_alpha) < alpha - r_a, with the origin
    // strictly inside (a boundary-band origin is rejected).
    const auto [ox, oy] = w_alpha.cell_of({0.0, 0.0});
    if (!w_alpha.contains(ox, oy)) continue;
    double dist_to_walpha;
    if (w_alpha.at(ox, oy)) {
      bool boundary_band = false;
      for (int dy = -1; dy <= 1 && !boundary_band; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = ox + dx, ny = oy + dy;
          const bool in_set =
              w_alpha.contains(nx, ny) ? w_alpha.at(nx, ny)
                                       : w_alpha.outside_occupied;
          if (!in_set) {
            boundary_band = true;
            break;
          }
        }
      }
      if (boundary_band) continue;
      dist_to_walpha = 0.0;
    } else {
      const auto d2 = squared_edt(w_alpha, /*to_occupied=*/true);
      dist_to_walpha =
          std::sqrt(d2[w_alpha.index(ox, oy)]) * w_alpha.resolution;
      // An origin this close to the W_alpha boundary is "on" it at grid
      // precision; reject it like the interior boundary band above.
      if (dist_to_walpha <= 1.5 * w_alpha.resolution) continue;
    }
    if (!(dist_to_walpha < alpha - model.r_a())) continue;

    if (!check_assumption_reach(model, alpha)) continue;
    return alpha;
  }
  throw std::runtime_error("select_alpha: no feasible alpha");
}

// ---------------------------------------------------------------------------
// Ring rolling
// ---------------------------------------------------------------------------

/// Traces the reshaped boundary of one connected obstacle group by rolling a
/// virtual ring of radius alpha around it: single-contact centers emit the
/// contact point, multi-contact centers emit the bridging arc.  Sets
/// *degenerate_warning when alpha is below one cell.
inline Polyline roll_ring_boundary(const GridMask& group_mask, double alpha,
                                   bool* degenerate_warning = nullptr) {
  if (!(alpha > 0.0)) {
    throw std::domain_error("roll_ring_boundary: alpha must be > 0");
  }
  if (degenerate_warning) {
    *degenerate_warning = alpha < group_mask.resolution;
  }
  {
    const auto [labels, count] =
        label_components(group_mask, /*value=*/true, 4);
    (void)labels;
    if (count != 1) {
      throw std::invalid_argument(
          "roll_ring_boundary: mask must hold one connected component");
    }
  }
  // Raw obstacle polygons.
  const auto raw_loops = extract_contours(group_mask);
  if (raw_loops.empty()) {
    throw std::invalid_argument("roll_ring_boundary: empty mask");
  }
  PolygonRegion raw;
  for (const auto& loop : raw_loops) raw.rings.push_back(loop.pts);
  // Ring-center curve: boundary of the alpha-dilation, outer loop.
  const GridMask dilated = dilate_disk(group_mask, alpha);
  auto center_loops = extract_contours(dilated);
  if (center_loops.empty()) {
    throw std::invalid_argument(
        "roll_ring_boundary: dilation fills the grid; enlarge the mask pad");
  }
  std::size_t outer = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < center_loops.size(); ++i) {
    const double a = std::abs(ring_signed_area(center_loops[i].pts));
    if (a > best) {
      best = a;
      outer = i;
    }
  }
  std::vector<Point2> centers = center_loops[outer].pts;
  if (ring_signed_area(centers) < 0.0) {
    std::reverse(centers.begin(), centers.end());
  }
  // Resample the center curve so no step exceeds half a cell.
  {
    std::vector<Point2> fine;
    const double step = 0.5 * group_mask.resolution;
    const std::size_t n = centers.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 a = centers[i];
      const Point2 b = centers[(i + 1) % n];
      const double len = distance(a, b);
      const int pieces = std::max(1, static_cast<int>(std::ceil(len / step)));
      for (int k = 0; k < pieces; ++k) {
        const double t = static_cast<double>(k) / pieces;
        fine.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
      }
    }
    centers = std::move(fine);
  }
  Polyline trace;
  trace.closed = true;
  const double tol_dist = group_mask.resolution;
  const double merge_dist = 2.0 * group_mask.resolution;
  const double arc_step =
      std::max(group_mask.resolution / alpha, 1e-3);
  for (const Point2& c : centers) {
    ProjectionResult pr = projection_set(c, raw, tol_dist);
    if (pr.points.empty()) continue;
    // Collapse discretization-near duplicates.
    std::vector<Point2> reps;
    for (const auto& p : pr.points) {
      bool merged = false;
      for (const auto& q : reps) {
        if (distance(p, q) < merge_dist) {
          merged = true;
          break;
        }
      }
      if (!merged) reps.push_back(p);
    }
    if (reps.size() == 1) {
      trace.pts.push_back(reps[0]);
      continue;
    }
    // Multi-contact: emit the arc of the ring between the extreme contact
    // directions (the hull cone of the projections).
    std::vector<double> angles;
    for (const auto& p : reps) {
      angles.push_back(std::atan2(p.y - c.y, p.x - c.x));
    }
    std::sort(angles.begin(), angles.end());
    // Find the largest angular gap; the arc spans the complement.
    const std::size_t m = angles.size();
    double max_gap = 2.0 * kPi - (angles.back() - angles.front());
    std::size_t gap_after = m - 1;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      const double g = angles[i + 1] - angles[i];
      if (g > max_gap) {
        max_gap = g;
        gap_after = i;
      }
    }
    const double a_begin = angles[(gap_after + 1) % m];
    double span = 2.0 * kPi - max_gap;
    const double r_c = pr.distance;
    for (double a = 0.0; a <= span + 1e-12; a += arc_step) {
      const double ang = a_begin + std::min(a, span);
      trace.pts.push_back(
          {c.x + r_c * std::cos(ang), c.y + r_c * std::sin(ang)});
    }
  }
  // Drop consecutive duplicates.
  std::vector<Point2> cleaned;
  for (const auto& p : trace.pts) {
    if (cleaned.empty() ||
        distance(cleaned.back(), p) > 1e-9 * (1.0 + norm(p))) {
      cleaned.push_back(p);
    }
  }
  if (cleaned.size() > 1 &&
      distance(cleaned.front(), cleaned.back()) <=
          1e-9 * (1.0 + norm(cleaned.front()))) {
    cleaned.pop_back();
  }
  trace.pts = std::move(cleaned);
  return trace;
}

}  // namespace reachnav
