// reachnav - safe navigation among non-convex obstacles
//
// Copyright (c) 2026 reachnav contributors
// SPDX-License-Identifier: MIT

#pragma once

/// \file geometry.hpp
/// \brief Exact 2D geometric primitives over points, segments, and polygonal
///        regions: distances, projection sets, angles, cone membership, and
///        ray casting.  All functions are pure and thread-safe.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace reachnav {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// ---------------------------------------------------------------------------
// Point2 / Vector2
// ---------------------------------------------------------------------------

/// A point (or free vector) in the plane, in meters.
struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

using Vector2 = Point2;

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
inline Point2 operator*(Point2 p, double s) { return {s * p.x, s * p.y}; }
inline Point2 operator/(Point2 p, double s) { return {p.x / s, p.y / s}; }
inline bool operator==(Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; }

inline double dot(Vector2 a, Vector2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vector2 a, Vector2 b) { return a.x * b.y - a.y * b.x; }
inline double norm_sq(Vector2 a) { return dot(a, a); }
inline double norm(Vector2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(b - a); }

inline bool is_finite(Point2 p) {
  return std::isfinite(p.x) && std::isfinite(p.y);
}

/// Throws std::domain_error if the point carries NaN/Inf coordinates.
inline void require_finite(Point2 p, const char* what) {
  if (!is_finite(p)) {
    throw std::domain_error(std::string(what) +
                            ": non-finite coordinates not admitted");
  }
}

/// Unit vector along a; throws on (near-)zero input.
inline Vector2 normalized(Vector2 a) {
  const double n = norm(a);
  if (n <= 0.0 || !std::isfinite(n)) {
    throw std::domain_error("normalized: zero or non-finite vector");
  }
  return a / n;
}

// ---------------------------------------------------------------------------
// Segment
// ---------------------------------------------------------------------------

/// A closed line segment; a == b degenerates to a point.
struct Segment {
  Point2 a;
  Point2 b;
};

/// Closest point on segment [a,b] to p, with the segment parameter in [0,1].
inline Point2 closest_point_on_segment(Point2 p, Point2 a, Point2 b,
                                       double* t_out = nullptr) {
  const Vector2 ab = b - a;
  const double len2 = norm_sq(ab);
  double t = 0.0;
  if (len2 > 0.0) {
    t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  }
  if (t_out != nullptr) *t_out = t;
  return a + t * ab;
}

inline double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  return distance(p, closest_point_on_segment(p, a, b));
}

/// Minimum distance between two closed segments.
inline double segment_segment_distance(const Segment& s, const Segment& u) {
  // Proper intersection => 0.
  const Vector2 d1 = s.b - s.a;
  const Vector2 d2 = u.b - u.a;
  const Vector2 r = u.a - s.a;
  const double denom = cross(d1, d2);
  if (denom != 0.0) {
    const double t = cross(r, d2) / denom;
    const double v = cross(r, d1) / denom;
    if (t >= 0.0 && t <= 1.0 && v >= 0.0 && v <= 1.0) return 0.0;
  }
  double best = point_segment_distance(s.a, u.a, u.b);
  best = std::min(best, point_segment_distance(s.b, u.a, u.b));
  best = std::min(best, point_segment_distance(u.a, s.a, s.b));
  best = std::min(best, point_segment_distance(u.b, s.a, s.b));
  return best;
}

// ---------------------------------------------------------------------------
// PolygonRegion
// ---------------------------------------------------------------------------

/// A polygonal region: first ring is the outer boundary (counter-clockwise),
/// remaining rings are holes (clockwise).  Rings are simple closed polylines
/// stored without a repeated closing vertex.
struct PolygonRegion {
  std::vector<std::vector<Point2>> rings;

  bool empty() const { return rings.empty() || rings.front().empty(); }
};

/// Signed area of a ring (positive if counter-clockwise).
inline double ring_signed_area(const std::vector<Point2>& ring) {
  double s = 0.0;
  for (std::size_t i = 0, n = ring.size(); i < n; ++i) {
    const Point2& a = ring[i];
    const Point2& b = ring[(i + 1) % n];
    s += cross(a, b);
  }
  return 0.5 * s;
}

/// Even-odd parity over all rings.  Boundary points are ambiguous here;
/// callers that care combine this with the boundary distance.
inline bool point_in_region_even_odd(Point2 p, const PolygonRegion& region) {
  bool inside = false;
  for (const auto& ring : region.rings) {
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2& a = ring[i];
      const Point2& b = ring[(i + 1) % n];
      if ((a.y > p.y) != (b.y > p.y)) {
        const double xint = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
        if (p.x < xint) inside = !inside;
      }
    }
  }
  return inside;
}

/// Minimum distance from p to the union of all ring polylines.
inline double boundary_distance(Point2 p, const PolygonRegion& region) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ring : region.rings) {
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
      best = std::min(best,
                      point_segment_distance(p, ring[i], ring[(i + 1) % n]));
    }
  }
  return best;
}

/// Distance from x to the closed region (0 inside or on the boundary).
inline double distance_to_region(Point2 x, const PolygonRegion& region) {
  require_finite(x, "distance_to_region");
  if (region.empty()) {
    throw std::domain_error("distance_to_region: empty region");
  }
  if (point_in_region_even_odd(x, region)) return 0.0;
  return boundary_distance(x, region);
}

// ---------------------------------------------------------------------------
// Projection sets
// ---------------------------------------------------------------------------

/// Result of projecting a point onto one or more regions: the minimum
/// distance, one representative boundary point per direction cluster, and
/// whether the projection is unique (exactly one cluster).
struct ProjectionResult {
  double distance = 0.0;
  std::vector<Point2> points;
  bool unique = true;
};

namespace detail {

struct ProjCandidate {
  Point2 p;
  double dist;
  double angle;  // direction of (p - x)
  int region_id;
};

/// Clusters candidates (already within distance tolerance of the minimum) by
/// the direction they are seen from x; returns one representative (closest
/// member) per cluster, ordered by angle.
inline std::vector<ProjCandidate> cluster_by_direction(
    std::vector<ProjCandidate> cands, double tol_angle) {
  std::sort(cands.begin(), cands.end(),
            [](const ProjCandidate& a, const ProjCandidate& b) {
              return a.angle < b.angle;
            });
  // Drop near-duplicate points (shared polygon vertices reached from two
  // incident edges).
  std::vector<ProjCandidate> uniq;
  for (const auto& c : cands) {
    if (!uniq.empty() && distance(uniq.back().p, c.p) < 1e-12 * (1.0 + c.dist)) {
      if (c.dist < uniq.back().dist) uniq.back() = c;
      continue;
    }
    uniq.push_back(c);
  }
  std::vector<std::vector<ProjCandidate>> clusters;
  for (const auto& c : uniq) {
    if (!clusters.empty() && c.angle - clusters.back().back().angle <= tol_angle) {
      clusters.back().push_back(c);
    } else {
      clusters.push_back({c});
    }
  }
  // Wrap-around merge across the -pi/+pi seam.
  if (clusters.size() > 1) {
    const double gap =
        (clusters.front().front().angle + 2.0 * kPi) - clusters.back().back().angle;
    if (gap <= tol_angle) {
      auto tail = std::move(clusters.back());
      clusters.pop_back();
      clusters.front().insert(clusters.front().begin(), tail.begin(), tail.end());
    }
  }
  std::vector<ProjCandidate> reps;
  reps.reserve(clusters.size());
  for (const auto& cl : clusters) {
    const auto it =
        std::min_element(cl.begin(), cl.end(),
                         [](const ProjCandidate& a, const ProjCandidate& b) {
                           return a.dist < b.dist;
                         });
    reps.push_back(*it);
  }
  return reps;
}

/// Gathers per-edge closest points over several regions and clusters them.
/// tol_dist < 0 selects the default relative tolerance 1e-9 * (1 + d).
inline ProjectionResult project_onto_regions(
    Point2 x, const std::vector<const PolygonRegion*>& regions, double tol_dist,
    double tol_angle, int* nearest_region = nullptr) {
  require_finite(x, "projection_set");
  bool any = false;
  for (const auto* r : regions) {
    if (r != nullptr && !r->empty()) any = true;
  }
  if (!any) throw std::domain_error("projection_set: empty region");

  for (std::size_t k = 0; k < regions.size(); ++k) {
    const auto* r = regions[k];
    if (r == nullptr || r->empty()) continue;
    if (point_in_region_even_odd(x, *r) && boundary_distance(x, *r) > 0.0) {
      if (nearest_region != nullptr) *nearest_region = static_cast<int>(k);
      return ProjectionResult{0.0, {x}, true};
    }
  }

  std::vector<ProjCandidate> cands;
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < regions.size(); ++k) {
    const auto* r = regions[k];
    if (r == nullptr || r->empty()) continue;
    for (const auto& ring : r->rings) {
      const std::size_t n = ring.size();
      for (std::size_t i = 0; i < n; ++i) {
        const Point2 cp = closest_point_on_segment(x, ring[i], ring[(i + 1) % n]);
        const double d = distance(x, cp);
        dmin = std::min(dmin, d);
        cands.push_back({cp, d, 0.0, static_cast<int>(k)});
      }
    }
  }
  if (tol_dist < 0.0) tol_dist = 1e-9 * (1.0 + dmin);

  std::vector<ProjCandidate> near;
  for (const auto& c : cands) {
    if (c.dist <= dmin + tol_dist) near.push_back(c);
  }
  if (dmin == 0.0) {
    // x lies exactly on the boundary: the projection is x itself.
    if (nearest_region != nullptr) *nearest_region = near.front().region_id;
    return ProjectionResult{0.0, {x}, true};
  }
  for (auto& c : near) {
    c.angle = std::atan2(c.p.y - x.y, c.p.x - x.x);
  }
  const auto reps = cluster_by_direction(std::move(near), tol_angle);
  ProjectionResult out;
  out.distance = dmin;
  out.unique = (reps.size() == 1);
  int best_region = reps.front().region_id;
  double best_dist = reps.front().dist;
  for (const auto& r : reps) {
    out.points.push_back(r.p);
    if (r.dist < best_dist) {
      best_dist = r.dist;
      best_region = r.region_id;
    }
  }
  if (nearest_region != nullptr) *nearest_region = best_region;
  return out;
}

}  // namespace detail

/// Projection set of x onto a region: all boundary points within tol_dist of
/// the minimum distance, clustered by direction (clusters further apart than
/// tol_angle count as distinct projections).  Inside the region the result
/// is {x} at distance 0.
inline ProjectionResult projection_set(Point2 x, const PolygonRegion& region,
                                       double tol_dist = -1.0,
                                       double tol_angle = 1e-3) {
  return detail::project_onto_regions(x, {&region}, tol_dist, tol_angle);
}

// ---------------------------------------------------------------------------
// Angles and cones
// ---------------------------------------------------------------------------

/// Counter-clockwise-positive angle from p to q in (-pi, pi]; anti-parallel
/// vectors return +pi (closed upper endpoint by contract).
inline double signed_angle(Vector2 p, Vector2 q) {
  require_finite(p, "signed_angle");
  require_finite(q, "signed_angle");
  if ((p.x == 0.0 && p.y == 0.0) || (q.x == 0.0 && q.y == 0.0)) {
    throw std::domain_error("signed_angle: zero vector");
  }
  const double c = cross(p, q);
  const double d = dot(p, q);
  if (c == 0.0 && d < 0.0) return kPi;
  const double a = std::atan2(c, d);
  return (a == -kPi) ? kPi : a;
}

/// True iff query - vertex lies in the smallest convex cone with apex
/// `vertex` containing the rays toward all generators (2D angular-interval
/// test; a spread above pi makes the cone the whole plane).
inline bool conic_hull_contains(Point2 vertex,
                                const std::vector<Point2>& generators,
                                Point2 query, double tol_angle = 1e-9) {
  require_finite(vertex, "conic_hull_contains");
  require_finite(query, "conic_hull_contains");
  if (generators.empty()) {
    throw std::domain_error("conic_hull_contains: no generators");
  }
  std::vector<double> angs;
  angs.reserve(generators.size());
  for (const auto& g : generators) {
    const Vector2 d = g - vertex;
    if (d.x == 0.0 && d.y == 0.0) {
      throw std::domain_error("conic_hull_contains: generator equals vertex");
    }
    angs.push_back(std::atan2(d.y, d.x));
  }
  const Vector2 q = query - vertex;
  if (q.x == 0.0 && q.y == 0.0) return true;  // apex belongs to every cone
  const double qa = std::atan2(q.y, q.x);

  std::sort(angs.begin(), angs.end());
  // Largest cyclic gap between consecutive generator directions.
  double max_gap = (angs.front() + 2.0 * kPi) - angs.back();
  std::size_t start = 0;  // direction right after the largest gap
  for (std::size_t i = 1; i < angs.size(); ++i) {
    const double gap = angs[i] - angs[i - 1];
    if (gap > max_gap) {
      max_gap = gap;
      start = i;
    }
  }
  const double spread = 2.0 * kPi - max_gap;
  if (spread > kPi + tol_angle) return true;  // cone degenerates to the plane
  const double lo = angs[start];
  double rel = qa - lo;
  while (rel < 0.0) rel += 2.0 * kPi;
  while (rel >= 2.0 * kPi) rel -= 2.0 * kPi;
  return rel <= spread + tol_angle || rel >= 2.0 * kPi - tol_angle;
}

// ---------------------------------------------------------------------------
// Segment-interior intersection
// ---------------------------------------------------------------------------

namespace detail {

/// Collects the parameters t in [0,1] where `seg` meets any ring edge
/// (crossings, touches, and collinear-overlap endpoints).
inline std::vector<double> segment_boundary_events(const Segment& seg,
                                                   const PolygonRegion& region) {
  std::vector<double> ts{0.0, 1.0};
  const Vector2 d1 = seg.b - seg.a;
  for (const auto& ring : region.rings) {
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2& a = ring[i];
      const Point2& b = ring[(i + 1) % n];
      const Vector2 d2 = b - a;
      const Vector2 r = a - seg.a;
      const double denom = cross(d1, d2);
      if (denom != 0.0) {
        const double t = cross(r, d2) / denom;
        const double s = cross(r, d1) / denom;
        if (t >= 0.0 && t <= 1.0 && s >= -1e-12 && s <= 1.0 + 1e-12) {
          ts.push_back(t);
        }
      } else if (cross(d1, r) == 0.0 && norm_sq(d1) > 0.0) {
        // Collinear: project the edge endpoints onto the segment.
        const double inv = 1.0 / norm_sq(d1);
        for (const Point2& e : {a, b}) {
          const double t = dot(e - seg.a, d1) * inv;
          if (t >= 0.0 && t <= 1.0) ts.push_back(t);
        }
      }
    }
  }
  std::sort(ts.begin(), ts.end());
  return ts;
}

}  // namespace detail

/// True iff the segment meets the OPEN interior of the region (grazing the
/// boundary does not count).
inline bool segment_intersects_interior(const Segment& seg,
                                        const PolygonRegion& region) {
  require_finite(seg.a, "segment_intersects_interior");
  require_finite(seg.b, "segment_intersects_interior");
  if (region.empty()) return false;
  const auto ts = detail::segment_boundary_events(seg, region);
  const double scale = 1.0 + std::max(norm(seg.a), norm(seg.b));
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    if (ts[i + 1] - ts[i] < 1e-15) continue;
    const double tm = 0.5 * (ts[i] + ts[i + 1]);
    const Point2 p = seg.a + tm * (seg.b - seg.a);
    if (point_in_region_even_odd(p, region) &&
        boundary_distance(p, region) > 1e-12 * scale) {
      return true;
    }
  }
  return false;
}

/// Minimum distance between a segment and a region (0 when they touch or the
/// segment enters the region).
inline double segment_region_distance(const Segment& seg,
                                      const PolygonRegion& region) {
  require_finite(seg.a, "segment_region_distance");
  require_finite(seg.b, "segment_region_distance");
  if (region.empty()) {
    throw std::domain_error("segment_region_distance: empty region");
  }
  if (point_in_region_even_odd(seg.a, region) ||
      point_in_region_even_odd(seg.b, region)) {
    return 0.0;
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ring : region.rings) {
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
      best = std::min(
          best, segment_segment_distance(seg, {ring[i], ring[(i + 1) % n]}));
      if (best == 0.0) return 0.0;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Ray casting
// ---------------------------------------------------------------------------

/// Distance along direction theta from x to the first boundary crossing of
/// the region, clamped at max_range.  Starting inside (or on) the region
/// returns 0.
inline double ray_cast(Point2 x, double theta, const PolygonRegion& region,
                       double max_range) {
  require_finite(x, "ray_cast");
  if (!(max_range > 0.0)) {
    throw std::domain_error("ray_cast: max_range must be positive");
  }
  if (region.empty()) return max_range;
  if (distance_to_region(x, region) == 0.0) return 0.0;
  const Vector2 dir{std::cos(theta), std::sin(theta)};
  double best = max_range;
  for (const auto& ring : region.rings) {
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2& a = ring[i];
      const Point2& b = ring[(i + 1) % n];
      const Vector2 e = b - a;
      const Vector2 r = a - x;
      const double denom = cross(dir, e);
      if (denom != 0.0) {
        const double t = cross(r, e) / denom;
        const double s = cross(r, dir) / denom;
        if (t >= 0.0 && s >= -1e-12 && s <= 1.0 + 1e-12) {
          best = std::min(best, t);
        }
      } else if (cross(dir, r) == 0.0) {
        // Collinear edge: nearest forward endpoint.
        for (const Point2& p : {a, b}) {
          const double t = dot(p - x, dir);
          if (t >= 0.0) best = std::min(best, t);
        }
      }
    }
  }
  return std::min(best, max_range);
}

}  // namespace reachnav
