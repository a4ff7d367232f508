// reachnav - safe navigation among non-convex obstacles
//
// Copyright (c) 2026 reachnav contributors
// SPDX-License-Identifier: MIT
//
// Simulated range-bearing sensing and the sensor-only reconstruction of the
// quantities the controller consumes: nearest-boundary projections, the
// collision corridor ahead of the robot, and the virtual ring that restores
// projection uniqueness next to non-convex boundary sections.  Everything in
// this header works from a finite set of rays; the true workspace geometry is
// touched only inside scan().

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <vector>

#include "reachnav/controller.hpp"

namespace reachnav {

// ---------------------------------------------------------------------------
// Sensor configuration and scans
// ---------------------------------------------------------------------------

/// Range-bearing sensor: `range` is the maximum sensed distance, `ray_count`
/// the number of equally spaced bearings per revolution, `noise_sigma` the
/// standard deviation of independent additive range noise.
struct SensorConfig {
  double range = 0.0;
  int ray_count = 360;
  double noise_sigma = 0.0;
};

/// Checks a sensor configuration against the reshaping radius `alpha`: a
/// sensing range above 2*alpha guarantees that every boundary section the
/// ring logic needs is visible from the robot.
inline void validate(const SensorConfig& cfg, double alpha) {
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("sensor config: alpha must be positive");
  }
  if (!(cfg.range > 2.0 * alpha)) {
    throw std::invalid_argument(
        "sensor config: range must exceed twice the reshaping radius");
  }
  if (cfg.ray_count < 8) {
    throw std::invalid_argument("sensor config: at least 8 rays required");
  }
  if (!(cfg.noise_sigma >= 0.0)) {
    throw std::invalid_argument("sensor config: noise sigma must be >= 0");
  }
}

/// One ray of a scan: bearing (world frame) and measured range.
struct ScanRay {
  double theta = 0.0;
  double range = 0.0;
};

/// A full revolution of range returns taken from `origin`.  Bearings are
/// strictly increasing over [-pi, pi); ranges live in [0, max_range], with
/// max_range meaning "no return on this bearing".
struct Scan {
  Point2 origin{0.0, 0.0};
  std::vector<ScanRay> rays;
  double max_range = 0.0;
};

namespace detail {

/// Angular spacing between consecutive rays.
inline double scan_angle_step(const Scan& s) {
  if (s.rays.empty()) throw std::domain_error("scan: no rays");
  return 2.0 * kPi / static_cast<double>(s.rays.size());
}

/// Distance to a polygon boundary along a ray, ignoring whether the start
/// point is inside or outside the region (used for the workspace hull, whose
/// interior contains the robot).
inline double ray_cast_boundary(Point2 x, double theta,
                                const PolygonRegion& region,
                                double max_range) {
  if (region.empty()) return max_range;
  const Vector2 dir{std::cos(theta), std::sin(theta)};
  const Segment probe{x, x + dir * max_range};
  double best = max_range;
  for (double t : segment_boundary_events(probe, region)) {
    // 0 and 1 are sentinels added by the event collector, not hits.
    if (t > 1e-15 && t < 1.0 - 1e-15) best = std::min(best, t * max_range);
  }
  return best;
}

}  // namespace detail

/// Casts `cfg.ray_count` rays from x against the raw obstacles and (for a
/// bounded workspace) the workspace hull, clamps at the sensing range, and
/// adds clamped Gaussian range noise to every ray that produced a return.
/// One noise value is drawn per ray in bearing order, so the measurement is
/// deterministic given the seed and independent of the scene.
inline Scan scan(Point2 x, const WorkspaceModel& model, const SensorConfig& cfg,
                 unsigned rng_seed = 0) {
  require_finite(x, "scan");
  if (!(cfg.range > 0.0)) {
    throw std::invalid_argument("scan: positive sensing range required");
  }
  if (cfg.ray_count < 8) {
    throw std::invalid_argument("scan: at least 8 rays required");
  }
  if (!(cfg.noise_sigma >= 0.0)) {
    throw std::invalid_argument("scan: noise sigma must be >= 0");
  }
  for (const auto& obs : model.obstacles) {
    if (!obs.empty() && point_in_region_even_odd(x, obs)) {
      throw std::domain_error("scan: sensor origin inside an obstacle");
    }
  }
  if (model.bounded() && !point_in_region_even_odd(x, model.workspace)) {
    throw std::domain_error("scan: sensor origin outside the workspace");
  }

  Scan out;
  out.origin = x;
  out.max_range = cfg.range;
  out.rays.reserve(static_cast<std::size_t>(cfg.ray_count));

  std::mt19937 rng(rng_seed);
  std::normal_distribution<double> noise(0.0, cfg.noise_sigma > 0.0
                                                  ? cfg.noise_sigma
                                                  : 1.0);
  const int n = cfg.ray_count;
  for (int k = 0; k < n; ++k) {
    const double theta = -kPi + 2.0 * kPi * static_cast<double>(k) /
                                   static_cast<double>(n);
    double r = cfg.range;
    for (const auto& obs : model.obstacles) {
      if (!obs.empty()) r = std::min(r, ray_cast(x, theta, obs, cfg.range));
    }
    if (model.bounded()) {
      r = std::min(r, detail::ray_cast_boundary(x, theta, model.workspace,
                                                cfg.range));
    }
    const double eta = cfg.noise_sigma > 0.0 ? noise(rng) : 0.0;
    if (r < cfg.range) {
      r = std::clamp(r + eta, 0.0, cfg.range);
    }
    out.rays.push_back({theta, r});
  }
  return out;
}

/// Cartesian coordinates of every ray that produced a return.
inline std::vector<Point2> sensed_points(const Scan& s) {
  std::vector<Point2> pts;
  pts.reserve(s.rays.size());
  for (const auto& ray : s.rays) {
    if (ray.range < s.max_range) {
      pts.push_back({s.origin.x + ray.range * std::cos(ray.theta),
                     s.origin.y + ray.range * std::sin(ray.theta)});
    }
  }
  return pts;
}

/// Writes a scan as CSV: one header line carrying the sensor pose and range,
/// a column-name line, then one (theta_rad, range_m) row per ray.
inline void write_scan_csv(const Scan& s, std::ostream& os) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "# origin_x=%.17g origin_y=%.17g max_range=%.17g\n",
                s.origin.x, s.origin.y, s.max_range);
  os << buf << "theta_rad,range_m\n";
  for (const auto& ray : s.rays) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", ray.theta, ray.range);
    os << buf;
  }
}

// ---------------------------------------------------------------------------
// Virtual ring and boundary arcs
// ---------------------------------------------------------------------------

/// Circle kept around (or next to) the robot while it negotiates a boundary
/// section whose projection is ambiguous.  While active, the robot body
/// B_{r_a}(x) stays inside B_{radius}(center).
struct VirtualRing {
  Point2 center{0.0, 0.0};
  double radius = 0.0;
  bool active = false;
};

/// Circular arc treated as an additional piece of sensed boundary: the points
/// center + radius*(cos t, sin t) for t in [angle_lo, angle_lo + spread].
/// spread >= 2*pi denotes the full circle.
struct BoundaryArc {
  Point2 center{0.0, 0.0};
  double radius = 0.0;
  double angle_lo = 0.0;
  double spread = 0.0;
};

namespace detail {

/// Minimal angular interval (start angle + spread) covering a set of
/// directions; a spread above pi cannot be enclosed by a convex cone, so the
/// interval widens to the full circle.
struct AngularInterval {
  double lo = 0.0;
  double spread = 0.0;
};

inline AngularInterval angular_interval(std::vector<double> angs) {
  if (angs.empty()) {
    throw std::domain_error("angular_interval: no directions");
  }
  if (angs.size() == 1) return {angs.front(), 0.0};
  std::sort(angs.begin(), angs.end());
  double max_gap = (angs.front() + 2.0 * kPi) - angs.back();
  std::size_t start = 0;
  for (std::size_t i = 1; i < angs.size(); ++i) {
    const double gap = angs[i] - angs[i - 1];
    if (gap > max_gap) {
      max_gap = gap;
      start = i;
    }
  }
  const double spread = 2.0 * kPi - max_gap;
  if (spread > kPi + 1e-9) return {-kPi, 2.0 * kPi};
  return {angs[start], spread};
}

}  // namespace detail

/// Point of an arc at parameter angle t.
inline Point2 arc_point(const BoundaryArc& arc, double t) {
  return {arc.center.x + arc.radius * std::cos(t),
          arc.center.y + arc.radius * std::sin(t)};
}

/// Closest point of the arc to q.  Interior of the angular interval projects
/// radially; outside it the nearer endpoint wins.  q at the arc center maps
/// to the interval midpoint so the result is always a single point.
inline Point2 project_onto_arc(Point2 q, const BoundaryArc& arc) {
  require_finite(q, "project_onto_arc");
  if (!(arc.radius > 0.0)) {
    throw std::domain_error("project_onto_arc: arc radius must be positive");
  }
  const Vector2 d = q - arc.center;
  if (d.x == 0.0 && d.y == 0.0) {
    return arc_point(arc, arc.angle_lo + 0.5 * arc.spread);
  }
  const double tq = std::atan2(d.y, d.x);
  if (arc.spread >= 2.0 * kPi - 1e-12) return arc_point(arc, tq);
  double rel = tq - arc.angle_lo;
  while (rel < 0.0) rel += 2.0 * kPi;
  while (rel >= 2.0 * kPi) rel -= 2.0 * kPi;
  if (rel <= arc.spread) return arc_point(arc, arc.angle_lo + rel);
  // Outside the interval: compare cyclic distances to the two endpoints.
  const double to_lo = 2.0 * kPi - rel;
  const double to_hi = rel - arc.spread;
  return to_lo < to_hi ? arc_point(arc, arc.angle_lo)
                       : arc_point(arc, arc.angle_lo + arc.spread);
}

/// Samples the arc at an angular step of at most max_angle_step (endpoints
/// included).
inline std::vector<Point2> sample_arc(const BoundaryArc& arc,
                                      double max_angle_step) {
  if (!(max_angle_step > 0.0)) {
    throw std::invalid_argument("sample_arc: positive step required");
  }
  std::vector<Point2> pts;
  if (arc.spread <= 0.0) {
    pts.push_back(arc_point(arc, arc.angle_lo));
    return pts;
  }
  const int count =
      1 + static_cast<int>(std::ceil(arc.spread / max_angle_step));
  pts.reserve(static_cast<std::size_t>(count) + 1);
  for (int i = 0; i <= count; ++i) {
    const double t = arc.angle_lo +
                     arc.spread * static_cast<double>(i) /
                         static_cast<double>(count);
    pts.push_back(arc_point(arc, t));
  }
  return pts;
}

// ---------------------------------------------------------------------------
// Scan-side measurements
// ---------------------------------------------------------------------------

namespace detail {

/// Range slack accounting for the angular discretization of a scan: a flat
/// wall seen at distance dmin can read up to dmin/cos(step) on the rays
/// bracketing the true foot.
inline double range_band(const Scan& s, double dmin, double extra_tol) {
  const double step = scan_angle_step(s);
  return dmin * (1.0 / std::cos(step) - 1.0) + 1e-9 * (1.0 + dmin) + extra_tol;
}

/// Direction-gap tolerance that treats the angular sprinkle a single flat
/// face at distance dmin produces within the measurement band as one
/// contact.  Under noise the sampled minimum is biased low, so the face's
/// candidates thin out into scattered runs; a face at distance dmin stays
/// within the band out to +-sqrt(2 band / dmin) of its foot, and any gap
/// smaller than that span is indistinguishable from one noisy face.
inline double sprinkle_gap(double band, double dmin, double base) {
  if (!(band > 0.0) || !(dmin > 0.0)) return base;
  return std::max(base, std::sqrt(2.0 * band / dmin));
}

/// Distance slack for measurements taken from a point q other than the scan
/// origin: walls are sampled at a spacing proportional to their distance from
/// the origin, so the sampled minimum can exceed the true one near corners.
inline double offset_band(const Scan& s, Point2 q, double dist, double sigma) {
  const double step = scan_angle_step(s);
  const double reach = norm(q - s.origin) + dist;
  const double gap = reach * step;
  return 2.0 * dist * (1.0 / std::cos(step) - 1.0) +
         gap * gap / (4.0 * std::max(dist, 1e-9)) + 3.0 * sigma +
         1e-9 * (1.0 + dist);
}

/// Min-distance projection of q onto a finite candidate point set, clustered
/// by viewing direction exactly like the exact-geometry projection.
inline ProjectionResult project_onto_points(Point2 q,
                                            const std::vector<Point2>& pts,
                                            double tol_dist,
                                            double tol_angle) {
  if (pts.empty()) throw std::domain_error("project_onto_points: no points");
  double dmin = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) dmin = std::min(dmin, distance(q, p));
  std::vector<ProjCandidate> near;
  for (const auto& p : pts) {
    const double d = distance(q, p);
    if (d <= dmin + tol_dist) {
      near.push_back({p, d, std::atan2(p.y - q.y, p.x - q.x), 0});
    }
  }
  if (dmin == 0.0) return ProjectionResult{0.0, {q}, true};
  const auto reps = cluster_by_direction(std::move(near), tol_angle);
  ProjectionResult out;
  out.distance = dmin;
  out.unique = (reps.size() == 1);
  for (const auto& r : reps) out.points.push_back(r.p);
  return out;
}

/// Default direction-clustering tolerance: three ray spacings, so returns
/// from one wall merge while separate walls stay apart.
inline double default_cluster_angle(const Scan& s) {
  return 3.0 * scan_angle_step(s);
}

}  // namespace detail

/// Nearest-boundary reconstruction from a scan plus any overlay arcs: the
/// minimum measured distance from q together with one representative point
/// per direction cluster attaining it (up to the discretization band).
/// Nothing in range yields {max_range, empty, unique}.
inline ProjectionResult nearest_on_boundary(
    Point2 q, const Scan& s, const std::vector<BoundaryArc>& overlay,
    double tol_angle = -1.0, double extra_tol = 0.0) {
  require_finite(q, "nearest_on_boundary");
  if (s.rays.empty()) throw std::domain_error("nearest_on_boundary: empty scan");
  if (tol_angle <= 0.0) tol_angle = detail::default_cluster_angle(s);
  std::vector<Point2> pts = sensed_points(s);
  for (const auto& arc : overlay) pts.push_back(project_onto_arc(q, arc));
  if (pts.empty()) {
    return ProjectionResult{s.max_range, {}, true};
  }
  double dmin = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) dmin = std::min(dmin, distance(q, p));
  const double band = detail::range_band(s, dmin, extra_tol);
  if (extra_tol > 0.0) {
    tol_angle = detail::sprinkle_gap(band, dmin, tol_angle);
  }
  return detail::project_onto_points(q, pts, band, tol_angle);
}

/// Nearest-boundary reconstruction at the sensor origin itself.
inline ProjectionResult nearest_from_scan(const Scan& s,
                                          double tol_angle = -1.0,
                                          double extra_tol = 0.0) {
  return nearest_on_boundary(s.origin, s, {}, tol_angle, extra_tol);
}

/// True iff a sensed boundary point (or overlay-arc point) lies inside the
/// straight corridor of half-width r_a between the robot and the target: the
/// rectangle spanned by offsetting the segment [0, x] by r_a on both sides.
/// At the target itself the corridor is degenerate and reads unblocked.
inline bool collision_corridor_blocked(Point2 x, const Scan& s, double r_a,
                                       const std::vector<BoundaryArc>& overlay = {}) {
  require_finite(x, "collision_corridor_blocked");
  if (!(r_a > 0.0)) {
    throw std::invalid_argument("collision_corridor_blocked: r_a must be positive");
  }
  const double nx = norm(x);
  if (nx == 0.0) return false;
  const Vector2 axis{x.x / nx, x.y / nx};
  const auto inside = [&](const Point2& p) {
    const double along = dot(p, axis);
    const double across = std::abs(cross(axis, p));
    return along >= 0.0 && along <= nx && across <= r_a;
  };
  for (const auto& p : sensed_points(s)) {
    if (inside(p)) return true;
  }
  const double step = detail::scan_angle_step(s);
  for (const auto& arc : overlay) {
    for (const auto& p : sample_arc(arc, step)) {
      if (inside(p)) return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Ring contact analysis
// ---------------------------------------------------------------------------

namespace detail {

/// How the circle B_v(c) meets the raw sensed boundary: the candidates within
/// a measurement band of the minimum distance, the angular fan they span as
/// seen from c, and whether any return lies clearly inside the circle.
struct ContactSet {
  double dmin = std::numeric_limits<double>::infinity();
  std::vector<Point2> touching;
  AngularInterval fan{};
  Point2 rep{0.0, 0.0};  // closest touching point
  bool penetrating = false;
  bool narrow = false;  // single contact patch
};

/// Fans wider than a single tangency patch (plus margin) indicate contact
/// with more than one boundary section.
inline double narrow_fan_limit(const Scan& s, double v, double band) {
  const double chord = std::sqrt(std::max(0.0, 2.0 * v * band + band * band));
  return 3.0 * std::atan2(chord, v) + 2.0 * scan_angle_step(s);
}

/// Contact analysis of the circle B_v(c) against the raw returns only; the
/// virtual-ring mechanics must never treat the robot's own overlay arcs as
/// obstacles, or a held ring could pin itself in place.
inline ContactSet ring_contacts(Point2 c, double v, const Scan& s,
                                double sigma) {
  ContactSet out;
  const auto pts = sensed_points(s);
  if (pts.empty()) return out;
  for (const auto& p : pts) out.dmin = std::min(out.dmin, distance(c, p));
  const double band = offset_band(s, c, std::max(out.dmin, v), sigma);
  std::vector<double> angs;
  for (const auto& p : pts) {
    const double d = distance(c, p);
    if (d < v - band) out.penetrating = true;
    if (d <= out.dmin + band) {
      out.touching.push_back(p);
      angs.push_back(std::atan2(p.y - c.y, p.x - c.x));
      if (out.touching.size() == 1 || d < distance(c, out.rep)) out.rep = p;
    }
  }
  out.fan = angular_interval(angs);
  out.narrow = !out.penetrating && out.fan.spread <= narrow_fan_limit(s, v, band);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Episode state: ring + boundary overlay
// ---------------------------------------------------------------------------

/// Per-encounter sensing state: the active virtual ring, the shell depth and
/// clearances chosen when it was placed, and the overlay arcs grafted onto
/// the sensed boundary.  A simulation owns one episode, clears it once the
/// robot has returned to the move-to-target mode and left the influence
/// shell, and starts the next encounter fresh.
struct SensorEpisode {
  VirtualRing ring{};
  double beta = 0.0;
  double gamma = 0.0;
  double gamma_s = 0.0;
  std::vector<BoundaryArc> overlay;

  /// Adds an arc unless an arc of the same circle already covers it.
  void absorb(const BoundaryArc& arc) {
    for (const auto& have : overlay) {
      const double scale = 1e-9 * (1.0 + std::abs(arc.radius));
      if (std::abs(have.radius - arc.radius) > scale) continue;
      if (norm(have.center - arc.center) > scale) continue;
      if (have.spread >= 2.0 * kPi - 1e-12) return;
      double rel = arc.angle_lo - have.angle_lo;
      while (rel < 0.0) rel += 2.0 * kPi;
      while (rel >= 2.0 * kPi) rel -= 2.0 * kPi;
      if (rel + arc.spread <= have.spread + 1e-12) return;
    }
    overlay.push_back(arc);
  }

  void clear() { *this = SensorEpisode{}; }
};

// ---------------------------------------------------------------------------
// Ring placement
// ---------------------------------------------------------------------------

/// Result of placing a ring on engagement: either a tangent ring anchored at
/// the measured projection (enclosing = false) or, when no tangent placement
/// has a single clean contact, a ring centered on the robot whose in-fan arc
/// is grafted onto the boundary (enclosing = true).
struct RingPlacement {
  VirtualRing ring{};
  double gamma = 0.0;
  bool enclosing = false;
  std::optional<BoundaryArc> arc;
};

/// Places the virtual ring when the robot reaches trigger depth beta next to
/// a blocking boundary.  With a unique measured projection Pi the ring sits
/// at c = Pi + (r_a + gamma)*(x - Pi)/|x - Pi|; gamma starts at the midpoint
/// of its admissible interval and halves toward the lower end until the ring
/// touches exactly one boundary patch (at most 8 attempts).  If every attempt
/// fails, or the projection is ambiguous with the target direction inside the
/// fan of projection rays, the ring is centered on the robot instead and the
/// arc facing the boundary fan becomes part of the sensed boundary.
inline RingPlacement place_ring_on_landing(Point2 x, const Scan& s,
                                           const ProjectionResult& nearest,
                                           const ControllerParams& params,
                                           double beta,
                                           double noise_sigma = 0.0) {
  require_finite(x, "place_ring_on_landing");
  validate(params);
  if (!(beta > params.r_a && beta < params.alpha)) {
    throw std::invalid_argument(
        "place_ring_on_landing: beta must lie in (r_a, alpha)");
  }
  if (nearest.points.empty()) {
    throw std::domain_error("place_ring_on_landing: nothing sensed");
  }
  const double d = nearest.distance;
  if (!(d > 0.0)) {
    throw std::domain_error("place_ring_on_landing: robot on the boundary");
  }

  const auto raw = sensed_points(s);
  if (nearest.unique) {
    const Point2 proj = nearest.points.front();
    const Vector2 w = (x - proj) / d;
    const double g_lo = beta - params.r_a;
    const double g_hi = params.alpha - params.r_a;
    // Is the anchor a physically sensed point (as opposed to an overlay
    // point)?  Only then must the ring's contact coincide with it.
    const double step = detail::scan_angle_step(s);
    const double pos_tol =
        (norm(s.origin - proj) + d) * step + 3.0 * noise_sigma + 1e-9;
    bool anchor_raw = false;
    for (const auto& p : raw) {
      if (distance(p, proj) <= pos_tol) {
        anchor_raw = true;
        break;
      }
    }
    double gamma = 0.5 * (g_lo + g_hi);
    for (int attempt = 0; attempt < 8; ++attempt) {
      const double v = params.r_a + gamma;
      const Point2 c = proj + w * v;
      bool ok = true;
      if (!raw.empty()) {
        const auto contacts = detail::ring_contacts(c, v, s, noise_sigma);
        ok = contacts.narrow;
        if (ok && anchor_raw && contacts.dmin <= v + 1e-9 &&
            distance(contacts.rep, proj) > 2.0 * pos_tol) {
          ok = false;  // tangent ring grabbed a different boundary patch
        }
      }
      if (ok) {
        RingPlacement out;
        out.ring = {c, v, true};
        out.gamma = gamma;
        return out;
      }
      gamma = 0.5 * (gamma + g_lo);
    }
  } else if (!conic_hull_contains(x, nearest.points, Point2{0.0, 0.0})) {
    // Ambiguous projection but the target direction is clear of the fan:
    // no ring is needed; the caller should not have identified a landing.
    throw std::domain_error(
        "place_ring_on_landing: ambiguous projection away from the target "
        "direction");
  }

  // Enclosing ring centered on the robot.
  const double v = std::min(beta, d);
  if (!(v >= params.r_a)) {
    throw std::domain_error(
        "place_ring_on_landing: insufficient clearance for an enclosing ring");
  }
  RingPlacement out;
  out.ring = {x, v, true};
  out.gamma = v - params.r_a;
  out.enclosing = true;
  std::vector<double> angs;
  for (const auto& p : nearest.points) {
    const Vector2 dp = p - x;
    if (dp.x == 0.0 && dp.y == 0.0) continue;
    angs.push_back(std::atan2(dp.y, dp.x));
  }
  const auto fan = detail::angular_interval(angs);
  out.arc = BoundaryArc{x, v, fan.lo, fan.spread};
  return out;
}

// ---------------------------------------------------------------------------
// Ring tracking
// ---------------------------------------------------------------------------

/// Outcome of one tracking update: the boundary point steering the orbit and
/// whether the ring had to hold its position because it touches several
/// boundary sections at once.
struct RingTrackResult {
  Point2 effective_proj{0.0, 0.0};
  bool held = false;
};

/// Advances the active ring for the current robot position.  While the
/// circle touches a single boundary patch it slides along the boundary,
/// anchored at the measured projection with constant radius; when it touches
/// several patches it holds still, the arc spanning the contact fan is
/// grafted onto the boundary overlay, and the robot steers around that arc
/// instead.  A robot body outside the ring means the integration step was
/// too large to track; the caller must retry with a smaller step.
inline RingTrackResult ring_track(Point2 x, const Scan& s,
                                  SensorEpisode& episode, double r_a,
                                  double noise_sigma = 0.0) {
  require_finite(x, "ring_track");
  if (!episode.ring.active) {
    throw std::logic_error("ring_track: ring is not active");
  }
  const double v = episode.ring.radius;
  if (norm(x - episode.ring.center) + r_a > v + 1e-9) {
    throw std::runtime_error(
        "ring_track: robot body left the virtual ring; reduce the "
        "integration step");
  }
  const auto raw = sensed_points(s);
  if (raw.empty()) {
    throw std::domain_error("ring_track: nothing sensed while tracking");
  }

  // Candidate slide: re-anchor the circle at the robot's measured projection
  // and accept if it lands on a single clean contact patch.  A re-anchored
  // ring has containment slack equal to the measured distance minus r_a, so
  // a measurement inside the inflation radius must hold instead of sliding
  // (mirroring the placement rule that rejects rings tighter than r_a).
  double dmin = std::numeric_limits<double>::infinity();
  for (const auto& p : raw) dmin = std::min(dmin, distance(x, p));
  const double band = detail::range_band(s, dmin, 3.0 * noise_sigma);
  double gap = detail::default_cluster_angle(s);
  if (noise_sigma > 0.0) gap = detail::sprinkle_gap(band, dmin, gap);
  const auto nearest = detail::project_onto_points(x, raw, band, gap);
  if (nearest.unique && nearest.distance >= r_a) {
    const Point2 proj = nearest.points.front();
    const Point2 c = proj + (x - proj) * (v / nearest.distance);
    const auto contacts = detail::ring_contacts(c, v, s, noise_sigma);
    if (contacts.narrow) {
      episode.ring.center = c;
      RingTrackResult out;
      out.effective_proj = proj;
      return out;
    }
  }

  // Hold: keep the center, steer around the arc spanning the contact fan.
  const auto contacts =
      detail::ring_contacts(episode.ring.center, v, s, noise_sigma);
  const BoundaryArc arc{episode.ring.center, v, contacts.fan.lo,
                        contacts.fan.spread};
  episode.absorb(arc);
  RingTrackResult out;
  out.effective_proj = project_onto_arc(x, arc);
  out.held = true;
  return out;
}

// ---------------------------------------------------------------------------
// Jump identification from measurements
// ---------------------------------------------------------------------------

/// Decides mode switches from the scan alone, mutating the episode when a
/// ring is placed or the boundary overlay grows.
///
/// Move-to-target mode: once the measured distance drops to the trigger
/// depth beta, a unique projection behind the robot plus a blocked corridor
/// means engagement -- the trigger clearance becomes beta - r_a and the ring
/// is placed; an ambiguous projection whose ray fan contains the target
/// direction grafts an enclosing ring's arc onto the boundary instead, and
/// the robot keeps flowing until the arc itself triggers an engagement.
///
/// Orbit modes: leaving the sensing shell (measured distance at least
/// r_a + alpha) always disengages; inside it, the robot disengages once it
/// sits in the exit region for its direction and has gained at least epsilon
/// of progress toward the target since the orbit began.
inline std::optional<JumpKind> sensor_jump_identification(
    const HybridState& state, const Scan& s, SensorEpisode& episode,
    const ControllerParams& params, double noise_sigma = 0.0) {
  validate(params);
  if (episode.beta <= 0.0) episode.beta = 0.5 * (params.r_a + params.alpha);
  const double extra = 3.0 * noise_sigma;
  const auto nearest =
      nearest_on_boundary(state.x, s, episode.overlay, -1.0, extra);

  if (state.m == 0) {
    if (nearest.points.empty()) return std::nullopt;
    if (nearest.distance > episode.beta) return std::nullopt;
    if (nearest.unique) {
      const Point2 proj = nearest.points.front();
      if (dot(state.x, state.x - proj) >= 0.0 &&
          collision_corridor_blocked(state.x, s, params.r_a,
                                     episode.overlay)) {
        auto placed = place_ring_on_landing(state.x, s, nearest, params,
                                            episode.beta, noise_sigma);
        episode.ring = placed.ring;
        episode.gamma = placed.gamma;
        episode.gamma_s = episode.beta - params.r_a;
        if (placed.arc) episode.absorb(*placed.arc);
        return JumpKind{JumpType::kEngage, -1, proj};
      }
      return std::nullopt;
    }
    if (conic_hull_contains(state.x, nearest.points, Point2{0.0, 0.0})) {
      // Target direction blocked by an ambiguous fan: enclose the robot and
      // graft the facing arc onto the boundary.  No mode switch yet.
      const double v = std::min(episode.beta, nearest.distance);
      if (v >= params.r_a) {
        std::vector<double> angs;
        for (const auto& p : nearest.points) {
          const Vector2 dp = p - state.x;
          if (dp.x == 0.0 && dp.y == 0.0) continue;
          angs.push_back(std::atan2(dp.y, dp.x));
        }
        const auto fan = detail::angular_interval(angs);
        episode.ring = {state.x, v, true};
        episode.absorb(BoundaryArc{state.x, v, fan.lo, fan.spread});
      }
    }
    return std::nullopt;
  }

  if (state.m != 1 && state.m != -1) {
    throw std::invalid_argument("sensor_jump_identification: mode must be -1, 0, or 1");
  }

  const double d = nearest.points.empty()
                       ? std::numeric_limits<double>::infinity()
                       : nearest.distance;
  if (!(d < params.r_a + params.alpha)) {
    return JumpKind{JumpType::kDisengage, -1, Point2{0.0, 0.0}};
  }

  Point2 proj{0.0, 0.0};
  if (nearest.unique && !nearest.points.empty()) {
    proj = nearest.points.front();
  } else if (episode.ring.active) {
    const auto contacts = detail::ring_contacts(
        episode.ring.center, episode.ring.radius, s, noise_sigma);
    const BoundaryArc arc{episode.ring.center, episode.ring.radius,
                          contacts.fan.lo, contacts.fan.spread};
    proj = project_onto_arc(state.x, arc);
  } else {
    return std::nullopt;  // ambiguous measurement and no ring to resolve it
  }

  const bool blocked =
      collision_corridor_blocked(state.x, s, params.r_a, episode.overlay);
  const bool landing = blocked && dot(state.x, state.x - proj) >= 0.0;
  const bool in_exit =
      !landing &&
      (!blocked || detail::exit_angle_contains(state.x, proj, state.m));
  if (in_exit && norm(state.h) - norm(state.x) >= params.epsilon) {
    return JumpKind{JumpType::kDisengage, -1, proj};
  }
  return std::nullopt;
}

}  // namespace reachnav
