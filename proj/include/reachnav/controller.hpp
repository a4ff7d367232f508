// reachnav - safe navigation among non-convex obstacles
//
// Copyright (c) 2026 reachnav contributors
// SPDX-License-Identifier: MIT
//
// Hybrid feedback controller: a move-to-target mode that steers straight at
// the origin, and two obstacle-circumnavigation modes (clockwise and
// counter-clockwise) that follow the reshaped obstacle boundary at constant
// speed.  Mode switches are events: engaging when the straight path is
// blocked close to an obstacle, disengaging after measurable progress toward
// the target, after escaping the obstacle's influence shell, or on reaching
// the target ball.

#pragma once

#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>

#include "reachnav/workspace.hpp"

namespace reachnav {

// ---------------------------------------------------------------------------
// State and parameters
// ---------------------------------------------------------------------------

/// Full controller state: position, hit point (position recorded when a
/// circumnavigation started), and mode m: 0 move-to-target, +1 clockwise
/// orbit, -1 counter-clockwise orbit.
struct HybridState {
  Point2 x{0.0, 0.0};
  Point2 h{0.0, 0.0};
  int m = 0;
};

/// Gains and geometry of the mode logic.  All lengths in meters.
///  - kappa_s: move-to-target gain (1/s)
///  - kappa_r: orbit speed (m/s)
///  - alpha:   obstacle reshaping radius
///  - r_a:     inflation radius (robot + safety margin)
///  - gamma:   influence shell width around the inflated obstacles
///  - gamma_s: engage trigger depth (inner shell), 0 < gamma_s < gamma
///  - delta:   target capture radius
///  - epsilon: progress quantum required to disengage
struct ControllerParams {
  double kappa_s = 0.0;
  double kappa_r = 0.0;
  double alpha = 0.0;
  double r_a = 0.0;
  double gamma = 0.0;
  double gamma_s = 0.0;
  double delta = 0.0;
  double epsilon = 0.0;
};

/// Validates gain positivity and the shell ordering 0 < gamma_s < gamma <
/// alpha - r_a; delta and epsilon must be positive (their environment-bound
/// upper limits are enforced where the environment is known).
inline void validate(const ControllerParams& p) {
  if (!(p.kappa_s > 0.0) || !(p.kappa_r > 0.0)) {
    throw std::invalid_argument("controller params: gains must be positive");
  }
  if (!(p.r_a > 0.0) || !(p.alpha > p.r_a)) {
    throw std::invalid_argument(
        "controller params: need 0 < r_a < alpha");
  }
  if (!(p.gamma_s > 0.0) || !(p.gamma_s < p.gamma) ||
      !(p.gamma < p.alpha - p.r_a)) {
    throw std::invalid_argument(
        "controller params: need 0 < gamma_s < gamma < alpha - r_a");
  }
  if (!(p.delta > 0.0)) {
    throw std::invalid_argument("controller params: delta must be positive");
  }
  if (!(p.epsilon > 0.0)) {
    throw std::invalid_argument(
        "controller params: epsilon must be positive");
  }
}

/// Environment-dependent part of the parameter contract: the capture radius
/// must keep the target ball clear of the reshaped obstacles, and the
/// progress quantum must stay below the largest value every orbit can
/// guarantee at the target clearance d0.
inline void validate(const ControllerParams& p, double d0) {
  validate(p);
  if (!(p.delta < d0 - p.r_a)) {
    throw std::invalid_argument(
        "controller params: delta must be below d0 - r_a");
  }
  if (!(p.epsilon <= epsilon_upper_bound(d0, p.r_a))) {
    throw std::invalid_argument("epsilon exceeds Lemma-8 bound");
  }
}

/// Exclusive classification of a query point relative to the nearest
/// obstacle's influence shell.
enum class RegionTag {
  kLanding,     ///< straight path blocked and not yet past the obstacle
  kExitAlways,  ///< straight path to the target is clear
  kExitCw,      ///< clockwise orbit is the exiting direction here
  kExitCcw,     ///< counter-clockwise orbit is the exiting direction here
  kFar,         ///< outside every influence shell
};

/// Kind of discrete transition the mode logic requests.
enum class JumpType {
  kEngage,     ///< move-to-target -> orbit: records the hit point
  kDisengage,  ///< orbit -> move-to-target: hit point kept
};

/// A detected jump, carrying the chain and projection it was decided
/// against (used by the direction policy on engage).
struct JumpKind {
  JumpType type = JumpType::kDisengage;
  int chain = -1;
  Point2 proj{0.0, 0.0};
};

// ---------------------------------------------------------------------------
// Control vector synthesis
// ---------------------------------------------------------------------------

/// Unit tangent for orbiting: the outward normal (x - proj)/|x - proj|
/// rotated a quarter turn, clockwise for m = +1 and counter-clockwise for
/// m = -1.  Throws when x coincides with its projection or m is not +-1.
inline Vector2 rotation_vector(Point2 x, Point2 proj, int m) {
  if (m != 1 && m != -1) {
    throw std::invalid_argument("rotation_vector: m must be +1 or -1");
  }
  const Vector2 w = x - proj;
  const double n = norm(w);
  if (!(n > 0.0)) {
    throw std::domain_error(
        "rotation_vector: x coincides with its projection");
  }
  return {m * w.y / n, -m * w.x / n};
}

/// Velocity command for the current mode: -kappa_s * x when moving to the
/// target, kappa_r * rotation_vector when orbiting.  Orbit modes require the
/// projection point.
inline Vector2 control_input(const HybridState& state,
                             const std::optional<Point2>& proj,
                             const ControllerParams& params) {
  if (state.m == 0) {
    return {-params.kappa_s * state.x.x, -params.kappa_s * state.x.y};
  }
  if (state.m != 1 && state.m != -1) {
    throw std::invalid_argument("control_input: mode must be -1, 0, or +1");
  }
  if (!proj.has_value()) {
    throw std::invalid_argument(
        "control_input: orbit mode requires the projection point");
  }
  const Vector2 v = rotation_vector(state.x, *proj, state.m);
  return {params.kappa_r * v.x, params.kappa_r * v.y};
}

// ---------------------------------------------------------------------------
// Region classification
// ---------------------------------------------------------------------------

/// Splits the exit region by the angle the outward normal makes with the
/// position vector, wrapped to [0, 2*pi): the half-turn range [pi, 2*pi)
/// exits clockwise, [0, pi) counter-clockwise.  Exactly pi belongs to both
/// closed ranges; the single-tag contract resolves it clockwise.
inline RegionTag classify_exit_angle(Point2 x, Point2 proj) {
  double a = signed_angle(Vector2{x.x, x.y}, x - proj);
  if (a < 0.0) a += 2.0 * kPi;
  return a >= kPi ? RegionTag::kExitCw : RegionTag::kExitCcw;
}

namespace detail {

/// One-pass geometric analysis shared by classification and jump detection.
struct RegionQuery {
  NearestChain nc;
  double dist = 0.0;        ///< distance to the reshaped obstacle set
  bool in_shell = false;    ///< dist <= r_a + gamma
  bool blocked = false;     ///< segment to the target meets the inflated set
  bool landing = false;
  RegionTag tag = RegionTag::kFar;
};

inline RegionQuery analyze_region(Point2 x, const ModifiedEnvironment& env,
                                  const ControllerParams& params) {
  RegionQuery q;
  q.nc = nearest_chain(env, x);
  if (q.nc.chain < 0) {
    q.dist = std::numeric_limits<double>::infinity();
    q.tag = RegionTag::kFar;
    return q;
  }
  q.dist = q.nc.proj.distance;
  q.in_shell = q.dist <= params.r_a + params.gamma;
  if (!q.in_shell) {
    q.tag = RegionTag::kFar;
    return q;
  }
  if (!q.nc.proj.unique) {
    throw std::runtime_error(
        "classify_region: ambiguous projection inside the influence shell; "
        "resolve through the virtual ring");
  }
  const Point2 proj = q.nc.proj.points.front();
  // Straight path blocked: the segment from x to the target comes closer
  // than the inflation radius to the nearest chain's reshaped parts.
  const Segment to_target{x, {0.0, 0.0}};
  double seg_dist = std::numeric_limits<double>::infinity();
  for (const auto& part : env.chains[q.nc.chain].parts) {
    seg_dist = std::min(seg_dist, segment_region_distance(to_target, part));
  }
  q.blocked = seg_dist < params.r_a;
  const bool outward = dot(Vector2{x.x, x.y}, x - proj) >= 0.0;
  if (q.blocked && outward) {
    q.landing = true;
    q.tag = RegionTag::kLanding;
  } else if (!q.blocked) {
    q.tag = RegionTag::kExitAlways;
  } else {
    q.tag = classify_exit_angle(x, proj);
  }
  return q;
}

/// Closed-range membership in the exit half-turn of direction m; the seam
/// angle pi belongs to both directions.
inline bool exit_angle_contains(Point2 x, Point2 proj, int m) {
  double a = signed_angle(Vector2{x.x, x.y}, x - proj);
  if (a < 0.0) a += 2.0 * kPi;
  constexpr double kSeamTol = 1e-9;
  if (m == 1) return a >= kPi - kSeamTol || a <= kSeamTol;
  return a <= kPi + kSeamTol;
}

}  // namespace detail

/// Classifies x against the nearest chain's influence shell.  Exactly one
/// tag applies: landing while the blocked side is still ahead, exit_always
/// when the straight path is clear, otherwise the clockwise or
/// counter-clockwise exit half by wrapped angle, and far outside the shell.
/// Throws when the projection is ambiguous inside the shell.
inline RegionTag classify_region(Point2 x, const ModifiedEnvironment& env,
                                 const ControllerParams& params) {
  return detail::analyze_region(x, env, params).tag;
}

// ---------------------------------------------------------------------------
// Jump detection and update law
// ---------------------------------------------------------------------------

/// Detects whether the mode logic requests a transition at this state.
/// Move-to-target engages when the landing region is reached within the
/// trigger depth gamma_s.  An orbit disengages when the robot left the
/// influence shell, entered the target ball, or stands in its own exit
/// region (or the always-exit region) at least epsilon closer to the target
/// than the hit point.  No jump is a normal result.
inline std::optional<JumpKind> jump_check(const HybridState& state,
                                          const ModifiedEnvironment& env,
                                          const ControllerParams& params) {
  const detail::RegionQuery q = detail::analyze_region(state.x, env, params);
  if (state.m == 0) {
    if (q.in_shell && q.dist <= params.r_a + params.gamma_s && q.landing) {
      return JumpKind{JumpType::kEngage, q.nc.chain,
                      q.nc.proj.points.front()};
    }
    return std::nullopt;
  }
  if (state.m != 1 && state.m != -1) {
    throw std::invalid_argument("jump_check: mode must be -1, 0, or +1");
  }
  // (a) escaped the influence shell entirely.
  if (q.dist >= params.r_a + params.gamma) {
    return JumpKind{JumpType::kDisengage, q.nc.chain};
  }
  // (b) reached the target ball.
  if (norm(Vector2{state.x.x, state.x.y}) <= params.delta) {
    return JumpKind{JumpType::kDisengage, q.nc.chain};
  }
  // (c) progress: in the own-direction or always-exit region, at least
  // epsilon closer to the target than the recorded hit point.
  const Point2 proj = q.nc.proj.points.front();
  const bool in_exit =
      !q.landing &&
      (!q.blocked || detail::exit_angle_contains(state.x, proj, state.m));
  if (in_exit && norm(Vector2{state.h.x, state.h.y}) -
                         norm(Vector2{state.x.x, state.x.y}) >=
                     params.epsilon) {
    return JumpKind{JumpType::kDisengage, q.nc.chain, proj};
  }
  return std::nullopt;
}

/// Membership in the flow set of the current mode: where the continuous
/// dynamics are allowed to evolve.  Together with jump_check this covers
/// every admissible state (flow wherever no jump is forced; overlap at the
/// decision boundaries is intentional hysteresis).
inline bool flow_set_contains(const HybridState& state,
                              const ModifiedEnvironment& env,
                              const ControllerParams& params) {
  const detail::RegionQuery q = detail::analyze_region(state.x, env, params);
  if (state.m == 0) {
    if (q.dist >= params.r_a + params.gamma_s) return true;
    return !q.landing;
  }
  if (state.m != 1 && state.m != -1) {
    throw std::invalid_argument(
        "flow_set_contains: mode must be -1, 0, or +1");
  }
  if (!q.in_shell) return false;
  if (q.landing) return true;
  const Point2 proj = q.nc.proj.points.front();
  // Opposite-direction exit half: always flow (the orbit crosses it).
  if (q.blocked && detail::exit_angle_contains(state.x, proj, -state.m)) {
    return true;
  }
  // Own exit half (or clear path): flow until the progress quantum is met.
  const bool in_exit =
      !q.blocked || detail::exit_angle_contains(state.x, proj, state.m);
  if (in_exit) {
    return norm(Vector2{state.h.x, state.h.y}) -
               norm(Vector2{state.x.x, state.x.y}) <=
           params.epsilon;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Direction policy
// ---------------------------------------------------------------------------

/// Stateless default direction rule: orbit toward the side the target lies
/// on.  Compares the turn from the outward normal to the target direction;
/// the symmetric tie (target straight behind the obstacle) breaks clockwise.
inline int direction_policy_default(Point2 x, Point2 proj) {
  const Vector2 outward = x - proj;
  if (!(norm(outward) > 0.0)) {
    throw std::domain_error(
        "direction_policy_default: x coincides with its projection");
  }
  const Vector2 to_target{-x.x, -x.y};
  const double a = signed_angle(outward, to_target);
  if (std::abs(a - kPi) <= 1e-12) return 1;  // tie: clockwise by contract
  return a <= 0.0 ? 1 : -1;
}

/// Chooses and remembers the orbit direction per obstacle chain within one
/// encounter episode, so repeated engagements of the same chain keep turning
/// the same way.  The random kind draws a fresh direction per chain from a
/// seeded generator (used to exercise the set-valued update in tests).
class DirectionPolicy {
 public:
  enum class Kind { kTargetSide, kRandom };

  explicit DirectionPolicy(Kind kind = Kind::kTargetSide,
                           unsigned seed = 2026)
      : kind_(kind), rng_(seed) {}

  /// Direction for an engagement of `chain` at position x with projection
  /// proj; sticky within the episode.
  int choose(Point2 x, Point2 proj, int chain) {
    const auto it = episode_.find(chain);
    if (it != episode_.end()) return it->second;
    int dir;
    if (kind_ == Kind::kRandom) {
      dir = std::uniform_int_distribution<int>(0, 1)(rng_) == 0 ? 1 : -1;
    } else {
      dir = direction_policy_default(x, proj);
    }
    episode_[chain] = dir;
    return dir;
  }

  /// Forgets the remembered direction for one chain (the episode ends when
  /// the robot leaves that chain's influence shell in move-to-target mode).
  void reset_episode(int chain) { episode_.erase(chain); }

  /// Forgets all remembered directions (start of a fresh run).
  void reset_all() { episode_.clear(); }

  /// Remembered direction for a chain, or 0 when none.
  int remembered(int chain) const {
    const auto it = episode_.find(chain);
    return it == episode_.end() ? 0 : it->second;
  }

 private:
  Kind kind_;
  std::mt19937 rng_;
  std::map<int, int> episode_;
};

/// Applies a detected jump: engaging records the hit point and asks the
/// policy for a direction; disengaging keeps the hit point and returns to
/// move-to-target.  The position never changes across a jump.
inline HybridState update_law(const HybridState& state, const JumpKind& kind,
                              DirectionPolicy& policy) {
  if (kind.type == JumpType::kEngage) {
    return {state.x, state.x,
            policy.choose(state.x, kind.proj, kind.chain)};
  }
  return {state.x, state.h, 0};
}

}  // namespace reachnav
