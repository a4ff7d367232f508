// reachnav - safe navigation among non-convex obstacles
//
// Copyright (c) 2026 reachnav contributors
// SPDX-License-Identifier: MIT

#pragma once

/// \file
/// \brief Scenario schema and report emission: JSON scenario files with
/// validation and canonical round-trip, trajectory CSV parsing, deterministic
/// SVG figures (world + mode-colored path, clearance over time), PGM masks,
/// and the run dispatcher shared by the command-line driver and the
/// acceptance gate.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "reachnav/simulation.hpp"
#include "reachnav/unicycle.hpp"

namespace reachnav {

/// \brief Which robot body the scenario simulates.  A point robot is a disk
/// of zero radius (the safety margin still inflates the obstacles); the
/// unicycle adds the nonholonomic tracking layer and requires a sensor.
enum class RobotModel { kPoint, kDisk, kUnicycle };

inline const char* to_string(RobotModel m) {
  switch (m) {
    case RobotModel::kPoint: return "point";
    case RobotModel::kDisk: return "disk";
    case RobotModel::kUnicycle: return "unicycle";
  }
  return "disk";
}

/// \brief A fully validated scenario: the world, the start pose(s), the
/// controller and sensor configuration, and the simulation budgets, plus the
/// derived quantities echoed by the loader.  The target is always the
/// origin; a nonzero "target" in the file is translated away at ingestion.
struct ScenarioSpec {
  std::string name;
  std::string notes;
  WorkspaceModel model;
  Point2 start{0.0, 0.0};
  double start_heading = 0.0;       ///< unicycle initial heading [rad]
  std::vector<Point2> starts;       ///< extra start points for batch runs
  RobotModel robot = RobotModel::kDisk;
  ControllerParams controller;
  std::optional<SensorConfig> sensor;
  UnicycleParams unicycle;          ///< meaningful when robot == kUnicycle
  double resolution = 0.0;          ///< grid cell size; resolved at load
  unsigned seed = 0;
  double dt = 1e-3;
  long max_steps = 1'000'000;
  bool waive_checks = false;

  // Derived at load time and echoed in dumps and reports.
  double r_a = 0.0;                 ///< robot radius + safety margin
  double d0 = std::numeric_limits<double>::infinity();  ///< target clearance
  double eps_h = 0.0;               ///< admissible progress-quantum bound
};

/// \brief Validation failure carrying one line per violated rule.
class ScenarioError : public std::invalid_argument {
 public:
  explicit ScenarioError(std::vector<std::string> items)
      : std::invalid_argument(join(items)), items_(std::move(items)) {}

  const std::vector<std::string>& items() const { return items_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string msg = "scenario validation failed:";
    for (const auto& it : items) msg += "\n  - " + it;
    return msg;
  }
  std::vector<std::string> items_;
};

namespace detail {

using json = nlohmann::json;

inline bool finite_number(const json& j) {
  return j.is_number() && std::isfinite(j.get<double>());
}

inline std::optional<Point2> parse_point(const json& j,
                                         const std::string& where,
                                         std::vector<std::string>& errors) {
  if (!j.is_array() || j.size() != 2 || !finite_number(j[0]) ||
      !finite_number(j[1])) {
    errors.push_back(where + ": expected [x, y] with finite numbers");
    return std::nullopt;
  }
  return Point2{j[0].get<double>(), j[1].get<double>()};
}

inline std::optional<std::vector<Point2>> parse_ring(
    const json& j, const std::string& where,
    std::vector<std::string>& errors) {
  if (!j.is_array() || j.size() < 3) {
    errors.push_back(where + ": expected an array of at least 3 vertices");
    return std::nullopt;
  }
  std::vector<Point2> ring;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const auto p =
        parse_point(j[k], where + "[" + std::to_string(k) + "]", errors);
    if (!p) return std::nullopt;
    ring.push_back(*p);
  }
  return ring;
}

/// Reads an optional finite number, recording an error when present but
/// malformed.
inline double num_or(const json& obj, const char* key, double fallback,
                     const std::string& where,
                     std::vector<std::string>& errors) {
  if (!obj.contains(key)) return fallback;
  if (!finite_number(obj[key])) {
    errors.push_back(where + "." + key + ": expected a finite number");
    return fallback;
  }
  return obj[key].get<double>();
}

inline double num_required(const json& obj, const char* key,
                           const std::string& where,
                           std::vector<std::string>& errors) {
  if (!obj.contains(key)) {
    errors.push_back(where + "." + key + ": required");
    return 0.0;
  }
  return num_or(obj, key, 0.0, where, errors);
}

inline json point_json(Point2 p) { return json::array({p.x, p.y}); }

inline json region_json(const PolygonRegion& r) {
  json rings = json::array();
  for (const auto& ring : r.rings) {
    json jr = json::array();
    for (const auto& p : ring) jr.push_back(point_json(p));
    rings.push_back(std::move(jr));
  }
  return rings;
}

/// Fixed-format number for SVG output (deterministic across runs).
inline std::string svg_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

/// \brief Recomputes the derived quantities (resolved resolution, target
/// clearance d0, progress-quantum bound, capture-radius default) and
/// re-validates every semantic rule.  Called by the loader and again after
/// command-line overrides that change the grid resolution.
inline void refresh_derived(ScenarioSpec& spec) {
  std::vector<std::string> errors;
  spec.r_a = spec.model.r_a();
  if (!(spec.r_a > 0.0)) {
    errors.push_back(
        "world: robot_radius + safety_margin must be positive");
  }
  spec.controller.r_a = spec.r_a;
  if (spec.controller.alpha > 0.0 && spec.resolution <= 0.0) {
    spec.resolution = spec.controller.alpha / 20.0;
  }

  if (!errors.empty()) throw ScenarioError(std::move(errors));

  try {
    const ModifiedEnvironment env = build_modified_environment(
        spec.model, spec.controller.alpha, spec.resolution);
    spec.d0 = env.d0;
  } catch (const std::exception& e) {
    errors.push_back(std::string("world reshaping failed: ") + e.what());
    throw ScenarioError(std::move(errors));
  }

  if (std::isfinite(spec.d0)) {
    if (!(spec.d0 > spec.r_a)) {
      errors.push_back(
          "world: the target sits closer to the reshaped obstacles than "
          "r_a; no capture ball fits");
      throw ScenarioError(std::move(errors));
    }
    spec.eps_h = epsilon_upper_bound(spec.d0, spec.r_a);
    if (!(spec.controller.delta > 0.0)) {
      spec.controller.delta = 0.5 * (spec.d0 - spec.r_a);
    }
  } else {
    // No obstacle near the target: the admissible progress quantum grows
    // toward its supremum r_a, and the capture radius defaults to r_a.
    spec.eps_h = spec.r_a;
    if (!(spec.controller.delta > 0.0)) spec.controller.delta = spec.r_a;
  }

  try {
    validate(spec.controller);
    if (std::isfinite(spec.d0)) validate(spec.controller, spec.d0);
  } catch (const std::exception& e) {
    errors.push_back(e.what());
  }
  if (spec.sensor) {
    try {
      validate(*spec.sensor, spec.controller.alpha);
    } catch (const std::exception& e) {
      errors.push_back(std::string("sensor: ") + e.what());
    }
  }
  if (spec.robot == RobotModel::kUnicycle) {
    if (!spec.sensor) {
      errors.push_back("unicycle robot requires a sensor block");
    }
    if (!(spec.unicycle.eta > 0.0)) {
      spec.unicycle.eta = spec.controller.alpha - spec.r_a;
    }
    try {
      validate(spec.unicycle);
    } catch (const std::exception& e) {
      errors.push_back(std::string("unicycle: ") + e.what());
    }
    if (spec.unicycle.eta > spec.controller.alpha - spec.r_a + 1e-12) {
      errors.push_back(
          "unicycle: the avoidance band must fit inside the sensing shell "
          "(eta <= alpha - r_a)");
    }
  }
  if (!(spec.dt > 0.0)) errors.push_back("dt must be positive");
  if (spec.max_steps < 1) errors.push_back("max_steps must be at least 1");
  if (!errors.empty()) throw ScenarioError(std::move(errors));
}

/// \brief Parses and validates a scenario from JSON text.  Schema errors are
/// collected into one itemized ScenarioError; a nonzero "target" translates
/// every coordinate so the target becomes the origin; derived quantities are
/// computed and echoed on the returned spec.
inline ScenarioSpec scenario_from_json(const std::string& text) {
  using detail::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError({std::string("not valid JSON: ") + e.what()});
  }
  std::vector<std::string> errors;
  if (!j.is_object()) throw ScenarioError({"top level: expected an object"});

  ScenarioSpec spec;
  spec.name = j.value("name", std::string{});
  spec.notes = j.value("notes", std::string{});

  // --- world -------------------------------------------------------------
  if (!j.contains("world") || !j["world"].is_object()) {
    errors.push_back("world: required object");
  } else {
    const json& w = j["world"];
    spec.model.robot_radius =
        detail::num_required(w, "robot_radius", "world", errors);
    spec.model.safety_margin =
        detail::num_required(w, "safety_margin", "world", errors);
    const bool unbounded = w.value("unbounded", false);
    if (unbounded && w.contains("workspace")) {
      errors.push_back(
          "world: \"unbounded\" and \"workspace\" are mutually exclusive");
    } else if (!unbounded) {
      if (!w.contains("workspace")) {
        errors.push_back(
            "world: either \"unbounded\": true or a \"workspace\" ring is "
            "required");
      } else if (auto ring = detail::parse_ring(w["workspace"],
                                                "world.workspace", errors)) {
        spec.model.workspace.rings.push_back(std::move(*ring));
      }
    }
    if (w.contains("obstacles")) {
      if (!w["obstacles"].is_array()) {
        errors.push_back("world.obstacles: expected an array of polygons");
      } else {
        for (std::size_t i = 0; i < w["obstacles"].size(); ++i) {
          const std::string where =
              "world.obstacles[" + std::to_string(i) + "]";
          const json& jo = w["obstacles"][i];
          if (!jo.is_array() || jo.empty()) {
            errors.push_back(where +
                             ": expected an array of rings (outer first)");
            continue;
          }
          PolygonRegion region;
          for (std::size_t r = 0; r < jo.size(); ++r) {
            if (auto ring = detail::parse_ring(
                    jo[r], where + "[" + std::to_string(r) + "]", errors)) {
              region.rings.push_back(std::move(*ring));
            }
          }
          if (!region.empty()) spec.model.obstacles.push_back(region);
        }
      }
    }
  }

  // --- poses ---------------------------------------------------------------
  if (!j.contains("start")) {
    errors.push_back("start: required");
  } else if (auto p = detail::parse_point(j["start"], "start", errors)) {
    spec.start = *p;
  }
  if (j.contains("starts")) {
    if (!j["starts"].is_array()) {
      errors.push_back("starts: expected an array of [x, y] points");
    } else {
      for (std::size_t i = 0; i < j["starts"].size(); ++i) {
        if (auto p = detail::parse_point(
                j["starts"][i], "starts[" + std::to_string(i) + "]",
                errors)) {
          spec.starts.push_back(*p);
        }
      }
    }
  }
  spec.start_heading = detail::num_or(j, "start_heading", 0.0, "", errors);

  // --- robot model ---------------------------------------------------------
  const std::string robot = j.value("robot", std::string{"disk"});
  if (robot == "point") {
    spec.robot = RobotModel::kPoint;
    if (spec.model.robot_radius != 0.0) {
      errors.push_back("robot: the point model requires robot_radius 0");
    }
  } else if (robot == "disk") {
    spec.robot = RobotModel::kDisk;
  } else if (robot == "unicycle") {
    spec.robot = RobotModel::kUnicycle;
  } else {
    errors.push_back("robot: expected \"point\", \"disk\", or \"unicycle\"");
  }

  // --- controller ------------------------------------------------------------
  if (!j.contains("controller") || !j["controller"].is_object()) {
    errors.push_back("controller: required object");
  } else {
    const json& c = j["controller"];
    if (c.contains("r_a")) {
      errors.push_back(
          "controller.r_a is derived from the world block; remove it");
    }
    spec.controller.kappa_s =
        detail::num_required(c, "kappa_s", "controller", errors);
    spec.controller.kappa_r =
        detail::num_required(c, "kappa_r", "controller", errors);
    spec.controller.alpha =
        detail::num_required(c, "alpha", "controller", errors);
    spec.controller.gamma =
        detail::num_required(c, "gamma", "controller", errors);
    spec.controller.gamma_s =
        detail::num_required(c, "gamma_s", "controller", errors);
    spec.controller.epsilon =
        detail::num_required(c, "epsilon", "controller", errors);
    spec.controller.delta =
        detail::num_or(c, "delta", 0.0, "controller", errors);
  }

  // --- sensor / unicycle blocks ---------------------------------------------
  if (j.contains("sensor")) {
    if (!j["sensor"].is_object()) {
      errors.push_back("sensor: expected an object");
    } else {
      const json& s = j["sensor"];
      SensorConfig cfg;
      cfg.range = detail::num_required(s, "range", "sensor", errors);
      if (s.contains("ray_count") && s["ray_count"].is_number_integer()) {
        cfg.ray_count = s["ray_count"].get<int>();
      } else {
        errors.push_back("sensor.ray_count: required integer");
      }
      cfg.noise_sigma =
          detail::num_or(s, "noise_sigma", 0.0, "sensor", errors);
      spec.sensor = cfg;
    }
  }
  if (j.contains("unicycle")) {
    if (spec.robot != RobotModel::kUnicycle) {
      errors.push_back("unicycle block requires robot \"unicycle\"");
    } else if (!j["unicycle"].is_object()) {
      errors.push_back("unicycle: expected an object");
    } else {
      const json& u = j["unicycle"];
      spec.unicycle.nu_max =
          detail::num_or(u, "nu_max", spec.unicycle.nu_max, "unicycle",
                         errors);
      spec.unicycle.omega_max =
          detail::num_or(u, "omega_max", spec.unicycle.omega_max, "unicycle",
                         errors);
      spec.unicycle.kappa_nu =
          detail::num_or(u, "kappa_nu", spec.unicycle.kappa_nu, "unicycle",
                         errors);
      spec.unicycle.kappa_omega = detail::num_or(
          u, "kappa_omega", spec.unicycle.kappa_omega, "unicycle", errors);
      if (u.contains("n")) {
        if (!u["n"].is_number_integer()) {
          errors.push_back("unicycle.n: expected an integer");
        } else {
          spec.unicycle.n = u["n"].get<int>();
        }
      }
      spec.unicycle.eta =
          detail::num_or(u, "eta", 0.0, "unicycle", errors);
    }
  }

  // --- budgets and knobs ------------------------------------------------------
  spec.resolution = detail::num_or(j, "resolution", 0.0, "", errors);
  spec.dt = detail::num_or(j, "dt", 1e-3, "", errors);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) {
      errors.push_back("seed: expected a non-negative integer");
    } else {
      spec.seed = j["seed"].get<unsigned>();
    }
  }
  if (j.contains("max_steps")) {
    if (!j["max_steps"].is_number_integer()) {
      errors.push_back("max_steps: expected an integer");
    } else {
      spec.max_steps = j["max_steps"].get<long>();
    }
  }
  spec.waive_checks = j.value("waive_checks", false);

  // --- target translation ------------------------------------------------------
  if (j.contains("target")) {
    if (auto t = detail::parse_point(j["target"], "target", errors)) {
      const Vector2 shift{-t->x, -t->y};
      const auto move = [&](Point2& p) { p = p + shift; };
      move(spec.start);
      for (auto& p : spec.starts) move(p);
      for (auto& ring : spec.model.workspace.rings) {
        for (auto& p : ring) move(p);
      }
      for (auto& obs : spec.model.obstacles) {
        for (auto& ring : obs.rings) {
          for (auto& p : ring) move(p);
        }
      }
    }
  }

  if (!errors.empty()) throw ScenarioError(std::move(errors));
  refresh_derived(spec);
  return spec;
}

/// \brief Canonical JSON for a loaded spec: keys sorted, derived quantities
/// echoed under "derived", target already translated to the origin.  Feeding
/// the output back through the loader reproduces the same spec and the same
/// bytes.
inline std::string scenario_to_json(const ScenarioSpec& spec) {
  using detail::json;
  json j;
  if (!spec.name.empty()) j["name"] = spec.name;
  if (!spec.notes.empty()) j["notes"] = spec.notes;

  json w;
  w["robot_radius"] = spec.model.robot_radius;
  w["safety_margin"] = spec.model.safety_margin;
  if (spec.model.bounded()) {
    json ring = json::array();
    for (const auto& p : spec.model.workspace.rings.front()) {
      ring.push_back(detail::point_json(p));
    }
    w["workspace"] = std::move(ring);
  } else {
    w["unbounded"] = true;
  }
  if (!spec.model.obstacles.empty()) {
    json obs = json::array();
    for (const auto& o : spec.model.obstacles) {
      obs.push_back(detail::region_json(o));
    }
    w["obstacles"] = std::move(obs);
  }
  j["world"] = std::move(w);

  j["start"] = detail::point_json(spec.start);
  if (!spec.starts.empty()) {
    json ss = json::array();
    for (const auto& p : spec.starts) ss.push_back(detail::point_json(p));
    j["starts"] = std::move(ss);
  }
  j["robot"] = to_string(spec.robot);

  json c;
  c["kappa_s"] = spec.controller.kappa_s;
  c["kappa_r"] = spec.controller.kappa_r;
  c["alpha"] = spec.controller.alpha;
  c["gamma"] = spec.controller.gamma;
  c["gamma_s"] = spec.controller.gamma_s;
  c["delta"] = spec.controller.delta;
  c["epsilon"] = spec.controller.epsilon;
  j["controller"] = std::move(c);

  if (spec.sensor) {
    json s;
    s["range"] = spec.sensor->range;
    s["ray_count"] = spec.sensor->ray_count;
    s["noise_sigma"] = spec.sensor->noise_sigma;
    j["sensor"] = std::move(s);
  }
  if (spec.robot == RobotModel::kUnicycle) {
    json u;
    u["nu_max"] = spec.unicycle.nu_max;
    u["omega_max"] = spec.unicycle.omega_max;
    u["kappa_nu"] = spec.unicycle.kappa_nu;
    u["kappa_omega"] = spec.unicycle.kappa_omega;
    u["n"] = spec.unicycle.n;
    u["eta"] = spec.unicycle.eta;
    j["unicycle"] = std::move(u);
    j["start_heading"] = spec.start_heading;
  }

  j["resolution"] = spec.resolution;
  j["seed"] = spec.seed;
  j["dt"] = spec.dt;
  j["max_steps"] = spec.max_steps;
  if (spec.waive_checks) j["waive_checks"] = true;

  json d;
  d["r_a"] = spec.r_a;
  d["eps_h"] = spec.eps_h;
  if (std::isfinite(spec.d0)) d["d0"] = spec.d0;
  j["derived"] = std::move(d);

  return j.dump(2) + "\n";
}

/// \brief Loads a scenario file; itemized ScenarioError on any violation.
inline ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError({"cannot open scenario file: " + path});
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

/// \brief Simulation options a spec requests (before CLI overrides).
inline SimulationOptions simulation_options(const ScenarioSpec& spec) {
  SimulationOptions o;
  o.dt = spec.dt;
  o.max_steps = spec.max_steps;
  o.resolution = spec.resolution;
  o.seed = spec.seed;
  o.waive_checks = spec.waive_checks;
  return o;
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

/// \brief Everything one closed-loop run produces: the dense log, the
/// aggregate verdict, the virtual-ring audit (sensor runs), and the parallel
/// pose rows (unicycle runs).
struct RunArtifacts {
  TrajectoryLog log;
  ScenarioResult result;
  RingAudit ring_audit;
  std::vector<UnicycleSample> poses;  ///< non-empty for unicycle runs
};

/// \brief Runs one scenario from the given start pose, dispatching on the
/// robot model: known-map or sensor-driven disk loop, or the unicycle
/// tracking loop.  Throws what the underlying runner throws.
inline RunArtifacts execute_scenario(const ScenarioSpec& spec, Point2 start,
                                     double heading,
                                     const SimulationOptions& options) {
  RunArtifacts out;
  if (spec.robot == RobotModel::kUnicycle) {
    if (!spec.sensor) {
      throw ScenarioError({"unicycle robot requires a sensor block"});
    }
    UnicycleRunOutcome uni = run_scenario_unicycle(
        spec.model, {start, heading}, spec.controller, spec.unicycle,
        *spec.sensor, options);
    out.log = std::move(uni.log);
    out.result = uni.result;
    out.ring_audit = uni.ring_audit;
    out.poses = std::move(uni.poses);
    return out;
  }
  if (spec.sensor) {
    RunOutcome run =
        run_scenario(spec.model, start, spec.controller, *spec.sensor,
                     options);
    out.log = std::move(run.log);
    out.result = run.result;
    out.ring_audit = run.ring_audit;
    return out;
  }
  RunOutcome run = run_scenario(spec.model, start, spec.controller, options);
  out.log = std::move(run.log);
  out.result = run.result;
  return out;
}

inline RunArtifacts execute_scenario(const ScenarioSpec& spec) {
  return execute_scenario(spec, spec.start, spec.start_heading,
                          simulation_options(spec));
}

// ---------------------------------------------------------------------------
// CSV round trip
// ---------------------------------------------------------------------------

/// \brief Parses a trajectory CSV written by the log exporters (either the
/// plain ten-column disk format or the thirteen-column unicycle format) back
/// into a sample log.  Jump records are not part of the CSV and come back
/// empty; the renderers do not use them.
inline TrajectoryLog read_trajectory_csv(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) {
    throw std::invalid_argument("trajectory CSV: empty input");
  }
  const bool plain = header == "t,j,x,y,hx,hy,m,clearance,ux,uy";
  const bool extended =
      header == "t,j,x,y,hx,hy,m,clearance,ux,uy,theta,nu,omega";
  if (!plain && !extended) {
    throw std::invalid_argument("trajectory CSV: unrecognized header");
  }
  TrajectoryLog log;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    TrajectorySample s;
    double theta = 0.0, nu = 0.0, omega = 0.0;
    const int want = extended ? 13 : 10;
    const int got = std::sscanf(
        line.c_str(), "%lf,%d,%lf,%lf,%lf,%lf,%d,%lf,%lf,%lf,%lf,%lf,%lf",
        &s.stamp.t, &s.stamp.j, &s.state.x.x, &s.state.x.y, &s.state.h.x,
        &s.state.h.y, &s.state.m, &s.clearance, &s.control.x, &s.control.y,
        &theta, &nu, &omega);
    if (got != want) {
      throw std::invalid_argument("trajectory CSV: malformed row at line " +
                                  std::to_string(lineno));
    }
    log.samples.push_back(s);
  }
  return log;
}

// ---------------------------------------------------------------------------
// Figures
// ---------------------------------------------------------------------------

namespace detail {

struct Bbox {
  double minx = std::numeric_limits<double>::infinity();
  double miny = std::numeric_limits<double>::infinity();
  double maxx = -std::numeric_limits<double>::infinity();
  double maxy = -std::numeric_limits<double>::infinity();

  void add(Point2 p) {
    minx = std::min(minx, p.x);
    miny = std::min(miny, p.y);
    maxx = std::max(maxx, p.x);
    maxy = std::max(maxy, p.y);
  }
};

inline std::string region_path_data(const PolygonRegion& r,
                                    const Bbox& bb, double scale) {
  std::string d;
  for (const auto& ring : r.rings) {
    for (std::size_t i = 0; i < ring.size(); ++i) {
      d += (i == 0 ? "M" : "L");
      d += svg_num((ring[i].x - bb.minx) * scale);
      d += " ";
      d += svg_num((bb.maxy - ring[i].y) * scale);
    }
    d += "Z";
  }
  return d;
}

}  // namespace detail

/// \brief World-and-path figure: obstacles in gray, the workspace outline
/// when bounded, the capture circle at the origin, and each trajectory as a
/// polyline colored by mode (blue while moving to the target, red while
/// avoiding).  Deterministic byte-for-byte for the same spec and logs; only
/// the sample rows are consulted, so re-rendering from an exported CSV
/// reproduces the exact file.
inline std::string render_trajectory_svg(
    const ScenarioSpec& spec, const std::vector<const TrajectoryLog*>& logs) {
  detail::Bbox bb;
  bb.add({0.0, 0.0});
  for (const auto& ring : spec.model.workspace.rings) {
    for (const auto& p : ring) bb.add(p);
  }
  for (const auto& o : spec.model.obstacles) {
    for (const auto& ring : o.rings) {
      for (const auto& p : ring) bb.add(p);
    }
  }
  for (const auto* log : logs) {
    for (const auto& s : log->samples) bb.add(s.state.x);
  }
  const double pad =
      0.06 * std::max({bb.maxx - bb.minx, bb.maxy - bb.miny, 1.0});
  bb.minx -= pad;
  bb.miny -= pad;
  bb.maxx += pad;
  bb.maxy += pad;
  const double scale = 800.0 / (bb.maxx - bb.minx);
  const double height = (bb.maxy - bb.miny) * scale;
  const auto X = [&](double x) { return detail::svg_num((x - bb.minx) * scale); };
  const auto Y = [&](double y) { return detail::svg_num((bb.maxy - y) * scale); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"" +
         detail::svg_num(height) + "\" viewBox=\"0 0 800 " +
         detail::svg_num(height) + "\">\n";
  svg += "<rect width=\"800\" height=\"" + detail::svg_num(height) +
         "\" fill=\"#ffffff\"/>\n";
  if (spec.model.bounded()) {
    svg += "<path d=\"" +
           detail::region_path_data(spec.model.workspace, bb, scale) +
           "\" fill=\"none\" stroke=\"#444444\" stroke-width=\"2\"/>\n";
  }
  for (const auto& o : spec.model.obstacles) {
    svg += "<path d=\"" + detail::region_path_data(o, bb, scale) +
           "\" fill=\"#b9c0c7\" fill-rule=\"evenodd\" stroke=\"#6b7178\" "
           "stroke-width=\"1\"/>\n";
  }
  // Capture circle and target cross at the origin.
  svg += "<circle cx=\"" + X(0.0) + "\" cy=\"" + Y(0.0) + "\" r=\"" +
         detail::svg_num(0.5 * spec.controller.delta * scale) +
         "\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"1.5\" "
         "stroke-dasharray=\"4 3\"/>\n";
  svg += "<circle cx=\"" + X(0.0) + "\" cy=\"" + Y(0.0) +
         "\" r=\"3\" fill=\"#2ca02c\"/>\n";

  for (const auto* log : logs) {
    const auto& smp = log->samples;
    // Chunks of equal mode become polylines; each chunk borrows the first
    // point of the next so the drawn path is continuous.
    std::size_t i = 0;
    while (i < smp.size()) {
      std::size_t k = i;
      while (k + 1 < smp.size() && smp[k + 1].state.m == smp[i].state.m) ++k;
      std::string pts;
      for (std::size_t q = i; q <= std::min(k + 1, smp.size() - 1); ++q) {
        pts += X(smp[q].state.x.x);
        pts += ",";
        pts += Y(smp[q].state.x.y);
        pts += " ";
      }
      const bool avoid = smp[i].state.m != 0;
      svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" +
             (avoid ? "#d62728" : "#1f77b4") + "\" stroke-width=\"1.8\"/>\n";
      i = k + 1;
    }
    if (!smp.empty()) {
      svg += "<circle cx=\"" + X(smp.front().state.x.x) + "\" cy=\"" +
             Y(smp.front().state.x.y) +
             "\" r=\"3.5\" fill=\"#111111\"/>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

inline std::string render_trajectory_svg(const ScenarioSpec& spec,
                                         const TrajectoryLog& log) {
  return render_trajectory_svg(spec, std::vector<const TrajectoryLog*>{&log});
}

/// \brief Clearance-over-time figure with the inflation radius r_a marked as
/// a dashed line.  Samples with non-finite clearance (no obstacle anywhere)
/// are skipped.  Deterministic for the same spec and logs.
inline std::string render_clearance_svg(
    const ScenarioSpec& spec, const std::vector<const TrajectoryLog*>& logs) {
  double tmax = 0.0;
  double cmax = spec.r_a;
  for (const auto* log : logs) {
    for (const auto& s : log->samples) {
      tmax = std::max(tmax, s.stamp.t);
      if (std::isfinite(s.clearance)) cmax = std::max(cmax, s.clearance);
    }
  }
  if (tmax <= 0.0) tmax = 1.0;
  cmax *= 1.05;
  const double W = 800.0, H = 300.0, L = 60.0, B = 36.0;
  const auto X = [&](double t) {
    return detail::svg_num(L + (W - L - 10.0) * (t / tmax));
  };
  const auto Y = [&](double c) {
    return detail::svg_num(H - B - (H - B - 10.0) * (c / cmax));
  };
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" "
         "height=\"300\" viewBox=\"0 0 800 300\">\n";
  svg += "<rect width=\"800\" height=\"300\" fill=\"#ffffff\"/>\n";
  svg += "<line x1=\"" + detail::svg_num(L) + "\" y1=\"10\" x2=\"" +
         detail::svg_num(L) + "\" y2=\"" + detail::svg_num(H - B) +
         "\" stroke=\"#333333\"/>\n";
  svg += "<line x1=\"" + detail::svg_num(L) + "\" y1=\"" +
         detail::svg_num(H - B) + "\" x2=\"790\" y2=\"" +
         detail::svg_num(H - B) + "\" stroke=\"#333333\"/>\n";
  svg += "<line x1=\"" + detail::svg_num(L) + "\" y1=\"" + Y(spec.r_a) +
         "\" x2=\"790\" y2=\"" + Y(spec.r_a) +
         "\" stroke=\"#d62728\" stroke-dasharray=\"5 4\"/>\n";
  svg += "<text x=\"8\" y=\"" + Y(spec.r_a) +
         "\" font-size=\"12\" fill=\"#d62728\">r_a=" +
         detail::svg_num(spec.r_a) + "</text>\n";
  svg += "<text x=\"8\" y=\"20\" font-size=\"12\" fill=\"#333333\">"
         "clearance [m], max " + detail::svg_num(cmax) + "</text>\n";
  svg += "<text x=\"740\" y=\"" + detail::svg_num(H - 12.0) +
         "\" font-size=\"12\" fill=\"#333333\">t=" + detail::svg_num(tmax) +
         "s</text>\n";
  for (const auto* log : logs) {
    std::string pts;
    for (const auto& s : log->samples) {
      if (!std::isfinite(s.clearance)) continue;
      pts += X(s.stamp.t);
      pts += ",";
      pts += Y(s.clearance);
      pts += " ";
    }
    if (!pts.empty()) {
      svg += "<polyline points=\"" + pts +
             "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

inline std::string render_clearance_svg(const ScenarioSpec& spec,
                                        const TrajectoryLog& log) {
  return render_clearance_svg(spec, std::vector<const TrajectoryLog*>{&log});
}

// ---------------------------------------------------------------------------
// Reports and masks
// ---------------------------------------------------------------------------

namespace detail {

inline json finite_or_null(double v) {
  if (std::isfinite(v)) return json(v);
  return json();
}

}  // namespace detail

/// \brief Aggregate verdict of one run as canonical JSON (non-finite values
/// become null).  Sensor runs include the virtual-ring audit.
inline std::string result_to_json(const ScenarioSpec& spec,
                                  const RunArtifacts& run) {
  using detail::json;
  json j;
  if (!spec.name.empty()) j["name"] = spec.name;
  j["converged"] = run.result.converged;
  j["time_to_converge"] = detail::finite_or_null(run.result.time_to_converge);
  j["jump_count"] = run.result.jump_count;
  j["min_clearance"] = detail::finite_or_null(run.result.min_clearance);
  j["path_length"] = run.result.path_length;
  j["checks_waived"] = run.result.checks_waived;
  json d;
  d["r_a"] = spec.r_a;
  d["eps_h"] = spec.eps_h;
  if (std::isfinite(spec.d0)) d["d0"] = spec.d0;
  d["resolution"] = spec.resolution;
  j["derived"] = std::move(d);
  if (run.ring_audit.tracked_steps > 0) {
    json r;
    r["tracked_steps"] = run.ring_audit.tracked_steps;
    r["min_containment_slack"] =
        detail::finite_or_null(run.ring_audit.min_containment_slack);
    r["min_boundary_gap"] =
        detail::finite_or_null(run.ring_audit.min_boundary_gap);
    j["ring"] = std::move(r);
  }
  return j.dump(2) + "\n";
}

/// \brief Occupancy mask as an ASCII PGM image: occupied cells black, free
/// cells white, rows top-to-bottom (north up).
inline std::string mask_to_pgm(const GridMask& m) {
  std::string out = "P2\n" + std::to_string(m.width) + " " +
                    std::to_string(m.height) + "\n255\n";
  for (int iy = m.height - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < m.width; ++ix) {
      out += (m.bits[m.index(ix, iy)] ? "0" : "255");
      out += (ix + 1 == m.width ? "\n" : " ");
    }
  }
  return out;
}

/// \brief Geo-reference sidecar for a PGM mask.
inline std::string mask_sidecar_json(const GridMask& m) {
  using detail::json;
  json j;
  j["origin"] = detail::point_json(m.origin);
  j["resolution"] = m.resolution;
  j["width"] = m.width;
  j["height"] = m.height;
  j["outside_occupied"] = m.outside_occupied;
  return j.dump(2) + "\n";
}

/// \brief Writes the full report bundle for one run into `dir`: result JSON,
/// trajectory CSV (extended columns for unicycle runs), jump CSV, and the
/// two SVG figures.  Returns the paths written.
inline std::vector<std::filesystem::path> write_report_bundle(
    const std::filesystem::path& dir, const ScenarioSpec& spec,
    const RunArtifacts& run) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<fs::path> written;
  const auto emit = [&](const char* name, const std::string& content) {
    const fs::path p = dir / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << content;
    written.push_back(p);
  };

  emit("result.json", result_to_json(spec, run));
  {
    std::ostringstream os;
    if (!run.poses.empty()) {
      UnicycleRunOutcome uni;
      uni.log = run.log;
      uni.poses = run.poses;
      uni.result = run.result;
      uni.ring_audit = run.ring_audit;
      write_unicycle_trajectory_csv(uni, os);
    } else {
      write_trajectory_csv(run.log, os);
    }
    emit("trajectory.csv", os.str());
  }
  {
    std::ostringstream os;
    write_jumps_csv(run.log, os);
    emit("jumps.csv", os.str());
  }
  emit("trajectory.svg", render_trajectory_svg(spec, run.log));
  emit("clearance.svg", render_clearance_svg(spec, run.log));
  return written;
}

/// \brief One scan serialized as CSV: bearing, measured range, whether the
/// ray returned, and the Cartesian hit point (at the measured range).
inline std::string scan_to_csv(const Scan& s) {
  std::string out = "index,theta,range,hit,px,py\n";
  char buf[192];
  for (std::size_t k = 0; k < s.rays.size(); ++k) {
    const auto& r = s.rays[k];
    const Point2 p = s.origin +
                     Vector2{std::cos(r.theta), std::sin(r.theta)} * r.range;
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%d,%.17g,%.17g\n", k,
                  r.theta, r.range, r.range < s.max_range ? 1 : 0, p.x, p.y);
    out += buf;
  }
  return out;
}

}  // namespace reachnav
