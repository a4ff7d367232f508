// reachnav - safe navigation among non-convex obstacles
//
// Copyright (c) 2026 reachnav contributors
// SPDX-License-Identifier: MIT

/// \file
/// \brief Command-line driver: check assumptions, reshape the world, run or
/// batch-run scenarios, dump a single scan, and re-render figures from CSV.
///
/// Exit codes: 0 success, 1 validation error or unconverged run, 2 reserved
/// exclusively for a safety breach during simulation.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "reachnav/scenario_io.hpp"

namespace fs = std::filesystem;
using namespace reachnav;

namespace {

struct CommonFlags {
  std::string scenario;
  std::string out_dir;
  bool have_seed = false;
  unsigned seed = 0;
  bool have_dt = false;
  double dt = 0.0;
  bool have_budget = false;
  long budget = 0;
  bool have_resolution = false;
  double resolution = 0.0;
  bool waive_checks = false;
  int workers = 4;
  std::string csv;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_out) {
  cmd->add_option("--scenario", f.scenario, "scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  auto* out = cmd->add_option("--out-dir", f.out_dir,
                              "output directory (default: $REACHNAV_OUT_DIR "
                              "or ./reachnav_out)");
  (void)out;
  (void)needs_out;
  cmd->add_option("--seed", f.seed, "override the scenario RNG seed")
      ->each([&f](const std::string&) { f.have_seed = true; });
  cmd->add_option("--dt", f.dt, "override the integration step [s]")
      ->each([&f](const std::string&) { f.have_dt = true; });
  cmd->add_option("--budget", f.budget, "override the flow-step budget")
      ->each([&f](const std::string&) { f.have_budget = true; });
  cmd->add_option("--resolution", f.resolution, "override the grid cell size")
      ->each([&f](const std::string&) { f.have_resolution = true; });
  cmd->add_flag("--waive-checks", f.waive_checks,
                "skip the workspace certificates before running");
  cmd->add_option("--workers", f.workers, "worker threads for batch runs");
}

fs::path resolve_out_dir(const CommonFlags& f) {
  if (!f.out_dir.empty()) return f.out_dir;
  if (const char* env = std::getenv("REACHNAV_OUT_DIR")) {
    if (*env) return env;
  }
  return "reachnav_out";
}

ScenarioSpec load_with_overrides(const CommonFlags& f) {
  ScenarioSpec spec = load_scenario(f.scenario);
  if (f.have_seed) spec.seed = f.seed;
  if (f.have_dt) spec.dt = f.dt;
  if (f.have_budget) spec.max_steps = f.budget;
  if (f.waive_checks) spec.waive_checks = true;
  if (f.have_resolution) {
    spec.resolution = f.resolution;
    refresh_derived(spec);  // d0 and its dependents are grid-derived
  }
  return spec;
}

const char* yes_no(bool b) { return b ? "yes" : "no"; }

/// Connectivity of the reshaped eroded free space V_{r_a}: after closing,
/// the free set must form a single component containing both the target and
/// the start cell.
bool modified_space_connected(const ScenarioSpec& spec, std::string& detail) {
  const ModifiedEnvironment env = build_modified_environment(
      spec.model, spec.controller.alpha, spec.resolution);
  const GridMask vfree = free_space(env.closed_mask, spec.r_a);
  const auto [ox, oy] = vfree.cell_of({0.0, 0.0});
  if (!vfree.contains(ox, oy) || !vfree.bits[vfree.index(ox, oy)]) {
    detail = "target cell is not in the reshaped free space";
    return false;
  }
  const auto [labels, count] = label_components(vfree, true, 8);
  if (count != 1) {
    detail = "free set splits into " + std::to_string(count) + " components";
    return false;
  }
  const auto [sx, sy] = vfree.cell_of(spec.start);
  if (vfree.contains(sx, sy) &&
      labels[vfree.index(sx, sy)] != labels[vfree.index(ox, oy)]) {
    detail = "start and target lie in different components";
    return false;
  }
  return true;
}

int cmd_check(const CommonFlags& f) {
  const ScenarioSpec spec = load_with_overrides(f);
  std::printf("scenario: %s\n",
              spec.name.empty() ? f.scenario.c_str() : spec.name.c_str());
  std::printf("  r_a = %.6g, alpha = %.6g, resolution = %.6g\n", spec.r_a,
              spec.controller.alpha, spec.resolution);
  if (std::isfinite(spec.d0)) {
    std::printf("  d0 = %.6g, eps_h = %.6g, epsilon = %.6g, delta = %.6g\n",
                spec.d0, spec.eps_h, spec.controller.epsilon,
                spec.controller.delta);
  } else {
    std::printf("  d0 = inf, eps_h = %.6g (supremum), epsilon = %.6g, "
                "delta = %.6g\n",
                spec.eps_h, spec.controller.epsilon, spec.controller.delta);
  }
  const bool empty_world =
      spec.model.obstacles.empty() && !spec.model.bounded();
  if (empty_world) {
    std::printf("  no obstacles: certificates trivially hold\n");
    return 0;
  }
  bool ok = true;
  const bool raw_conn =
      check_assumption_connectivity(spec.model, spec.resolution);
  std::printf("  eroded free space W_{r_a} connected: %s\n",
              yes_no(raw_conn));
  ok = ok && raw_conn;

  std::string detail;
  const bool mod_conn = modified_space_connected(spec, detail);
  if (mod_conn) {
    std::printf("  reshaped free space V_{r_a} connected: yes\n");
  } else {
    std::printf("  V_{r_a} disconnected: %s\n", detail.c_str());
  }
  ok = ok && mod_conn;

  const bool reach = check_assumption_reach(spec.model, spec.controller.alpha);
  std::printf("  unique-projection certificate: %s\n",
              reach ? "pass" : "fail");
  ok = ok && reach;

  std::printf("assumptions %s\n", ok ? "hold" : "violated");
  return ok ? 0 : 1;
}

int cmd_reshape(const CommonFlags& f) {
  const ScenarioSpec spec = load_with_overrides(f);
  const ModifiedEnvironment env = build_modified_environment(
      spec.model, spec.controller.alpha, spec.resolution);
  const fs::path dir = resolve_out_dir(f);
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "reshaped.pgm", std::ios::binary);
    out << mask_to_pgm(env.closed_mask);
  }
  {
    std::ofstream out(dir / "reshaped.json", std::ios::binary);
    out << mask_sidecar_json(env.closed_mask);
  }
  std::printf("wrote %s and %s\n", (dir / "reshaped.pgm").string().c_str(),
              (dir / "reshaped.json").string().c_str());
  return 0;
}

int cmd_run(const CommonFlags& f) {
  const ScenarioSpec spec = load_with_overrides(f);
  const RunArtifacts run = execute_scenario(spec);
  const fs::path dir = resolve_out_dir(f);
  write_report_bundle(dir, spec, run);
  std::printf("%s: %s in %.3f s, %ld jumps, min clearance %.4g, report in "
              "%s\n",
              spec.name.empty() ? "run" : spec.name.c_str(),
              run.result.converged ? "converged" : "budget exhausted",
              run.result.time_to_converge, run.result.jump_count,
              run.result.min_clearance, dir.string().c_str());
  return run.result.converged ? 0 : 1;
}

int cmd_batch(const CommonFlags& f) {
  const ScenarioSpec spec = load_with_overrides(f);
  std::vector<Point2> starts = spec.starts;
  if (starts.empty()) starts.push_back(spec.start);

  struct Row {
    bool done = false;
    bool breach = false;
    std::string error;
    RunArtifacts run;
  };
  std::vector<Row> rows(starts.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= starts.size()) return;
      SimulationOptions o = simulation_options(spec);
      o.seed = spec.seed + static_cast<unsigned>(i);
      try {
        rows[i].run =
            execute_scenario(spec, starts[i], spec.start_heading, o);
        rows[i].done = true;
      } catch (const SafetyBreachError& e) {
        rows[i].breach = true;
        rows[i].error = e.what();
      } catch (const std::exception& e) {
        rows[i].error = e.what();
      }
    }
  };
  const int n_workers = std::max(
      1, std::min<int>(f.workers, static_cast<int>(starts.size())));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();

  const fs::path dir = resolve_out_dir(f);
  fs::create_directories(dir);
  nlohmann::json merged;
  merged["name"] = spec.name;
  nlohmann::json jruns = nlohmann::json::array();
  std::vector<const TrajectoryLog*> logs;
  bool all_converged = true;
  bool any_breach = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    nlohmann::json jr;
    jr["index"] = i;
    jr["start"] = nlohmann::json::array({starts[i].x, starts[i].y});
    if (rows[i].done) {
      const ScenarioResult& r = rows[i].run.result;
      jr["converged"] = r.converged;
      jr["time_to_converge"] = std::isfinite(r.time_to_converge)
                                   ? nlohmann::json(r.time_to_converge)
                                   : nlohmann::json();
      jr["jump_count"] = r.jump_count;
      jr["min_clearance"] = std::isfinite(r.min_clearance)
                                ? nlohmann::json(r.min_clearance)
                                : nlohmann::json();
      jr["path_length"] = r.path_length;
      all_converged = all_converged && r.converged;
      logs.push_back(&rows[i].run.log);
      char name[32];
      std::snprintf(name, sizeof name, "run_%03zu", i);
      write_report_bundle(dir / name, spec, rows[i].run);
    } else {
      jr["error"] = rows[i].error;
      all_converged = false;
      any_breach = any_breach || rows[i].breach;
    }
    jruns.push_back(std::move(jr));
  }
  merged["all_converged"] = all_converged;
  merged["runs"] = std::move(jruns);
  {
    std::ofstream out(dir / "batch.json", std::ios::binary);
    out << merged.dump(2) << "\n";
  }
  {
    std::ofstream out(dir / "batch.svg", std::ios::binary);
    out << render_trajectory_svg(spec, logs);
  }
  std::printf("batch: %zu runs, %s, report in %s\n", rows.size(),
              all_converged ? "all converged" : "NOT all converged",
              dir.string().c_str());
  if (any_breach) return 2;
  return all_converged ? 0 : 1;
}

int cmd_scan(const CommonFlags& f) {
  const ScenarioSpec spec = load_with_overrides(f);
  if (!spec.sensor) {
    throw ScenarioError({"scan requires a sensor block in the scenario"});
  }
  const Scan s = scan(spec.start, spec.model, *spec.sensor, spec.seed);
  const fs::path dir = resolve_out_dir(f);
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "scan.csv", std::ios::binary);
    out << scan_to_csv(s);
  }
  std::printf("wrote %s (%zu rays)\n", (dir / "scan.csv").string().c_str(),
              s.rays.size());
  return 0;
}

int cmd_plot(const CommonFlags& f) {
  const ScenarioSpec spec = load_with_overrides(f);
  if (f.csv.empty()) {
    throw ScenarioError({"plot requires --csv with a trajectory CSV"});
  }
  std::ifstream in(f.csv, std::ios::binary);
  if (!in) throw ScenarioError({"cannot open CSV file: " + f.csv});
  const TrajectoryLog log = read_trajectory_csv(in);
  const fs::path dir = resolve_out_dir(f);
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "trajectory.svg", std::ios::binary);
    out << render_trajectory_svg(spec, log);
  }
  {
    std::ofstream out(dir / "clearance.svg", std::ios::binary);
    out << render_clearance_svg(spec, log);
  }
  std::printf("wrote %s and %s\n",
              (dir / "trajectory.svg").string().c_str(),
              (dir / "clearance.svg").string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reachnav: safe navigation among non-convex obstacles"};
  app.require_subcommand(1);

  CommonFlags flags;
  CLI::App* c_check =
      app.add_subcommand("check", "report whether the world assumptions hold");
  add_common(c_check, flags, false);
  CLI::App* c_reshape =
      app.add_subcommand("reshape", "emit the reshaped obstacle mask as PGM");
  add_common(c_reshape, flags, true);
  CLI::App* c_run =
      app.add_subcommand("run", "run one scenario and write its report");
  add_common(c_run, flags, true);
  CLI::App* c_batch =
      app.add_subcommand("batch", "run every start point and merge reports");
  add_common(c_batch, flags, true);
  CLI::App* c_scan =
      app.add_subcommand("scan", "dump one sensor sweep from the start pose");
  add_common(c_scan, flags, true);
  CLI::App* c_plot =
      app.add_subcommand("plot", "re-render figures from a trajectory CSV");
  add_common(c_plot, flags, true);
  c_plot->add_option("--csv", flags.csv, "trajectory CSV to render")
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (c_check->parsed()) return cmd_check(flags);
    if (c_reshape->parsed()) return cmd_reshape(flags);
    if (c_run->parsed()) return cmd_run(flags);
    if (c_batch->parsed()) return cmd_batch(flags);
    if (c_scan->parsed()) return cmd_scan(flags);
    if (c_plot->parsed()) return cmd_plot(flags);
  } catch (const SafetyBreachError& e) {
    std::fprintf(stderr, "safety breach: %s\n", e.what());
    return 2;
  } catch (const ScenarioError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
