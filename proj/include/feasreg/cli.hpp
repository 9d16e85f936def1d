#pragma once

#include "feasreg/global_region.hpp"
#include "feasreg/planner.hpp"
#include "feasreg/region.hpp"
#include "feasreg/scenario.hpp"
#include "feasreg/svg.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace feasreg::cli {

// Exit codes shared by every subcommand.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 1;
inline constexpr int kEmptyRegion = 2;
inline constexpr int kNotConverged = 3;

inline GaitSchedule load_schedule(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_schedule: cannot open " + path);
  std::string line;
  std::getline(in, line);
  {
    std::istringstream ss(line);
    std::string magic, version;
    ss >> magic >> version;
    if (magic != "schedule" || version != "v1")
      throw ParseError(path + ":1: expected 'schedule v1'");
  }
  GaitSchedule schedule;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key)) continue;
    const std::string where = path + ":" + std::to_string(lineno) + ": " + key;
    if (key == "sequence") {
      schedule.sequence.clear();
      std::string leg;
      while (ss >> leg) schedule.sequence.push_back(leg);
      if (schedule.sequence.empty()) throw ParseError(where + ": empty sequence");
    } else if (key == "swing_duration") {
      if (!(ss >> schedule.swing_duration)) throw ParseError(where + ": expected seconds");
    } else if (key == "move_base_duration") {
      if (!(ss >> schedule.move_base_duration)) throw ParseError(where + ": expected seconds");
    } else if (key == "steps") {
      if (!(ss >> schedule.steps)) throw ParseError(where + ": expected a count");
    } else if (key == "velocity") {
      if (!(ss >> schedule.desired_velocity.x() >> schedule.desired_velocity.y()))
        throw ParseError(where + ": expected vx vy");
    } else {
      throw ParseError(where + ": unknown key");
    }
  }
  return schedule;
}

namespace detail {

inline ConstraintMode parse_mode(const std::string& mode) {
  if (mode == "friction") return ConstraintMode::friction_only;
  if (mode == "actuation") return ConstraintMode::actuation_only;
  if (mode == "feasible") return ConstraintMode::friction_and_actuation;
  throw ParseError("unknown mode '" + mode + "' (expected friction|actuation|feasible)");
}

inline void draw_contacts(SvgCanvas& svg, const Scenario& sc) {
  for (const Contact& c : sc.contacts) svg.add_circle(c.position.head<2>(), 0.015, "black");
  svg.add_circle(sc.com.head<2>(), 0.012, "green");
}

inline void write_region_svg(const Scenario& sc, const RegionResult& result,
                             const std::optional<RegionResult>& friction_overlay,
                             const std::string& path) {
  SvgCanvas svg;
  if (friction_overlay)
    svg.add_polygon(friction_overlay->inner, "steelblue", "none", /*dashed=*/true);
  svg.add_polygon(result.inner, "black", "gray", /*dashed=*/false, 0.45);
  draw_contacts(svg, sc);
  svg.write(path);
}

inline double percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double idx = p * (static_cast<double>(v.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(idx);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (idx - lo) * (v[hi] - v[lo]);
}

}  // namespace detail

/// region --mode M --scenario F [--eps E] [--out DIR]
inline int cmd_region(const std::string& scenario_path, const std::string& mode_str,
                      std::optional<double> eps, const std::string& out_dir,
                      std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Scenario sc;
  ConstraintMode mode;
  try {
    sc = load_scenario(scenario_path);
    mode = detail::parse_mode(mode_str);
  } catch (const ParseError& e) {
    err << e.what() << "\n";
    return kUsageError;
  }
  std::filesystem::create_directories(out_dir);
  RegionRequest req = RegionRequest::from_scenario(sc, mode);
  if (eps) req.eps = *eps;
  const auto t0 = std::chrono::steady_clock::now();
  std::optional<RegionResult> result;
  try {
    result = compute_region(req);
  } catch (const EmptyRegion& e) {
    err << e.what() << "\n";
    return kEmptyRegion;
  }
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  const std::string prefix = out_dir + "/region_" + mode_str;
  write_region_csv(*result, prefix + "_inner.csv", prefix + "_outer.csv");

  std::optional<RegionResult> friction_overlay;
  if (mode != ConstraintMode::friction_only) {
    try {
      friction_overlay = compute_region(sc, ConstraintMode::friction_only);
    } catch (const EmptyRegion&) {
    }
  }
  detail::write_region_svg(sc, *result, friction_overlay, prefix + ".svg");

  nlohmann::json meta;
  meta["mode"] = mode_str;
  meta["eps"] = req.eps;
  meta["iterations"] = result->iterations;
  meta["lp_calls"] = result->lp_calls;
  meta["area_gap"] = result->area_gap;
  meta["converged"] = result->converged;
  meta["inner_area"] = polygon_area(result->inner);
  meta["outer_area"] = polygon_area(result->outer);
  meta["bounding_box"] = result->bounding_box;
  meta["runtime_ms"] = ms;
  std::ofstream(prefix + "_meta.json") << meta.dump(2) << "\n";

  char line[256];
  std::snprintf(line, sizeof(line),
                "%s region: %zu vertices, area %.9g m^2, gap %.3g m^2, %d LPs, %.2f ms\n",
                mode_str.c_str(), result->inner.size(), polygon_area(result->inner),
                result->area_gap, result->lp_calls, ms);
  out << line;
  return result->converged ? kOk : kNotConverged;
}

/// margin --scenario F --com X,Y
inline int cmd_margin(const std::string& scenario_path, double cx, double cy,
                      std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Scenario sc;
  try {
    sc = load_scenario(scenario_path);
  } catch (const ParseError& e) {
    err << e.what() << "\n";
    return kUsageError;
  }
  std::optional<RegionResult> region;
  try {
    region = compute_region(sc, ConstraintMode::friction_and_actuation);
  } catch (const EmptyRegion& e) {
    err << e.what() << "\n";
    return kEmptyRegion;
  }
  const Vec2 c(cx, cy);
  const double r = chebyshev_margin(region->inner, c);

  // beta from the witness at the nearest feasible point.
  Vec2 probe = c;
  if (r <= 0.0) {
    const Vec2 boundary = closest_point_in_polygon(region->inner, c);
    const Vec2 centroid = region->inner.vertex_centroid();
    probe = boundary + 1e-6 * (centroid - boundary).normalized();
  }
  int beta = 1;
  const MembershipResult m = membership_oracle(sc, probe, ConstraintMode::friction_and_actuation);
  if (m.feasible) beta = torque_recovery(sc, probe, m.witness).beta ? 1 : 0;
  char line[128];
  std::snprintf(line, sizeof(line), "r %.9g\nbeta %d\n", r, beta);
  out << line;
  return kOk;
}

/// plan --scenario F --terrain T --schedule S --strategy {friction|feasible}
inline int cmd_plan(const std::string& scenario_path, const std::string& terrain_path,
                    const std::string& schedule_path, const std::string& strategy_str,
                    const std::string& out_dir, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  Scenario sc;
  HeightMap map;
  GaitSchedule schedule;
  PlanStrategy strategy;
  try {
    sc = load_scenario(scenario_path);
    map = load_heightmap(terrain_path);
    schedule = load_schedule(schedule_path);
    if (strategy_str == "friction")
      strategy = PlanStrategy::friction_based;
    else if (strategy_str == "feasible")
      strategy = PlanStrategy::feasible_based;
    else
      throw ParseError("unknown strategy '" + strategy_str + "'");
  } catch (const ParseError& e) {
    err << e.what() << "\n";
    return kUsageError;
  }
  std::filesystem::create_directories(out_dir);
  const PlanLog log = crawl_simulate(sc, schedule, map, strategy);
  const std::string prefix = out_dir + "/plan_" + strategy_str;
  write_plan_csv(log, prefix + ".csv");

  // One SVG per phase: stance feet plus the CoM track so far.
  int phase_idx = 0;
  std::vector<Vec2> com_track;
  for (const PhaseRecord& rec : log.records) {
    SvgCanvas svg;
    for (const Contact& c : sc.contacts) svg.add_circle(c.position.head<2>(), 0.01, "lightgray");
    svg.add_circle(rec.foothold.head<2>(), 0.016, rec.aborted ? "red" : "orange");
    com_track.push_back(Vec2(rec.foothold.x(), rec.foothold.y()));
    for (std::size_t i = 1; i < com_track.size(); ++i)
      svg.add_segment(com_track[i - 1], com_track[i], "green");
    svg.write(prefix + "_phase" + std::to_string(phase_idx++) + ".svg");
  }

  char line[160];
  std::snprintf(line, sizeof(line), "strategy %s: %d phases, min m_tau %.9g N*m\n",
                strategy_str.c_str(), static_cast<int>(log.records.size()), log.min_m_tau);
  out << line;
  return kOk;
}

/// global --scenario F --directions N [--volume z1,z2,...] [--out DIR]
inline int cmd_global(const std::string& scenario_path, int directions,
                      const std::vector<double>& volume_levels, const std::string& out_dir,
                      std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Scenario sc;
  try {
    sc = load_scenario(scenario_path);
  } catch (const ParseError& e) {
    err << e.what() << "\n";
    return kUsageError;
  }
  std::filesystem::create_directories(out_dir);
  SipRequest req = SipRequest::from_scenario(sc, directions);

  if (!volume_levels.empty()) {
    const auto slices = feasible_volume(sc, volume_levels, req);
    write_volume(slices, out_dir, "volume");
    for (const VolumeSlice& s : slices) {
      char line[160];
      std::snprintf(line, sizeof(line), "z %.9g: %s%s\n", s.z, to_string(s.status),
                    s.region ? "" : " (empty slice)");
      out << line;
    }
    return kOk;
  }

  const GlobalRegionResult gr = global_region(req);
  {
    std::ofstream report(out_dir + "/global_directions.txt");
    for (std::size_t i = 0; i < gr.per_direction.size(); ++i) {
      const SipVertexResult& r = gr.per_direction[i];
      char line[256];
      std::snprintf(line, sizeof(line), "%.9g %.9g %s %d %.9g %.9g\n", req.directions[i].x(),
                    req.directions[i].y(), to_string(r.status), r.iterations, r.vertex.x(),
                    r.vertex.y());
      report << line;
    }
  }
  if (!gr.hull) {
    err << "global region: fewer than 3 converged directions\n";
    return kEmptyRegion;
  }
  {
    std::ofstream csv(out_dir + "/global_region.csv");
    char buf[128];
    for (const Vec2& v : gr.hull->vertices()) {
      std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", v.x(), v.y());
      csv << buf;
    }
  }
  SvgCanvas svg;
  svg.add_polygon(*gr.hull, "black", "lightblue", false, 0.6);
  detail::draw_contacts(svg, sc);
  svg.write(out_dir + "/global_region.svg");
  char line[160];
  std::snprintf(line, sizeof(line), "global region: %d/%d directions converged, area %.9g m^2\n",
                gr.converged_count, directions, polygon_area(*gr.hull));
  out << line;
  return kOk;
}

/// bench --scenario F --repeat K
inline int cmd_bench(const std::string& scenario_path, int repeat, std::ostream& out = std::cout,
                     std::ostream& err = std::cerr) {
  Scenario sc;
  try {
    sc = load_scenario(scenario_path);
  } catch (const ParseError& e) {
    err << e.what() << "\n";
    return kUsageError;
  }
  nlohmann::json report;
  for (const char* mode_str : {"friction", "actuation", "feasible"}) {
    const ConstraintMode mode = detail::parse_mode(mode_str);
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(repeat));
    for (int k = 0; k < repeat; ++k) {
      const auto t0 = std::chrono::steady_clock::now();
      (void)compute_region(sc, mode);
      times.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                                t0)
                          .count());
    }
    const double p50 = detail::percentile(times, 0.50);
    const double p995 = detail::percentile(times, 0.995);
    report[mode_str] = {{"p50_ms", p50}, {"p99_5_ms", p995}};
    char line[256];
    std::snprintf(line, sizeof(line),
                  "%-9s p50 %8.3f ms  p99.5 %8.3f ms   (thresholds: median < 25 ms, p99.5 < "
                  "100 ms -> %s)\n",
                  mode_str, p50, p995, p50 < 25.0 && p995 < 100.0 ? "PASS" : "FAIL");
    out << line;
  }

  // Foothold batch: p = 9 triple-stance evaluations on flat ground.
  if (sc.contacts.size() >= 4) {
    const HeightMap map = flat_terrain(220, 220, 0.02, 0.0, -2.0, -2.0);
    const GaitSchedule schedule;
    std::vector<double> times;
    for (int k = 0; k < std::max(5, repeat / 10); ++k) {
      const auto t0 = std::chrono::steady_clock::now();
      (void)plan_foothold(sc, schedule.sequence[1], schedule.sequence[2], map,
                          schedule.default_foothold(sc.contacts[0].position),
                          schedule.desired_velocity);
      times.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                                t0)
                          .count());
    }
    const double p50 = detail::percentile(times, 0.50);
    report["foothold_batch"] = {{"p50_ms", p50}, {"samples", 9}};
    char line[160];
    std::snprintf(line, sizeof(line),
                  "foothold batch (p=9) median %8.3f ms   (threshold < 250 ms -> %s)\n", p50,
                  p50 < 250.0 ? "PASS" : "FAIL");
    out << line;
  }
  out << report.dump(2) << "\n";
  return kOk;
}

}  // namespace feasreg::cli
