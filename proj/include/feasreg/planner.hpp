#pragma once

#include "feasreg/region.hpp"
#include "feasreg/terrain.hpp"

#include <cmath>
#include <fstream>
#include <future>
#include <map>
#include <string>
#include <vector>

namespace feasreg {

struct GaitSchedule {
  std::vector<std::string> sequence = {"LH", "LF", "RH", "RF"};
  double swing_duration = 0.6;      // s
  double move_base_duration = 0.9;  // s
  int steps = 8;
  Vec2 desired_velocity = Vec2(0.03, 0.0);  // m/s, base frame == world frame

  double cycle_time() const {
    return static_cast<double>(sequence.size()) * (swing_duration + move_base_duration);
  }

  /// Default landing point: one cycle of travel ahead of the current foot.
  Vec3 default_foothold(const Vec3& foot) const {
    return foot + Vec3(desired_velocity.x(), desired_velocity.y(), 0.0) * cycle_time();
  }
};

enum class PlanStrategy { friction_based, feasible_based };

inline const char* to_string(PlanStrategy s) {
  return s == PlanStrategy::friction_based ? "friction" : "feasible";
}

/// Stance-triangle CoM heuristic: centroid shifted a fixed 0.06 m from the
/// diagonal toward the off-diagonal support leg (fixture constant). Falls
/// back to the centroid when the stance is not a standard quadruped triple.
inline Vec2 heuristic_future_com(const std::vector<std::string>& stance_legs,
                                 const std::vector<Vec3>& stance_feet) {
  Vec2 centroid = Vec2::Zero();
  for (const Vec3& p : stance_feet) centroid += p.head<2>();
  centroid /= static_cast<double>(stance_feet.size());
  if (stance_legs.size() != 3) return centroid;
  auto is_pair = [&](const std::string& a, const std::string& b, int& i, int& j) {
    i = j = -1;
    for (int k = 0; k < 3; ++k) {
      if (stance_legs[static_cast<std::size_t>(k)] == a) i = k;
      if (stance_legs[static_cast<std::size_t>(k)] == b) j = k;
    }
    return i >= 0 && j >= 0;
  };
  int i = -1, j = -1;
  if (!is_pair("LF", "RH", i, j) && !is_pair("RF", "LH", i, j)) return centroid;
  const int k = 3 - i - j;
  const Vec2 p1 = stance_feet[static_cast<std::size_t>(i)].head<2>();
  const Vec2 p2 = stance_feet[static_cast<std::size_t>(j)].head<2>();
  const Vec2 p3 = stance_feet[static_cast<std::size_t>(k)].head<2>();
  const Vec2 diag = (p2 - p1).normalized();
  Vec2 off(-diag.y(), diag.x());
  if (off.dot(p3 - p1) < 0.0) off = -off;
  return centroid + 0.06 * off;
}

struct ComTarget {
  Vec2 target = Vec2::Zero();
  bool already_inside = false;
  RegionResult region;       // unscaled region used for the decision
  Polygon2 scaled_region;
};

/// CoM target selection against the future stance: keep the current CoM when
/// it already lies in the scaled region, otherwise project onto it.
inline ComTarget com_target(const Scenario& future_stance, const Vec2& current_com, double s,
                            ConstraintMode mode = ConstraintMode::friction_and_actuation) {
  if (s <= 0.0 || s > 1.0) throw DegenerateInput("com_target: scale must be in (0, 1]");
  if (future_stance.contacts.size() < 3)
    throw DegenerateInput("com_target: future stance needs at least 3 contacts");
  RegionResult region = compute_region(future_stance, mode);
  Polygon2 scaled = scale_polygon(region.inner, s);
  ComTarget out{current_com, false, std::move(region), std::move(scaled)};
  if (point_in_polygon(out.scaled_region, current_com).location != PointLocation::outside) {
    out.already_inside = true;
    out.target = current_com;
  } else {
    out.target = closest_point_in_polygon(out.scaled_region, current_com);
  }
  return out;
}

struct FootholdCandidate {
  Vec3 position = Vec3::Zero();
  double area = 0.0;  // m^2 of the candidate feasible region
  bool discarded = false;
  std::string reason;
};

struct FootholdPlan {
  Vec3 chosen = Vec3::Zero();
  int chosen_index = -1;
  std::vector<FootholdCandidate> candidates;
};

struct FootholdParams {
  int samples = 9;            // p
  double spacing = 0.04;      // m between candidates on the sampling line
  double edge_slope_deg = 40.0;
  double edge_jump = 0.05;    // m, height discontinuity that counts as an edge
  double edge_radius = 0.06;  // m, stand-off from such an edge
  double tie_tolerance = 0.0; // 0: use 2x the region eps
  bool concurrent = true;
};

namespace detail {

inline bool near_terrain_edge(const HeightMap& map, const Vec2& xy, double jump, double radius) {
  const double z0 = sample(map, xy.x(), xy.y()).z;
  for (int k = 0; k < 8; ++k) {
    const double th = 2.0 * 3.14159265358979323846 * k / 8.0;
    for (double r = map.cell_size; r <= radius + 1e-12; r += map.cell_size) {
      const Vec2 probe = xy + r * Vec2(std::cos(th), std::sin(th));
      if (!map.contains(probe.x(), probe.y())) return true;
      if (std::abs(sample(map, probe.x(), probe.y()).z - z0) > jump) return true;
    }
  }
  return false;
}

}  // namespace detail

/// Sampling-based foothold selection: p candidates along the motion
/// direction around the default target, edge/workspace filters, then argmax
/// of the future-stance feasible-region area. Ties go to the default
/// foothold, then to the lowest candidate index.
inline FootholdPlan plan_foothold(const Scenario& current, const std::string& swing_leg,
                                  const std::string& next_swing_leg, const HeightMap& map,
                                  const Vec3& heuristic_target, const Vec2& motion_direction,
                                  const FootholdParams& params = {}) {
  if (params.samples < 1) throw DegenerateInput("plan_foothold: need p >= 1 samples");
  const Vec2 dir = motion_direction.norm() > 1e-9 ? motion_direction.normalized() : Vec2(1.0, 0.0);

  // Feet of the stance that supports the *next* swing phase, minus the leg
  // that will be swinging then; the candidate replaces the current swing foot.
  std::vector<std::string> stance_legs;
  std::vector<Vec3> stance_feet;
  std::vector<double> stance_mu;
  for (std::size_t i = 0; i < current.contact_specs.size(); ++i) {
    const ContactSpec& spec = current.contact_specs[i];
    if (spec.leg == swing_leg || spec.leg == next_swing_leg) continue;
    stance_legs.push_back(spec.leg);
    stance_feet.push_back(current.contacts[i].position);
    stance_mu.push_back(spec.mu);
  }
  double swing_mu = 0.8;
  for (const ContactSpec& spec : current.contact_specs)
    if (spec.leg == swing_leg) swing_mu = spec.mu;

  FootholdPlan plan;
  plan.candidates.resize(static_cast<std::size_t>(params.samples));
  const int default_index = (params.samples - 1) / 2;

  auto evaluate = [&](int i) {
    FootholdCandidate cand;
    const double offset = (i - default_index) * params.spacing;
    Vec2 xy = heuristic_target.head<2>() + offset * dir;
    if (!map.contains(xy.x(), xy.y())) {
      cand.discarded = true;
      cand.reason = "off the map";
      return cand;
    }
    const TerrainSample ts = sample(map, xy.x(), xy.y());
    cand.position = Vec3(xy.x(), xy.y(), ts.z);
    const double slope = std::acos(std::clamp(ts.normal.z(), -1.0, 1.0)) * 180.0 / 3.14159265358979323846;
    if (slope > params.edge_slope_deg) {
      cand.discarded = true;
      cand.reason = "slope " + std::to_string(slope) + " deg";
      return cand;
    }
    if (detail::near_terrain_edge(map, xy, params.edge_jump, params.edge_radius)) {
      cand.discarded = true;
      cand.reason = "terrain edge";
      return cand;
    }

    // Future triple stance with this candidate in place.
    Scenario future = current;
    future.contact_specs.clear();
    std::vector<std::string> legs = stance_legs;
    std::vector<Vec3> feet = stance_feet;
    legs.push_back(swing_leg);
    feet.push_back(cand.position);
    for (std::size_t k = 0; k < legs.size(); ++k) {
      ContactSpec spec;
      spec.leg = legs[k];
      spec.position = feet[k];
      const TerrainSample fs = sample(map, feet[k].x(), feet[k].y());
      spec.normal = fs.normal;
      spec.mu = k + 1 == legs.size() ? swing_mu : stance_mu[k];
      future.contact_specs.push_back(spec);
    }
    const Vec2 com_xy = heuristic_future_com(legs, feet);
    double mean_z = 0.0;
    for (const Vec3& p : feet) mean_z += p.z();
    mean_z /= static_cast<double>(feet.size());
    double clearance_ref = 0.0;
    for (const Contact& c : current.contacts) clearance_ref += c.position.z();
    clearance_ref /= static_cast<double>(current.contacts.size());
    future.com = Vec3(com_xy.x(), com_xy.y(), mean_z + (current.com.z() - clearance_ref));
    try {
      future.finalize();
      future.limb_states();  // workspace check at the heuristic future CoM
    } catch (const Error& e) {
      cand.discarded = true;
      cand.reason = std::string("workspace: ") + e.what();
      return cand;
    }
    try {
      const RegionResult r = compute_region(future, ConstraintMode::friction_and_actuation);
      cand.area = polygon_area(r.inner);
    } catch (const EmptyRegion&) {
      cand.discarded = true;
      cand.reason = "empty feasible region";
    }
    return cand;
  };

  if (params.concurrent && params.samples > 1) {
    std::vector<std::future<FootholdCandidate>> futures;
    for (int i = 0; i < params.samples; ++i)
      futures.push_back(std::async(std::launch::async, evaluate, i));
    for (int i = 0; i < params.samples; ++i)
      plan.candidates[static_cast<std::size_t>(i)] = futures[static_cast<std::size_t>(i)].get();
  } else {
    for (int i = 0; i < params.samples; ++i)
      plan.candidates[static_cast<std::size_t>(i)] = evaluate(i);
  }

  double best_area = -1.0;
  for (const FootholdCandidate& c : plan.candidates)
    if (!c.discarded) best_area = std::max(best_area, c.area);
  if (best_area < 0.0) throw NoFeasibleFoothold("plan_foothold: all candidates discarded or empty");

  const double tie = params.tie_tolerance > 0.0 ? params.tie_tolerance : 2.0 * current.region.eps;
  // Default wins ties, then the lowest index.
  const FootholdCandidate& dflt = plan.candidates[static_cast<std::size_t>(default_index)];
  if (!dflt.discarded && dflt.area >= best_area - tie) {
    plan.chosen_index = default_index;
  } else {
    for (int i = 0; i < params.samples; ++i) {
      const FootholdCandidate& c = plan.candidates[static_cast<std::size_t>(i)];
      if (!c.discarded && c.area >= best_area - tie) {
        plan.chosen_index = i;
        break;
      }
    }
  }
  plan.chosen = plan.candidates[static_cast<std::size_t>(plan.chosen_index)].position;
  return plan;
}

struct ForceDistribution {
  VecX forces;          // stacked per-contact
  double max_normalized_torque = 0.0;  // the minimized objective t*
  std::vector<Vec3> torques;
};

/// Stance-force selection: minimize the maximum normalized joint torque
/// |tau_j| / tau_lim_j subject to equilibrium and friction (plus the wrench
/// polytopes in feasible mode); a second pass at the optimum flattens the
/// normal forces so symmetric stances get symmetric loads.
inline ForceDistribution force_distribution(const Scenario& sc, const Vec2& com,
                                            PlanStrategy mode) {
  const ConstraintSystem cs = build_scenario_constraints(sc);
  const auto states = sc.limb_states();
  const int nc = cs.num_contacts;
  const int nf = cs.num_force_vars();

  auto assemble = [&](bool fix_t, double t_fixed) {
    // Variables [f; t; s]: t caps normalized torques, s caps normal forces.
    LinearProgram lp;
    const int nv = nf + 2;
    lp.objective = VecX::Zero(nv);
    lp.eq_A.setZero(6, nv);
    lp.eq_A.leftCols(nf) = cs.A1;
    lp.eq_b = cs.u - cs.A2 * com;
    const int rb = static_cast<int>(cs.B.rows());
    const int rg = mode == PlanStrategy::feasible_based ? static_cast<int>(cs.G.rows()) : 0;
    const int rt = 6 * nc;
    const int rows = rb + rg + rt + (fix_t ? 1 + nc : 0);
    lp.ineq_C.setZero(rows, nv);
    lp.ineq_d.setZero(rows);
    lp.ineq_C.topLeftCorner(rb, nf) = cs.B;
    if (rg > 0) {
      lp.ineq_C.block(rb, 0, rg, nf) = cs.G;
      lp.ineq_d.segment(rb, rg) = cs.d;
    }
    int r = rb + rg;
    for (int i = 0; i < nc; ++i) {
      const LegModel& leg =
          sc.robot.legs[static_cast<std::size_t>(sc.leg_indices[static_cast<std::size_t>(i)])];
      const Vec3& q = states[static_cast<std::size_t>(i)].q;
      const Mat3 jt = leg_jacobian(leg, q).transpose();
      const Vec3 g_tau = gravity_torques(leg, q, sc.robot.gravity);
      for (int k = 0; k < 3; ++k) {
        // tau_k = g_k - (J^T f)_k; |tau_k| <= t * tau_lim_k
        lp.ineq_C.block(r, 3 * i, 1, 3) = -jt.row(k);
        lp.ineq_C(r, nf) = -leg.torque_limit[k];
        lp.ineq_d[r] = -g_tau[k];
        ++r;
        lp.ineq_C.block(r, 3 * i, 1, 3) = jt.row(k);
        lp.ineq_C(r, nf) = -leg.torque_limit[k];
        lp.ineq_d[r] = g_tau[k];
        ++r;
      }
    }
    if (fix_t) {
      lp.ineq_C(r, nf) = 1.0;  // t <= t*
      lp.ineq_d[r] = t_fixed;
      ++r;
      for (int i = 0; i < nc; ++i) {
        lp.ineq_C(r, 3 * i + 2) = 1.0;  // f_z,i <= s
        lp.ineq_C(r, nf + 1) = -1.0;
        ++r;
      }
      lp.objective[nf + 1] = -1.0;  // minimize the normal-force cap
    } else {
      lp.objective[nf] = -1.0;  // minimize t
    }
    return lp;
  };

  const LPSolution stage1 = solve_lp(assemble(false, 0.0));
  if (stage1.status != LPStatus::optimal)
    throw InfeasibleDistribution("force_distribution: no equilibrium forces at this CoM");
  const double t_star = stage1.x[nf];
  const LPSolution stage2 = solve_lp(assemble(true, t_star + 1e-9));
  const VecX f = stage2.status == LPStatus::optimal ? VecX(stage2.x.head(nf))
                                                    : VecX(stage1.x.head(nf));
  ForceDistribution out;
  out.forces = f;
  out.max_normalized_torque = t_star;
  out.torques = recover_torques(sc.robot, sc.leg_indices, states, f);
  return out;
}

struct PhaseRecord {
  double time = 0.0;
  std::string phase;      // "move_base" or "swing"
  std::string swing_leg;  // leg about to swing / swinging
  double margin_r = 0.0;  // m, CoM margin inside the feasible region
  double m_tau = 0.0;     // N*m (triple stances only)
  int beta = 0;
  double friction_area = 0.0;
  double feasible_area = 0.0;
  Vec3 foothold = Vec3::Zero();  // chosen landing point (swing phases)
  bool aborted = false;
  std::string note;
};

struct PlanLog {
  PlanStrategy strategy = PlanStrategy::feasible_based;
  std::vector<PhaseRecord> records;
  double min_m_tau = 0.0;  // over triple-stance phases

  const PhaseRecord* find(const std::string& phase, int index) const {
    int seen = 0;
    for (const PhaseRecord& r : records)
      if (r.phase == phase && seen++ == index) return &r;
    return nullptr;
  }
};

/// One row per phase; 9 significant digits, stable across platforms.
inline void write_plan_csv(const PlanLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_plan_csv: cannot open " + path);
  out << "time,phase,swing_leg,r,m_tau,beta,friction_area,feasible_area,foot_x,foot_y,foot_z,"
         "aborted\n";
  char buf[320];
  for (const PhaseRecord& r : log.records) {
    std::snprintf(buf, sizeof(buf), "%.9g,%s,%s,%.9g,%.9g,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%d\n",
                  r.time, r.phase.c_str(), r.swing_leg.c_str(), r.margin_r, r.m_tau, r.beta,
                  r.friction_area, r.feasible_area, r.foothold.x(), r.foothold.y(),
                  r.foothold.z(), r.aborted ? 1 : 0);
    out << buf;
  }
}

namespace detail {

struct CrawlState {
  std::map<std::string, Vec3> feet;
  std::map<std::string, double> mu;
  Vec3 base;
  double clearance = 0.0;
};

inline Scenario stance_scenario_from_state(const Scenario& proto, const CrawlState& st,
                                           const HeightMap& map,
                                           const std::vector<std::string>& legs,
                                           const Vec3& com) {
  Scenario sc = proto;
  sc.contact_specs.clear();
  for (const std::string& leg : legs) {
    ContactSpec spec;
    spec.leg = leg;
    spec.position = st.feet.at(leg);
    spec.normal = sample(map, spec.position.x(), spec.position.y()).normal;
    spec.mu = st.mu.at(leg);
    sc.contact_specs.push_back(spec);
  }
  sc.com = com;
  sc.finalize();
  return sc;
}

inline double cubic_step(double t) { return t * t * (3.0 - 2.0 * t); }  // smooth 0..1

}  // namespace detail

/// Quasi-static crawl over a height map. Kinematic execution: the base slides
/// along cubic time profiles between CoM targets, one leg swings per phase,
/// and every triple stance logs the margin r, the torque margin m_tau and the
/// violation flag beta from the force-distribution surrogate.
inline PlanLog crawl_simulate(const Scenario& scenario, const GaitSchedule& schedule,
                              const HeightMap& map, PlanStrategy strategy,
                              const FootholdParams& foothold_params = {}) {
  if (scenario.contacts.size() != 4)
    throw DegenerateInput("crawl_simulate: need a four-contact start scenario");
  detail::CrawlState st;
  for (std::size_t i = 0; i < scenario.contact_specs.size(); ++i) {
    st.feet[scenario.contact_specs[i].leg] = scenario.contacts[i].position;
    st.mu[scenario.contact_specs[i].leg] = scenario.contact_specs[i].mu;
  }
  st.base = scenario.com;
  double mean_z = 0.0;
  for (const auto& [leg, p] : st.feet) mean_z += p.z();
  st.clearance = scenario.com.z() - mean_z / 4.0;

  PlanLog log;
  log.strategy = strategy;
  log.min_m_tau = std::numeric_limits<double>::infinity();
  double t = 0.0;

  for (int step = 0; step < schedule.steps; ++step) {
    const std::string swing = schedule.sequence[static_cast<std::size_t>(step) %
                                                schedule.sequence.size()];
    const std::string next_swing = schedule.sequence[static_cast<std::size_t>(step + 1) %
                                                     schedule.sequence.size()];
    std::vector<std::string> stance_legs;
    for (const auto& [leg, p] : st.feet)
      if (leg != swing) stance_legs.push_back(leg);

    std::vector<Vec3> stance_feet;
    double stance_mean_z = 0.0;
    for (const std::string& leg : stance_legs) {
      stance_feet.push_back(st.feet.at(leg));
      stance_mean_z += st.feet.at(leg).z();
    }
    stance_mean_z /= static_cast<double>(stance_feet.size());

    // ---- move-base phase: drive the CoM into the future support region ----
    PhaseRecord mb;
    mb.time = t;
    mb.phase = "move_base";
    mb.swing_leg = swing;
    const Vec2 heuristic = heuristic_future_com(stance_legs, stance_feet);
    const Vec3 future_com(heuristic.x(), heuristic.y(), stance_mean_z + st.clearance);
    Vec2 target = heuristic;  // fallback when the region is empty
    try {
      const Scenario future =
          detail::stance_scenario_from_state(scenario, st, map, stance_legs, future_com);
      const ConstraintMode mode = strategy == PlanStrategy::friction_based
                                      ? ConstraintMode::friction_only
                                      : ConstraintMode::friction_and_actuation;
      const ComTarget ct = com_target(future, st.base.head<2>(), scenario.region.scale, mode);
      target = ct.target;
      mb.note = ct.already_inside ? "kept current CoM" : "projected onto scaled region";
    } catch (const Error& e) {
      mb.aborted = true;
      mb.note = std::string("phase aborted: ") + e.what();
    }
    // Kinematic cubic slide of the base (end state is what matters for logs).
    const Vec2 start = st.base.head<2>();
    const Vec2 moved = start + detail::cubic_step(1.0) * (target - start);
    st.base = Vec3(moved.x(), moved.y(), stance_mean_z + st.clearance);

    // Regions of the realized triple stance at the moved CoM, for the log.
    try {
      const Scenario realized =
          detail::stance_scenario_from_state(scenario, st, map, stance_legs, st.base);
      const RegionResult fa = compute_region(realized, ConstraintMode::friction_and_actuation);
      const RegionResult fr = compute_region(realized, ConstraintMode::friction_only);
      mb.feasible_area = polygon_area(fa.inner);
      mb.friction_area = polygon_area(fr.inner);
      mb.margin_r = chebyshev_margin(fa.inner, st.base.head<2>());
    } catch (const Error& e) {
      if (!mb.aborted) {
        mb.aborted = true;
        mb.note = std::string("phase aborted: ") + e.what();
      }
    }
    log.records.push_back(mb);
    t += schedule.move_base_duration;

    // ---- swing phase: plan the foothold, evaluate the triple stance ----
    PhaseRecord sw;
    sw.time = t;
    sw.phase = "swing";
    sw.swing_leg = swing;
    const Vec3 old_foot = st.feet.at(swing);
    Vec3 default_target = schedule.default_foothold(old_foot);
    if (map.contains(default_target.x(), default_target.y()))
      default_target.z() = sample(map, default_target.x(), default_target.y()).z;

    auto reachable = [&](const Vec3& foot) {
      const LegModel& leg =
          scenario.robot.legs[static_cast<std::size_t>(scenario.robot.leg_index(swing))];
      try {
        inverse_kinematics(leg, foot - st.base);
        return true;
      } catch (const Error&) {
        return false;
      }
    };
    try {
      const Scenario current = detail::stance_scenario_from_state(
          scenario, st, map, {"LF", "RF", "LH", "RH"}, st.base);
      const FootholdPlan plan =
          plan_foothold(current, swing, next_swing, map, default_target,
                        schedule.desired_velocity, foothold_params);
      sw.foothold = plan.chosen;
    } catch (const Error& e) {
      // Heuristic fallback: the default step, shrunk toward the current foot
      // until it comes back into the workspace.
      sw.aborted = true;
      sw.note = std::string("foothold fallback: ") + e.what();
      Vec3 fallback = default_target;
      for (int halving = 0; halving < 5 && !reachable(fallback); ++halving)
        fallback = old_foot + 0.5 * (fallback - old_foot);
      if (!reachable(fallback)) fallback = old_foot;
      if (map.contains(fallback.x(), fallback.y()))
        fallback.z() = sample(map, fallback.x(), fallback.y()).z;
      sw.foothold = fallback;
    }

    // Torque surrogate at the triple stance (the swing foot is in the air).
    try {
      const Scenario stance =
          detail::stance_scenario_from_state(scenario, st, map, stance_legs, st.base);
      const ForceDistribution fd = force_distribution(stance, st.base.head<2>(), strategy);
      TorqueRecovery tr = torque_recovery(stance, st.base.head<2>(), fd.forces);
      sw.m_tau = tr.m_tau;
      sw.beta = tr.beta ? 1 : 0;
      const RegionResult fa = compute_region(stance, ConstraintMode::friction_and_actuation);
      sw.feasible_area = polygon_area(fa.inner);
      sw.margin_r = chebyshev_margin(fa.inner, st.base.head<2>());
      log.min_m_tau = std::min(log.min_m_tau, sw.m_tau);
    } catch (const Error& e) {
      sw.aborted = true;
      sw.note += std::string(" stance eval failed: ") + e.what();
    }

    st.feet[swing] = sw.foothold;
    log.records.push_back(sw);
    t += schedule.swing_duration;
  }
  return log;
}

}  // namespace feasreg
