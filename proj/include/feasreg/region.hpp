#pragma once

#include "feasreg/constraints.hpp"
#include "feasreg/geometry.hpp"
#include "feasreg/linprog.hpp"
#include "feasreg/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace feasreg {

enum class ConstraintMode { friction_only, actuation_only, friction_and_actuation };

inline const char* to_string(ConstraintMode m) {
  switch (m) {
    case ConstraintMode::friction_only: return "friction";
    case ConstraintMode::actuation_only: return "actuation";
    case ConstraintMode::friction_and_actuation: return "feasible";
  }
  return "?";
}

struct RegionRequest {
  const Scenario* scenario = nullptr;
  ConstraintMode mode = ConstraintMode::friction_and_actuation;
  double eps = 1e-6;           // m^2
  int max_iterations = 200;
  double bounding_box = 10.0;  // m, half-width about the stance centroid

  static RegionRequest from_scenario(const Scenario& sc,
                                     ConstraintMode mode = ConstraintMode::friction_and_actuation) {
    RegionRequest req;
    req.scenario = &sc;
    req.mode = mode;
    req.eps = sc.region.eps;
    req.max_iterations = sc.region.max_iterations;
    req.bounding_box = sc.region.bounding_box;
    return req;
  }
};

struct RegionResult {
  Polygon2 inner;
  Polygon2 outer;
  std::vector<VecX> witnesses;  // stacked contact forces, one per inner vertex
  int iterations = 0;
  int lp_calls = 0;
  bool converged = false;
  double area_gap = 0.0;  // m^2
  double eps = 0.0;
  double bounding_box = 0.0;
  ConstraintMode mode = ConstraintMode::friction_and_actuation;
};

struct MembershipResult {
  bool feasible = false;
  VecX witness;  // valid when feasible
};

namespace detail {

// The directional LP of the projection loop over z = [f; c_xy]:
//   max a.c_xy  s.t.  A1 f + A2 c = u,  [B; G] f <= [0; d],  |c - c0| <= box.
struct RegionLP {
  LinearProgram lp;
  int nf = 0;

  RegionLP(const ConstraintSystem& cs, ConstraintMode mode, const Vec2& box_center,
           double box_halfwidth) {
    nf = cs.num_force_vars();
    const int n = nf + 2;
    lp.objective = VecX::Zero(n);
    lp.eq_A.setZero(6, n);
    lp.eq_A.leftCols(nf) = cs.A1;
    lp.eq_A.rightCols(2) = cs.A2;
    lp.eq_b = cs.u;
    const bool friction = mode != ConstraintMode::actuation_only;
    const bool actuation = mode != ConstraintMode::friction_only;
    const int rb = friction ? static_cast<int>(cs.B.rows()) : 0;
    const int rg = actuation ? static_cast<int>(cs.G.rows()) : 0;
    lp.ineq_C.setZero(rb + rg + 4, n);
    lp.ineq_d.setZero(rb + rg + 4);
    if (friction) lp.ineq_C.topLeftCorner(rb, nf) = cs.B;
    if (actuation) {
      lp.ineq_C.block(rb, 0, rg, nf) = cs.G;
      lp.ineq_d.segment(rb, rg) = cs.d;
    }
    for (int k = 0; k < 2; ++k) {
      lp.ineq_C(rb + rg + 2 * k, nf + k) = 1.0;
      lp.ineq_d[rb + rg + 2 * k] = box_center[k] + box_halfwidth;
      lp.ineq_C(rb + rg + 2 * k + 1, nf + k) = -1.0;
      lp.ineq_d[rb + rg + 2 * k + 1] = -(box_center[k] - box_halfwidth);
    }
  }

  std::optional<std::pair<Vec2, VecX>> solve(const Vec2& a, int& lp_calls) {
    lp.objective.setZero();
    lp.objective[nf] = a.x();
    lp.objective[nf + 1] = a.y();
    ++lp_calls;
    const LPSolution sol = solve_lp(lp);
    if (sol.status != LPStatus::optimal) return std::nullopt;
    return std::make_pair(Vec2(sol.x[nf], sol.x[nf + 1]), VecX(sol.x.head(nf)));
  }
};

struct InnerVertex {
  Vec2 c;
  VecX witness;
};

inline double inner_signed_area(const std::vector<InnerVertex>& ring) {
  std::vector<Vec2> pts;
  pts.reserve(ring.size());
  for (const InnerVertex& v : ring) pts.push_back(v.c);
  return signed_area(pts);
}

// Restores a strictly convex CCW ring, dropping vertices within the polygon
// collinearity band of their neighbours' chord (same criterion as
// Polygon2::from_vertices, so witnesses stay aligned with the final ring).
inline void convexify_ccw(std::vector<InnerVertex>& ring) {
  if (inner_signed_area(ring) < 0.0) std::reverse(ring.begin(), ring.end());
  bool changed = true;
  while (changed && ring.size() > 3) {
    changed = false;
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& a = ring[(i + n - 1) % n].c;
      const Vec2& b = ring[i].c;
      const Vec2& c = ring[(i + 1) % n].c;
      const double len = (c - a).norm();
      if (cross2(b - a, c - a) <= len * tol::collinear) {
        ring.erase(ring.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
}

}  // namespace detail

inline ConstraintSystem build_scenario_constraints(const Scenario& sc) {
  return build_constraint_system(sc.robot, sc.mass, sc.contacts, sc.leg_indices, sc.limb_states());
}

/// Single feasibility check of the projection set at a fixed CoM point; the
/// ground-truth oracle behind every region test.
inline MembershipResult membership_oracle(const Scenario& sc, const Vec2& c_xy,
                                          ConstraintMode mode,
                                          const ConstraintSystem* prebuilt = nullptr) {
  ConstraintSystem local;
  const ConstraintSystem& cs = prebuilt ? *prebuilt : (local = build_scenario_constraints(sc));
  LinearProgram lp;
  const int nf = cs.num_force_vars();
  lp.objective = VecX::Zero(nf);
  lp.eq_A = cs.A1;
  lp.eq_b = cs.u - cs.A2 * c_xy;
  const bool friction = mode != ConstraintMode::actuation_only;
  const bool actuation = mode != ConstraintMode::friction_only;
  const int rb = friction ? static_cast<int>(cs.B.rows()) : 0;
  const int rg = actuation ? static_cast<int>(cs.G.rows()) : 0;
  lp.ineq_C.setZero(rb + rg, nf);
  lp.ineq_d.setZero(rb + rg);
  if (friction) lp.ineq_C.topRows(rb) = cs.B;
  if (actuation) {
    lp.ineq_C.bottomRows(rg) = cs.G;
    lp.ineq_d.tail(rg) = cs.d;
  }
  const LPSolution sol = solve_lp(lp);
  MembershipResult r;
  r.feasible = sol.status == LPStatus::optimal;
  if (r.feasible) r.witness = sol.x;
  return r;
}

/// Iterative projection (cutting-plane) computation of the friction,
/// actuation or feasible region. Inner vertices are directional LP optima,
/// each carrying its force witness; the outer polygon is the bounding box
/// clipped by every supporting halfspace found. Converged when
/// area(outer) - area(inner) <= eps.
inline RegionResult compute_region(const RegionRequest& req) {
  if (!req.scenario) throw Error("compute_region: request has no scenario");
  const Scenario& sc = *req.scenario;
  if (req.eps <= 0.0 || req.bounding_box <= 0.0)
    throw DegenerateInput("compute_region: eps and bounding_box must be positive");
  const ConstraintSystem cs = build_scenario_constraints(sc);
  const Vec2 center = sc.stance_centroid();
  detail::RegionLP lp(cs, req.mode, center, req.bounding_box);

  constexpr double kPi = 3.14159265358979323846;
  int lp_calls = 0;
  std::vector<detail::InnerVertex> inner;
  std::vector<Vec2> outer = {center + Vec2(-req.bounding_box, -req.bounding_box),
                             center + Vec2(req.bounding_box, -req.bounding_box),
                             center + Vec2(req.bounding_box, req.bounding_box),
                             center + Vec2(-req.bounding_box, req.bounding_box)};

  auto probe = [&](double deg) {
    const double th = deg * kPi / 180.0;
    const Vec2 a(std::cos(th), std::sin(th));
    auto opt = lp.solve(a, lp_calls);
    if (!opt)
      throw EmptyRegion("compute_region: constraint system infeasible (" +
                        std::string(to_string(req.mode)) + " mode)");
    outer = detail::clip(outer, a, a.dot(opt->first));
    for (const detail::InnerVertex& v : inner)
      if ((v.c - opt->first).norm() < 1e-12) return;
    inner.push_back({opt->first, opt->second});
  };
  for (double deg : {0.0, 120.0, 240.0}) probe(deg);
  if (inner.size() < 3 || std::abs(detail::inner_signed_area(inner)) < 1e-12)
    for (double deg : {60.0, 180.0, 300.0}) probe(deg);

  // Seed optima arrive in direction order; sort CCW around their mean.
  {
    Vec2 mean = Vec2::Zero();
    for (const detail::InnerVertex& v : inner) mean += v.c;
    mean /= static_cast<double>(inner.size());
    std::sort(inner.begin(), inner.end(), [&](const detail::InnerVertex& l,
                                              const detail::InnerVertex& r) {
      return std::atan2(l.c.y() - mean.y(), l.c.x() - mean.x()) <
             std::atan2(r.c.y() - mean.y(), r.c.x() - mean.x());
    });
  }
  detail::convexify_ccw(inner);
  if (inner.size() < 3 || detail::inner_signed_area(inner) < 1e-12)
    throw EmptyRegion(
        "compute_region: region is empty or lower-dimensional (degenerate seed optima)");

  int iterations = 0;
  double gap = detail::signed_area(outer) - detail::inner_signed_area(inner);
  while (gap > req.eps && iterations < req.max_iterations) {
    // Pick the inner edge whose supporting cut removes the most outer area.
    int best_edge = -1;
    double best_cut = 0.0;
    const std::size_t n = inner.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 p = inner[i].c;
      const Vec2 q = inner[(i + 1) % n].c;
      const Vec2 e = q - p;
      const double len = e.norm();
      if (len < 1e-12) continue;
      const Vec2 a(e.y() / len, -e.x() / len);  // outward for CCW
      const std::vector<Vec2> cut = detail::clip(outer, -a, -a.dot(p));
      const double cut_area = std::abs(detail::signed_area(cut));
      if (cut_area > best_cut + 1e-15) {
        best_cut = cut_area;
        best_edge = static_cast<int>(i);
      }
    }
    if (best_edge < 0) break;  // outer already hugs the inner polygon

    const Vec2 p = inner[static_cast<std::size_t>(best_edge)].c;
    const Vec2 q = inner[(static_cast<std::size_t>(best_edge) + 1) % n].c;
    const Vec2 a = Vec2((q - p).y(), -(q - p).x()).normalized();
    auto opt = lp.solve(a, lp_calls);
    if (!opt) throw EmptyRegion("compute_region: directional LP infeasible mid-run");
    ++iterations;

    outer = detail::clip(outer, a, a.dot(opt->first));
    if (a.dot(opt->first) > a.dot(p) + 1e-12) {
      inner.insert(inner.begin() + best_edge + 1, {opt->first, opt->second});
      detail::convexify_ccw(inner);
    }
    gap = detail::signed_area(outer) - detail::inner_signed_area(inner);
  }

  std::vector<Vec2> inner_ring;
  inner_ring.reserve(inner.size());
  for (const detail::InnerVertex& v : inner) inner_ring.push_back(v.c);
  Polygon2 inner_poly = Polygon2::from_vertices(inner_ring);
  // Re-attach witnesses to the final vertex ring (normalization only ever
  // drops vertices, so every survivor has an exact source).
  std::vector<VecX> witnesses;
  for (const Vec2& v : inner_poly.vertices()) {
    double best = 1e18;
    const detail::InnerVertex* src = nullptr;
    for (const detail::InnerVertex& cand : inner) {
      const double d = (cand.c - v).norm();
      if (d < best) {
        best = d;
        src = &cand;
      }
    }
    if (!src || best > 1e-9)
      throw NumericalBreakdown("compute_region: lost witness during polygon normalization");
    witnesses.push_back(src->witness);
  }

  RegionResult result{std::move(inner_poly),
                      Polygon2::from_vertices(detail::normalize_ring(outer)),
                      std::move(witnesses),
                      iterations,
                      lp_calls,
                      gap <= req.eps,
                      gap,
                      req.eps,
                      req.bounding_box,
                      req.mode};
  return result;
}

inline RegionResult compute_region(const Scenario& sc, ConstraintMode mode) {
  return compute_region(RegionRequest::from_scenario(sc, mode));
}

/// m_tau of one limb: the minimum over joints of the distance between the
/// torque and its nearer (symmetric) limit. Negative once a limit is crossed.
inline double torque_margin(const Vec3& tau, const Vec3& limit) {
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) m = std::min(m, std::min(limit[k] - tau[k], tau[k] + limit[k]));
  return m;
}

struct TorqueRecovery {
  std::vector<Vec3> torques;  // one per stance leg
  bool beta = false;          // any joint outside its limits
  double m_tau = 0.0;         // N*m, min distance of any joint to its limits
  double equilibrium_residual = 0.0;  // |A1 f + A2 c - u|_inf of the witness
};

/// Per-limb torques tau_i = g(q_i) - J_i^T f_i from a force witness, plus
/// the torque-limit flag beta and the margin m_tau. Callers are expected to
/// pass equality-consistent witnesses; the residual is reported either way.
inline TorqueRecovery torque_recovery(const Scenario& sc, const Vec2& c_xy, const VecX& witness) {
  const ConstraintSystem cs = build_scenario_constraints(sc);
  if (witness.size() != cs.num_force_vars())
    throw DimensionMismatch("torque_recovery: witness size");
  TorqueRecovery out;
  out.equilibrium_residual = (cs.A1 * witness + cs.A2 * c_xy - cs.u).cwiseAbs().maxCoeff();
  out.torques = recover_torques(sc.robot, sc.leg_indices, sc.limb_states(), witness);
  out.m_tau = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < out.torques.size(); ++i) {
    const Vec3& lim = sc.robot.legs[static_cast<std::size_t>(sc.leg_indices[i])].torque_limit;
    out.m_tau = std::min(out.m_tau, torque_margin(out.torques[i], lim));
  }
  out.beta = out.m_tau < -1e-9;
  return out;
}

/// CSV with a '#'-prefixed metadata header, then one "x,y" vertex per line
/// (CCW, meters, 9 significant digits).
inline void write_region_csv(const RegionResult& r, const std::string& inner_path,
                             const std::string& outer_path) {
  auto write = [&](const Polygon2& poly, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("write_region_csv: cannot open " + path);
    out << "# mode " << to_string(r.mode) << "\n";
    out << "# eps " << detail::format_double(r.eps) << "\n";
    out << "# iterations " << r.iterations << "\n";
    out << "# lp_calls " << r.lp_calls << "\n";
    out << "# area_gap " << detail::format_double(r.area_gap) << "\n";
    out << "# converged " << (r.converged ? 1 : 0) << "\n";
    char buf[128];
    for (const Vec2& v : poly.vertices()) {
      std::snprintf(buf, sizeof(buf), "%.9g,%.9g\n", v.x(), v.y());
      out << buf;
    }
  };
  write(r.inner, inner_path);
  write(r.outer, outer_path);
}

}  // namespace feasreg
