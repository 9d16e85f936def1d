#include "feasreg/region.hpp"

#include "fixtures.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <optional>
#include <random>

using namespace feasreg;

namespace {

/// Scenario with explicit foot positions on the default robot.
Scenario stance_scenario(const std::vector<std::pair<std::string, Vec3>>& feet, double mu = 0.8,
                         double base_height = 0.55, double mass_scale = 1.0) {
  Scenario sc;
  sc.robot = default_robot();
  sc.mass = sc.robot.total_mass * mass_scale;
  sc.com = Vec3(0.0, 0.0, base_height);
  for (const auto& [leg, pos] : feet) {
    ContactSpec spec;
    spec.leg = leg;
    spec.position = pos;
    spec.mu = mu;
    sc.contact_specs.push_back(spec);
  }
  sc.finalize();
  return sc;
}

Scenario rectangle_scenario(double mu = 0.8) {
  return stance_scenario({{"LF", {0.3, 0.2, 0.0}},
                          {"RF", {0.3, -0.2, 0.0}},
                          {"LH", {-0.3, 0.2, 0.0}},
                          {"RH", {-0.3, -0.2, 0.0}}},
                         mu);
}

Scenario triple_scenario() {
  return stance_scenario(
      {{"LF", {0.37, 0.29, 0.0}}, {"RF", {0.37, -0.29, 0.0}}, {"LH", {-0.37, 0.29, 0.0}}});
}

}  // namespace

TEST_CASE("coplanar friction region equals the support polygon", "[region]") {
  const Scenario sc = rectangle_scenario();
  RegionRequest req = RegionRequest::from_scenario(sc, ConstraintMode::friction_only);
  req.eps = 1e-6;
  const RegionResult r = compute_region(req);
  REQUIRE(r.converged);
  const Polygon2 support =
      Polygon2::from_vertices({{0.3, 0.2}, {-0.3, 0.2}, {-0.3, -0.2}, {0.3, -0.2}});
  CHECK(hausdorff_distance(r.inner, support) <= 1e-3);
  CHECK(hausdorff_distance(r.outer, support) <= 1e-3);
}

TEST_CASE("relaxed torque limits reduce the feasible to the friction region", "[region]") {
  Scenario sc = rectangle_scenario();
  for (LegModel& leg : sc.robot.legs) leg.torque_limit = Vec3::Constant(1e9);
  const RegionResult friction = compute_region(sc, ConstraintMode::friction_only);
  const RegionResult feasible = compute_region(sc, ConstraintMode::friction_and_actuation);
  REQUIRE(friction.converged);
  REQUIRE(feasible.converged);
  CHECK(hausdorff_distance(friction.inner, feasible.inner) <= 1e-6);
}

TEST_CASE("grid membership oracle agrees with the converged region", "[region]") {
  const Scenario sc = triple_scenario();
  RegionRequest req = RegionRequest::from_scenario(sc, ConstraintMode::friction_and_actuation);
  req.eps = 1e-4;
  const RegionResult r = compute_region(req);
  REQUIRE(r.converged);
  const ConstraintSystem cs = build_scenario_constraints(sc);
  const double band = 2.0 * std::sqrt(req.eps);

  double xmin = 1e9, xmax = -1e9, ymin = 1e9, ymax = -1e9;
  for (const Vec2& v : r.outer.vertices()) {
    xmin = std::min(xmin, v.x());
    xmax = std::max(xmax, v.x());
    ymin = std::min(ymin, v.y());
    ymax = std::max(ymax, v.y());
  }
  const double margin = 0.05;
  int misclassified = 0, checked = 0;
  for (int i = 0; i < 60; ++i) {
    for (int j = 0; j < 60; ++j) {
      const Vec2 c(xmin - margin + (xmax - xmin + 2 * margin) * i / 59.0,
                   ymin - margin + (ymax - ymin + 2 * margin) * j / 59.0);
      const PointQuery q = point_in_polygon(r.inner, c);
      if (std::abs(q.signed_distance) <= band) continue;  // boundary band
      ++checked;
      const bool oracle =
          membership_oracle(sc, c, ConstraintMode::friction_and_actuation, &cs).feasible;
      if (oracle != (q.location == PointLocation::inside)) ++misclassified;
    }
  }
  CHECK(misclassified == 0);
  CHECK(checked > 2000);
}

TEST_CASE("sandwich certificates hold", "[region]") {
  const Scenario sc = triple_scenario();
  const RegionResult r = compute_region(sc, ConstraintMode::friction_and_actuation);
  REQUIRE(r.converged);
  const ConstraintSystem cs = build_scenario_constraints(sc);

  // Inner vertices are feasible and carry valid witnesses.
  REQUIRE(r.witnesses.size() == r.inner.size());
  for (std::size_t i = 0; i < r.inner.size(); ++i) {
    const Vec2& v = r.inner.vertices()[i];
    CHECK(membership_oracle(sc, v, ConstraintMode::friction_and_actuation, &cs).feasible);
    CHECK((cs.A1 * r.witnesses[i] + cs.A2 * v - cs.u).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(point_in_polygon(r.outer, v).signed_distance >= -1e-7);  // inner inside outer
  }

  // Sampled points clearly outside the outer polygon are infeasible.
  std::mt19937 rng(13001);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int outside_checked = 0;
  while (outside_checked < 200) {
    const Vec2 dir = Vec2(u(rng), u(rng)).normalized();
    const Vec2 c = Vec2(0.123, -0.05) + dir * (1.2 + std::abs(u(rng)));
    if (point_in_polygon(r.outer, c).location != PointLocation::outside) continue;
    CHECK_FALSE(membership_oracle(sc, c, ConstraintMode::friction_and_actuation, &cs).feasible);
    ++outside_checked;
  }
}

TEST_CASE("area gap obeys the tolerance and halving eps grows the inner", "[region]") {
  const Scenario sc = triple_scenario();
  double previous_area = 0.0;
  for (double eps : {1e-3, 5e-4, 1e-4, 5e-5, 1e-5, 1e-6}) {
    RegionRequest req = RegionRequest::from_scenario(sc, ConstraintMode::friction_and_actuation);
    req.eps = eps;
    const RegionResult r = compute_region(req);
    REQUIRE(r.converged);
    CHECK(r.area_gap <= eps);
    const double area = polygon_area(r.inner);
    CHECK(area >= previous_area - 1e-12);
    previous_area = area;
  }
}

TEST_CASE("feasible region is contained in friction and actuation outers", "[region]") {
  std::mt19937 rng(13002);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<std::pair<std::string, Vec3>> feet = {
        {"LF", Vec3(0.37 + 0.05 * u(rng), 0.29 + 0.05 * u(rng), 0.15 * std::abs(u(rng)))},
        {"RF", Vec3(0.37 + 0.05 * u(rng), -0.29 + 0.05 * u(rng), 0.15 * std::abs(u(rng)))},
        {"LH", Vec3(-0.37 + 0.05 * u(rng), 0.29 + 0.05 * u(rng), 0.15 * std::abs(u(rng)))},
        {"RH", Vec3(-0.37 + 0.05 * u(rng), -0.29 + 0.05 * u(rng), 0.15 * std::abs(u(rng)))}};
    Scenario sc = stance_scenario(feet, 0.5 + 0.4 * std::abs(u(rng)));
    for (LegModel& leg : sc.robot.legs) leg.torque_limit *= 0.5 + 0.4 * std::abs(u(rng));
    std::optional<RegionResult> fa;
    try {
      fa = compute_region(sc, ConstraintMode::friction_and_actuation);
    } catch (const EmptyRegion&) {
      continue;  // vacuously included
    }
    const RegionResult f = compute_region(sc, ConstraintMode::friction_only);
    const RegionResult a = compute_region(sc, ConstraintMode::actuation_only);
    for (const Vec2& v : fa->inner.vertices()) {
      CHECK(point_in_polygon(f.outer, v).signed_distance >= -1e-6);
      CHECK(point_in_polygon(a.outer, v).signed_distance >= -1e-6);
    }
  }
}

TEST_CASE("heavier loads shrink the feasible region", "[region]") {
  double previous = 1e18;
  bool any_active = false;
  for (int k = 1; k <= 4; ++k) {
    Scenario sc = rectangle_scenario();
    sc.mass = 42.5 * k;
    double area = 0.0;
    try {
      const RegionResult fa = compute_region(sc, ConstraintMode::friction_and_actuation);
      REQUIRE(fa.converged);
      area = polygon_area(fa.inner);
      const RegionResult f = compute_region(sc, ConstraintMode::friction_only);
      if (area < polygon_area(f.inner) - 1e-4) any_active = true;
    } catch (const EmptyRegion&) {
      area = 0.0;
    }
    CHECK(area <= previous + 1e-9);
    if (any_active && previous < 1e17 && previous > 1e-12) CHECK(area < previous);
    previous = area;
  }
  CHECK(any_active);
}

TEST_CASE("witnesses satisfy the static mapping", "[region]") {
  const Scenario sc = triple_scenario();
  const RegionResult r = compute_region(sc, ConstraintMode::friction_and_actuation);
  const double mg = sc.mass * sc.robot.gravity;
  REQUIRE(r.witnesses.size() == r.inner.size());
  for (std::size_t i = 0; i < r.inner.size(); ++i) {
    const Vec2& c = r.inner.vertices()[i];
    // Gravity wrench about the origin balances the contact moment.
    Vec3 contact_moment = Vec3::Zero();
    for (int k = 0; k < static_cast<int>(sc.contacts.size()); ++k)
      contact_moment += sc.contacts[static_cast<std::size_t>(k)].position.cross(
          Vec3(r.witnesses[i].segment<3>(3 * k)));
    const Vec3 tau_gravity = -contact_moment;
    CHECK(std::abs(c.x() - tau_gravity.y() / mg) <= 1e-9);
    CHECK(std::abs(c.y() + tau_gravity.x() / mg) <= 1e-9);
  }
}

TEST_CASE("friction region ignores leg masses and torque limits", "[region]") {
  Scenario sc = rectangle_scenario();
  const RegionResult base = compute_region(sc, ConstraintMode::friction_only);
  for (LegModel& leg : sc.robot.legs) {
    leg.link_masses *= 5.0;
    leg.torque_limit *= 0.01;
  }
  const RegionResult heavy = compute_region(sc, ConstraintMode::friction_only);
  CHECK(hausdorff_distance(base.inner, heavy.inner) < 1e-9);
}

TEST_CASE("membership oracle agrees with the region on random points", "[region]") {
  const Scenario sc = triple_scenario();
  const RegionResult r = compute_region(sc, ConstraintMode::friction_and_actuation);
  const ConstraintSystem cs = build_scenario_constraints(sc);
  std::mt19937 rng(13003);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  const double band = 2.0 * std::sqrt(r.eps);
  int agreements = 0;
  for (int k = 0; k < 500; ++k) {
    const Vec2 c(u(rng), u(rng));
    const PointQuery q = point_in_polygon(r.inner, c);
    if (std::abs(q.signed_distance) <= band) continue;
    const bool oracle =
        membership_oracle(sc, c, ConstraintMode::friction_and_actuation, &cs).feasible;
    CHECK(oracle == (q.location == PointLocation::inside));
    ++agreements;
  }
  CHECK(agreements > 400);

  // Trivial anchors: stance centroid feasible, far point infeasible.
  CHECK(membership_oracle(sc, sc.stance_centroid(), ConstraintMode::friction_and_actuation, &cs)
            .feasible);
  CHECK_FALSE(membership_oracle(sc, sc.stance_centroid() + Vec2(10.0, 0.0),
                                ConstraintMode::friction_and_actuation, &cs)
                  .feasible);
}

TEST_CASE("torque recovery flags over-limit witnesses", "[region]") {
  const Scenario sc = triple_scenario();
  const RegionResult r = compute_region(sc, ConstraintMode::friction_and_actuation);
  REQUIRE(!r.witnesses.empty());
  const Vec2 v = r.inner.vertices().front();
  const TorqueRecovery ok = torque_recovery(sc, v, r.witnesses.front());
  CHECK_FALSE(ok.beta);
  CHECK(ok.m_tau >= -1e-9);
  CHECK(ok.equilibrium_residual < 1e-6);

  const TorqueRecovery bad = torque_recovery(sc, v, VecX(10.0 * r.witnesses.front()));
  CHECK(bad.beta);
  CHECK(bad.m_tau < 0.0);
}

TEST_CASE("empty region throws with a clear mode message", "[region]") {
  Scenario sc = triple_scenario();
  for (LegModel& leg : sc.robot.legs) leg.torque_limit *= 0.01;
  CHECK_THROWS_AS(compute_region(sc, ConstraintMode::friction_and_actuation), EmptyRegion);
}

TEST_CASE("bilateral contacts cap the friction region at the bounding box", "[region]") {
  // With every contact bilateral there are no friction rows at all, so any
  // CoM position balances; the box keeps the area finite and reported.
  Scenario sc = rectangle_scenario();
  for (ContactSpec& spec : sc.contact_specs) spec.mode = ContactMode::bilateral;
  sc.finalize();
  for (LegModel& leg : sc.robot.legs) leg.torque_limit = Vec3::Constant(1e9);
  RegionRequest req = RegionRequest::from_scenario(sc, ConstraintMode::friction_only);
  req.bounding_box = 2.0;
  req.eps = 1e-3;
  const RegionResult r = compute_region(req);
  REQUIRE(r.converged);
  CHECK(polygon_area(r.inner) == Catch::Approx(16.0).margin(1e-2));
  CHECK(r.bounding_box == 2.0);
}

TEST_CASE("region computation is deterministic", "[region]") {
  const Scenario sc = triple_scenario();
  const RegionResult a = compute_region(sc, ConstraintMode::friction_and_actuation);
  const RegionResult b = compute_region(sc, ConstraintMode::friction_and_actuation);
  REQUIRE(a.inner.size() == b.inner.size());
  for (std::size_t i = 0; i < a.inner.size(); ++i) {
    CHECK(std::memcmp(a.inner.vertices()[i].data(), b.inner.vertices()[i].data(),
                      2 * sizeof(double)) == 0);
  }
  CHECK(a.lp_calls == b.lp_calls);
}
