#pragma once

#include "feasreg/constraints.hpp"
#include "feasreg/linprog.hpp"
#include "feasreg/model.hpp"

#include <vector>

namespace feasreg::testing {

struct StanceFixture {
  RobotModel robot;
  Vec3 base;  // base origin == CoM position, orientation identity
  std::vector<int> leg_indices;
  std::vector<Contact> contacts;
  std::vector<LimbState> states;
};

/// Four coplanar contacts directly below the hip pivots, vertical normals.
inline StanceFixture nominal_four_stance(double mu = 0.8, double base_height = 0.55) {
  StanceFixture fx;
  fx.robot = default_robot();
  fx.base = Vec3(0.0, 0.0, base_height);
  std::vector<Vec3> feet;
  for (std::size_t i = 0; i < fx.robot.legs.size(); ++i) {
    const LegModel& leg = fx.robot.legs[i];
    fx.leg_indices.push_back(static_cast<int>(i));
    feet.push_back(Vec3(leg.hip_offset.x(), leg.hip_offset.y() + leg.side_sign * leg.l1, 0.0));
    fx.contacts.push_back(make_contact(feet.back(), Vec3::UnitZ(), mu));
  }
  fx.states = solve_stance_ik(fx.robot, fx.base, fx.leg_indices, feet);
  return fx;
}

/// Triple stance: the four-stance fixture with one leg lifted.
inline StanceFixture nominal_triple_stance(int swing_leg = 3, double mu = 0.8,
                                           double base_height = 0.55) {
  StanceFixture fx = nominal_four_stance(mu, base_height);
  fx.leg_indices.erase(fx.leg_indices.begin() + swing_leg);
  fx.contacts.erase(fx.contacts.begin() + swing_leg);
  fx.states.erase(fx.states.begin() + swing_leg);
  return fx;
}

/// Feasibility LP of the full system at a fixed CoM projection; returns the
/// witness force vector when feasible.
inline bool stance_feasible(const ConstraintSystem& cs, const Vec2& com, VecX* witness = nullptr,
                            bool with_friction = true, bool with_actuation = true) {
  LinearProgram lp;
  const int nf = cs.num_force_vars();
  lp.objective = VecX::Zero(nf);
  lp.eq_A = cs.A1;
  lp.eq_b = cs.u - cs.A2 * com;
  int rows = 0;
  if (with_friction) rows += static_cast<int>(cs.B.rows());
  if (with_actuation) rows += static_cast<int>(cs.G.rows());
  lp.ineq_C.setZero(rows, nf);
  lp.ineq_d.setZero(rows);
  int r = 0;
  if (with_friction) {
    lp.ineq_C.topRows(cs.B.rows()) = cs.B;
    r += static_cast<int>(cs.B.rows());
  }
  if (with_actuation) {
    lp.ineq_C.bottomRows(cs.G.rows()) = cs.G;
    lp.ineq_d.tail(cs.G.rows()) = cs.d;
  }
  const LPSolution sol = solve_lp(lp);
  if (sol.status != LPStatus::optimal) return false;
  if (witness) *witness = sol.x;
  return true;
}

}  // namespace feasreg::testing
