#pragma once

#include "feasreg/common.hpp"
#include "feasreg/model.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace feasreg {

enum class ContactMode { unilateral, bilateral };

/// Point contact: world-frame position, right-handed orthonormal frame
/// {t1, t2, n}, friction coefficient and mode. Bilateral contacts skip the
/// friction pyramid and keep only the wrench-polytope rows.
struct Contact {
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  Vec3 t1 = Vec3::UnitX();
  Vec3 t2 = Vec3::UnitY();
  double mu = 0.0;
  ContactMode mode = ContactMode::unilateral;

  void validate() const {
    const double eps = 1e-9;
    if (std::abs(normal.norm() - 1.0) > eps || std::abs(t1.norm() - 1.0) > eps ||
        std::abs(t2.norm() - 1.0) > eps)
      throw DegenerateInput("Contact: frame vectors must be unit length");
    if (std::abs(normal.dot(t1)) > eps || std::abs(normal.dot(t2)) > eps ||
        std::abs(t1.dot(t2)) > eps)
      throw DegenerateInput("Contact: frame vectors must be orthogonal");
    if ((t1.cross(t2) - normal).norm() > eps)
      throw DegenerateInput("Contact: frame must be right-handed (t1 x t2 = n)");
    if (mode == ContactMode::unilateral && mu <= 0.0)
      throw DegenerateInput("Contact: unilateral contact needs mu > 0");
  }
};

/// Deterministic tangent completion: t1 = normalize(n x z) unless n is
/// (anti)parallel to z, in which case t1 = x.
inline Contact make_contact(const Vec3& position, const Vec3& normal, double mu,
                            ContactMode mode = ContactMode::unilateral) {
  Contact c;
  c.position = position;
  c.normal = normal.normalized();
  const Vec3 nxz = c.normal.cross(Vec3::UnitZ());
  c.t1 = nxz.norm() < 1e-6 ? Vec3::UnitX() : nxz.normalized();
  c.t2 = c.normal.cross(c.t1);
  c.mu = mu;
  c.mode = mode;
  c.validate();
  return c;
}

/// Per-limb admissible contact forces in halfspace form G f <= d, the
/// torque box mapped through the static relation g(q) = tau + J^T f:
///   G = [J^T; -J^T],  d = [g + tau_lim; tau_lim - g].
/// When J is invertible the 8 vertices J^-T (g - tau_k) over the torque-box
/// corners are attached as well.
struct WrenchPolytope {
  Eigen::Matrix<double, 6, 3> G;
  Eigen::Matrix<double, 6, 1> d;
  std::vector<Vec3> vertices;  // empty when near singular
  double condition_number = 0.0;
  bool near_singular = false;
};

inline WrenchPolytope make_wrench_polytope(const Mat3& jacobian, const Vec3& gravity_torque,
                                           const Vec3& torque_limit) {
  WrenchPolytope wp;
  wp.G.topRows<3>() = jacobian.transpose();
  wp.G.bottomRows<3>() = -jacobian.transpose();
  wp.d.head<3>() = gravity_torque + torque_limit;
  wp.d.tail<3>() = torque_limit - gravity_torque;

  Eigen::JacobiSVD<Mat3> svd(jacobian);
  const double smin = svd.singularValues()[2];
  const double smax = svd.singularValues()[0];
  wp.condition_number = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  wp.near_singular = !(wp.condition_number <= 1e8);
  if (!wp.near_singular) {
    const Eigen::PartialPivLU<Mat3> jt(jacobian.transpose().eval());
    for (int k = 0; k < 8; ++k) {
      const Vec3 tau_corner(((k & 1) ? 1.0 : -1.0) * torque_limit[0],
                            ((k & 2) ? 1.0 : -1.0) * torque_limit[1],
                            ((k & 4) ? 1.0 : -1.0) * torque_limit[2]);
      wp.vertices.push_back(jt.solve(gravity_torque - tau_corner));
    }
  }
  return wp;
}

/// Full constraint system of the region LPs, one force block per contact:
///   A1 f + A2 c_xy = u      (static equilibrium about the world origin)
///   B f <= 0                (friction pyramids, unilateral contacts only)
///   G f <= d                (per-limb wrench polytopes)
struct ConstraintSystem {
  MatX A1;
  Eigen::Matrix<double, 6, 2> A2;
  Eigen::Matrix<double, 6, 1> u;
  MatX B;
  MatX G;
  VecX d;
  std::vector<WrenchPolytope> polytopes;
  int num_contacts = 0;

  int num_force_vars() const { return 3 * num_contacts; }
};

inline void build_grasp(const std::vector<Contact>& contacts, double mass, double gravity,
                        MatX& A1, Eigen::Matrix<double, 6, 2>& A2, Eigen::Matrix<double, 6, 1>& u) {
  const int nc = static_cast<int>(contacts.size());
  if (nc < 1) throw DegenerateInput("build_grasp: need at least one contact");
  if (mass <= 0.0) throw DegenerateInput("build_grasp: mass must be positive");
  A1.setZero(6, 3 * nc);
  for (int i = 0; i < nc; ++i) {
    const Vec3& p = contacts[static_cast<std::size_t>(i)].position;
    A1.block<3, 3>(0, 3 * i) = Mat3::Identity();
    Mat3 skew;
    skew << 0, -p.z(), p.y(), p.z(), 0, -p.x(), -p.y(), p.x(), 0;
    A1.block<3, 3>(3, 3 * i) = skew;
  }
  const Vec3 g_vec(0.0, 0.0, -gravity);
  Mat3 g_skew;
  g_skew << 0, -g_vec.z(), g_vec.y(), g_vec.z(), 0, -g_vec.x(), -g_vec.y(), g_vec.x(), 0;
  Eigen::Matrix<double, 3, 2> p_t;
  p_t << 1, 0, 0, 1, 0, 0;
  A2.setZero();
  A2.bottomRows<3>() = -mass * g_skew * p_t;
  u.setZero();
  u.head<3>() = -mass * g_vec;
}

inline MatX build_friction(const std::vector<Contact>& contacts) {
  const int nc = static_cast<int>(contacts.size());
  int rows = 0;
  for (const Contact& c : contacts)
    if (c.mode == ContactMode::unilateral) rows += 4;
  MatX B = MatX::Zero(rows, 3 * nc);
  int r = 0;
  for (int i = 0; i < nc; ++i) {
    const Contact& c = contacts[static_cast<std::size_t>(i)];
    if (c.mode != ContactMode::unilateral) continue;
    B.block<1, 3>(r + 0, 3 * i) = (c.t1 - c.mu * c.normal).transpose();
    B.block<1, 3>(r + 1, 3 * i) = (c.t2 - c.mu * c.normal).transpose();
    B.block<1, 3>(r + 2, 3 * i) = -(c.t1 + c.mu * c.normal).transpose();
    B.block<1, 3>(r + 3, 3 * i) = -(c.t2 + c.mu * c.normal).transpose();
    r += 4;
  }
  return B;
}

/// G, d and the per-limb polytopes at a fixed stance configuration. The
/// Jacobians are evaluated once here and stay constant through an entire
/// region computation; configuration coupling is handled a level up.
inline void build_actuation(const RobotModel& robot, const std::vector<int>& leg_indices,
                            const std::vector<LimbState>& states, MatX& G, VecX& d,
                            std::vector<WrenchPolytope>& polytopes) {
  const int nc = static_cast<int>(leg_indices.size());
  if (states.size() != static_cast<std::size_t>(nc))
    throw DimensionMismatch("build_actuation: one limb state per contact");
  G.setZero(6 * nc, 3 * nc);
  d.resize(6 * nc);
  polytopes.clear();
  for (int i = 0; i < nc; ++i) {
    const LegModel& leg = robot.legs[static_cast<std::size_t>(leg_indices[static_cast<std::size_t>(i)])];
    const Vec3& q = states[static_cast<std::size_t>(i)].q;
    const Mat3 jac = leg_jacobian(leg, q);
    const Vec3 g_tau = gravity_torques(leg, q, robot.gravity);
    const WrenchPolytope wp = make_wrench_polytope(jac, g_tau, leg.torque_limit);
    G.block<6, 3>(6 * i, 3 * i) = wp.G;
    d.segment<6>(6 * i) = wp.d;
    polytopes.push_back(wp);
  }
}

inline ConstraintSystem build_constraint_system(const RobotModel& robot, double mass,
                                                const std::vector<Contact>& contacts,
                                                const std::vector<int>& leg_indices,
                                                const std::vector<LimbState>& states) {
  for (const Contact& c : contacts) c.validate();
  ConstraintSystem cs;
  cs.num_contacts = static_cast<int>(contacts.size());
  build_grasp(contacts, mass, robot.gravity, cs.A1, cs.A2, cs.u);
  cs.B = build_friction(contacts);
  build_actuation(robot, leg_indices, states, cs.G, cs.d, cs.polytopes);
  return cs;
}

/// (4 + 2 n_l) rows per unilateral contact, 2 n_l per bilateral one.
inline int expected_inequality_rows(const std::vector<Contact>& contacts, int joints_per_leg = 3) {
  int rows = 0;
  for (const Contact& c : contacts)
    rows += 2 * joints_per_leg + (c.mode == ContactMode::unilateral ? 4 : 0);
  return rows;
}

/// Per-limb torques recovered from a stacked force vector through
/// tau_i = g(q_i) - J_i^T f_i.
inline std::vector<Vec3> recover_torques(const RobotModel& robot,
                                         const std::vector<int>& leg_indices,
                                         const std::vector<LimbState>& states, const VecX& forces) {
  const int nc = static_cast<int>(leg_indices.size());
  if (forces.size() != 3 * nc) throw DimensionMismatch("recover_torques: force vector size");
  std::vector<Vec3> taus;
  for (int i = 0; i < nc; ++i) {
    const LegModel& leg = robot.legs[static_cast<std::size_t>(leg_indices[static_cast<std::size_t>(i)])];
    const Vec3& q = states[static_cast<std::size_t>(i)].q;
    const Vec3 f = forces.segment<3>(3 * i);
    taus.push_back(gravity_torques(leg, q, robot.gravity) - leg_jacobian(leg, q).transpose() * f);
  }
  return taus;
}

}  // namespace feasreg
