#pragma once

#include "feasreg/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace feasreg {

/// Three-DoF point-foot leg, HAA-HFE-KFE convention: the hip ab/adduction
/// axis is the base x axis, both pitch axes follow it. At q = 0 the leg
/// hangs straight down with the hip assembly offset side_sign*l1 along y.
struct LegModel {
  std::string name;
  Vec3 hip_offset = Vec3::Zero();  // base frame, m
  double l1 = 0.0, l2 = 0.0, l3 = 0.0;  // link lengths, m
  double side_sign = 1.0;   // +1 left, -1 right (direction of the l1 offset)
  double knee_sign = 1.0;   // +1 knee forward, -1 knee backward (IK branch)
  Vec3 link_masses = Vec3::Zero();            // kg
  Vec3 link_com[3] = {Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};  // link frames, m
  Vec3 joint_lower = Vec3::Constant(-1e9);    // rad
  Vec3 joint_upper = Vec3::Constant(1e9);     // rad
  Vec3 torque_limit = Vec3::Zero();           // N*m, symmetric (+-)

  void check_joint_limits(const Vec3& q) const {
    for (int i = 0; i < 3; ++i)
      if (q[i] < joint_lower[i] - 1e-12 || q[i] > joint_upper[i] + 1e-12)
        throw JointLimit(name + ": joint " + std::to_string(i) + " outside limits");
  }
};

struct RobotModel {
  std::vector<LegModel> legs;
  double total_mass = 0.0;  // kg, lumped at the CoM for the grasp rows
  double gravity = 9.81;    // m/s^2, downward

  Vec3 gravity_vector() const { return Vec3(0.0, 0.0, -gravity); }

  int leg_index(const std::string& name) const {
    for (std::size_t i = 0; i < legs.size(); ++i)
      if (legs[i].name == name) return static_cast<int>(i);
    throw Error("RobotModel: unknown leg '" + name + "'");
  }
};

struct LimbState {
  Vec3 q = Vec3::Zero();          // rad
  Vec3 foot_position = Vec3::Zero();  // base frame, m
};

namespace detail {

inline Mat3 rot_x(double a) {
  Mat3 r;
  r << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return r;
}

inline Mat3 rot_y(double a) {
  Mat3 r;
  r << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return r;
}

struct LegFrames {
  Vec3 p_hfe, p_kfe, p_foot;  // hip frame
  Vec3 axis_haa, axis_pitch;  // unit joint axes (HFE and KFE are parallel)
  Mat3 r1, r2, r3;
};

inline LegFrames leg_frames(const LegModel& leg, const Vec3& q) {
  LegFrames f;
  f.r1 = rot_x(q[0]);
  f.r2 = f.r1 * rot_y(q[1]);
  f.r3 = f.r2 * rot_y(q[2]);
  f.p_hfe = f.r1 * Vec3(0.0, leg.side_sign * leg.l1, 0.0);
  f.p_kfe = f.p_hfe + f.r2 * Vec3(0.0, 0.0, -leg.l2);
  f.p_foot = f.p_kfe + f.r3 * Vec3(0.0, 0.0, -leg.l3);
  f.axis_haa = Vec3::UnitX();
  f.axis_pitch = f.r1 * Vec3::UnitY();
  return f;
}

}  // namespace detail

/// Closed-form foot position in the base frame.
///   px = -l2 sin(q2) - l3 sin(q2+q3)
///   py =  s*l1 cos(q1) + sin(q1) (l2 cos(q2) + l3 cos(q2+q3))
///   pz =  s*l1 sin(q1) - cos(q1) (l2 cos(q2) + l3 cos(q2+q3))
inline Vec3 forward_kinematics(const LegModel& leg, const Vec3& q) {
  leg.check_joint_limits(q);
  const double s1 = std::sin(q[0]), c1 = std::cos(q[0]);
  const double s2 = std::sin(q[1]), c2 = std::cos(q[1]);
  const double s23 = std::sin(q[1] + q[2]), c23 = std::cos(q[1] + q[2]);
  const double ext = leg.l2 * c2 + leg.l3 * c23;
  const Vec3 hip(-leg.l2 * s2 - leg.l3 * s23, leg.side_sign * leg.l1 * c1 + s1 * ext,
                 leg.side_sign * leg.l1 * s1 - c1 * ext);
  return leg.hip_offset + hip;
}

/// Analytic Jacobian, columns d(foot)/dq_j; singular configurations are
/// returned as-is (callers inspect the conditioning).
inline Mat3 leg_jacobian(const LegModel& leg, const Vec3& q) {
  const detail::LegFrames f = detail::leg_frames(leg, q);
  Mat3 j;
  j.col(0) = f.axis_haa.cross(f.p_foot);
  j.col(1) = f.axis_pitch.cross(f.p_foot - f.p_hfe);
  j.col(2) = f.axis_pitch.cross(f.p_foot - f.p_kfe);
  return j;
}

/// Analytic IK for the configured knee branch. Throws OutOfWorkspace when the
/// target leaves the reachable annulus and JointLimit when the branch
/// solution violates the joint limits.
inline Vec3 inverse_kinematics(const LegModel& leg, const Vec3& p_target) {
  const Vec3 p = p_target - leg.hip_offset;
  const double rho2 = p.y() * p.y() + p.z() * p.z();
  const double rho = std::sqrt(rho2);
  if (rho < std::abs(leg.l1))
    throw OutOfWorkspace(leg.name + ": target inside the hip-offset cylinder");
  const double phi = std::atan2(p.z(), p.y());
  const double q1 = phi + std::acos(std::clamp(leg.side_sign * leg.l1 / std::max(rho, 1e-12), -1.0, 1.0));

  // Un-rotate into the leg's pitch plane.
  const double u = p.x();
  const double w = -std::sqrt(std::max(0.0, rho2 - leg.l1 * leg.l1));
  const double r2 = u * u + w * w;
  const double cos_q3 = (r2 - leg.l2 * leg.l2 - leg.l3 * leg.l3) / (2.0 * leg.l2 * leg.l3);
  if (cos_q3 < -1.0 - 1e-9 || cos_q3 > 1.0 + 1e-9)
    throw OutOfWorkspace(leg.name + ": target outside the reach annulus [" +
                         std::to_string(std::abs(leg.l2 - leg.l3)) + ", " +
                         std::to_string(leg.l2 + leg.l3) + "] m");
  const double q3 = leg.knee_sign * std::acos(std::clamp(cos_q3, -1.0, 1.0));
  const double a = leg.l2 + leg.l3 * std::cos(q3);
  const double b = leg.l3 * std::sin(q3);
  const double s2 = (-a * u + b * w) / r2;
  const double c2 = (-b * u - a * w) / r2;
  const double q2 = std::atan2(s2, c2);

  const Vec3 q(q1, q2, q3);
  leg.check_joint_limits(q);
  return q;
}

inline LimbState make_limb_state(const LegModel& leg, const Vec3& q) {
  return LimbState{q, forward_kinematics(leg, q)};
}

/// Gravity torque of the leg's own links, g(q) = dU/dq with
/// U = sum_k m_k g z_k(q). Zero for massless links.
inline Vec3 gravity_torques(const LegModel& leg, const Vec3& q, double gravity = 9.81) {
  const detail::LegFrames f = detail::leg_frames(leg, q);
  const Vec3 pc1 = f.r1 * leg.link_com[0];
  const Vec3 pc2 = f.p_hfe + f.r2 * leg.link_com[1];
  const Vec3 pc3 = f.p_kfe + f.r3 * leg.link_com[2];
  const Vec3 g_vec(0.0, 0.0, -gravity);

  auto column = [](const Vec3& axis, const Vec3& arm) { return axis.cross(arm); };
  Vec3 tau = Vec3::Zero();
  // g(q) = sum_k Jc_k^T (m_k * (0,0,+g)) = -sum_k Jc_k^T (m_k * g_vec)
  {
    Mat3 jc = Mat3::Zero();
    jc.col(0) = column(f.axis_haa, pc1);
    tau -= jc.transpose() * (leg.link_masses[0] * g_vec);
  }
  {
    Mat3 jc = Mat3::Zero();
    jc.col(0) = column(f.axis_haa, pc2);
    jc.col(1) = column(f.axis_pitch, pc2 - f.p_hfe);
    tau -= jc.transpose() * (leg.link_masses[1] * g_vec);
  }
  {
    Mat3 jc;
    jc.col(0) = column(f.axis_haa, pc3);
    jc.col(1) = column(f.axis_pitch, pc3 - f.p_hfe);
    jc.col(2) = column(f.axis_pitch, pc3 - f.p_kfe);
    tau -= jc.transpose() * (leg.link_masses[2] * g_vec);
  }
  return tau;
}

/// Force ellipsoid {w : w^T J J^T w <= 1}. Semiaxis k has length
/// 1/sigma_k(J) along the k-th left singular vector, singular values in
/// descending order; rank-deficient directions are flagged degenerate.
struct ForceEllipsoid {
  Mat3 jjt;
  Vec3 semiaxes;  // may contain +inf on degenerate axes
  Mat3 axes;      // columns, unit length
  double anisotropy = 1.0;  // sigma_max / sigma_min of J
  bool degenerate = false;
};

inline ForceEllipsoid force_ellipsoid(const LegModel& leg, const Vec3& q) {
  const Mat3 j = leg_jacobian(leg, q);
  Eigen::JacobiSVD<Mat3> svd(j, Eigen::ComputeFullU);
  ForceEllipsoid e;
  e.jjt = j * j.transpose();
  e.axes = svd.matrixU();
  const Vec3 sv = svd.singularValues();
  const double smax = sv[0];
  for (int k = 0; k < 3; ++k) {
    if (sv[k] <= 1e-10 * std::max(1.0, smax)) {
      e.semiaxes[k] = std::numeric_limits<double>::infinity();
      e.degenerate = true;
    } else {
      e.semiaxes[k] = 1.0 / sv[k];
    }
  }
  e.anisotropy = e.degenerate ? std::numeric_limits<double>::infinity() : smax / sv[2];
  return e;
}

/// Declared fixture model: HyQ-scale quadruped, 4 identical legs.
inline RobotModel default_robot() {
  RobotModel robot;
  robot.total_mass = 85.0;
  robot.gravity = 9.81;
  const struct {
    const char* name;
    double x, y;
  } hips[] = {{"LF", 0.37, 0.21}, {"RF", 0.37, -0.21}, {"LH", -0.37, 0.21}, {"RH", -0.37, -0.21}};
  for (const auto& h : hips) {
    LegModel leg;
    leg.name = h.name;
    leg.hip_offset = Vec3(h.x, h.y, 0.0);
    leg.l1 = 0.08;
    leg.l2 = 0.35;
    leg.l3 = 0.33;
    leg.side_sign = h.y > 0 ? 1.0 : -1.0;
    leg.knee_sign = h.x > 0 ? -1.0 : 1.0;  // knee backward in front, forward behind
    leg.link_masses = Vec3(0.5, 2.5, 1.0);
    leg.link_com[0] = Vec3(0.0, leg.side_sign * leg.l1 / 2.0, 0.0);
    leg.link_com[1] = Vec3(0.0, 0.0, -leg.l2 / 2.0);
    leg.link_com[2] = Vec3(0.0, 0.0, -leg.l3 / 2.0);
    leg.joint_lower = Vec3(-1.2, -2.36, -2.6);
    leg.joint_upper = Vec3(1.2, 2.36, 2.6);
    leg.torque_limit = Vec3(120.0, 150.0, 150.0);
    robot.legs.push_back(leg);
  }
  return robot;
}

/// IK of every listed leg against world-frame foot targets for a base at
/// base_position (orientation fixed to identity).
inline std::vector<LimbState> solve_stance_ik(const RobotModel& robot, const Vec3& base_position,
                                              const std::vector<int>& leg_indices,
                                              const std::vector<Vec3>& world_targets) {
  if (leg_indices.size() != world_targets.size())
    throw DimensionMismatch("solve_stance_ik: one target per leg");
  std::vector<LimbState> states;
  states.reserve(leg_indices.size());
  for (std::size_t i = 0; i < leg_indices.size(); ++i) {
    const LegModel& leg = robot.legs[static_cast<std::size_t>(leg_indices[i])];
    const Vec3 target_base = world_targets[i] - base_position;
    const Vec3 q = inverse_kinematics(leg, target_base);
    states.push_back(LimbState{q, target_base});
  }
  return states;
}

}  // namespace feasreg
