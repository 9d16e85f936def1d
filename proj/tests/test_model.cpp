#include "feasreg/model.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Geometry>
#include <cmath>
#include <random>

using namespace feasreg;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Independent FK path: homogeneous-transform chain product.
Vec3 fk_transform_chain(const LegModel& leg, const Vec3& q) {
  Eigen::Affine3d t = Eigen::Translation3d(leg.hip_offset) *
                      Eigen::AngleAxisd(q[0], Vec3::UnitX()) *
                      Eigen::Translation3d(0.0, leg.side_sign * leg.l1, 0.0) *
                      Eigen::AngleAxisd(q[1], Vec3::UnitY()) *
                      Eigen::Translation3d(0.0, 0.0, -leg.l2) *
                      Eigen::AngleAxisd(q[2], Vec3::UnitY()) *
                      Eigen::Translation3d(0.0, 0.0, -leg.l3);
  return t * Vec3::Zero();
}

Vec3 random_branch_q(const LegModel& leg, std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  while (true) {
    const Vec3 q(0.9 * u(rng), 1.1 * u(rng), leg.knee_sign * (0.3 + 1.6 * std::abs(u(rng))));
    // Stay in the lower half of the pitch plane (the IK branch).
    if (leg.l2 * std::cos(q[1]) + leg.l3 * std::cos(q[1] + q[2]) > 0.08) return q;
  }
}

double leg_potential(const LegModel& leg, const Vec3& q, double g) {
  const auto f = detail::leg_frames(leg, q);
  const Vec3 pc1 = f.r1 * leg.link_com[0];
  const Vec3 pc2 = f.p_hfe + f.r2 * leg.link_com[1];
  const Vec3 pc3 = f.p_kfe + f.r3 * leg.link_com[2];
  return g * (leg.link_masses[0] * pc1.z() + leg.link_masses[1] * pc2.z() +
              leg.link_masses[2] * pc3.z());
}

}  // namespace

TEST_CASE("FK at the zero configuration", "[model]") {
  const RobotModel robot = default_robot();
  for (const LegModel& leg : robot.legs) {
    const Vec3 p = forward_kinematics(leg, Vec3::Zero());
    const Vec3 expect = leg.hip_offset + Vec3(0.0, leg.side_sign * leg.l1, -(leg.l2 + leg.l3));
    CHECK((p - expect).norm() < 1e-15);
  }
}

TEST_CASE("FK with the knee at 90 degrees", "[model]") {
  const LegModel leg = default_robot().legs[0];  // LF, side +1
  const Vec3 p = forward_kinematics(leg, Vec3(0.0, 0.0, kPi / 2));
  // Thigh straight down, shank folded forward: x = -l3, z = -l2.
  const Vec3 expect = leg.hip_offset + Vec3(-leg.l3, leg.side_sign * leg.l1, -leg.l2);
  CHECK((p - expect).norm() < 1e-14);
}

TEST_CASE("FK matches the transform-chain oracle", "[model]") {
  std::mt19937 rng(9001);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const RobotModel robot = default_robot();
  for (int rep = 0; rep < 200; ++rep) {
    const LegModel& leg = robot.legs[static_cast<std::size_t>(rep % 4)];
    const Vec3 q(1.1 * u(rng), 2.0 * u(rng), 2.2 * u(rng));
    CHECK((forward_kinematics(leg, q) - fk_transform_chain(leg, q)).norm() < 1e-12);
  }
}

TEST_CASE("FK rejects out-of-limit joints", "[model]") {
  const LegModel leg = default_robot().legs[0];
  CHECK_THROWS_AS(forward_kinematics(leg, Vec3(2.0, 0.0, 0.0)), JointLimit);
}

TEST_CASE("Jacobian matches finite differences", "[model]") {
  std::mt19937 rng(9002);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const RobotModel robot = default_robot();
  const double h = 1e-6;
  for (int rep = 0; rep < 100; ++rep) {
    const LegModel& leg = robot.legs[static_cast<std::size_t>(rep % 4)];
    const Vec3 q(1.1 * u(rng), 2.0 * u(rng), 2.2 * u(rng));
    const Mat3 j = leg_jacobian(leg, q);
    Mat3 jfd;
    for (int k = 0; k < 3; ++k) {
      Vec3 qp = q, qm = q;
      qp[k] += h;
      qm[k] -= h;
      jfd.col(k) = (fk_transform_chain(leg, qp) - fk_transform_chain(leg, qm)) / (2.0 * h);
    }
    CHECK((j - jfd).cwiseAbs().maxCoeff() <= 1e-5);
  }
}

TEST_CASE("fully extended leg is singular", "[model]") {
  const LegModel leg = default_robot().legs[0];
  const Mat3 j = leg_jacobian(leg, Vec3::Zero());
  Eigen::JacobiSVD<Mat3> svd(j);
  CHECK(svd.singularValues()[2] < 1e-12);
  CHECK(svd.singularValues()[1] > 1e-3);  // rank 2
}

TEST_CASE("velocity consistency along joint trajectories", "[model]") {
  std::mt19937 rng(9003);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const LegModel leg = default_robot().legs[1];
  for (int rep = 0; rep < 20; ++rep) {
    const Vec3 q0(u(rng), 1.5 * u(rng), 1.5 * u(rng));
    const Vec3 qdot(u(rng), u(rng), u(rng));
    const double dt = 1e-6;
    const Vec3 numeric =
        (fk_transform_chain(leg, q0 + dt * qdot) - fk_transform_chain(leg, q0 - dt * qdot)) /
        (2.0 * dt);
    const Vec3 analytic = leg_jacobian(leg, q0) * qdot;
    CHECK((numeric - analytic).norm() < 1e-6);
  }
}

TEST_CASE("work duality of the transpose mapping", "[model]") {
  std::mt19937 rng(9004);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const LegModel leg = default_robot().legs[2];
  for (int rep = 0; rep < 50; ++rep) {
    const Vec3 q(u(rng), u(rng), u(rng));
    const Vec3 f(100 * u(rng), 100 * u(rng), 100 * u(rng));
    const Vec3 qdot(u(rng), u(rng), u(rng));
    const Mat3 j = leg_jacobian(leg, q);
    CHECK((j.transpose() * f).dot(qdot) == Catch::Approx(f.dot(j * qdot)).margin(1e-12));
  }
}

TEST_CASE("IK round trips FK", "[model]") {
  std::mt19937 rng(9005);
  const RobotModel robot = default_robot();
  for (int rep = 0; rep < 200; ++rep) {
    const LegModel& leg = robot.legs[static_cast<std::size_t>(rep % 4)];
    const Vec3 q = random_branch_q(leg, rng);
    const Vec3 p = forward_kinematics(leg, q);
    const Vec3 q_ik = inverse_kinematics(leg, p);
    CHECK((q_ik - q).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((forward_kinematics(leg, q_ik) - p).norm() <= 1e-8);
  }
}

TEST_CASE("IK at maximum reach straightens the knee", "[model]") {
  const LegModel leg = default_robot().legs[3];  // RH
  const double reach = leg.l2 + leg.l3 - 1e-9;
  const Vec3 target = leg.hip_offset + Vec3(0.0, leg.side_sign * leg.l1, -reach);
  const Vec3 q = inverse_kinematics(leg, target);
  CHECK(std::abs(q[2]) < 1e-3);
  CHECK((forward_kinematics(leg, q) - target).norm() < 1e-8);
}

TEST_CASE("IK workspace errors", "[model]") {
  const LegModel leg = default_robot().legs[0];
  CHECK_THROWS_AS(inverse_kinematics(leg, leg.hip_offset + Vec3(0, leg.side_sign * leg.l1, -2.0)),
                  OutOfWorkspace);
  CHECK_THROWS_AS(
      inverse_kinematics(leg, leg.hip_offset + Vec3(0.005, leg.side_sign * leg.l1, -0.005)),
      OutOfWorkspace);
}

TEST_CASE("IK is continuous along a straight foot path", "[model]") {
  const LegModel leg = default_robot().legs[0];
  const Vec3 a = leg.hip_offset + Vec3(-0.15, leg.side_sign * leg.l1, -0.55);
  const Vec3 b = leg.hip_offset + Vec3(0.20, leg.side_sign * leg.l1 + 0.05, -0.45);
  Vec3 prev = inverse_kinematics(leg, a);
  const int steps = 80;
  for (int i = 1; i <= steps; ++i) {
    const Vec3 p = a + (b - a) * (static_cast<double>(i) / steps);
    const Vec3 q = inverse_kinematics(leg, p);
    CHECK((q - prev).cwiseAbs().maxCoeff() < 0.1);  // no branch flip
    prev = q;
  }
}

TEST_CASE("gravity torques vanish for massless links", "[model]") {
  LegModel leg = default_robot().legs[0];
  leg.link_masses = Vec3::Zero();
  CHECK(gravity_torques(leg, Vec3(0.3, -0.8, 1.2)).norm() == 0.0);
}

TEST_CASE("gravity torques for a point mass at the foot", "[model]") {
  LegModel leg = default_robot().legs[0];
  leg.l1 = 0.0;  // mass plane through the HAA axis
  leg.link_masses = Vec3(0.0, 0.0, 3.0);
  leg.link_com[0] = Vec3::Zero();
  leg.link_com[1] = Vec3::Zero();
  leg.link_com[2] = Vec3(0.0, 0.0, -leg.l3);  // at the foot
  // Horizontal fully extended leg along +x.
  const Vec3 q(0.0, -kPi / 2, 0.0);
  const Vec3 tau = gravity_torques(leg, q);
  const double mg = 3.0 * 9.81;
  CHECK(std::abs(tau[0]) < 1e-12);
  CHECK(tau[1] == Catch::Approx(-mg * (leg.l2 + leg.l3)));
  CHECK(tau[2] == Catch::Approx(-mg * leg.l3));
}

TEST_CASE("gravity torques match the potential-energy gradient", "[model]") {
  std::mt19937 rng(9006);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const RobotModel robot = default_robot();
  const double h = 1e-6;
  for (int rep = 0; rep < 100; ++rep) {
    const LegModel& leg = robot.legs[static_cast<std::size_t>(rep % 4)];
    const Vec3 q(u(rng), 2.0 * u(rng), 2.0 * u(rng));
    const Vec3 tau = gravity_torques(leg, q);
    for (int k = 0; k < 3; ++k) {
      Vec3 qp = q, qm = q;
      qp[k] += h;
      qm[k] -= h;
      const double grad =
          (leg_potential(leg, qp, robot.gravity) - leg_potential(leg, qm, robot.gravity)) /
          (2.0 * h);
      CHECK(std::abs(tau[k] - grad) <= 1e-5);
    }
  }
}

TEST_CASE("gravity torques scale linearly with link masses", "[model]") {
  LegModel leg = default_robot().legs[1];
  const Vec3 q(0.2, -0.7, 1.4);
  const Vec3 tau1 = gravity_torques(leg, q);
  leg.link_masses *= 3.0;
  const Vec3 tau3 = gravity_torques(leg, q);
  CHECK((tau3 - 3.0 * tau1).norm() < 1e-12);
}

TEST_CASE("force ellipsoid semiaxes come from the SVD", "[model]") {
  std::mt19937 rng(9007);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const LegModel leg = default_robot().legs[0];
  for (int rep = 0; rep < 50; ++rep) {
    const Vec3 q(u(rng), 1.5 * u(rng), 0.4 + 1.5 * std::abs(u(rng)));
    const ForceEllipsoid e = force_ellipsoid(leg, q);
    const Mat3 j = leg_jacobian(leg, q);
    Eigen::JacobiSVD<Mat3> svd(j);
    REQUIRE_FALSE(e.degenerate);
    for (int k = 0; k < 3; ++k)
      CHECK(std::abs(e.semiaxes[k] - 1.0 / svd.singularValues()[k]) <= 1e-9);
    CHECK(e.anisotropy == Catch::Approx(svd.singularValues()[0] / svd.singularValues()[2]));
  }
  // Straight leg: degenerate axis flagged.
  const ForceEllipsoid d = force_ellipsoid(leg, Vec3::Zero());
  CHECK(d.degenerate);
  CHECK(std::isinf(d.semiaxes[2]));
}

TEST_CASE("stance IK solves the nominal four-stance", "[model]") {
  const RobotModel robot = default_robot();
  const Vec3 base(0.0, 0.0, 0.55);
  std::vector<int> idx = {0, 1, 2, 3};
  std::vector<Vec3> feet;
  for (const LegModel& leg : robot.legs)
    feet.push_back(Vec3(leg.hip_offset.x(), leg.hip_offset.y() + leg.side_sign * leg.l1, 0.0));
  const auto states = solve_stance_ik(robot, base, idx, feet);
  REQUIRE(states.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::abs(states[i].q[0]) < 1e-9);  // foot directly under the hip pivot
    const Vec3 p = forward_kinematics(robot.legs[i], states[i].q);
    CHECK((p - states[i].foot_position).norm() < 1e-9);
    CHECK((p + base - feet[i]).norm() < 1e-9);
  }
}
