#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace feasreg {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using VecX = Eigen::VectorXd;
using Mat3 = Eigen::Matrix3d;
using MatX = Eigen::MatrixXd;

// Tolerances, in the unit of the quantity they guard (documented per use).
namespace tol {
inline constexpr double collinear = 1e-9;     // m, hull / polygon degeneracy
inline constexpr double boundary_band = 1e-9; // m, point-in-polygon boundary
inline constexpr double halfspace = 1e-7;     // m, vertex/halfspace agreement
inline constexpr double lp_feasibility = 1e-7;
inline constexpr double lp_optimality = 1e-9;
}  // namespace tol

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateInput : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct UnboundedSet : Error { using Error::Error; };
struct EmptySet : Error { using Error::Error; };
struct NumericalBreakdown : Error { using Error::Error; };
struct JointLimit : Error { using Error::Error; };
struct OutOfWorkspace : Error { using Error::Error; };
struct OutOfBounds : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct EmptyRegion : Error { using Error::Error; };
struct NoFeasibleFoothold : Error { using Error::Error; };
struct InfeasibleDistribution : Error { using Error::Error; };

}  // namespace feasreg
