#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace r2s {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec3i = Eigen::Vector3i;
using Isometry = Eigen::Isometry3d;
using Index = std::int32_t;

// Degeneracy guards. Lengths (and gradient norms) below these are treated as
// zero rather than divided by.
inline constexpr double kEpsLength = 1e-9;
inline constexpr double kEpsGradient = 1e-9;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inputs that violate a documented precondition (bad config, malformed file,
// inconsistent sizes). The CLI maps these to exit code 1.
struct ValidationError : Error {
  using Error::Error;
};

struct LengthMismatch : ValidationError {
  using ValidationError::ValidationError;
};

struct UnknownKind : ValidationError {
  using ValidationError::ValidationError;
};

struct InsufficientPoints : ValidationError {
  using ValidationError::ValidationError;
};

// Cloud does not project injectively onto a height field over XY.
struct NonHeightField : ValidationError {
  using ValidationError::ValidationError;
};

struct EmptyCloud : ValidationError {
  using ValidationError::ValidationError;
};

struct ParseError : ValidationError {
  ParseError(const std::string& what, int line)
      : ValidationError(what + " (line " + std::to_string(line) + ")"), line(line) {}
  int line;
};

// Failures reached from well-formed inputs. The CLI maps these to exit code 2.
struct RuntimeFault : Error {
  using Error::Error;
};

struct IoError : RuntimeFault {
  using RuntimeFault::RuntimeFault;
};

struct OutOfBounds : RuntimeFault {
  using RuntimeFault::RuntimeFault;
};

struct InvertedTet : RuntimeFault {
  using RuntimeFault::RuntimeFault;
};

// Shape-match cluster whose covariance has rank < 2 (collinear or coincident).
struct DegenerateCluster : RuntimeFault {
  using RuntimeFault::RuntimeFault;
};

struct NonFiniteState : RuntimeFault {
  using RuntimeFault::RuntimeFault;
};

}  // namespace r2s
