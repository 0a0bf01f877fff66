#pragma once

#include "r2s/types.hpp"

#include <array>

namespace r2s {

// Signed volume of tetrahedron (a, b, c, d); positive when (b-a, c-a, d-a)
// is a right-handed frame.
template <typename A, typename B, typename C, typename D>
double tet_volume(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b,
                  const Eigen::MatrixBase<C>& c, const Eigen::MatrixBase<D>& d) {
  return (b - a).cross(c - a).dot(d - a) / 6.0;
}

// Gradients of tet_volume with respect to the four corners. They sum to zero.
inline std::array<Vec3, 4> tet_volume_gradients(const Vec3& a, const Vec3& b,
                                                const Vec3& c, const Vec3& d) {
  std::array<Vec3, 4> g;
  g[1] = (c - a).cross(d - a) / 6.0;
  g[2] = (d - a).cross(b - a) / 6.0;
  g[3] = (b - a).cross(c - a) / 6.0;
  g[0] = -(g[1] + g[2] + g[3]);
  return g;
}

struct RotationFit {
  Mat3 rotation;
  Vec3 singular_values;  // descending, all >= 0
};

// Rotation factor of the polar decomposition of a 3x3 matrix, resolved to
// det(R) = +1 in the reflection case. Requires rank >= 2; throws
// DegenerateCluster otherwise. Uses the eigendecomposition of A^T A, which is
// cheaper than a full SVD and accurate enough away from rank deficiency.
RotationFit fit_rotation(const Mat3& a);

}  // namespace r2s
