#include "r2s/math.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace r2s {

RotationFit fit_rotation(const Mat3& a) {
  // Right singular vectors from A^T A. computeDirect uses a closed-form 3x3
  // path, an order of magnitude faster than JacobiSVD.
  Eigen::SelfAdjointEigenSolver<Mat3> eig;
  eig.computeDirect(a.transpose() * a);

  // Eigenvalues come out ascending; reorder to descending singular values.
  const Vec3 ev = eig.eigenvalues().cwiseMax(0.0);
  Vec3 sigma(std::sqrt(ev[2]), std::sqrt(ev[1]), std::sqrt(ev[0]));

  Vec3 v0 = eig.eigenvectors().col(2);
  Vec3 v1 = eig.eigenvectors().col(1);
  Vec3 v2 = eig.eigenvectors().col(0);
  if (v0.cross(v1).dot(v2) < 0.0) v2 = -v2;

  // The closed-form eigensolver's absolute error is around 1e-9 * lambda_max,
  // which floors sqrt-derived sigma ratios near 1e-4. ||A v|| measures the
  // small singular values directly: near-null eigenvectors map to near-zero
  // even when they mix inside the null space, restoring ~1e-15 resolution.
  if ((a * v1).norm() <= 1e-6 * std::max((a * v0).norm(), 1e-300))
    throw DegenerateCluster("rotation fit needs rank >= 2");

  // Left singular vectors for the two well-conditioned directions; the third
  // completes a right-handed frame, which lands on the proper-rotation branch
  // of the polar decomposition even when det(A) < 0.
  Vec3 u0 = (a * v0).normalized();
  Vec3 u1 = a * v1;
  u1 -= u1.dot(u0) * u0;
  u1.normalize();
  const Vec3 u2 = u0.cross(u1);

  Mat3 u;
  u.col(0) = u0;
  u.col(1) = u1;
  u.col(2) = u2;
  Mat3 v;
  v.col(0) = v0;
  v.col(1) = v1;
  v.col(2) = v2;

  return RotationFit{u * v.transpose(), sigma};
}

}  // namespace r2s
