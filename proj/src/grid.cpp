#include "r2s/grid.hpp"

#include <algorithm>
#include <cmath>

namespace r2s {

void GridGeometry::validate() const {
  if (spacing <= 0.0) throw ValidationError("grid spacing must be positive");
  if (dims.minCoeff() < 2) throw ValidationError("grid needs at least 2 vertices per axis");
  if (!origin.allFinite()) throw ValidationError("grid origin not finite");
}

bool GridGeometry::contains(const Vec3& q) const {
  const Vec3 hi = max_corner();
  return q.x() >= origin.x() && q.y() >= origin.y() && q.z() >= origin.z() &&
         q.x() <= hi.x() && q.y() <= hi.y() && q.z() <= hi.z();
}

Vec3 GridGeometry::clamp_to_box(const Vec3& q) const {
  return q.cwiseMax(origin).cwiseMin(max_corner());
}

namespace {

TrilinearStencil stencil_in_box(const GridGeometry& g, const Vec3& q) {
  TrilinearStencil s;
  int cell[3];
  double frac[3];
  for (int a = 0; a < 3; ++a) {
    const double u = (q[a] - g.origin[a]) / g.spacing;
    // Queries on the upper face land in the last cell with fraction 1, so
    // vertex values are reproduced there too.
    int c = int(std::floor(u));
    c = std::clamp(c, 0, g.dims[a] - 2);
    cell[a] = c;
    frac[a] = u - c;
  }
  int n = 0;
  for (int dk = 0; dk < 2; ++dk) {
    for (int dj = 0; dj < 2; ++dj) {
      for (int di = 0; di < 2; ++di) {
        s.vertices[n] = g.vertex_index(cell[0] + di, cell[1] + dj, cell[2] + dk);
        s.weights[n] = (di ? frac[0] : 1.0 - frac[0]) * (dj ? frac[1] : 1.0 - frac[1]) *
                       (dk ? frac[2] : 1.0 - frac[2]);
        ++n;
      }
    }
  }
  return s;
}

}  // namespace

TrilinearStencil trilinear_stencil(const GridGeometry& grid, const Vec3& q, BoundsPolicy policy) {
  Vec3 p = q;
  if (!grid.contains(p)) {
    if (policy == BoundsPolicy::Strict) throw OutOfBounds("query outside grid box");
    p = grid.clamp_to_box(p);
  }
  return stencil_in_box(grid, p);
}

Vec3 sample_trilinear(const GridGeometry& grid, std::span<const Vec3> values, const Vec3& q,
                      BoundsPolicy policy) {
  if (static_cast<Index>(values.size()) != grid.vertex_count())
    throw LengthMismatch("field size does not match grid vertex count");
  const TrilinearStencil s = trilinear_stencil(grid, q, policy);
  Vec3 out = Vec3::Zero();
  for (int i = 0; i < 8; ++i) out += s.weights[i] * values[s.vertices[i]];
  return out;
}

}  // namespace r2s
