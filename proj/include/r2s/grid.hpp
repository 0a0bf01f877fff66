#pragma once

#include "r2s/types.hpp"

#include <array>
#include <span>

namespace r2s {

// Axis-aligned vertex lattice. Vertex (i, j, k) sits at
// origin + spacing * (i, j, k); linear storage is x-fastest.
struct GridGeometry {
  Vec3 origin = Vec3::Zero();
  double spacing = 1.0;
  Vec3i dims = Vec3i::Constant(2);  // vertices per axis, each >= 2

  Index vertex_count() const { return Index(dims.x()) * dims.y() * dims.z(); }
  Index vertex_index(int i, int j, int k) const {
    return Index(i) + Index(dims.x()) * (Index(j) + Index(dims.y()) * k);
  }
  Vec3 vertex_position(int i, int j, int k) const {
    return origin + spacing * Vec3(i, j, k);
  }
  Vec3 max_corner() const {
    return origin + spacing * (dims.cast<double>() - Vec3::Ones(3));
  }
  bool contains(const Vec3& q) const;
  Vec3 clamp_to_box(const Vec3& q) const;
  void validate() const;
};

enum class BoundsPolicy {
  Strict,  // queries outside the box throw OutOfBounds
  Clamp,   // queries project onto the box surface first
};

// Trilinear interpolation of a per-vertex vector field. Reproduces vertex
// values at the vertices, including on the upper faces.
Vec3 sample_trilinear(const GridGeometry& grid, std::span<const Vec3> values, const Vec3& q,
                      BoundsPolicy policy = BoundsPolicy::Strict);

// The eight vertices and weights sample_trilinear would blend for q.
struct TrilinearStencil {
  std::array<Index, 8> vertices;
  std::array<double, 8> weights;
};
TrilinearStencil trilinear_stencil(const GridGeometry& grid, const Vec3& q,
                                   BoundsPolicy policy = BoundsPolicy::Strict);

}  // namespace r2s
