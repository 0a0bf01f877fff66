#pragma once

#include "r2s/grid.hpp"
#include "r2s/sdf_grid.hpp"

#include <span>
#include <vector>

namespace r2s {

// Inverse deformation field: a grid of vectors mapping current space back to
// rest space. Each vertex carries rest - current of the surface particle
// whose rest position it is closest to; off-vertex values interpolate
// trilinearly. The vertex-to-particle assignment depends only on the rest
// surface, so it is built once and reused every frame.
class InverseDeformationField {
 public:
  InverseDeformationField(std::vector<Vec3> rest_surface, const GridGeometry& geometry);

  // Recomputes the per-vertex vectors for a new deformed surface. The surface
  // must stay index-aligned with the rest surface.
  void update(std::span<const Vec3> current_surface);

  const GridGeometry& geometry() const { return geometry_; }
  std::span<const Vec3> rest_surface() const { return rest_surface_; }
  std::span<const Vec3> vertex_vectors() const { return vectors_; }
  std::span<const Index> vertex_owners() const { return owners_; }
  std::span<const Vec3> particle_vectors() const { return particle_vectors_; }

  Vec3 interpolate(const Vec3& q, BoundsPolicy policy = BoundsPolicy::Strict) const {
    return sample_trilinear(geometry_, vectors_, q, policy);
  }

 private:
  GridGeometry geometry_;
  std::vector<Vec3> rest_surface_;
  std::vector<Index> owners_;           // vertex -> surface particle
  std::vector<Vec3> particle_vectors_;  // rest - current, per particle
  std::vector<Vec3> vectors_;           // owners_' vectors scattered to vertices
};

// One-call construction for a single (rest, current) pair.
InverseDeformationField build_idf(std::span<const Vec3> rest_surface,
                                  std::span<const Vec3> current_surface,
                                  const GridGeometry& geometry);

// Distance vector of the deformed surface at q: the rest-space field sampled
// at q plus the interpolated inverse deformation.
Vec3 deformed_sdf(const InverseDeformationField& idf, const SdfGrid& rest_sdf, const Vec3& q,
                  BoundsPolicy policy = BoundsPolicy::Strict);

}  // namespace r2s
