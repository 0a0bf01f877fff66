#include "r2s/deformation.hpp"

#include "r2s/parallel.hpp"
#include "r2s/spatial_index.hpp"

namespace r2s {

InverseDeformationField::InverseDeformationField(std::vector<Vec3> rest_surface,
                                                 const GridGeometry& geometry)
    : geometry_(geometry), rest_surface_(std::move(rest_surface)) {
  geometry_.validate();
  if (rest_surface_.empty()) throw EmptyCloud("deformation field needs surface particles");

  const SpatialIndex rest_index(rest_surface_);
  owners_.resize(geometry_.vertex_count());
  const int nx = geometry_.dims.x(), ny = geometry_.dims.y();
  parallel_for(static_cast<std::size_t>(geometry_.vertex_count()), [&](std::size_t v) {
    const int i = int(v) % nx;
    const int j = (int(v) / nx) % ny;
    const int k = int(v) / (nx * ny);
    owners_[v] = rest_index.nearest(geometry_.vertex_position(i, j, k));
  });

  particle_vectors_.assign(rest_surface_.size(), Vec3::Zero());
  vectors_.assign(owners_.size(), Vec3::Zero());
}

void InverseDeformationField::update(std::span<const Vec3> current_surface) {
  if (current_surface.size() != rest_surface_.size())
    throw LengthMismatch("deformed surface does not match rest surface size");
  for (std::size_t i = 0; i < rest_surface_.size(); ++i) {
    if (!current_surface[i].allFinite())
      throw NonFiniteState("non-finite surface particle");
    particle_vectors_[i] = rest_surface_[i] - current_surface[i];
  }
  parallel_for(vectors_.size(),
               [&](std::size_t v) { vectors_[v] = particle_vectors_[owners_[v]]; });
}

InverseDeformationField build_idf(std::span<const Vec3> rest_surface,
                                  std::span<const Vec3> current_surface,
                                  const GridGeometry& geometry) {
  InverseDeformationField idf(std::vector<Vec3>(rest_surface.begin(), rest_surface.end()),
                              geometry);
  idf.update(current_surface);
  return idf;
}

Vec3 deformed_sdf(const InverseDeformationField& idf, const SdfGrid& rest_sdf, const Vec3& q,
                  BoundsPolicy policy) {
  return rest_sdf.interpolate(q + idf.interpolate(q, policy), policy);
}

}  // namespace r2s
