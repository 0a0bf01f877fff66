#pragma once

#include "r2s/grid.hpp"
#include "r2s/point_cloud.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace r2s {

// Vector-valued distance field: each vertex stores the offset to its nearest
// point of the source cloud, so the magnitude is the unsigned distance and
// the direction points at the cloud.
struct SdfGrid {
  GridGeometry geometry;
  std::vector<Vec3> values;

  Vec3 interpolate(const Vec3& q, BoundsPolicy policy = BoundsPolicy::Strict) const {
    return sample_trilinear(geometry, values, q, policy);
  }
  void validate() const;
};

// Fills the grid from the cloud. The grid box must contain the cloud's
// bounding box; throws EmptyCloud / OutOfBounds otherwise.
SdfGrid build_initial_sdf(const PointCloud& cloud, const GridGeometry& geometry);

// Text dump: "sdfgrid 1", origin/spacing/dims lines, then one vector per
// vertex in storage order.
void save_sdf_grid(const SdfGrid& grid, std::ostream& out);
void save_sdf_grid(const SdfGrid& grid, const std::filesystem::path& path);
SdfGrid load_sdf_grid(std::istream& in);
SdfGrid load_sdf_grid(const std::filesystem::path& path);

}  // namespace r2s
