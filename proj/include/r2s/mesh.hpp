#pragma once

#include "r2s/point_cloud.hpp"
#include "r2s/types.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace r2s {

// Regular-grid surface triangulation. Vertices are stored x-fastest, index
// (i, j) -> j * resolution_x + i; triangles wind counter-clockwise seen from
// +z for an upward-facing height field.
struct SurfaceMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<Index, 3>> triangles;
  std::vector<char> boundary;  // per-vertex, derived from edge adjacency
  int resolution_x = 0;
  int resolution_y = 0;

  Index vertex_count() const { return static_cast<Index>(vertices.size()); }
  void validate() const;
};

// Tetrahedralized slab. The first surface-vertex-count particles are the
// surface in mesh order (surface_map is that identity prefix); the rest are
// the extruded bottom layer. All tets have positive signed volume.
struct VolumeMesh {
  std::vector<Vec3> particles;
  std::vector<std::array<Index, 4>> tets;
  std::vector<char> fixed;         // boundary column flags
  std::vector<Index> surface_map;  // surface vertex -> particle index

  Index particle_count() const { return static_cast<Index>(particles.size()); }
  void validate() const;
  double total_volume() const;
};

// Resamples a height-field cloud onto a resolution_x by resolution_y grid over
// its XY bounding box. Heights come from a least-squares plane through the
// nearest cloud points in XY, so linear height fields are reproduced exactly.
// Throws InsufficientPoints (< 4 points) and NonHeightField (folded cloud or
// degenerate XY extent).
SurfaceMesh triangulate_cloud(const PointCloud& cloud, int resolution_x, int resolution_y);

// Sweeps the surface by thickness along direction (normalized internally) and
// splits each prism into three tets. Prism splits share quad-face diagonals,
// chosen from global vertex order, so the mesh is conforming. Boundary
// columns (surface boundary vertex plus its extruded copy) are flagged fixed.
VolumeMesh extrude_volume(const SurfaceMesh& surface, double thickness, const Vec3& direction);

void save_obj(std::span<const Vec3> vertices, std::span<const std::array<Index, 3>> triangles,
              std::ostream& out);
void save_obj(const SurfaceMesh& mesh, const std::filesystem::path& path);
void save_obj(std::span<const Vec3> vertices, std::span<const std::array<Index, 3>> triangles,
              const std::filesystem::path& path);

// Plain-text tet mesh: a "tetmesh 1" magic line, counts, then one particle
// per line (x y z fixed) and one tet per line (four particle indices).
void save_volume_mesh(const VolumeMesh& mesh, std::ostream& out);
void save_volume_mesh(const VolumeMesh& mesh, const std::filesystem::path& path);
VolumeMesh load_volume_mesh(std::istream& in);
VolumeMesh load_volume_mesh(const std::filesystem::path& path);

}  // namespace r2s
