#include "r2s/sdf_grid.hpp"

#include "r2s/format.hpp"
#include "r2s/parallel.hpp"
#include "r2s/spatial_index.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace r2s {

void SdfGrid::validate() const {
  geometry.validate();
  if (static_cast<Index>(values.size()) != geometry.vertex_count())
    throw LengthMismatch("value count does not match grid vertex count");
}

SdfGrid build_initial_sdf(const PointCloud& cloud, const GridGeometry& geometry) {
  cloud.validate();
  geometry.validate();
  if (cloud.points.empty()) throw EmptyCloud("cannot build a distance field from no points");
  for (const Vec3& p : cloud.points)
    if (!geometry.contains(p)) throw OutOfBounds("cloud point outside grid box");

  const SpatialIndex index(cloud.points);

  SdfGrid grid;
  grid.geometry = geometry;
  grid.values.resize(geometry.vertex_count());
  const int nx = geometry.dims.x(), ny = geometry.dims.y();
  parallel_for(static_cast<std::size_t>(geometry.vertex_count()), [&](std::size_t v) {
    const int i = int(v) % nx;
    const int j = (int(v) / nx) % ny;
    const int k = int(v) / (nx * ny);
    const Vec3 pos = geometry.vertex_position(i, j, k);
    grid.values[v] = cloud.points[index.nearest(pos)] - pos;
  });
  return grid;
}

void save_sdf_grid(const SdfGrid& grid, std::ostream& out) {
  grid.validate();
  out << "sdfgrid 1\n";
  out << "origin " << format_exact(grid.geometry.origin.x()) << ' '
      << format_exact(grid.geometry.origin.y()) << ' '
      << format_exact(grid.geometry.origin.z()) << '\n';
  out << "spacing " << format_exact(grid.geometry.spacing) << '\n';
  out << "dims " << grid.geometry.dims.x() << ' ' << grid.geometry.dims.y() << ' '
      << grid.geometry.dims.z() << '\n';
  for (const Vec3& v : grid.values)
    out << format_exact(v.x()) << ' ' << format_exact(v.y()) << ' ' << format_exact(v.z())
        << '\n';
}

void save_sdf_grid(const SdfGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  save_sdf_grid(grid, out);
}

SdfGrid load_sdf_grid(std::istream& in) {
  std::string line;
  int lineno = 0;
  auto next = [&]() -> std::istringstream {
    if (!std::getline(in, line)) throw ParseError("unexpected end of file", lineno);
    ++lineno;
    return std::istringstream(line);
  };

  SdfGrid grid;
  {
    auto s = next();
    std::string magic;
    int version = 0;
    if (!(s >> magic >> version) || magic != "sdfgrid" || version != 1)
      throw ParseError("expected 'sdfgrid 1' header", lineno);
  }
  {
    auto s = next();
    std::string key;
    Vec3& o = grid.geometry.origin;
    if (!(s >> key >> o.x() >> o.y() >> o.z()) || key != "origin")
      throw ParseError("expected 'origin x y z'", lineno);
  }
  {
    auto s = next();
    std::string key;
    if (!(s >> key >> grid.geometry.spacing) || key != "spacing")
      throw ParseError("expected 'spacing s'", lineno);
  }
  {
    auto s = next();
    std::string key;
    Vec3i& d = grid.geometry.dims;
    if (!(s >> key >> d.x() >> d.y() >> d.z()) || key != "dims")
      throw ParseError("expected 'dims nx ny nz'", lineno);
  }
  grid.geometry.validate();
  grid.values.resize(grid.geometry.vertex_count());
  for (Vec3& v : grid.values) {
    auto s = next();
    if (!(s >> v.x() >> v.y() >> v.z())) throw ParseError("expected 'vx vy vz'", lineno);
  }
  return grid;
}

SdfGrid load_sdf_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return load_sdf_grid(in);
}

}  // namespace r2s
