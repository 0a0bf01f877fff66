#include "r2s/mesh.hpp"

#include "r2s/format.hpp"
#include "r2s/math.hpp"
#include "r2s/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace r2s {

namespace {

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

std::vector<char> boundary_from_adjacency(Index vertex_count,
                                          std::span<const std::array<Index, 3>> triangles) {
  std::map<std::pair<Index, Index>, int> edge_count;
  for (const auto& t : triangles) {
    for (int e = 0; e < 3; ++e) {
      Index u = t[e], v = t[(e + 1) % 3];
      if (u > v) std::swap(u, v);
      ++edge_count[{u, v}];
    }
  }
  std::vector<char> boundary(vertex_count, 0);
  for (const auto& [edge, count] : edge_count) {
    if (count == 1) {
      boundary[edge.first] = 1;
      boundary[edge.second] = 1;
    }
  }
  return boundary;
}

}  // namespace

void SurfaceMesh::validate() const {
  if (boundary.size() != vertices.size())
    throw LengthMismatch("boundary flags do not match vertex count");
  if (resolution_x >= 2 && resolution_y >= 2 &&
      static_cast<Index>(vertices.size()) != Index(resolution_x) * Index(resolution_y))
    throw LengthMismatch("vertex count does not match grid resolution");
  for (const auto& t : triangles) {
    for (Index v : t)
      if (v < 0 || v >= vertex_count()) throw ValidationError("triangle index out of range");
    if (triangle_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]) <= 1e-16)
      throw ValidationError("degenerate triangle");
  }
}

void VolumeMesh::validate() const {
  if (fixed.size() != particles.size())
    throw LengthMismatch("fixed flags do not match particle count");
  for (Index s : surface_map)
    if (s < 0 || s >= particle_count()) throw ValidationError("surface map index out of range");
  for (const auto& t : tets) {
    for (Index v : t)
      if (v < 0 || v >= particle_count()) throw ValidationError("tet index out of range");
    if (tet_volume(particles[t[0]], particles[t[1]], particles[t[2]], particles[t[3]]) <= 0.0)
      throw InvertedTet("tet with non-positive volume");
  }
}

double VolumeMesh::total_volume() const {
  double total = 0.0;
  for (const auto& t : tets)
    total += tet_volume(particles[t[0]], particles[t[1]], particles[t[2]], particles[t[3]]);
  return total;
}

SurfaceMesh triangulate_cloud(const PointCloud& cloud, int resolution_x, int resolution_y) {
  cloud.validate();
  if (cloud.size() < 4) throw InsufficientPoints("triangulation needs at least 4 points");
  if (resolution_x < 2 || resolution_y < 2)
    throw ValidationError("grid resolution must be at least 2x2");

  Vec3 lo = cloud.points[0], hi = cloud.points[0];
  for (const Vec3& p : cloud.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double extent_x = hi.x() - lo.x();
  const double extent_y = hi.y() - lo.y();
  if (extent_x < kEpsLength || extent_y < kEpsLength)
    throw NonHeightField("cloud has no XY extent");

  const double cell_x = extent_x / (resolution_x - 1);
  const double cell_y = extent_y / (resolution_y - 1);

  // Fold detection: two sheets of a non-injective cloud put far-apart heights
  // into one XY cell.
  {
    const double cell_diag = std::hypot(cell_x, cell_y);
    std::vector<double> zmin(std::size_t(resolution_x - 1) * (resolution_y - 1),
                             std::numeric_limits<double>::infinity());
    std::vector<double> zmax(zmin.size(), -std::numeric_limits<double>::infinity());
    for (const Vec3& p : cloud.points) {
      const int cx = std::min(resolution_x - 2, int((p.x() - lo.x()) / cell_x));
      const int cy = std::min(resolution_y - 2, int((p.y() - lo.y()) / cell_y));
      const std::size_t c = std::size_t(cy) * (resolution_x - 1) + cx;
      zmin[c] = std::min(zmin[c], p.z());
      zmax[c] = std::max(zmax[c], p.z());
    }
    for (std::size_t c = 0; c < zmin.size(); ++c)
      if (zmax[c] - zmin[c] > cell_diag)
        throw NonHeightField("cloud is not a height field over XY");
  }

  // Index on XY only; z is flattened so 3D queries become planar ones.
  std::vector<Vec3> flat(cloud.points.size());
  for (std::size_t i = 0; i < cloud.points.size(); ++i)
    flat[i] = Vec3(cloud.points[i].x(), cloud.points[i].y(), 0.0);
  const SpatialIndex index(flat);
  const int k = std::min<int>(8, cloud.size());

  SurfaceMesh mesh;
  mesh.resolution_x = resolution_x;
  mesh.resolution_y = resolution_y;
  mesh.vertices.resize(std::size_t(resolution_x) * resolution_y);

  for (int j = 0; j < resolution_y; ++j) {
    for (int i = 0; i < resolution_x; ++i) {
      const double vx = lo.x() + i * cell_x;
      const double vy = lo.y() + j * cell_y;
      const auto nearest = index.nearest_k(Vec3(vx, vy, 0.0), k);

      // Least-squares plane z = a + b du + c dv through the neighbors,
      // centered on the vertex so the height is just the constant term.
      Mat3 normal = Mat3::Zero();
      Vec3 rhs = Vec3::Zero();
      for (Index p : nearest) {
        const double du = cloud.points[p].x() - vx;
        const double dv = cloud.points[p].y() - vy;
        const Vec3 row(1.0, du, dv);
        normal += row * row.transpose();
        rhs += cloud.points[p].z() * row;
      }
      // Collinear neighbors leave the plane underdetermined; fall back to the
      // mean height. Scale-invariant test on the du/dv scatter.
      const double sxx = normal(1, 1), syy = normal(2, 2), sxy = normal(1, 2);
      const double det2 = sxx * syy - sxy * sxy;
      double height;
      if (det2 > 1e-12 * std::max(sxx, syy) * std::max(sxx, syy) + 1e-300) {
        height = normal.ldlt().solve(rhs)[0];
      } else {
        height = rhs[0] / double(nearest.size());
      }
      mesh.vertices[std::size_t(j) * resolution_x + i] = Vec3(vx, vy, height);
    }
  }

  for (int j = 0; j + 1 < resolution_y; ++j) {
    for (int i = 0; i + 1 < resolution_x; ++i) {
      const Index v00 = Index(j) * resolution_x + i;
      const Index v10 = v00 + 1;
      const Index v01 = v00 + resolution_x;
      const Index v11 = v01 + 1;
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  }

  mesh.boundary = boundary_from_adjacency(mesh.vertex_count(), mesh.triangles);
  mesh.validate();
  return mesh;
}

VolumeMesh extrude_volume(const SurfaceMesh& surface, double thickness, const Vec3& direction) {
  surface.validate();
  if (thickness <= 0.0) throw ValidationError("extrusion thickness must be positive");
  if (direction.norm() < kEpsLength) throw ValidationError("extrusion direction is zero");
  const Vec3 offset = thickness * direction.normalized();
  const Index n = surface.vertex_count();

  VolumeMesh mesh;
  mesh.particles.reserve(2 * std::size_t(n));
  mesh.particles = surface.vertices;
  for (Index i = 0; i < n; ++i) mesh.particles.push_back(surface.vertices[i] + offset);

  mesh.fixed.assign(2 * std::size_t(n), 0);
  for (Index i = 0; i < n; ++i)
    if (surface.boundary[i]) mesh.fixed[i] = mesh.fixed[i + n] = 1;

  mesh.surface_map.resize(n);
  for (Index i = 0; i < n; ++i) mesh.surface_map[i] = i;

  for (const auto& tri : surface.triangles) {
    // Sorting by global index makes every quad face split along the diagonal
    // from its larger top vertex to its smaller bottom vertex; the neighbor
    // prism derives the same diagonal, so faces match up.
    std::array<Index, 3> p = tri;
    std::sort(p.begin(), p.end());
    const std::array<Index, 3> q{p[0] + n, p[1] + n, p[2] + n};
    const std::array<std::array<Index, 4>, 3> split{{
        {p[0], p[1], p[2], q[0]},
        {p[1], p[2], q[0], q[1]},
        {p[2], q[0], q[1], q[2]},
    }};
    for (std::array<Index, 4> t : split) {
      const double vol = tet_volume(mesh.particles[t[0]], mesh.particles[t[1]],
                                    mesh.particles[t[2]], mesh.particles[t[3]]);
      if (std::abs(vol) < 1e-18) throw InvertedTet("degenerate prism tet");
      if (vol < 0.0) std::swap(t[2], t[3]);
      mesh.tets.push_back(t);
    }
  }

  mesh.validate();
  return mesh;
}

void save_obj(std::span<const Vec3> vertices, std::span<const std::array<Index, 3>> triangles,
              std::ostream& out) {
  for (const Vec3& v : vertices)
    out << "v " << format_exact(v.x()) << ' ' << format_exact(v.y()) << ' '
        << format_exact(v.z()) << '\n';
  for (const auto& t : triangles)
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

void save_obj(const SurfaceMesh& mesh, const std::filesystem::path& path) {
  save_obj(mesh.vertices, mesh.triangles, path);
}

void save_obj(std::span<const Vec3> vertices, std::span<const std::array<Index, 3>> triangles,
              const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  save_obj(vertices, triangles, out);
}

void save_volume_mesh(const VolumeMesh& mesh, std::ostream& out) {
  out << "tetmesh 1\n";
  out << "particles " << mesh.particle_count() << '\n';
  out << "tetrahedra " << mesh.tets.size() << '\n';
  for (Index i = 0; i < mesh.particle_count(); ++i) {
    const Vec3& p = mesh.particles[i];
    out << format_exact(p.x()) << ' ' << format_exact(p.y()) << ' ' << format_exact(p.z())
        << ' ' << int(mesh.fixed[i]) << '\n';
  }
  for (const auto& t : mesh.tets)
    out << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
}

void save_volume_mesh(const VolumeMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  save_volume_mesh(mesh, out);
}

VolumeMesh load_volume_mesh(std::istream& in) {
  std::string line;
  int lineno = 0;
  auto next = [&]() -> std::istringstream {
    if (!std::getline(in, line)) throw ParseError("unexpected end of file", lineno);
    ++lineno;
    return std::istringstream(line);
  };

  {
    auto s = next();
    std::string magic;
    int version = 0;
    if (!(s >> magic >> version) || magic != "tetmesh" || version != 1)
      throw ParseError("expected 'tetmesh 1' header", lineno);
  }

  auto read_count = [&](const char* key) {
    auto s = next();
    std::string k;
    long v = -1;
    if (!(s >> k >> v) || k != key || v < 0)
      throw ParseError(std::string("expected '") + key + " <count>'", lineno);
    return v;
  };
  const long particle_count = read_count("particles");
  const long tet_count = read_count("tetrahedra");

  VolumeMesh mesh;
  mesh.particles.reserve(particle_count);
  mesh.fixed.reserve(particle_count);
  for (long i = 0; i < particle_count; ++i) {
    auto s = next();
    double x, y, z;
    int fixed;
    if (!(s >> x >> y >> z >> fixed) || (fixed != 0 && fixed != 1))
      throw ParseError("expected 'x y z fixed'", lineno);
    mesh.particles.emplace_back(x, y, z);
    mesh.fixed.push_back(char(fixed));
  }
  for (long i = 0; i < tet_count; ++i) {
    auto s = next();
    std::array<Index, 4> t;
    if (!(s >> t[0] >> t[1] >> t[2] >> t[3]))
      throw ParseError("expected four particle indices", lineno);
    mesh.tets.push_back(t);
  }
  mesh.validate();
  return mesh;
}

VolumeMesh load_volume_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return load_volume_mesh(in);
}

}  // namespace r2s
