#include "r2s/mesh.hpp"

#include "r2s/math.hpp"
#include "r2s/point_cloud.hpp"
#include "r2s/types.hpp"

#include <algorithm>
#include <doctest.h>

#include <map>
#include <random>
#include <set>
#include <sstream>
#include <vector>

namespace {

using r2s::Index;
using r2s::PointCloud;
using r2s::SurfaceMesh;
using r2s::Vec3;
using r2s::VolumeMesh;

PointCloud plane_cloud(int n, unsigned seed, double a, double b, double c) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, 0.08), uy(0.0, 0.06);
  PointCloud cloud;
  for (int i = 0; i < n; ++i) {
    const double x = ux(rng), y = uy(rng);
    cloud.points.emplace_back(x, y, a + b * x + c * y);
  }
  return cloud;
}

SurfaceMesh flat_surface(int rx, int ry) {
  return triangulate_cloud(plane_cloud(600, 77, 0.0, 0.0, 0.0), rx, ry);
}

}  // namespace

TEST_CASE("triangulation reproduces linear height fields") {
  const double a = 0.01, b = 0.3, c = -0.2;
  const auto mesh = triangulate_cloud(plane_cloud(800, 3, a, b, c), 12, 9);
  REQUIRE(mesh.vertex_count() == 12 * 9);
  CHECK(mesh.resolution_x == 12);
  CHECK(mesh.resolution_y == 9);
  for (const auto& v : mesh.vertices)
    CHECK(v.z() == doctest::Approx(a + b * v.x() + c * v.y()).epsilon(1e-9));
  CHECK_NOTHROW(mesh.validate());
}

TEST_CASE("triangulation grid covers the cloud bounding box x fastest") {
  PointCloud cloud = plane_cloud(500, 5, 0.0, 0.0, 0.0);
  const auto mesh = triangulate_cloud(cloud, 10, 8);
  Vec3 lo = cloud.points[0], hi = cloud.points[0];
  for (const auto& p : cloud.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  CHECK((mesh.vertices.front().head<2>() - lo.head<2>()).norm() < 1e-12);
  CHECK((mesh.vertices.back().head<2>() - hi.head<2>()).norm() < 1e-12);
  // Vertex (i, j) sits at j * resolution_x + i.
  const Vec3 v10 = mesh.vertices[1];
  CHECK(v10.x() > mesh.vertices[0].x());
  CHECK(v10.y() == doctest::Approx(mesh.vertices[0].y()).epsilon(1e-12));
}

TEST_CASE("boundary flags mark exactly the grid rim") {
  const auto mesh = flat_surface(7, 5);
  int flagged = 0;
  for (int j = 0; j < 5; ++j)
    for (int i = 0; i < 7; ++i) {
      const bool rim = i == 0 || i == 6 || j == 0 || j == 4;
      CHECK(static_cast<bool>(mesh.boundary[j * 7 + i]) == rim);
      flagged += mesh.boundary[j * 7 + i] ? 1 : 0;
    }
  CHECK(flagged == 2 * 7 + 2 * 5 - 4);
}

TEST_CASE("folded clouds are rejected") {
  PointCloud cloud = plane_cloud(400, 9, 0.0, 0.0, 0.0);
  PointCloud folded = cloud;
  for (const auto& p : cloud.points) folded.points.emplace_back(p.x(), p.y(), p.z() + 0.05);
  CHECK_THROWS_AS(triangulate_cloud(folded, 10, 8), r2s::NonHeightField);
}

TEST_CASE("degenerate inputs are rejected") {
  PointCloud three;
  three.points = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  CHECK_THROWS_AS(triangulate_cloud(three, 5, 5), r2s::InsufficientPoints);

  PointCloud line;
  for (int i = 0; i < 10; ++i) line.points.emplace_back(0.0, i * 0.01, 0.0);
  CHECK_THROWS_AS(triangulate_cloud(line, 5, 5), r2s::NonHeightField);

  CHECK_THROWS_AS(triangulate_cloud(plane_cloud(100, 4, 0, 0, 0), 1, 5),
                  r2s::ValidationError);
}

TEST_CASE("extrusion preserves the slab volume") {
  const auto surface = flat_surface(10, 8);
  const double thickness = 0.01;
  const auto volume = extrude_volume(surface, thickness, Vec3(0, 0, -1));
  CHECK_NOTHROW(volume.validate());

  const double dx = surface.vertices[1].x() - surface.vertices[0].x();
  const Vec3 lo = surface.vertices.front(), hi = surface.vertices.back();
  const double area = (hi.x() - lo.x()) * (hi.y() - lo.y());
  CHECK(volume.total_volume() == doctest::Approx(area * thickness).epsilon(1e-9));
  CHECK(dx > 0.0);
}

TEST_CASE("extrusion direction is normalized before scaling") {
  const auto surface = flat_surface(6, 5);
  const auto v1 = extrude_volume(surface, 0.02, Vec3(0, 0, -1));
  const auto v2 = extrude_volume(surface, 0.02, Vec3(0, 0, -10));
  REQUIRE(v1.particle_count() == v2.particle_count());
  for (Index i = 0; i < v1.particle_count(); ++i)
    CHECK((v1.particles[i] - v2.particles[i]).norm() < 1e-15);
}

TEST_CASE("extruded mesh structure: surface prefix, bottom copy, fixed rim") {
  const auto surface = flat_surface(6, 4);
  const auto volume = extrude_volume(surface, 0.015, Vec3(0, 0, -1));
  const Index n = surface.vertex_count();
  REQUIRE(volume.particle_count() == 2 * n);
  REQUIRE(volume.surface_map.size() == static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    CHECK(volume.surface_map[i] == i);
    CHECK((volume.particles[i] - surface.vertices[i]).norm() < 1e-15);
    CHECK((volume.particles[i + n] - (surface.vertices[i] + Vec3(0, 0, -0.015))).norm() < 1e-15);
    // A boundary column is fixed top and bottom.
    CHECK(volume.fixed[i] == surface.boundary[i]);
    CHECK(volume.fixed[i + n] == surface.boundary[i]);
  }
  CHECK(volume.tets.size() == surface.triangles.size() * 3);
}

TEST_CASE("extruded tets are conforming across prism boundaries") {
  // Every interior triangular face must be shared by exactly two tets.
  const auto surface = flat_surface(5, 4);
  const auto volume = extrude_volume(surface, 0.01, Vec3(0, 0, -1));
  std::map<std::array<Index, 3>, int> faces;
  for (const auto& tet : volume.tets) {
    const std::array<std::array<int, 3>, 4> combos{{{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}};
    for (const auto& combo : combos) {
      std::array<Index, 3> face{tet[combo[0]], tet[combo[1]], tet[combo[2]]};
      std::sort(face.begin(), face.end());
      ++faces[face];
    }
  }
  for (const auto& [face, count] : faces) {
    CHECK(count >= 1);
    CHECK(count <= 2);  // three tets sharing a face would be non conforming
  }
}

TEST_CASE("all extruded tets have positive volume") {
  const auto surface = flat_surface(8, 6);
  const auto volume = extrude_volume(surface, 0.012, Vec3(0, 0, -1));
  for (const auto& tet : volume.tets) {
    const double v = r2s::tet_volume(volume.particles[tet[0]], volume.particles[tet[1]],
                                     volume.particles[tet[2]], volume.particles[tet[3]]);
    CHECK(v > 0.0);
  }
}

TEST_CASE("volume mesh text format round trips exactly") {
  const auto surface = flat_surface(5, 4);
  const auto volume = extrude_volume(surface, 0.01, Vec3(0, 0, -1));
  std::stringstream ss;
  save_volume_mesh(volume, ss);
  const auto loaded = r2s::load_volume_mesh(ss);
  REQUIRE(loaded.particle_count() == volume.particle_count());
  REQUIRE(loaded.tets.size() == volume.tets.size());
  CHECK(loaded.fixed == volume.fixed);
  CHECK(loaded.tets == volume.tets);
  for (Index i = 0; i < volume.particle_count(); ++i)
    CHECK(loaded.particles[i] == volume.particles[i]);  // 17 digit text is lossless
}

TEST_CASE("volume mesh loader rejects bad headers") {
  std::stringstream ss("npsmesh 1\n");
  CHECK_THROWS_AS(r2s::load_volume_mesh(ss), r2s::ParseError);
}

TEST_CASE("obj export writes one based faces") {
  const auto surface = flat_surface(3, 2);
  std::stringstream ss;
  r2s::save_obj(surface.vertices, surface.triangles, ss);
  const std::string text = ss.str();
  CHECK(text.find("v ") != std::string::npos);
  CHECK(text.find("f 1 ") != std::string::npos);
  CHECK(text.find("f 0") == std::string::npos);
}
