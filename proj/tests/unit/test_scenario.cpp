#include "r2s/scenario.hpp"

#include "r2s/types.hpp"

#include <algorithm>
#include <limits>
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace {

using r2s::Isometry;
using r2s::Scenario;
using r2s::TrajectoryKind;
using r2s::Vec3;

Scenario sample_scenario() {
  Scenario sc;
  sc.name = "sample";
  sc.trajectory = TrajectoryKind::Butterfly;
  sc.amplitude = 0.015;
  sc.period = 1.5;
  sc.duration = 3.0;
  sc.grasp_point = Vec3(0.01, 0.02, 0.0);
  sc.grasp_particles = 6;
  sc.tissue = {0.07, 0.05, 0.008, 10, 9};
  sc.dt = 0.005;
  sc.damping = 0.95;
  sc.external_accel = Vec3(0.0, 0.0, -9.81);
  sc.solver.solver_iterations = 15;
  sc.oracle_stiffness = {0.9, 0.8, 0.7};
  sc.tracked_stiffness = {0.1, 0.2, 0.3};
  sc.registration.lambda = 0.4;
  sc.registration.probe_step = 1e-5;
  sc.registration.difference = r2s::RegistrationConfig::Difference::Central;
  sc.observation = {1e-4, 0.01, true, 4};
  sc.grid.spacing_factor = 1.5;
  sc.seed = 99;
  sc.mesh_stride = 25;
  sc.run_baseline = false;
  return sc;
}

void check_equal(const Scenario& a, const Scenario& b) {
  CHECK(a.name == b.name);
  CHECK(a.trajectory == b.trajectory);
  CHECK(a.amplitude == b.amplitude);
  CHECK(a.period == b.period);
  CHECK(a.duration == b.duration);
  CHECK(a.grasp_point == b.grasp_point);
  CHECK(a.grasp_particles == b.grasp_particles);
  CHECK(a.tissue.size_x == b.tissue.size_x);
  CHECK(a.tissue.resolution_y == b.tissue.resolution_y);
  CHECK(a.dt == b.dt);
  CHECK(a.damping == b.damping);
  CHECK(a.external_accel == b.external_accel);
  CHECK(a.solver.solver_iterations == b.solver.solver_iterations);
  CHECK(a.oracle_stiffness.shape == b.oracle_stiffness.shape);
  CHECK(a.tracked_stiffness.distance == b.tracked_stiffness.distance);
  CHECK(a.registration.lambda == b.registration.lambda);
  CHECK(a.registration.probe_step == b.registration.probe_step);
  CHECK((a.registration.difference == b.registration.difference));
  CHECK(a.observation.noise_sigma == b.observation.noise_sigma);
  CHECK(a.observation.occlusion_radius == b.observation.occlusion_radius);
  CHECK(a.observation.drop_occluded == b.observation.drop_occluded);
  CHECK(a.grid.spacing_factor == b.grid.spacing_factor);
  CHECK(a.seed == b.seed);
  CHECK(a.mesh_stride == b.mesh_stride);
  CHECK(a.run_baseline == b.run_baseline);
}

}  // namespace

TEST_CASE("json round trip preserves every field") {
  const Scenario sc = sample_scenario();
  const auto text = scenario_to_json_text(sc);
  check_equal(sc, r2s::scenario_from_json_text(text));
}

TEST_CASE("nan grasp point components resolve to the surface center") {
  Scenario sc;
  sc.tissue.size_x = 0.08;
  sc.tissue.size_y = 0.06;
  CHECK(sc.resolved_grasp_point() == Vec3(0.04, 0.03, 0.0));
  sc.grasp_point = Vec3(0.01, std::numeric_limits<double>::quiet_NaN(), 0.005);
  CHECK(sc.resolved_grasp_point() == Vec3(0.01, 0.03, 0.005));
}

TEST_CASE("file round trip through the loader") {
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "r2s_scenario_roundtrip.json";
  {
    std::ofstream out(path);
    out << scenario_to_json_text(sample_scenario());
  }
  check_equal(sample_scenario(), r2s::load_scenario(path));
  fs::remove(path);
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_AS(r2s::scenario_from_json_text(R"({"naem": "typo"})"), r2s::ValidationError);
  CHECK_THROWS_AS(r2s::scenario_from_json_text(R"({"tissue": {"size_w": 1.0}})"),
                  r2s::ValidationError);
  CHECK_THROWS_AS(r2s::scenario_from_json_text(R"({"observation": {"sigma": 1.0}})"),
                  r2s::ValidationError);
}

TEST_CASE("malformed json reports a validation error") {
  CHECK_THROWS_AS(r2s::scenario_from_json_text("{"), r2s::ValidationError);
  CHECK_THROWS_AS(r2s::scenario_from_json_text(R"({"dt": "fast"})"), r2s::ValidationError);
}

TEST_CASE("a manifest wrapping the scenario parses the same") {
  const std::string bare = R"({"name": "wrapped", "duration": 2.0})";
  const std::string wrapped = R"({"scenario": {"name": "wrapped", "duration": 2.0}})";
  const auto a = r2s::scenario_from_json_text(bare);
  const auto b = r2s::scenario_from_json_text(wrapped);
  CHECK(a.name == b.name);
  CHECK(a.duration == b.duration);
}

TEST_CASE("trajectory names round trip and bad names throw") {
  for (auto kind : {TrajectoryKind::Lift, TrajectoryKind::Cube, TrajectoryKind::Butterfly,
                    TrajectoryKind::SineWave})
    CHECK(r2s::trajectory_kind_from_string(r2s::to_string(kind)) == kind);
  CHECK_THROWS_AS(r2s::trajectory_kind_from_string("spiral"), r2s::UnknownKind);
}

TEST_CASE("lift trajectory ramps straight up and clamps at the ends") {
  const Vec3 start(1.0, 2.0, 3.0);
  const auto traj = r2s::make_trajectory(TrajectoryKind::Lift, start, 0.02, 2.0, 4.0);
  CHECK((traj(0.0).translation() - start).norm() < 1e-15);
  CHECK((traj(2.0).translation() - (start + Vec3(0, 0, 0.01))).norm() < 1e-15);
  CHECK((traj(4.0).translation() - (start + Vec3(0, 0, 0.02))).norm() < 1e-15);
  CHECK((traj(99.0).translation() - traj(4.0).translation()).norm() == 0.0);
  CHECK((traj(-1.0).translation() - start).norm() == 0.0);
  CHECK(traj(1.0).linear() == r2s::Mat3::Identity());
}

TEST_CASE("cube trajectory traces a square loop in the xz plane") {
  const Vec3 start = Vec3::Zero();
  const double a = 0.01, period = 2.0;
  const auto traj = r2s::make_trajectory(TrajectoryKind::Cube, start, a, period, 10.0);
  CHECK((traj(0.0).translation() - Vec3(0, 0, 0)).norm() < 1e-15);
  CHECK((traj(0.25 * period).translation() - Vec3(0, 0, a)).norm() < 1e-12);
  CHECK((traj(0.5 * period).translation() - Vec3(a, 0, a)).norm() < 1e-12);
  CHECK((traj(0.75 * period).translation() - Vec3(a, 0, 0)).norm() < 1e-12);
  // One full period returns to the start.
  CHECK((traj(period).translation() - Vec3(0, 0, 0)).norm() < 1e-12);
}

TEST_CASE("butterfly closes a figure eight each period") {
  const double a = 0.02, period = 1.0;
  const auto traj = r2s::make_trajectory(TrajectoryKind::Butterfly, Vec3::Zero(), a, period, 5.0);
  CHECK((traj(0.25 * period).translation() - Vec3(a, 0, 0)).norm() < 1e-12);
  CHECK(traj(0.5 * period).translation().norm() < 1e-12);
  CHECK((traj(0.75 * period).translation() - Vec3(-a, 0, 0)).norm() < 1e-12);
  CHECK(traj(period).translation().norm() < 1e-12);
}

TEST_CASE("sine wave drifts in x while oscillating in z") {
  const double a = 0.01, period = 2.0, duration = 4.0;
  const auto traj = r2s::make_trajectory(TrajectoryKind::SineWave, Vec3::Zero(), a, period, duration);
  const Vec3 half = traj(0.5 * period).translation();
  CHECK(half.x() == doctest::Approx(a * 0.5 * period / duration).epsilon(1e-12));
  CHECK(std::abs(half.z()) < 1e-12);
  const Vec3 quarter = traj(0.25 * period).translation();
  CHECK(quarter.z() == doctest::Approx(a).epsilon(1e-12));
}

TEST_CASE("validation rejects out of range settings") {
  Scenario sc;
  CHECK_NOTHROW(sc.validate());
  sc.dt = -0.01;
  CHECK_THROWS_AS(sc.validate(), r2s::ValidationError);
  sc = Scenario{};
  sc.damping = 1.5;
  CHECK_THROWS_AS(sc.validate(), r2s::ValidationError);
  sc = Scenario{};
  sc.tissue.resolution_x = 1;
  CHECK_THROWS_AS(sc.validate(), r2s::ValidationError);
  sc = Scenario{};
  sc.tracked_stiffness.volume = 1.2;
  CHECK_THROWS_AS(sc.validate(), r2s::ValidationError);
  sc = Scenario{};
  sc.duration = 0.001;  // smaller than one step
  CHECK_THROWS_AS(sc.validate(), r2s::ValidationError);
  sc = Scenario{};
  sc.mesh_stride = 0;
  CHECK_THROWS_AS(sc.validate(), r2s::ValidationError);
}
