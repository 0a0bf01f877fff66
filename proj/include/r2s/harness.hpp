#pragma once

#include "r2s/mesh.hpp"
#include "r2s/point_cloud.hpp"
#include "r2s/registration.hpp"
#include "r2s/scenario.hpp"

#include <filesystem>
#include <vector>

namespace r2s {

struct FrameData {
  double time = 0.0;
  Vec3 tool_position = Vec3::Zero();
  // Index-matched observation of the oracle surface, occlusion flagged but
  // never dropped; registration input derives from it.
  PointCloud observation;
  std::vector<Vec3> oracle_surface;
  std::vector<Vec3> surface_with;     // registered run, after the step
  std::vector<Vec3> surface_without;  // baseline run, after the step
  double cost_with = 0.0;
  double cost_without = 0.0;
  int clamped_with = 0;
  int clamped_without = 0;
  double wall_seconds = 0.0;
};

struct StageTimings {
  double observe = 0.0;
  double fields = 0.0;
  double gradient = 0.0;
  double simulate = 0.0;
  double evaluate = 0.0;
  double total = 0.0;
};

struct RunRecord {
  Scenario scenario;
  SurfaceMesh tracked_surface;  // rest tracked mesh; triangles reused for snapshots
  VolumeMesh tracked_volume;
  std::vector<FrameData> frames;
  // Particles occluded in more than half the frames; masked errors use this.
  std::vector<char> occlusion_mask;
  std::vector<RegistrationReport> reports_with;
  std::vector<RegistrationReport> reports_without;
  std::vector<double> heat_with;  // per-particle time-mean error
  std::vector<double> heat_without;
  StageTimings timings;
};

// Runs the oracle and the tracked simulations over the scenario. The tracked
// mesh is rebuilt from the first observation; per frame the oracle advances,
// emits an observation, and each tracked run takes one solver step, the
// registered one with an observation-driven correction.
RunRecord run_scenario(const Scenario& scenario);

// Writes errors.csv, heatmaps, rest meshes, OBJ snapshots, and manifest.json
// into out_dir. The manifest embeds the resolved scenario, so feeding it back
// through run_scenario reproduces every CSV byte for byte.
void export_results(const RunRecord& record, const std::filesystem::path& out_dir);

struct GradCheckResult {
  double max_relative_deviation = 0.0;  // max |forward - central| / max |central|
  double max_abs_deviation = 0.0;
  double max_gradient = 0.0;  // largest central-difference component
  int surface_particles = 0;
  int cloud_points = 0;
  double seconds = 0.0;
};

// Compares the production forward-difference gradient against a central
// oracle (probe step / 10) that rebuilds the deformation field per probe.
// The check scene is the scenario tissue at rest against a cloud lifted by
// half the amplitude.
GradCheckResult grad_check(const Scenario& scenario);

}  // namespace r2s
