#pragma once

#include "r2s/observation.hpp"
#include "r2s/pbd.hpp"
#include "r2s/registration.hpp"
#include "r2s/types.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <string>

namespace r2s {

enum class TrajectoryKind { Lift, Cube, Butterfly, SineWave };

TrajectoryKind trajectory_kind_from_string(const std::string& name);  // throws UnknownKind
std::string to_string(TrajectoryKind kind);

// Tool pose over time. Poses are translation-only; t clamps to [0, duration].
using Trajectory = std::function<Isometry(double)>;

// start is the pose at t = 0 (zero offset for every kind).
Trajectory make_trajectory(TrajectoryKind kind, const Vec3& start, double amplitude,
                           double period, double duration);

struct TissueConfig {
  double size_x = 0.08;
  double size_y = 0.06;
  double thickness = 0.01;
  int resolution_x = 20;
  int resolution_y = 15;
};

struct StiffnessConfig {
  double distance = 1.0;
  double volume = 1.0;
  double shape = 1.0;
};

struct GridConfig {
  // Grid spacing = spacing_factor * mean neighbor distance of the initial
  // cloud; box margin = margin_factor * trajectory amplitude. The absolute
  // overrides win when positive.
  double spacing_factor = 2.0;
  double margin_factor = 3.0;
  double spacing_override = 0.0;
  double margin_override = 0.0;
};

struct Scenario {
  std::string name = "scenario";
  TrajectoryKind trajectory = TrajectoryKind::Lift;
  double amplitude = 0.02;
  double period = 2.0;
  double duration = 5.0;
  // Grasp point; components set to NaN resolve to the tissue surface center.
  Vec3 grasp_point = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
  int grasp_particles = 4;

  TissueConfig tissue;
  double dt = 0.01;
  double damping = 0.99;
  Vec3 external_accel = Vec3::Zero();
  Vec3 extrude_direction = Vec3(0.0, 0.0, -1.0);
  SolverConfig solver;
  StiffnessConfig oracle_stiffness{1.0, 1.0, 0.9};
  StiffnessConfig tracked_stiffness{0.02, 0.9, 0.01};
  RegistrationConfig registration;
  ObservationConfig observation{5e-4, 0.0, false, 0};
  GridConfig grid;
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0 = hardware default
  int mesh_stride = 100;
  bool run_baseline = true;

  void validate() const;
  Vec3 resolved_grasp_point() const;
};

Scenario load_scenario(const std::filesystem::path& path);
Scenario scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const Scenario& scenario);

}  // namespace r2s
