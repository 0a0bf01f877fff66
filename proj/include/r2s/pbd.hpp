#pragma once

#include "r2s/types.hpp"

#include <array>
#include <span>
#include <variant>
#include <vector>

namespace r2s {

struct ParticleSystem {
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  // Per-particle inverse mass; 0 marks a fixed particle that never moves.
  std::vector<double> inverse_masses;
  // Particles that form the observable surface, in mesh vertex order.
  std::vector<Index> surface_indices;
  double dt = 0.01;
  double damping = 0.99;  // velocity scale inside the prediction
  Vec3 external_accel = Vec3::Zero();

  Index size() const { return static_cast<Index>(positions.size()); }
  void validate() const;
  std::vector<Vec3> surface_positions() const;
};

struct DistanceConstraint {
  Index a, b;
  double rest_length;
  double stiffness = 1.0;
};

struct VolumeConstraint {
  std::array<Index, 4> tet;
  double rest_volume;
  double stiffness = 1.0;
};

struct ShapeMatchConstraint {
  std::vector<Index> particles;
  std::vector<Vec3> rest_positions;
  double stiffness = 1.0;
};

// Rigidly drags a particle group along a tool pose. Offsets are the grasped
// rest positions expressed in the tool frame.
struct GraspConstraint {
  std::vector<Index> particles;
  std::vector<Vec3> offsets;
  Isometry pose = Isometry::Identity();
};

// One observation-driven correction step: each surface particle moves by
// -stiffness * gradient once per simulate_step. The gradient is held fixed
// for the step, so repeating it every sweep would just scale the pull by the
// sweep count; it is applied on the first sweep only.
struct RegistrationConstraint {
  std::vector<Vec3> surface_gradients;  // aligned with surface_indices
  std::vector<Index> exempt;            // particles to skip (e.g. grasped)
  double stiffness = 0.3;
};

using Constraint = std::variant<DistanceConstraint, VolumeConstraint, ShapeMatchConstraint,
                                GraspConstraint, RegistrationConstraint>;

struct SolverConfig {
  int solver_iterations = 20;
  // Sweep loop exits early once the largest position change in a sweep drops
  // below this; 0 runs all iterations.
  double convergence_tolerance = 0.0;
  bool record_residuals = false;
};

struct StepReport {
  int sweeps = 0;
  double max_correction = 0.0;  // largest position change in the final sweep
  int degenerate_events = 0;
  // Per-sweep max |C| over distance and volume constraints, when requested.
  std::vector<double> residuals;
};

struct DistanceEval {
  double cost = 0.0;      // signed length error
  Vec3 delta_a = Vec3::Zero();
  Vec3 delta_b = Vec3::Zero();
  bool degenerate = false;
};

// Position corrections that restore |xa - xb| = rest_length, distributed by
// inverse mass. Coincident endpoints are reported degenerate with zero delta.
DistanceEval eval_distance(const Vec3& xa, const Vec3& xb, double rest_length,
                           double wa = 1.0, double wb = 1.0);

struct VolumeEval {
  double cost = 0.0;  // signed volume error
  std::array<Vec3, 4> deltas{};
  bool degenerate = false;
};

VolumeEval eval_volume(const std::array<Vec3, 4>& x, double rest_volume,
                       const std::array<double, 4>& w = {1.0, 1.0, 1.0, 1.0});

struct ShapeMatchResult {
  Mat3 rotation;
  Vec3 rest_centroid;
  Vec3 current_centroid;
  std::vector<Vec3> corrections;  // goal position minus current position
};

// Least-squares rigid fit of the rest cluster onto the current one; always a
// proper rotation. Throws DegenerateCluster when the rest cluster is
// collinear, LengthMismatch when list sizes differ.
ShapeMatchResult solve_shape_match(std::span<const Vec3> rest, std::span<const Vec3> current);

// Shared by the registration constraint and the standalone operator: the
// correction -lambda * gradient per surface particle, zero for fixed and
// exempt particles. Returned vector is indexed by particle.
std::vector<Vec3> apply_registration(const ParticleSystem& system,
                                     std::span<const Vec3> surface_gradients, double lambda,
                                     std::span<const Index> exempt = {});

// One position-based dynamics step: predict from velocities and external
// acceleration, project constraints in Gauss-Seidel sweeps (distance, volume,
// shape match, grasp, registration, in that order), then update velocities
// from the realized position change.
StepReport simulate_step(ParticleSystem& system, std::span<const Constraint> constraints,
                         const SolverConfig& config);

}  // namespace r2s
