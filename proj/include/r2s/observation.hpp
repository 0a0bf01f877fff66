#pragma once

#include "r2s/point_cloud.hpp"
#include "r2s/types.hpp"

#include <cstdint>
#include <span>

namespace r2s {

struct ObservationConfig {
  double noise_sigma = 0.0;       // isotropic Gaussian, per axis
  double occlusion_radius = 0.0;  // sphere around the tool tip; 0 disables
  bool drop_occluded = false;     // remove occluded points instead of flagging
  std::uint64_t rng_seed = 0;
};

// Synthetic sensor model: the oracle surface with per-point Gaussian noise,
// occlusion-flagged inside a sphere around the tool tip. Noise draws are a
// fixed function of the seed and point order, so a rerun with the same
// arguments reproduces the cloud bit for bit.
PointCloud generate_observation(std::span<const Vec3> oracle_surface, const Vec3& tool_tip,
                                const ObservationConfig& config);

}  // namespace r2s
