#include "r2s/observation.hpp"

#include "r2s/rng.hpp"

namespace r2s {

PointCloud generate_observation(std::span<const Vec3> oracle_surface, const Vec3& tool_tip,
                                const ObservationConfig& config) {
  if (config.noise_sigma < 0.0) throw ValidationError("noise sigma must be >= 0");
  if (config.occlusion_radius < 0.0) throw ValidationError("occlusion radius must be >= 0");

  GaussianRng rng(config.rng_seed);
  const double r2 = config.occlusion_radius * config.occlusion_radius;

  PointCloud cloud;
  cloud.points.reserve(oracle_surface.size());
  cloud.occluded.reserve(oracle_surface.size());
  for (const Vec3& p : oracle_surface) {
    Vec3 noisy = p;
    // Draw unconditionally so occlusion settings do not shift the stream.
    const Vec3 noise(rng.gaussian(), rng.gaussian(), rng.gaussian());
    noisy += config.noise_sigma * noise;
    const bool occluded = r2 > 0.0 && (p - tool_tip).squaredNorm() <= r2;
    if (occluded && config.drop_occluded) continue;
    cloud.points.push_back(noisy);
    cloud.occluded.push_back(occluded ? 1 : 0);
  }
  return cloud;
}

}  // namespace r2s
