#pragma once

#include "r2s/deformation.hpp"
#include "r2s/point_cloud.hpp"
#include "r2s/sdf_grid.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace r2s {

struct RegistrationConfig {
  // Correction scale applied per step by the registration constraint.
  double lambda = 0.3;
  // Finite-difference particle displacement; 0 picks a quarter grid spacing.
  // Must stay below the grid spacing.
  double probe_step = 0.0;
  // Cloud points farther than this from a particle do not contribute to its
  // gradient; 0 disables the cutoff.
  double influence_radius = 0.0;
  enum class Difference { Forward, Central };
  Difference difference = Difference::Forward;
};

// Sum of squared deformed-field magnitudes over the cloud. Queries outside
// either grid clamp onto the box; clamped_queries counts affected points.
double registration_cost(const PointCloud& cloud, const InverseDeformationField& idf,
                         const SdfGrid& rest_sdf, int* clamped_queries = nullptr);

// Numerical gradient of registration_cost with respect to each surface
// particle. Perturbing one particle only shifts the field at grid vertices it
// owns, so each particle touches just the cloud points whose interpolation
// stencils include those vertices; the result is identical to recomputing the
// whole cost per probe, at a fraction of the work.
std::vector<Vec3> registration_gradient(const PointCloud& cloud,
                                        const InverseDeformationField& idf,
                                        const SdfGrid& rest_sdf,
                                        const RegistrationConfig& config);

struct EvaluationError {
  double full = 0.0;    // mean particle-to-observation distance
  double masked = 0.0;  // same, occluded particles excluded
  double xy = 0.0;      // mean in-plane component
  double z = 0.0;       // mean out-of-plane component
  std::vector<double> per_particle;
};

// Mean index-matched distance between simulated surface particles and the
// observed cloud. occluded may be empty (no mask); when every particle is
// masked the masked mean is 0.
EvaluationError evaluation_error(std::span<const Vec3> simulated,
                                 std::span<const Vec3> observed,
                                 std::span<const char> occluded = {});

struct RegistrationReport {
  int frame = 0;
  double cost = 0.0;
  EvaluationError error;
};

inline constexpr const char* kReportCsvHeader = "frame,J,full_error,masked_error,xy_error,z_error";

// One CSV row: frame, J, full_error, masked_error, xy_error, z_error.
std::string report_csv_row(const RegistrationReport& report);

}  // namespace r2s
