#include "r2s/registration.hpp"

#include "r2s/format.hpp"
#include "r2s/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

namespace r2s {

double registration_cost(const PointCloud& cloud, const InverseDeformationField& idf,
                         const SdfGrid& rest_sdf, int* clamped_queries) {
  cloud.validate();
  int clamped = 0;
  double total = 0.0;
  for (const Vec3& p : cloud.points) {
    const Vec3 traced = p + idf.interpolate(p, BoundsPolicy::Clamp);
    total += rest_sdf.interpolate(traced, BoundsPolicy::Clamp).squaredNorm();
    if (!idf.geometry().contains(p) || !rest_sdf.geometry.contains(traced)) ++clamped;
  }
  if (clamped_queries) *clamped_queries = clamped;
  return total;
}

namespace {

struct InfluencedPoint {
  Index point;
  double weight;  // summed stencil weight of the vertices this particle owns
};

}  // namespace

std::vector<Vec3> registration_gradient(const PointCloud& cloud,
                                        const InverseDeformationField& idf,
                                        const SdfGrid& rest_sdf,
                                        const RegistrationConfig& config) {
  cloud.validate();
  const double step =
      config.probe_step > 0.0 ? config.probe_step : 0.25 * idf.geometry().spacing;
  if (step >= idf.geometry().spacing)
    throw ValidationError("probe step must stay below the grid spacing");

  const std::size_t particle_count = idf.rest_surface().size();
  const std::span<const Index> owners = idf.vertex_owners();

  // Baseline traced point and cost per cloud point, plus the per-particle
  // stencil weight each point sees. Perturbing particle k by dm shifts the
  // field by -dm at the vertices it owns, so point i's traced query moves by
  // -dm * weight; stencils and ownership never change with the perturbation,
  // which makes the decomposition exact.
  std::vector<Vec3> traced(cloud.points.size());
  std::vector<double> base_cost(cloud.points.size());
  std::vector<std::vector<InfluencedPoint>> influence(particle_count);

  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const TrilinearStencil s =
        trilinear_stencil(idf.geometry(), cloud.points[i], BoundsPolicy::Clamp);
    Vec3 omega = Vec3::Zero();
    // Gather (owner, weight) pairs, merging vertices with a shared owner.
    std::array<std::pair<Index, double>, 8> seen;
    int seen_count = 0;
    for (int c = 0; c < 8; ++c) {
      omega += s.weights[c] * idf.vertex_vectors()[s.vertices[c]];
      const Index owner = owners[s.vertices[c]];
      bool merged = false;
      for (int m = 0; m < seen_count; ++m) {
        if (seen[m].first == owner) {
          seen[m].second += s.weights[c];
          merged = true;
          break;
        }
      }
      if (!merged) seen[seen_count++] = {owner, s.weights[c]};
    }
    traced[i] = cloud.points[i] + omega;
    base_cost[i] = rest_sdf.interpolate(traced[i], BoundsPolicy::Clamp).squaredNorm();
    for (int m = 0; m < seen_count; ++m) {
      if (seen[m].second == 0.0) continue;
      influence[seen[m].first].push_back({static_cast<Index>(i), seen[m].second});
    }
  }

  const bool central = config.difference == RegistrationConfig::Difference::Central;
  const double cutoff_sq =
      config.influence_radius > 0.0 ? config.influence_radius * config.influence_radius : -1.0;

  std::vector<Vec3> gradients(particle_count, Vec3::Zero());
  parallel_for(particle_count, [&](std::size_t k) {
    const Vec3 current = idf.rest_surface()[k] - idf.particle_vectors()[k];
    Vec3 g = Vec3::Zero();
    for (const InfluencedPoint& ip : influence[k]) {
      if (cutoff_sq >= 0.0 &&
          (cloud.points[ip.point] - current).squaredNorm() > cutoff_sq)
        continue;
      for (int axis = 0; axis < 3; ++axis) {
        Vec3 probe = traced[ip.point];
        probe[axis] -= step * ip.weight;
        const double plus = rest_sdf.interpolate(probe, BoundsPolicy::Clamp).squaredNorm();
        if (central) {
          Vec3 back = traced[ip.point];
          back[axis] += step * ip.weight;
          const double minus = rest_sdf.interpolate(back, BoundsPolicy::Clamp).squaredNorm();
          g[axis] += (plus - minus) / (2.0 * step);
        } else {
          g[axis] += (plus - base_cost[ip.point]) / step;
        }
      }
    }
    gradients[k] = g;
  });
  return gradients;
}

EvaluationError evaluation_error(std::span<const Vec3> simulated, std::span<const Vec3> observed,
                                 std::span<const char> occluded) {
  if (simulated.size() != observed.size())
    throw LengthMismatch("simulated and observed surfaces disagree in size");
  if (!occluded.empty() && occluded.size() != simulated.size())
    throw LengthMismatch("occlusion mask does not match surface size");

  EvaluationError e;
  if (simulated.empty()) return e;

  e.per_particle.resize(simulated.size());
  double sum = 0.0, sum_xy = 0.0, sum_z = 0.0, sum_masked = 0.0;
  std::size_t visible = 0;
  for (std::size_t i = 0; i < simulated.size(); ++i) {
    const Vec3 d = simulated[i] - observed[i];
    e.per_particle[i] = d.norm();
    sum += e.per_particle[i];
    sum_xy += d.head<2>().norm();
    sum_z += std::abs(d.z());
    if (occluded.empty() || !occluded[i]) {
      sum_masked += e.per_particle[i];
      ++visible;
    }
  }
  const double n = double(simulated.size());
  e.full = sum / n;
  e.xy = sum_xy / n;
  e.z = sum_z / n;
  e.masked = visible > 0 ? sum_masked / double(visible) : 0.0;
  return e;
}

std::string report_csv_row(const RegistrationReport& report) {
  std::string row = std::to_string(report.frame);
  row += ',';
  row += format_sig(report.cost);
  row += ',';
  row += format_sig(report.error.full);
  row += ',';
  row += format_sig(report.error.masked);
  row += ',';
  row += format_sig(report.error.xy);
  row += ',';
  row += format_sig(report.error.z);
  return row;
}

}  // namespace r2s
