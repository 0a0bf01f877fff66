#include "r2s/pbd.hpp"

#include "r2s/math.hpp"

#include <algorithm>
#include <cmath>

namespace r2s {

void ParticleSystem::validate() const {
  const std::size_t n = positions.size();
  if (velocities.size() != n || inverse_masses.size() != n)
    throw LengthMismatch("particle arrays disagree in size");
  if (dt <= 0.0) throw ValidationError("dt must be positive");
  if (damping < 0.0 || damping > 1.0) throw ValidationError("damping must be in [0,1]");
  if (!external_accel.allFinite()) throw ValidationError("external acceleration not finite");
  for (double w : inverse_masses)
    if (!(w >= 0.0)) throw ValidationError("inverse masses must be >= 0");
  for (Index s : surface_indices)
    if (s < 0 || s >= size()) throw ValidationError("surface index out of range");
  for (const Vec3& p : positions)
    if (!p.allFinite()) throw NonFiniteState("non-finite particle position");
  for (const Vec3& v : velocities)
    if (!v.allFinite()) throw NonFiniteState("non-finite particle velocity");
}

std::vector<Vec3> ParticleSystem::surface_positions() const {
  std::vector<Vec3> out;
  out.reserve(surface_indices.size());
  for (Index s : surface_indices) out.push_back(positions[s]);
  return out;
}

DistanceEval eval_distance(const Vec3& xa, const Vec3& xb, double rest_length, double wa,
                           double wb) {
  DistanceEval e;
  const Vec3 d = xa - xb;
  const double len = d.norm();
  e.cost = len - rest_length;
  if (len < kEpsLength) {
    e.degenerate = true;
    return e;
  }
  const double wsum = wa + wb;
  if (wsum <= 0.0) return e;
  const Vec3 step = (e.cost / wsum) * (d / len);
  e.delta_a = -wa * step;
  e.delta_b = wb * step;
  return e;
}

VolumeEval eval_volume(const std::array<Vec3, 4>& x, double rest_volume,
                       const std::array<double, 4>& w) {
  VolumeEval e;
  e.cost = tet_volume(x[0], x[1], x[2], x[3]) - rest_volume;
  const auto g = tet_volume_gradients(x[0], x[1], x[2], x[3]);

  double grad_sq = 0.0, weighted = 0.0;
  for (int i = 0; i < 4; ++i) {
    grad_sq += g[i].squaredNorm();
    weighted += w[i] * g[i].squaredNorm();
  }
  if (std::sqrt(grad_sq) < kEpsGradient) {
    e.degenerate = true;
    return e;
  }
  if (weighted <= 0.0) return e;
  const double s = e.cost / weighted;
  for (int i = 0; i < 4; ++i) e.deltas[i] = -s * w[i] * g[i];
  return e;
}

ShapeMatchResult solve_shape_match(std::span<const Vec3> rest, std::span<const Vec3> current) {
  if (rest.size() != current.size())
    throw LengthMismatch("shape match clusters disagree in size");
  if (rest.empty()) throw DegenerateCluster("empty shape match cluster");
  const double inv_n = 1.0 / double(rest.size());

  Vec3 rest_c = Vec3::Zero(), cur_c = Vec3::Zero();
  for (std::size_t i = 0; i < rest.size(); ++i) {
    rest_c += rest[i];
    cur_c += current[i];
  }
  rest_c *= inv_n;
  cur_c *= inv_n;

  Mat3 cov = Mat3::Zero();
  for (std::size_t i = 0; i < rest.size(); ++i)
    cov += (current[i] - cur_c) * (rest[i] - rest_c).transpose();

  ShapeMatchResult r;
  r.rotation = fit_rotation(cov).rotation;
  r.rest_centroid = rest_c;
  r.current_centroid = cur_c;
  r.corrections.resize(rest.size());
  for (std::size_t i = 0; i < rest.size(); ++i)
    r.corrections[i] = r.rotation * (rest[i] - rest_c) + cur_c - current[i];
  return r;
}

std::vector<Vec3> apply_registration(const ParticleSystem& system,
                                     std::span<const Vec3> surface_gradients, double lambda,
                                     std::span<const Index> exempt) {
  if (surface_gradients.size() != system.surface_indices.size())
    throw LengthMismatch("gradient count does not match surface particle count");

  std::vector<char> skip(system.positions.size(), 0);
  for (Index e : exempt) {
    if (e < 0 || e >= system.size()) throw ValidationError("exempt index out of range");
    skip[e] = 1;
  }

  std::vector<Vec3> corrections(system.positions.size(), Vec3::Zero());
  for (std::size_t s = 0; s < surface_gradients.size(); ++s) {
    const Index p = system.surface_indices[s];
    if (system.inverse_masses[p] == 0.0 || skip[p]) continue;
    corrections[p] = -lambda * surface_gradients[s];
  }
  return corrections;
}

namespace {

struct GraspTargets {
  const GraspConstraint* grasp;
  std::vector<Vec3> targets;
};

double apply_delta(ParticleSystem& sys, Index p, const Vec3& delta) {
  if (sys.inverse_masses[p] == 0.0) return 0.0;
  sys.positions[p] += delta;
  return delta.norm();
}

}  // namespace

StepReport simulate_step(ParticleSystem& system, std::span<const Constraint> constraints,
                         const SolverConfig& config) {
  system.validate();
  if (config.solver_iterations < 0) throw ValidationError("solver_iterations must be >= 0");
  if (config.convergence_tolerance < 0.0)
    throw ValidationError("convergence_tolerance must be >= 0");

  const Index n = system.size();
  const double dt = system.dt;
  const std::vector<Vec3> previous = system.positions;

  // Prediction. Fixed particles are never advanced, whatever their velocity.
  const Vec3 accel_term = dt * dt * system.external_accel;
  for (Index i = 0; i < n; ++i) {
    if (system.inverse_masses[i] == 0.0) continue;
    system.positions[i] += dt * system.damping * system.velocities[i] + accel_term;
  }

  // Projection order within a sweep is fixed by constraint type, then by
  // position in the input list.
  std::vector<const DistanceConstraint*> distances;
  std::vector<const VolumeConstraint*> volumes;
  std::vector<const ShapeMatchConstraint*> shapes;
  std::vector<GraspTargets> grasps;
  std::vector<const RegistrationConstraint*> registrations;
  for (const Constraint& c : constraints) {
    if (const auto* d = std::get_if<DistanceConstraint>(&c)) distances.push_back(d);
    if (const auto* v = std::get_if<VolumeConstraint>(&c)) volumes.push_back(v);
    if (const auto* s = std::get_if<ShapeMatchConstraint>(&c)) shapes.push_back(s);
    if (const auto* g = std::get_if<GraspConstraint>(&c)) {
      if (g->particles.size() != g->offsets.size())
        throw LengthMismatch("grasp offsets do not match particle count");
      GraspTargets t{g, {}};
      t.targets.reserve(g->offsets.size());
      for (const Vec3& o : g->offsets) t.targets.push_back(g->pose * o);
      grasps.push_back(std::move(t));
    }
    if (const auto* r = std::get_if<RegistrationConstraint>(&c)) registrations.push_back(r);
  }

  StepReport report;
  std::vector<Vec3> cluster_buf;

  for (int sweep = 0; sweep < config.solver_iterations; ++sweep) {
    double max_corr = 0.0;

    for (const auto* c : distances) {
      const auto e = eval_distance(system.positions[c->a], system.positions[c->b],
                                   c->rest_length, system.inverse_masses[c->a],
                                   system.inverse_masses[c->b]);
      if (e.degenerate) {
        ++report.degenerate_events;
        continue;
      }
      max_corr = std::max(max_corr, apply_delta(system, c->a, c->stiffness * e.delta_a));
      max_corr = std::max(max_corr, apply_delta(system, c->b, c->stiffness * e.delta_b));
    }

    for (const auto* c : volumes) {
      const std::array<Vec3, 4> x{system.positions[c->tet[0]], system.positions[c->tet[1]],
                                  system.positions[c->tet[2]], system.positions[c->tet[3]]};
      const std::array<double, 4> w{
          system.inverse_masses[c->tet[0]], system.inverse_masses[c->tet[1]],
          system.inverse_masses[c->tet[2]], system.inverse_masses[c->tet[3]]};
      const auto e = eval_volume(x, c->rest_volume, w);
      if (e.degenerate) {
        ++report.degenerate_events;
        continue;
      }
      for (int i = 0; i < 4; ++i)
        max_corr = std::max(max_corr, apply_delta(system, c->tet[i], c->stiffness * e.deltas[i]));
    }

    for (const auto* c : shapes) {
      cluster_buf.clear();
      for (Index p : c->particles) cluster_buf.push_back(system.positions[p]);
      try {
        const auto fit = solve_shape_match(c->rest_positions, cluster_buf);
        for (std::size_t i = 0; i < c->particles.size(); ++i)
          max_corr = std::max(max_corr, apply_delta(system, c->particles[i],
                                                    c->stiffness * fit.corrections[i]));
      } catch (const DegenerateCluster&) {
        ++report.degenerate_events;
      }
    }

    for (const auto& g : grasps) {
      for (std::size_t i = 0; i < g.grasp->particles.size(); ++i) {
        const Index p = g.grasp->particles[i];
        if (system.inverse_masses[p] == 0.0) continue;
        max_corr = std::max(max_corr, (g.targets[i] - system.positions[p]).norm());
        system.positions[p] = g.targets[i];
      }
    }

    if (sweep == 0) {
      for (const auto* r : registrations) {
        const auto corrections =
            apply_registration(system, r->surface_gradients, r->stiffness, r->exempt);
        for (Index p = 0; p < n; ++p)
          max_corr = std::max(max_corr, apply_delta(system, p, corrections[p]));
      }
    }

    if (config.record_residuals) {
      double residual = 0.0;
      for (const auto* c : distances)
        residual = std::max(residual,
                            std::abs(eval_distance(system.positions[c->a], system.positions[c->b],
                                                   c->rest_length)
                                         .cost));
      for (const auto* c : volumes) {
        const std::array<Vec3, 4> x{system.positions[c->tet[0]], system.positions[c->tet[1]],
                                    system.positions[c->tet[2]], system.positions[c->tet[3]]};
        residual = std::max(residual, std::abs(eval_volume(x, c->rest_volume).cost));
      }
      report.residuals.push_back(residual);
    }

    report.sweeps = sweep + 1;
    report.max_correction = max_corr;
    if (config.convergence_tolerance > 0.0 && max_corr < config.convergence_tolerance) break;
  }

  for (Index i = 0; i < n; ++i) {
    if (!system.positions[i].allFinite())
      throw NonFiniteState("solver produced non-finite position");
    system.velocities[i] = (system.positions[i] - previous[i]) / dt;
  }
  return report;
}

}  // namespace r2s
