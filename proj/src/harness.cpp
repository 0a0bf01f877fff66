#include "r2s/harness.hpp"

#include "r2s/deformation.hpp"
#include "r2s/format.hpp"
#include "r2s/math.hpp"
#include "r2s/observation.hpp"
#include "r2s/parallel.hpp"
#include "r2s/pbd.hpp"
#include "r2s/rng.hpp"
#include "r2s/sdf_grid.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <utility>

namespace r2s {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t observation_seed(std::uint64_t base, int frame) {
  return splitmix64(base ^ splitmix64(static_cast<std::uint64_t>(frame) + 1));
}

// Exact rectangular grid surface at z = 0 with corner at the origin.
SurfaceMesh make_rectangle_surface(double size_x, double size_y, int rx, int ry) {
  SurfaceMesh mesh;
  mesh.resolution_x = rx;
  mesh.resolution_y = ry;
  mesh.vertices.reserve(std::size_t(rx) * ry);
  for (int j = 0; j < ry; ++j)
    for (int i = 0; i < rx; ++i)
      mesh.vertices.emplace_back(size_x * i / (rx - 1), size_y * j / (ry - 1), 0.0);
  for (int j = 0; j + 1 < ry; ++j) {
    for (int i = 0; i + 1 < rx; ++i) {
      const Index v00 = Index(j) * rx + i;
      const Index v10 = v00 + 1;
      const Index v01 = v00 + rx;
      const Index v11 = v01 + 1;
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  }
  mesh.boundary.assign(mesh.vertices.size(), 0);
  for (int j = 0; j < ry; ++j)
    for (int i = 0; i < rx; ++i)
      if (i == 0 || j == 0 || i == rx - 1 || j == ry - 1)
        mesh.boundary[std::size_t(j) * rx + i] = 1;
  mesh.validate();
  return mesh;
}

struct BuiltSystem {
  ParticleSystem system;
  std::vector<Constraint> constraints;
  std::vector<Index> grasped;
  std::size_t grasp_slot = 0;
};

BuiltSystem build_system(const VolumeMesh& mesh, const StiffnessConfig& stiffness,
                         const Scenario& sc, const Vec3& tool_start) {
  BuiltSystem built;
  ParticleSystem& sys = built.system;
  sys.positions = mesh.particles;
  sys.velocities.assign(mesh.particles.size(), Vec3::Zero());
  sys.inverse_masses.resize(mesh.particles.size());
  for (std::size_t i = 0; i < mesh.particles.size(); ++i)
    sys.inverse_masses[i] = mesh.fixed[i] ? 0.0 : 1.0;
  sys.surface_indices = mesh.surface_map;
  sys.dt = sc.dt;
  sys.damping = sc.damping;
  sys.external_accel = sc.external_accel;

  // Distance constraints over the unique tet edges, in sorted edge order.
  std::set<std::pair<Index, Index>> edges;
  for (const auto& t : mesh.tets) {
    for (int a = 0; a < 4; ++a) {
      for (int b = a + 1; b < 4; ++b) {
        Index u = t[a], v = t[b];
        if (u > v) std::swap(u, v);
        edges.insert({u, v});
      }
    }
  }
  for (const auto& [u, v] : edges) {
    const double rest = (mesh.particles[u] - mesh.particles[v]).norm();
    built.constraints.push_back(DistanceConstraint{u, v, rest, stiffness.distance});
  }

  for (const auto& t : mesh.tets) {
    const double rest =
        tet_volume(mesh.particles[t[0]], mesh.particles[t[1]], mesh.particles[t[2]],
                   mesh.particles[t[3]]);
    built.constraints.push_back(VolumeConstraint{t, rest, stiffness.volume});
  }

  for (const auto& t : mesh.tets) {
    ShapeMatchConstraint c;
    c.particles.assign(t.begin(), t.end());
    for (Index p : t) c.rest_positions.push_back(mesh.particles[p]);
    c.stiffness = stiffness.shape;
    built.constraints.push_back(std::move(c));
  }

  // Grasped group: the closest surface particles to the tool start, ties by
  // index, fixed particles excluded.
  std::vector<std::pair<double, Index>> by_distance;
  for (Index s : mesh.surface_map) {
    if (mesh.fixed[s]) continue;
    by_distance.push_back({(mesh.particles[s] - tool_start).squaredNorm(), s});
  }
  std::sort(by_distance.begin(), by_distance.end());
  const int grasp_count = std::min<int>(sc.grasp_particles, int(by_distance.size()));
  for (int i = 0; i < grasp_count; ++i) built.grasped.push_back(by_distance[i].second);

  // The grasped group also keeps its mutual arrangement via a shape cluster,
  // when it has enough spread for a rigid fit.
  if (built.grasped.size() >= 3) {
    ShapeMatchConstraint cluster;
    cluster.particles = built.grasped;
    for (Index p : built.grasped) cluster.rest_positions.push_back(mesh.particles[p]);
    cluster.stiffness = stiffness.shape;
    try {
      solve_shape_match(cluster.rest_positions, cluster.rest_positions);
      built.constraints.push_back(std::move(cluster));
    } catch (const DegenerateCluster&) {
      // Collinear grasp group; the grasp constraint alone pins it.
    }
  }

  GraspConstraint grasp;
  grasp.particles = built.grasped;
  for (Index p : built.grasped) grasp.offsets.push_back(mesh.particles[p] - tool_start);
  grasp.pose.translation() = tool_start;
  built.grasp_slot = built.constraints.size();
  built.constraints.push_back(std::move(grasp));
  return built;
}

GraspConstraint& grasp_of(BuiltSystem& built) {
  return std::get<GraspConstraint>(built.constraints[built.grasp_slot]);
}

GridGeometry fit_grid(const PointCloud& cloud, const Scenario& sc) {
  const CloudStats stats = compute_stats(cloud);
  const double spacing = sc.grid.spacing_override > 0.0
                             ? sc.grid.spacing_override
                             : sc.grid.spacing_factor * stats.mean_neighbor_distance;
  const double margin = sc.grid.margin_override > 0.0
                            ? sc.grid.margin_override
                            : sc.grid.margin_factor * sc.amplitude;
  if (spacing <= 0.0) throw ValidationError("resolved grid spacing is not positive");

  GridGeometry g;
  g.origin = stats.min - Vec3::Constant(margin);
  g.spacing = spacing;
  const Vec3 extent = stats.max + Vec3::Constant(margin) - g.origin;
  for (int a = 0; a < 3; ++a)
    g.dims[a] = std::max(2, int(std::ceil(extent[a] / spacing)) + 1);
  g.validate();
  return g;
}

}  // namespace

RunRecord run_scenario(const Scenario& scenario) {
  scenario.validate();
  set_thread_count(scenario.threads);
  const auto t_total = Clock::now();

  RunRecord record;
  record.scenario = scenario;

  const int steps = std::max(1, int(std::llround(scenario.duration / scenario.dt)));
  const Vec3 tool_start = scenario.resolved_grasp_point();
  const Trajectory trajectory = make_trajectory(scenario.trajectory, tool_start,
                                                scenario.amplitude, scenario.period,
                                                scenario.duration);

  // Ground-truth tissue: exact grid, stiff material.
  const SurfaceMesh oracle_surface = make_rectangle_surface(
      scenario.tissue.size_x, scenario.tissue.size_y, scenario.tissue.resolution_x,
      scenario.tissue.resolution_y);
  const VolumeMesh oracle_volume =
      extrude_volume(oracle_surface, scenario.tissue.thickness, scenario.extrude_direction);
  BuiltSystem oracle = build_system(oracle_volume, scenario.oracle_stiffness, scenario,
                                    tool_start);

  // First observation; the tracked mesh and the rest-space distance field are
  // built from what the sensor actually delivers.
  ObservationConfig obs_cfg = scenario.observation;
  obs_cfg.drop_occluded = false;
  obs_cfg.rng_seed = observation_seed(scenario.seed, 0);
  const PointCloud first_flagged =
      generate_observation(oracle.system.surface_positions(), tool_start, obs_cfg);
  const PointCloud first_input = scenario.observation.drop_occluded
                                     ? first_flagged.without_occluded()
                                     : first_flagged;

  record.tracked_surface = triangulate_cloud(first_input, scenario.tissue.resolution_x,
                                             scenario.tissue.resolution_y);
  record.tracked_volume = extrude_volume(record.tracked_surface, scenario.tissue.thickness,
                                         scenario.extrude_direction);
  BuiltSystem with_run = build_system(record.tracked_volume, scenario.tracked_stiffness,
                                      scenario, tool_start);
  BuiltSystem without_run = with_run;

  const GridGeometry grid = fit_grid(first_input, scenario);
  const SdfGrid rest_sdf = build_initial_sdf(first_input, grid);
  InverseDeformationField idf_with(record.tracked_surface.vertices, grid);
  InverseDeformationField idf_without = idf_with;

  // The registered run carries one observation-driven constraint, refreshed
  // each frame; slot index fixed after the grasp.
  with_run.constraints.push_back(RegistrationConstraint{});
  const std::size_t reg_slot = with_run.constraints.size() - 1;
  {
    auto& reg = std::get<RegistrationConstraint>(with_run.constraints[reg_slot]);
    reg.stiffness = scenario.registration.lambda;
    reg.exempt = with_run.grasped;
  }

  record.frames.reserve(steps);
  for (int frame = 0; frame < steps; ++frame) {
    const auto t_frame = Clock::now();
    FrameData data;
    data.time = (frame + 1) * scenario.dt;
    const Isometry pose = trajectory(data.time);
    data.tool_position = pose.translation();

    // Ground truth advances first; the sensor sees the post-step surface.
    auto t0 = Clock::now();
    grasp_of(oracle).pose = pose;
    simulate_step(oracle.system, oracle.constraints, scenario.solver);
    record.timings.simulate += seconds_since(t0);

    t0 = Clock::now();
    obs_cfg.rng_seed = observation_seed(scenario.seed, frame + 1);
    data.oracle_surface = oracle.system.surface_positions();
    data.observation = generate_observation(data.oracle_surface, data.tool_position, obs_cfg);
    const PointCloud reg_input = scenario.observation.drop_occluded
                                     ? data.observation.without_occluded()
                                     : data.observation;
    record.timings.observe += seconds_since(t0);

    // Registered run: fields and gradient from the pre-step surface, then one
    // solver step with the correction constraint.
    t0 = Clock::now();
    idf_with.update(with_run.system.surface_positions());
    data.cost_with = registration_cost(reg_input, idf_with, rest_sdf, &data.clamped_with);
    record.timings.fields += seconds_since(t0);

    t0 = Clock::now();
    auto& reg = std::get<RegistrationConstraint>(with_run.constraints[reg_slot]);
    reg.surface_gradients =
        registration_gradient(reg_input, idf_with, rest_sdf, scenario.registration);
    record.timings.gradient += seconds_since(t0);

    t0 = Clock::now();
    grasp_of(with_run).pose = pose;
    simulate_step(with_run.system, with_run.constraints, scenario.solver);
    data.surface_with = with_run.system.surface_positions();
    record.timings.simulate += seconds_since(t0);

    if (scenario.run_baseline) {
      t0 = Clock::now();
      idf_without.update(without_run.system.surface_positions());
      data.cost_without =
          registration_cost(reg_input, idf_without, rest_sdf, &data.clamped_without);
      record.timings.fields += seconds_since(t0);

      t0 = Clock::now();
      grasp_of(without_run).pose = pose;
      simulate_step(without_run.system, without_run.constraints, scenario.solver);
      data.surface_without = without_run.system.surface_positions();
      record.timings.simulate += seconds_since(t0);
    }

    data.wall_seconds = seconds_since(t_frame);
    record.frames.push_back(std::move(data));
  }

  // Run-level occlusion mask: particles hidden for more than half the run.
  const auto t_eval = Clock::now();
  const std::size_t surface_count = record.tracked_surface.vertices.size();
  std::vector<int> occluded_frames(surface_count, 0);
  for (const FrameData& f : record.frames) {
    for (std::size_t p = 0; p < surface_count; ++p)
      if (f.observation.occluded[p]) ++occluded_frames[p];
  }
  record.occlusion_mask.resize(surface_count);
  for (std::size_t p = 0; p < surface_count; ++p)
    record.occlusion_mask[p] = occluded_frames[p] * 2 > steps ? 1 : 0;

  record.heat_with.assign(surface_count, 0.0);
  if (scenario.run_baseline) record.heat_without.assign(surface_count, 0.0);
  for (int frame = 0; frame < steps; ++frame) {
    const FrameData& f = record.frames[frame];
    RegistrationReport rep;
    rep.frame = frame;
    rep.cost = f.cost_with;
    rep.error = evaluation_error(f.surface_with, f.observation.points, record.occlusion_mask);
    for (std::size_t p = 0; p < surface_count; ++p)
      record.heat_with[p] += rep.error.per_particle[p];
    record.reports_with.push_back(std::move(rep));

    if (scenario.run_baseline) {
      RegistrationReport base;
      base.frame = frame;
      base.cost = f.cost_without;
      base.error =
          evaluation_error(f.surface_without, f.observation.points, record.occlusion_mask);
      for (std::size_t p = 0; p < surface_count; ++p)
        record.heat_without[p] += base.error.per_particle[p];
      record.reports_without.push_back(std::move(base));
    }
  }
  for (std::size_t p = 0; p < surface_count; ++p) {
    record.heat_with[p] /= steps;
    if (scenario.run_baseline) record.heat_without[p] /= steps;
  }
  record.timings.evaluate = seconds_since(t_eval);
  record.timings.total = seconds_since(t_total);
  return record;
}

namespace {

std::string snapshot_name(const char* prefix, int frame) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%06d.obj", prefix, frame);
  return buf;
}

}  // namespace

void export_results(const RunRecord& record, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const bool baseline = !record.reports_without.empty();
  std::vector<std::string> outputs;

  {
    std::ofstream out(out_dir / "errors.csv");
    if (!out) throw IoError("cannot write errors.csv");
    out << kReportCsvHeader;
    if (baseline)
      out << ",J_baseline,full_error_baseline,masked_error_baseline,xy_error_baseline,"
             "z_error_baseline";
    out << '\n';
    for (std::size_t i = 0; i < record.reports_with.size(); ++i) {
      out << report_csv_row(record.reports_with[i]);
      if (baseline) {
        const RegistrationReport& b = record.reports_without[i];
        out << ',' << format_sig(b.cost) << ',' << format_sig(b.error.full) << ','
            << format_sig(b.error.masked) << ',' << format_sig(b.error.xy) << ','
            << format_sig(b.error.z);
      }
      out << '\n';
    }
    outputs.push_back("errors.csv");
  }

  auto write_heatmap = [&](const char* name, const std::vector<double>& heat) {
    std::ofstream out(out_dir / name);
    if (!out) throw IoError(std::string("cannot write ") + name);
    out << "particle,rest_x,rest_y,mean_error\n";
    for (std::size_t p = 0; p < heat.size(); ++p) {
      const Vec3& rest = record.tracked_surface.vertices[p];
      out << p << ',' << format_sig(rest.x()) << ',' << format_sig(rest.y()) << ','
          << format_sig(heat[p]) << '\n';
    }
    outputs.push_back(name);
  };
  write_heatmap("heatmap_with.csv", record.heat_with);
  if (baseline) write_heatmap("heatmap_without.csv", record.heat_without);

  save_obj(record.tracked_surface, out_dir / "surface_rest.obj");
  outputs.push_back("surface_rest.obj");
  save_volume_mesh(record.tracked_volume, out_dir / "volume_rest.tet");
  outputs.push_back("volume_rest.tet");

  // Snapshot states: rest, every mesh_stride-th frame, and the final frame.
  const int steps = int(record.frames.size());
  std::vector<int> snapshots{0};
  for (int s = record.scenario.mesh_stride; s <= steps; s += record.scenario.mesh_stride)
    snapshots.push_back(s);
  if (snapshots.back() != steps) snapshots.push_back(steps);
  for (int s : snapshots) {
    const std::vector<Vec3>& with_v =
        s == 0 ? record.tracked_surface.vertices : record.frames[s - 1].surface_with;
    const std::string name = snapshot_name("mesh_with", s);
    save_obj(with_v, record.tracked_surface.triangles, out_dir / name);
    outputs.push_back(name);
    if (baseline) {
      const std::vector<Vec3>& without_v =
          s == 0 ? record.tracked_surface.vertices : record.frames[s - 1].surface_without;
      const std::string bname = snapshot_name("mesh_baseline", s);
      save_obj(without_v, record.tracked_surface.triangles, out_dir / bname);
      outputs.push_back(bname);
    }
  }

  nlohmann::json manifest;
  manifest["scenario"] =
      nlohmann::json::parse(scenario_to_json_text(record.scenario));
  manifest["frames"] = steps;
  manifest["outputs"] = outputs;
  manifest["timings"] = {{"observe", record.timings.observe},
                         {"fields", record.timings.fields},
                         {"gradient", record.timings.gradient},
                         {"simulate", record.timings.simulate},
                         {"evaluate", record.timings.evaluate},
                         {"total", record.timings.total}};
  std::ofstream out(out_dir / "manifest.json");
  if (!out) throw IoError("cannot write manifest.json");
  out << manifest.dump(2) << '\n';
}

GradCheckResult grad_check(const Scenario& scenario) {
  scenario.validate();
  set_thread_count(scenario.threads);
  const auto t_start = Clock::now();

  // Rest tissue against a cloud lifted by half the amplitude: a plain,
  // reproducible configuration with a nonzero gradient.
  const SurfaceMesh surface = make_rectangle_surface(
      scenario.tissue.size_x, scenario.tissue.size_y, scenario.tissue.resolution_x,
      scenario.tissue.resolution_y);

  ObservationConfig obs_cfg = scenario.observation;
  obs_cfg.drop_occluded = false;
  obs_cfg.occlusion_radius = 0.0;
  obs_cfg.rng_seed = observation_seed(scenario.seed, 0);
  const PointCloud base_cloud =
      generate_observation(surface.vertices, Vec3::Zero(), obs_cfg);

  const GridGeometry grid = fit_grid(base_cloud, scenario);
  const SdfGrid rest_sdf = build_initial_sdf(base_cloud, grid);

  PointCloud lifted = base_cloud;
  const Vec3 lift(0.0, 0.0, 0.5 * scenario.amplitude);
  for (Vec3& p : lifted.points) p += lift;

  InverseDeformationField idf(surface.vertices, grid);
  idf.update(surface.vertices);  // zero deformation

  RegistrationConfig forward_cfg = scenario.registration;
  forward_cfg.difference = RegistrationConfig::Difference::Forward;
  if (forward_cfg.probe_step <= 0.0) forward_cfg.probe_step = 0.25 * grid.spacing;
  const std::vector<Vec3> forward =
      registration_gradient(lifted, idf, rest_sdf, forward_cfg);

  // Oracle: central difference with a tenth of the probe step, rebuilding the
  // whole field per probe. No locality shortcuts on this path.
  const double h = forward_cfg.probe_step / 10.0;
  const std::size_t n = surface.vertices.size();
  std::vector<Vec3> central(n, Vec3::Zero());
  for (std::size_t k = 0; k < n; ++k) {
    for (int axis = 0; axis < 3; ++axis) {
      std::vector<Vec3> plus = surface.vertices;
      std::vector<Vec3> minus = surface.vertices;
      plus[k][axis] += h;
      minus[k][axis] -= h;
      const InverseDeformationField idf_plus = build_idf(surface.vertices, plus, grid);
      const InverseDeformationField idf_minus = build_idf(surface.vertices, minus, grid);
      const double j_plus = registration_cost(lifted, idf_plus, rest_sdf);
      const double j_minus = registration_cost(lifted, idf_minus, rest_sdf);
      central[k][axis] = (j_plus - j_minus) / (2.0 * h);
    }
  }

  GradCheckResult result;
  result.surface_particles = int(n);
  result.cloud_points = lifted.size();
  for (std::size_t k = 0; k < n; ++k) {
    for (int axis = 0; axis < 3; ++axis) {
      result.max_abs_deviation =
          std::max(result.max_abs_deviation, std::abs(forward[k][axis] - central[k][axis]));
      result.max_gradient = std::max(result.max_gradient, std::abs(central[k][axis]));
    }
  }
  result.max_relative_deviation =
      result.max_gradient > 1e-300 ? result.max_abs_deviation / result.max_gradient
                                   : result.max_abs_deviation;
  result.seconds = seconds_since(t_start);
  return result;
}

}  // namespace r2s
