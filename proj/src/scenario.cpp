#include "r2s/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace r2s {

using nlohmann::json;

TrajectoryKind trajectory_kind_from_string(const std::string& name) {
  if (name == "lift") return TrajectoryKind::Lift;
  if (name == "cube") return TrajectoryKind::Cube;
  if (name == "butterfly") return TrajectoryKind::Butterfly;
  if (name == "sine_wave") return TrajectoryKind::SineWave;
  throw UnknownKind("unknown trajectory '" + name + "'");
}

std::string to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::Lift: return "lift";
    case TrajectoryKind::Cube: return "cube";
    case TrajectoryKind::Butterfly: return "butterfly";
    case TrajectoryKind::SineWave: return "sine_wave";
  }
  throw UnknownKind("invalid trajectory kind");
}

Trajectory make_trajectory(TrajectoryKind kind, const Vec3& start, double amplitude,
                           double period, double duration) {
  if (amplitude <= 0.0) throw ValidationError("trajectory amplitude must be positive");
  if (period <= 0.0) throw ValidationError("trajectory period must be positive");
  if (duration <= 0.0) throw ValidationError("trajectory duration must be positive");

  auto offset = [kind, amplitude, period, duration](double t) -> Vec3 {
    const double a = amplitude;
    switch (kind) {
      case TrajectoryKind::Lift:
        return {0.0, 0.0, a * t / duration};
      case TrajectoryKind::Cube: {
        // Square loop in the x-z plane, one lap per period.
        const double s = 4.0 * std::fmod(t, period) / period;
        if (s < 1.0) return {0.0, 0.0, a * s};
        if (s < 2.0) return {a * (s - 1.0), 0.0, a};
        if (s < 3.0) return {a, 0.0, a * (3.0 - s)};
        return {a * (4.0 - s), 0.0, 0.0};
      }
      case TrajectoryKind::Butterfly:
        // Figure-eight: x at the base frequency, z at twice it.
        return {a * std::sin(2.0 * M_PI * t / period), 0.0,
                0.5 * a * std::sin(4.0 * M_PI * t / period)};
      case TrajectoryKind::SineWave:
        return {a * t / duration, 0.0, a * std::sin(2.0 * M_PI * t / period)};
    }
    throw UnknownKind("invalid trajectory kind");
  };

  return [start, duration, offset](double t) {
    Isometry pose = Isometry::Identity();
    pose.translation() = start + offset(std::clamp(t, 0.0, duration));
    return pose;
  };
}

Vec3 Scenario::resolved_grasp_point() const {
  Vec3 p = grasp_point;
  if (std::isnan(p.x())) p.x() = 0.5 * tissue.size_x;
  if (std::isnan(p.y())) p.y() = 0.5 * tissue.size_y;
  if (std::isnan(p.z())) p.z() = 0.0;
  return p;
}

void Scenario::validate() const {
  if (amplitude <= 0.0) throw ValidationError("amplitude must be positive");
  if (period <= 0.0) throw ValidationError("period must be positive");
  if (duration <= 0.0) throw ValidationError("duration must be positive");
  if (dt <= 0.0) throw ValidationError("dt must be positive");
  if (duration < dt) throw ValidationError("duration must cover at least one step");
  if (damping < 0.0 || damping > 1.0) throw ValidationError("damping must be in [0,1]");
  if (tissue.size_x <= 0.0 || tissue.size_y <= 0.0 || tissue.thickness <= 0.0)
    throw ValidationError("tissue dimensions must be positive");
  if (tissue.resolution_x < 2 || tissue.resolution_y < 2)
    throw ValidationError("tissue resolution must be at least 2x2");
  if (grasp_particles < 1) throw ValidationError("grasp needs at least one particle");
  if (solver.solver_iterations < 1) throw ValidationError("solver needs at least one sweep");
  if (solver.convergence_tolerance < 0.0)
    throw ValidationError("convergence tolerance must be >= 0");
  for (double s : {oracle_stiffness.distance, oracle_stiffness.volume, oracle_stiffness.shape,
                   tracked_stiffness.distance, tracked_stiffness.volume,
                   tracked_stiffness.shape}) {
    if (s < 0.0 || s > 1.0) throw ValidationError("stiffness values must be in [0,1]");
  }
  if (registration.lambda < 0.0) throw ValidationError("lambda must be >= 0");
  if (registration.probe_step < 0.0) throw ValidationError("probe step must be >= 0");
  if (registration.influence_radius < 0.0)
    throw ValidationError("influence radius must be >= 0");
  if (observation.noise_sigma < 0.0) throw ValidationError("noise sigma must be >= 0");
  if (observation.occlusion_radius < 0.0)
    throw ValidationError("occlusion radius must be >= 0");
  if (grid.spacing_factor <= 0.0 && grid.spacing_override <= 0.0)
    throw ValidationError("grid spacing must resolve to a positive value");
  if (grid.margin_factor < 0.0 && grid.margin_override <= 0.0)
    throw ValidationError("grid margin must resolve to a non-negative value");
  if (mesh_stride < 1) throw ValidationError("mesh stride must be >= 1");
  if (extrude_direction.norm() < kEpsLength)
    throw ValidationError("extrusion direction is zero");
  if (!external_accel.allFinite()) throw ValidationError("external acceleration not finite");
}

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end())
      throw ValidationError("unknown key '" + key + "' in " + where);
  }
}

Vec3 vec3_from(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3)
    throw ValidationError(where + " must be an array of three numbers");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json vec3_to(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Scenario scenario_from_json(const json& root) {
  Scenario sc;
  const json& j = root.contains("scenario") ? root.at("scenario") : root;
  check_keys(j, {"name", "trajectory", "amplitude", "period", "duration", "grasp_point",
                 "grasp_particles", "tissue", "dt", "damping", "external_accel",
                 "extrude_direction", "solver", "oracle_stiffness", "tracked_stiffness",
                 "registration", "observation", "grid", "seed", "threads", "mesh_stride",
                 "run_baseline"},
             "scenario");

  sc.name = j.value("name", sc.name);
  if (j.contains("trajectory"))
    sc.trajectory = trajectory_kind_from_string(j.at("trajectory").get<std::string>());
  sc.amplitude = j.value("amplitude", sc.amplitude);
  sc.period = j.value("period", sc.period);
  sc.duration = j.value("duration", sc.duration);
  if (j.contains("grasp_point")) sc.grasp_point = vec3_from(j.at("grasp_point"), "grasp_point");
  sc.grasp_particles = j.value("grasp_particles", sc.grasp_particles);

  if (j.contains("tissue")) {
    const json& t = j.at("tissue");
    check_keys(t, {"size_x", "size_y", "thickness", "resolution_x", "resolution_y"}, "tissue");
    sc.tissue.size_x = t.value("size_x", sc.tissue.size_x);
    sc.tissue.size_y = t.value("size_y", sc.tissue.size_y);
    sc.tissue.thickness = t.value("thickness", sc.tissue.thickness);
    sc.tissue.resolution_x = t.value("resolution_x", sc.tissue.resolution_x);
    sc.tissue.resolution_y = t.value("resolution_y", sc.tissue.resolution_y);
  }

  sc.dt = j.value("dt", sc.dt);
  sc.damping = j.value("damping", sc.damping);
  if (j.contains("external_accel"))
    sc.external_accel = vec3_from(j.at("external_accel"), "external_accel");
  if (j.contains("extrude_direction"))
    sc.extrude_direction = vec3_from(j.at("extrude_direction"), "extrude_direction");

  if (j.contains("solver")) {
    const json& s = j.at("solver");
    check_keys(s, {"iterations", "convergence_tolerance"}, "solver");
    sc.solver.solver_iterations = s.value("iterations", sc.solver.solver_iterations);
    sc.solver.convergence_tolerance =
        s.value("convergence_tolerance", sc.solver.convergence_tolerance);
  }

  auto stiffness_from = [](const json& s, StiffnessConfig base, const std::string& where) {
    check_keys(s, {"distance", "volume", "shape"}, where);
    base.distance = s.value("distance", base.distance);
    base.volume = s.value("volume", base.volume);
    base.shape = s.value("shape", base.shape);
    return base;
  };
  if (j.contains("oracle_stiffness"))
    sc.oracle_stiffness = stiffness_from(j.at("oracle_stiffness"), sc.oracle_stiffness,
                                         "oracle_stiffness");
  if (j.contains("tracked_stiffness"))
    sc.tracked_stiffness = stiffness_from(j.at("tracked_stiffness"), sc.tracked_stiffness,
                                          "tracked_stiffness");

  if (j.contains("registration")) {
    const json& r = j.at("registration");
    check_keys(r, {"lambda", "probe_step", "influence_radius", "difference"}, "registration");
    sc.registration.lambda = r.value("lambda", sc.registration.lambda);
    sc.registration.probe_step = r.value("probe_step", sc.registration.probe_step);
    sc.registration.influence_radius =
        r.value("influence_radius", sc.registration.influence_radius);
    if (r.contains("difference")) {
      const std::string d = r.at("difference").get<std::string>();
      if (d == "forward")
        sc.registration.difference = RegistrationConfig::Difference::Forward;
      else if (d == "central")
        sc.registration.difference = RegistrationConfig::Difference::Central;
      else
        throw UnknownKind("unknown difference mode '" + d + "'");
    }
  }

  if (j.contains("observation")) {
    const json& o = j.at("observation");
    check_keys(o, {"noise_sigma", "occlusion_radius", "drop_occluded"}, "observation");
    sc.observation.noise_sigma = o.value("noise_sigma", sc.observation.noise_sigma);
    sc.observation.occlusion_radius =
        o.value("occlusion_radius", sc.observation.occlusion_radius);
    sc.observation.drop_occluded = o.value("drop_occluded", sc.observation.drop_occluded);
  }

  if (j.contains("grid")) {
    const json& g = j.at("grid");
    check_keys(g, {"spacing_factor", "margin_factor", "spacing_override", "margin_override"},
               "grid");
    sc.grid.spacing_factor = g.value("spacing_factor", sc.grid.spacing_factor);
    sc.grid.margin_factor = g.value("margin_factor", sc.grid.margin_factor);
    sc.grid.spacing_override = g.value("spacing_override", sc.grid.spacing_override);
    sc.grid.margin_override = g.value("margin_override", sc.grid.margin_override);
  }

  sc.seed = j.value("seed", sc.seed);
  sc.threads = j.value("threads", sc.threads);
  sc.mesh_stride = j.value("mesh_stride", sc.mesh_stride);
  sc.run_baseline = j.value("run_baseline", sc.run_baseline);

  sc.validate();
  return sc;
}

json scenario_to_json(const Scenario& sc) {
  json j;
  j["name"] = sc.name;
  j["trajectory"] = to_string(sc.trajectory);
  j["amplitude"] = sc.amplitude;
  j["period"] = sc.period;
  j["duration"] = sc.duration;
  if (sc.grasp_point.allFinite()) j["grasp_point"] = vec3_to(sc.grasp_point);
  j["grasp_particles"] = sc.grasp_particles;
  j["tissue"] = {{"size_x", sc.tissue.size_x},
                 {"size_y", sc.tissue.size_y},
                 {"thickness", sc.tissue.thickness},
                 {"resolution_x", sc.tissue.resolution_x},
                 {"resolution_y", sc.tissue.resolution_y}};
  j["dt"] = sc.dt;
  j["damping"] = sc.damping;
  j["external_accel"] = vec3_to(sc.external_accel);
  j["extrude_direction"] = vec3_to(sc.extrude_direction);
  j["solver"] = {{"iterations", sc.solver.solver_iterations},
                 {"convergence_tolerance", sc.solver.convergence_tolerance}};
  j["oracle_stiffness"] = {{"distance", sc.oracle_stiffness.distance},
                           {"volume", sc.oracle_stiffness.volume},
                           {"shape", sc.oracle_stiffness.shape}};
  j["tracked_stiffness"] = {{"distance", sc.tracked_stiffness.distance},
                            {"volume", sc.tracked_stiffness.volume},
                            {"shape", sc.tracked_stiffness.shape}};
  j["registration"] = {
      {"lambda", sc.registration.lambda},
      {"probe_step", sc.registration.probe_step},
      {"influence_radius", sc.registration.influence_radius},
      {"difference",
       sc.registration.difference == RegistrationConfig::Difference::Central ? "central"
                                                                             : "forward"}};
  j["observation"] = {{"noise_sigma", sc.observation.noise_sigma},
                      {"occlusion_radius", sc.observation.occlusion_radius},
                      {"drop_occluded", sc.observation.drop_occluded}};
  j["grid"] = {{"spacing_factor", sc.grid.spacing_factor},
               {"margin_factor", sc.grid.margin_factor},
               {"spacing_override", sc.grid.spacing_override},
               {"margin_override", sc.grid.margin_override}};
  j["seed"] = sc.seed;
  j["threads"] = sc.threads;
  j["mesh_stride"] = sc.mesh_stride;
  j["run_baseline"] = sc.run_baseline;
  return j;
}

}  // namespace

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return scenario_from_json_text(buffer.str());
}

Scenario scenario_from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario is not valid JSON: ") + e.what());
  }
  try {
    return scenario_from_json(root);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("scenario has a malformed field: ") + e.what());
  }
}

std::string scenario_to_json_text(const Scenario& scenario) {
  return scenario_to_json(scenario).dump(2);
}

}  // namespace r2s
