#include "r2s/format.hpp"
#include "r2s/harness.hpp"
#include "r2s/point_cloud.hpp"
#include "r2s/scenario.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct RunOptions {
  std::string scenario_path;
  std::string out_dir = "out";
  bool no_baseline = false;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda;
  std::optional<double> dt;
  std::optional<double> duration;
  std::optional<double> amplitude;
  std::optional<double> period;
  std::optional<std::string> trajectory;
  std::optional<double> noise_sigma;
  std::optional<double> occlusion_radius;
  std::optional<bool> drop_occluded;
  std::optional<int> solver_iterations;
  std::optional<double> probe_step;
  std::optional<unsigned> threads;
  std::optional<int> mesh_stride;
};

r2s::Scenario resolve_scenario(const RunOptions& opt) {
  r2s::Scenario sc = r2s::load_scenario(opt.scenario_path);
  if (opt.seed) sc.seed = *opt.seed;
  if (opt.lambda) sc.registration.lambda = *opt.lambda;
  if (opt.no_baseline) sc.run_baseline = false;
  if (opt.dt) sc.dt = *opt.dt;
  if (opt.duration) sc.duration = *opt.duration;
  if (opt.amplitude) sc.amplitude = *opt.amplitude;
  if (opt.period) sc.period = *opt.period;
  if (opt.trajectory) sc.trajectory = r2s::trajectory_kind_from_string(*opt.trajectory);
  if (opt.noise_sigma) sc.observation.noise_sigma = *opt.noise_sigma;
  if (opt.occlusion_radius) sc.observation.occlusion_radius = *opt.occlusion_radius;
  if (opt.drop_occluded) sc.observation.drop_occluded = *opt.drop_occluded;
  if (opt.solver_iterations) sc.solver.solver_iterations = *opt.solver_iterations;
  if (opt.probe_step) sc.registration.probe_step = *opt.probe_step;
  if (opt.threads) sc.threads = *opt.threads;
  if (opt.mesh_stride) sc.mesh_stride = *opt.mesh_stride;
  sc.validate();
  return sc;
}

int run_command(const RunOptions& opt) {
  const r2s::Scenario scenario = resolve_scenario(opt);
  const r2s::RunRecord record = r2s::run_scenario(scenario);
  r2s::export_results(record, opt.out_dir);

  double mean_with = 0.0, mean_without = 0.0;
  for (const auto& r : record.reports_with) mean_with += r.error.full;
  mean_with /= double(record.reports_with.size());
  if (!record.reports_without.empty()) {
    for (const auto& r : record.reports_without) mean_without += r.error.full;
    mean_without /= double(record.reports_without.size());
  }

  std::cout << "scenario=" << scenario.name << '\n';
  std::cout << "frames=" << record.frames.size() << '\n';
  std::cout << "mean_full_error=" << r2s::format_sig(mean_with) << '\n';
  if (!record.reports_without.empty())
    std::cout << "mean_full_error_baseline=" << r2s::format_sig(mean_without) << '\n';
  std::cout << "total_seconds=" << r2s::format_sig(record.timings.total, 6) << '\n';
  std::cout << "out=" << opt.out_dir << '\n';
  return 0;
}

int gradcheck_command(const std::string& scenario_path, std::optional<unsigned> threads) {
  r2s::Scenario sc = r2s::load_scenario(scenario_path);
  if (threads) sc.threads = *threads;
  const r2s::GradCheckResult result = r2s::grad_check(sc);
  std::cout << "surface_particles=" << result.surface_particles << '\n';
  std::cout << "cloud_points=" << result.cloud_points << '\n';
  std::cout << "max_gradient=" << r2s::format_sig(result.max_gradient) << '\n';
  std::cout << "max_abs_deviation=" << r2s::format_sig(result.max_abs_deviation) << '\n';
  std::cout << "max_relative_deviation=" << r2s::format_sig(result.max_relative_deviation)
            << '\n';
  std::cout << "seconds=" << r2s::format_sig(result.seconds, 6) << '\n';
  return 0;
}

int inspect_command(const std::string& cloud_path) {
  const r2s::PointCloud cloud = r2s::load_cloud(cloud_path);
  const r2s::CloudStats stats = r2s::compute_stats(cloud);
  std::cout << "points=" << stats.count << '\n';
  std::cout << "occluded=" << stats.occluded_count << '\n';
  std::cout << "min=" << r2s::format_sig(stats.min.x()) << ' ' << r2s::format_sig(stats.min.y())
            << ' ' << r2s::format_sig(stats.min.z()) << '\n';
  std::cout << "max=" << r2s::format_sig(stats.max.x()) << ' ' << r2s::format_sig(stats.max.y())
            << ' ' << r2s::format_sig(stats.max.z()) << '\n';
  std::cout << "centroid=" << r2s::format_sig(stats.centroid.x()) << ' '
            << r2s::format_sig(stats.centroid.y()) << ' '
            << r2s::format_sig(stats.centroid.z()) << '\n';
  std::cout << "mean_neighbor_distance=" << r2s::format_sig(stats.mean_neighbor_distance)
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Soft-body registration harness"};
  app.require_subcommand(1);

  RunOptions run_opt;
  CLI::App* run = app.add_subcommand("run", "Run a scenario and export results");
  run->add_option("--scenario", run_opt.scenario_path, "Scenario or manifest JSON")->required();
  run->add_option("--out", run_opt.out_dir, "Output directory");
  run->add_flag("--no-registration-baseline", run_opt.no_baseline,
                "Skip the unregistered baseline run");
  run->add_option("--seed", run_opt.seed, "Override the scenario seed");
  run->add_option("--lambda-regi", run_opt.lambda, "Override the registration stiffness");
  run->add_option("--dt", run_opt.dt, "Override the step size");
  run->add_option("--duration", run_opt.duration, "Override the run duration");
  run->add_option("--amplitude", run_opt.amplitude, "Override the trajectory amplitude");
  run->add_option("--period", run_opt.period, "Override the trajectory period");
  run->add_option("--trajectory", run_opt.trajectory,
                  "Override the trajectory kind (lift, cube, butterfly, sine_wave)");
  run->add_option("--noise-sigma", run_opt.noise_sigma, "Override the observation noise");
  run->add_option("--occlusion-radius", run_opt.occlusion_radius,
                  "Override the occlusion sphere radius");
  run->add_option("--drop-occluded", run_opt.drop_occluded,
                  "Drop occluded points instead of flagging them");
  run->add_option("--solver-iterations", run_opt.solver_iterations,
                  "Override the solver sweep count");
  run->add_option("--probe-step", run_opt.probe_step, "Override the gradient probe step");
  run->add_option("--threads", run_opt.threads, "Worker thread count (0 = hardware)");
  run->add_option("--mesh-stride", run_opt.mesh_stride, "Frames between OBJ snapshots");

  std::string gradcheck_path;
  std::optional<unsigned> gradcheck_threads;
  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "Compare the registration gradient to an oracle");
  gradcheck->add_option("--scenario", gradcheck_path, "Scenario JSON")->required();
  gradcheck->add_option("--threads", gradcheck_threads, "Worker thread count");

  std::string inspect_path;
  CLI::App* inspect = app.add_subcommand("inspect-cloud", "Print point cloud statistics");
  inspect->add_option("cloud", inspect_path, "Cloud file (.ply or .csv)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return run_command(run_opt);
    if (gradcheck->parsed()) return gradcheck_command(gradcheck_path, gradcheck_threads);
    if (inspect->parsed()) return inspect_command(inspect_path);
  } catch (const r2s::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
