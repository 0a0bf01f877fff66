#include "r2s/harness.hpp"

#include "r2s/registration.hpp"
#include "r2s/scenario.hpp"
#include "r2s/types.hpp"

#include <algorithm>
#include <limits>
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;
using r2s::Scenario;
using r2s::Vec3;

Scenario small_scenario() {
  Scenario sc;
  sc.name = "unit";
  sc.amplitude = 0.01;
  sc.duration = 0.25;
  sc.tissue.resolution_x = 10;
  sc.tissue.resolution_y = 8;
  sc.observation.noise_sigma = 2e-4;
  sc.seed = 5;
  return sc;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("r2s_unit_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("a static noiseless scene stays put") {
  Scenario sc = small_scenario();
  sc.amplitude = 1e-9;  // effectively motionless tool
  sc.observation.noise_sigma = 0.0;
  sc.duration = 0.1;
  const auto record = r2s::run_scenario(sc);
  REQUIRE(record.frames.size() == 10);
  // The baseline has nothing to react to. The registered run hovers at the
  // field interpolation floor: the cost is not exactly zero between grid
  // vertices even at perfect alignment, so the pull settles tens of microns
  // off, far below any observation noise floor.
  for (const auto& report : record.reports_without) CHECK(report.error.full < 1e-9);
  for (const auto& report : record.reports_with) CHECK(report.error.full < 1e-4);
}

TEST_CASE("frame count follows duration over dt") {
  const auto record = r2s::run_scenario(small_scenario());
  CHECK(record.frames.size() == 25);
  CHECK(record.reports_with.size() == 25);
  CHECK(record.reports_without.size() == 25);
  CHECK(record.heat_with.size() == record.tracked_surface.vertices.size());
  CHECK(record.occlusion_mask.size() == record.tracked_surface.vertices.size());
}

TEST_CASE("rerunning a scenario reproduces every report exactly") {
  const Scenario sc = small_scenario();
  const auto a = r2s::run_scenario(sc);
  const auto b = r2s::run_scenario(sc);
  REQUIRE(a.reports_with.size() == b.reports_with.size());
  for (std::size_t i = 0; i < a.reports_with.size(); ++i) {
    CHECK(a.reports_with[i].cost == b.reports_with[i].cost);
    CHECK(a.reports_with[i].error.full == b.reports_with[i].error.full);
    CHECK(a.reports_without[i].error.full == b.reports_without[i].error.full);
  }
}

TEST_CASE("exported errors csv has one row per frame plus the header") {
  const auto record = r2s::run_scenario(small_scenario());
  TempDir dir("csv");
  r2s::export_results(record, dir.path);
  const auto text = slurp(dir.path / "errors.csv");
  const auto lines = std::count(text.begin(), text.end(), '\n');
  CHECK(lines == 26);
  CHECK(text.rfind("frame,", 0) == 0);
  CHECK(text.find("full_error_baseline") != std::string::npos);
}

TEST_CASE("export writes identical bytes across runs") {
  const Scenario sc = small_scenario();
  TempDir a("export_a"), b("export_b");
  r2s::export_results(r2s::run_scenario(sc), a.path);
  r2s::export_results(r2s::run_scenario(sc), b.path);
  for (const char* name : {"errors.csv", "heatmap_with.csv", "heatmap_without.csv"})
    CHECK(slurp(a.path / name) == slurp(b.path / name));
}

TEST_CASE("mesh snapshots cover rest, stride multiples, and the final frame") {
  Scenario sc = small_scenario();
  sc.duration = 1.0;  // 100 frames
  sc.mesh_stride = 50;
  TempDir dir("snapshots");
  r2s::export_results(r2s::run_scenario(sc), dir.path);
  for (const char* name : {"mesh_with_000000.obj", "mesh_with_000050.obj",
                           "mesh_with_000100.obj", "mesh_baseline_000000.obj",
                           "mesh_baseline_000050.obj", "mesh_baseline_000100.obj",
                           "surface_rest.obj", "volume_rest.tet", "manifest.json"})
    CHECK(fs::exists(dir.path / name));
  CHECK_FALSE(fs::exists(dir.path / "mesh_with_000025.obj"));
}

TEST_CASE("the manifest embeds the resolved scenario") {
  const Scenario sc = small_scenario();
  TempDir dir("manifest");
  r2s::export_results(r2s::run_scenario(sc), dir.path);
  const auto reparsed = r2s::scenario_from_json_text(slurp(dir.path / "manifest.json"));
  CHECK(reparsed.name == sc.name);
  CHECK(reparsed.duration == sc.duration);
  CHECK(reparsed.seed == sc.seed);
  CHECK(reparsed.tissue.resolution_x == sc.tissue.resolution_x);
  CHECK(reparsed.observation.noise_sigma == sc.observation.noise_sigma);
}

TEST_CASE("a run without baseline skips the baseline pass and its columns") {
  Scenario sc = small_scenario();
  sc.duration = 0.1;
  sc.run_baseline = false;
  const auto record = r2s::run_scenario(sc);
  REQUIRE(record.reports_with.size() == 10);
  CHECK(record.reports_without.empty());
  CHECK(record.heat_without.empty());

  TempDir dir("nobaseline");
  r2s::export_results(record, dir.path);
  const std::string csv = slurp(dir.path / "errors.csv");
  const std::string header = csv.substr(0, csv.find('\n'));
  CHECK(header.find("full_error") != std::string::npos);
  CHECK(header.find("baseline") == std::string::npos);

  Scenario with = small_scenario();
  with.duration = 0.1;
  TempDir dir2("withbaseline");
  r2s::export_results(r2s::run_scenario(with), dir2.path);
  const std::string csv2 = slurp(dir2.path / "errors.csv");
  const std::string header2 = csv2.substr(0, csv2.find('\n'));
  CHECK(header2.find("full_error_baseline") != std::string::npos);
}

TEST_CASE("persistent occlusion shows up in the run mask") {
  Scenario sc = small_scenario();
  sc.duration = 0.2;
  sc.observation.occlusion_radius = 0.015;  // covers the grasp neighborhood
  const auto record = r2s::run_scenario(sc);
  int masked = 0;
  for (char m : record.occlusion_mask) masked += m ? 1 : 0;
  CHECK(masked > 0);
  CHECK(masked < static_cast<int>(record.occlusion_mask.size()));
}

TEST_CASE("stage timings accumulate into the total") {
  const auto record = r2s::run_scenario(small_scenario());
  const auto& t = record.timings;
  CHECK(t.total > 0.0);
  CHECK(t.observe + t.fields + t.gradient + t.simulate + t.evaluate <= t.total + 1e-9);
}

TEST_CASE("gradient check agrees with its central difference oracle") {
  Scenario sc;
  sc.tissue.resolution_x = 5;
  sc.tissue.resolution_y = 5;
  sc.registration.probe_step = 1e-5;
  sc.observation.noise_sigma = 2e-4;
  sc.seed = 3;
  const auto result = r2s::grad_check(sc);
  CHECK(result.surface_particles == 25);
  CHECK(result.cloud_points > 0);
  CHECK(result.max_gradient > 0.0);
  CHECK(result.max_relative_deviation < 1e-3);
}
