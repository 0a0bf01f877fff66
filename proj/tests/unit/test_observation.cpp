#include "r2s/observation.hpp"

#include "r2s/point_cloud.hpp"
#include "r2s/types.hpp"

#include <algorithm>
#include <limits>
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

namespace {

using r2s::ObservationConfig;
using r2s::PointCloud;
using r2s::Vec3;

std::vector<Vec3> sheet(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 0.1);
  std::vector<Vec3> pts(n);
  for (auto& p : pts) p = Vec3(u(rng), u(rng), 0.0);
  return pts;
}

}  // namespace

TEST_CASE("zero noise and no occlusion reproduce the surface") {
  const auto surface = sheet(50, 1);
  const auto cloud = generate_observation(surface, Vec3::Zero(), ObservationConfig{});
  REQUIRE(cloud.size() == 50);
  for (int i = 0; i < 50; ++i) {
    CHECK(cloud.points[i] == surface[i]);
    CHECK(cloud.occluded[i] == 0);
  }
}

TEST_CASE("identical seeds reproduce the cloud bit for bit") {
  const auto surface = sheet(200, 2);
  ObservationConfig config;
  config.noise_sigma = 5e-4;
  config.rng_seed = 12345;
  const auto a = generate_observation(surface, Vec3::Zero(), config);
  const auto b = generate_observation(surface, Vec3::Zero(), config);
  REQUIRE(a.size() == b.size());
  for (r2s::Index i = 0; i < a.size(); ++i) CHECK(a.points[i] == b.points[i]);

  config.rng_seed = 54321;
  const auto c = generate_observation(surface, Vec3::Zero(), config);
  int identical = 0;
  for (r2s::Index i = 0; i < a.size(); ++i)
    if (a.points[i] == c.points[i]) ++identical;
  CHECK(identical == 0);  // a different seed moves every point
}

TEST_CASE("noise magnitude matches the configured sigma") {
  const auto surface = sheet(20000, 3);
  ObservationConfig config;
  config.noise_sigma = 1e-3;
  config.rng_seed = 7;
  const auto cloud = generate_observation(surface, Vec3::Zero(), config);
  double mean = 0.0, mean_sq = 0.0;
  for (r2s::Index i = 0; i < cloud.size(); ++i) {
    mean += (cloud.points[i] - surface[i]).norm();
    mean_sq += (cloud.points[i] - surface[i]).squaredNorm();
  }
  mean /= cloud.size();
  mean_sq /= cloud.size();
  // E|N(0, s^2 I3)| = s sqrt(8/pi), E|.|^2 = 3 s^2.
  CHECK(mean == doctest::Approx(config.noise_sigma * std::sqrt(8.0 / M_PI)).epsilon(0.05));
  CHECK(mean_sq == doctest::Approx(3.0 * config.noise_sigma * config.noise_sigma).epsilon(0.05));
}

TEST_CASE("occlusion flags points inside the tool sphere by true position") {
  const auto surface = sheet(300, 4);
  const Vec3 tip(0.05, 0.05, 0.0);
  ObservationConfig config;
  config.noise_sigma = 1e-3;  // noise must not affect the flag decision
  config.occlusion_radius = 0.02;
  config.rng_seed = 9;
  const auto cloud = generate_observation(surface, tip, config);
  REQUIRE(cloud.size() == 300);
  for (r2s::Index i = 0; i < cloud.size(); ++i) {
    const bool inside = (surface[i] - tip).norm() <= config.occlusion_radius;
    CHECK(static_cast<bool>(cloud.occluded[i]) == inside);
  }
}

TEST_CASE("growing the occlusion radius only adds flags") {
  const auto surface = sheet(300, 5);
  const Vec3 tip(0.05, 0.05, 0.0);
  ObservationConfig small;
  small.occlusion_radius = 0.01;
  ObservationConfig big = small;
  big.occlusion_radius = 0.03;
  const auto a = generate_observation(surface, tip, small);
  const auto b = generate_observation(surface, tip, big);
  for (r2s::Index i = 0; i < a.size(); ++i)
    if (a.occluded[i]) CHECK(b.occluded[i]);
}

TEST_CASE("dropping occluded points leaves the same noise on the survivors") {
  const auto surface = sheet(400, 6);
  const Vec3 tip(0.05, 0.05, 0.0);
  ObservationConfig flag_cfg;
  flag_cfg.noise_sigma = 5e-4;
  flag_cfg.occlusion_radius = 0.02;
  flag_cfg.rng_seed = 11;
  ObservationConfig drop_cfg = flag_cfg;
  drop_cfg.drop_occluded = true;

  const auto flagged = generate_observation(surface, tip, flag_cfg);
  const auto dropped = generate_observation(surface, tip, drop_cfg);
  CHECK(dropped.size() == flagged.size() - std::count(flagged.occluded.begin(),
                                                      flagged.occluded.end(), char(1)));
  r2s::Index j = 0;
  for (r2s::Index i = 0; i < flagged.size(); ++i) {
    if (flagged.occluded[i]) continue;
    CHECK(dropped.points[j] == flagged.points[i]);
    ++j;
  }
}

TEST_CASE("occlusion settings do not disturb the noise stream") {
  const auto surface = sheet(200, 8);
  ObservationConfig plain;
  plain.noise_sigma = 5e-4;
  plain.rng_seed = 13;
  ObservationConfig occluding = plain;
  occluding.occlusion_radius = 0.02;
  const auto a = generate_observation(surface, Vec3(0.05, 0.05, 0.0), plain);
  const auto b = generate_observation(surface, Vec3(0.05, 0.05, 0.0), occluding);
  for (r2s::Index i = 0; i < a.size(); ++i) CHECK(a.points[i] == b.points[i]);
}
