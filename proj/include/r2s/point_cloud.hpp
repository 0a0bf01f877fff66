#pragma once

#include "r2s/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace r2s {

struct PointCloud {
  std::vector<Vec3> points;
  // Per-point occlusion flags; empty means none recorded. Non-empty size must
  // equal points.size().
  std::vector<char> occluded;
  double frame_time = 0.0;

  Index size() const { return static_cast<Index>(points.size()); }
  bool has_flags() const { return !occluded.empty(); }
  void validate() const;

  // Copy without the points flagged occluded.
  PointCloud without_occluded() const;
};

enum class CloudFormat { PlyAscii, Csv };

// Format chosen by extension: .ply or .csv / anything else -> CSV.
PointCloud load_cloud(const std::filesystem::path& path);
PointCloud load_cloud(std::istream& in, CloudFormat format);

void save_cloud(const PointCloud& cloud, const std::filesystem::path& path);
void save_cloud(const PointCloud& cloud, std::ostream& out, CloudFormat format);

struct CloudStats {
  Index count = 0;
  Index occluded_count = 0;
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();
  Vec3 centroid = Vec3::Zero();
  double mean_neighbor_distance = 0.0;  // mean distance to nearest other point
};

CloudStats compute_stats(const PointCloud& cloud);

}  // namespace r2s
