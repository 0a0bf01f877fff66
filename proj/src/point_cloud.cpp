#include "r2s/point_cloud.hpp"

#include "r2s/format.hpp"
#include "r2s/spatial_index.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace r2s {

namespace {

std::vector<std::string> split_on(const std::string& line, bool commas) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    const bool sep = commas ? (c == ',') : std::isspace(static_cast<unsigned char>(c));
    if (sep) {
      if (commas || !cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
    } else if (!std::isspace(static_cast<unsigned char>(c)) || !commas) {
      cur += c;
    }
  }
  if (!cur.empty() || (commas && !out.empty())) out.push_back(cur);
  return out;
}

double parse_double(const std::string& tok, int line) {
  const char* s = tok.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (end == s || *end != '\0') throw ParseError("bad number '" + tok + "'", line);
  if (!std::isfinite(v)) throw ParseError("non-finite coordinate", line);
  return v;
}

PointCloud load_csv(std::istream& in) {
  PointCloud cloud;
  std::string line;
  int lineno = 0;
  std::size_t columns = 0;  // set by the first data row, binding afterwards
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    const auto tok = split_on(line, true);
    if (tok.size() != 3 && tok.size() != 4)
      throw ParseError("expected x,y,z or x,y,z,occluded", lineno);
    if (columns == 0) columns = tok.size();
    if (tok.size() != columns)
      throw ParseError("row does not match the occlusion column of the first row", lineno);
    cloud.points.emplace_back(parse_double(tok[0], lineno), parse_double(tok[1], lineno),
                              parse_double(tok[2], lineno));
    if (tok.size() == 4) {
      const double f = parse_double(tok[3], lineno);
      if (f != 0.0 && f != 1.0) throw ParseError("occlusion flag must be 0 or 1", lineno);
      cloud.occluded.push_back(f != 0.0 ? 1 : 0);
    }
  }
  return cloud;
}

PointCloud load_ply(std::istream& in) {
  std::string line;
  int lineno = 0;
  auto next_line = [&]() -> std::string& {
    if (!std::getline(in, line)) throw ParseError("unexpected end of file", lineno);
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    return line;
  };

  if (next_line() != "ply") throw ParseError("missing ply magic", lineno);

  long vertex_count = -1;
  int prop_x = -1, prop_y = -1, prop_z = -1, prop_occ = -1;
  int prop_count = 0;
  bool in_vertex_element = false;
  bool format_seen = false;
  for (;;) {
    const auto tok = split_on(next_line(), false);
    if (tok.empty()) continue;
    if (tok[0] == "comment") continue;
    if (tok[0] == "format") {
      if (tok.size() < 2 || tok[1] != "ascii")
        throw ParseError("only ascii ply is supported", lineno);
      format_seen = true;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) throw ParseError("malformed element", lineno);
      in_vertex_element = tok[1] == "vertex";
      if (in_vertex_element) vertex_count = std::strtol(tok[2].c_str(), nullptr, 10);
    } else if (tok[0] == "property" && in_vertex_element) {
      if (tok.size() != 3) throw ParseError("malformed property", lineno);
      if (tok[2] == "x") prop_x = prop_count;
      if (tok[2] == "y") prop_y = prop_count;
      if (tok[2] == "z") prop_z = prop_count;
      if (tok[2] == "occluded") prop_occ = prop_count;
      ++prop_count;
    } else if (tok[0] == "end_header") {
      break;
    }
  }
  if (!format_seen) throw ParseError("missing format line", lineno);
  if (vertex_count < 0) throw ParseError("missing vertex element", lineno);
  if (prop_x < 0 || prop_y < 0 || prop_z < 0)
    throw ParseError("vertex element lacks x/y/z properties", lineno);

  PointCloud cloud;
  cloud.points.reserve(static_cast<std::size_t>(vertex_count));
  if (prop_occ >= 0) cloud.occluded.reserve(static_cast<std::size_t>(vertex_count));
  for (long i = 0; i < vertex_count; ++i) {
    const auto tok = split_on(next_line(), false);
    if (static_cast<int>(tok.size()) < prop_count)
      throw ParseError("vertex row has too few columns", lineno);
    cloud.points.emplace_back(parse_double(tok[prop_x], lineno),
                              parse_double(tok[prop_y], lineno),
                              parse_double(tok[prop_z], lineno));
    if (prop_occ >= 0) {
      const double f = parse_double(tok[prop_occ], lineno);
      if (f != 0.0 && f != 1.0) throw ParseError("occlusion flag must be 0 or 1", lineno);
      cloud.occluded.push_back(f != 0.0 ? 1 : 0);
    }
  }
  return cloud;
}

void save_csv(const PointCloud& cloud, std::ostream& out) {
  for (Index i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    out << format_sig(p.x()) << ',' << format_sig(p.y()) << ',' << format_sig(p.z());
    if (cloud.has_flags()) out << ',' << int(cloud.occluded[i]);
    out << '\n';
  }
}

void save_ply(const PointCloud& cloud, std::ostream& out) {
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << cloud.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  if (cloud.has_flags()) out << "property uchar occluded\n";
  out << "end_header\n";
  for (Index i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    out << format_sig(p.x()) << ' ' << format_sig(p.y()) << ' ' << format_sig(p.z());
    if (cloud.has_flags()) out << ' ' << int(cloud.occluded[i]);
    out << '\n';
  }
}

CloudFormat format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext == ".ply" ? CloudFormat::PlyAscii : CloudFormat::Csv;
}

}  // namespace

void PointCloud::validate() const {
  if (!occluded.empty() && occluded.size() != points.size())
    throw LengthMismatch("occlusion flags do not match point count");
  for (const Vec3& p : points)
    if (!p.allFinite()) throw NonFiniteState("cloud contains non-finite point");
}

PointCloud PointCloud::without_occluded() const {
  validate();
  if (!has_flags()) return *this;
  PointCloud out;
  out.frame_time = frame_time;
  for (Index i = 0; i < size(); ++i) {
    if (occluded[i]) continue;
    out.points.push_back(points[i]);
    out.occluded.push_back(0);
  }
  return out;
}

PointCloud load_cloud(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return load_cloud(in, format_from_path(path));
}

PointCloud load_cloud(std::istream& in, CloudFormat format) {
  PointCloud cloud =
      format == CloudFormat::PlyAscii ? load_ply(in) : load_csv(in);
  cloud.validate();
  return cloud;
}

void save_cloud(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  save_cloud(cloud, out, format_from_path(path));
}

void save_cloud(const PointCloud& cloud, std::ostream& out, CloudFormat format) {
  cloud.validate();
  if (format == CloudFormat::PlyAscii)
    save_ply(cloud, out);
  else
    save_csv(cloud, out);
}

CloudStats compute_stats(const PointCloud& cloud) {
  cloud.validate();
  CloudStats s;
  s.count = cloud.size();
  if (cloud.points.empty()) return s;

  s.min = s.max = cloud.points[0];
  Vec3 sum = Vec3::Zero();
  for (const Vec3& p : cloud.points) {
    s.min = s.min.cwiseMin(p);
    s.max = s.max.cwiseMax(p);
    sum += p;
  }
  s.centroid = sum / double(cloud.size());
  for (Index i = 0; i < cloud.size(); ++i)
    if (cloud.has_flags() && cloud.occluded[i]) ++s.occluded_count;

  if (cloud.size() > 1) {
    SpatialIndex index(cloud.points);
    double total = 0.0;
    for (Index i = 0; i < cloud.size(); ++i) {
      const auto two = index.nearest_k(cloud.points[i], 2);
      // The query point itself is among the results unless duplicates with
      // lower indices crowd it out, in which case the distance is 0 anyway.
      double d = 0.0;
      for (Index j : two) {
        if (j != i) {
          d = (cloud.points[j] - cloud.points[i]).norm();
          break;
        }
      }
      total += d;
    }
    s.mean_neighbor_distance = total / double(cloud.size());
  }
  return s;
}

}  // namespace r2s
