#include "r2s/spatial_index.hpp"

#include <algorithm>
#include <limits>
#include <utility>

namespace r2s {

namespace {
constexpr Index kLeafSize = 8;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

SpatialIndex::SpatialIndex(std::span<const Vec3> points)
    : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  for (Index i = 0; i < size(); ++i) order_[i] = i;
  if (!points_.empty()) root_ = build(0, size());
}

Index SpatialIndex::build(Index begin, Index end) {
  Node node;
  node.begin = begin;
  node.end = end;
  if (end - begin <= kLeafSize) {
    const Index id = static_cast<Index>(nodes_.size());
    nodes_.push_back(node);
    return id;
  }

  Vec3 lo = points_[order_[begin]], hi = lo;
  for (Index i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  // Median split with index tie-break keeps construction deterministic.
  const Index mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](Index a, Index b) {
                     const double ca = points_[a][axis], cb = points_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  node.axis = axis;
  node.split = points_[order_[mid]][axis];

  const Index id = static_cast<Index>(nodes_.size());
  nodes_.push_back(node);
  const Index left = build(begin, mid);
  const Index right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

Index SpatialIndex::nearest(const Vec3& q) const {
  if (points_.empty()) throw EmptyCloud("nearest query on empty index");

  double best_d2 = kInf;
  Index best = -1;
  auto visit = [&](auto&& self, Index n) -> void {
    const Node& node = nodes_[n];
    if (node.left < 0) {
      for (Index i = node.begin; i < node.end; ++i) {
        const Index p = order_[i];
        const double d2 = (points_[p] - q).squaredNorm();
        if (d2 < best_d2 || (d2 == best_d2 && p < best)) {
          best_d2 = d2;
          best = p;
        }
      }
      return;
    }
    const double delta = q[node.axis] - node.split;
    const Index near = delta < 0.0 ? node.left : node.right;
    const Index far = delta < 0.0 ? node.right : node.left;
    self(self, near);
    // <= so an equidistant lower index on the far side is still found.
    if (delta * delta <= best_d2) self(self, far);
  };
  visit(visit, root_);
  return best;
}

std::vector<Index> SpatialIndex::nearest_k(const Vec3& q, int k) const {
  if (points_.empty()) throw EmptyCloud("nearest_k query on empty index");
  if (k <= 0) return {};

  // Sorted by (distance^2, index); worst candidate at the back.
  std::vector<std::pair<double, Index>> found;
  found.reserve(static_cast<std::size_t>(k));
  auto admit = [&](double d2, Index p) {
    const std::pair<double, Index> cand{d2, p};
    if (static_cast<int>(found.size()) == k) {
      if (!(cand < found.back())) return;
      found.pop_back();
    }
    found.insert(std::lower_bound(found.begin(), found.end(), cand), cand);
  };
  auto bound = [&] {
    return static_cast<int>(found.size()) < k ? kInf : found.back().first;
  };

  auto visit = [&](auto&& self, Index n) -> void {
    const Node& node = nodes_[n];
    if (node.left < 0) {
      for (Index i = node.begin; i < node.end; ++i) {
        const Index p = order_[i];
        admit((points_[p] - q).squaredNorm(), p);
      }
      return;
    }
    const double delta = q[node.axis] - node.split;
    const Index near = delta < 0.0 ? node.left : node.right;
    const Index far = delta < 0.0 ? node.right : node.left;
    self(self, near);
    if (delta * delta <= bound()) self(self, far);
  };
  visit(visit, root_);

  std::vector<Index> out(found.size());
  for (std::size_t i = 0; i < found.size(); ++i) out[i] = found[i].second;
  return out;
}

}  // namespace r2s
