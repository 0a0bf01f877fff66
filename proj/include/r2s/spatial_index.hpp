#pragma once

#include "r2s/types.hpp"

#include <span>
#include <vector>

namespace r2s {

// Immutable kd-tree over a point set. Queries are exact; ties on distance
// resolve to the lowest point index, so results do not depend on tree layout.
class SpatialIndex {
 public:
  explicit SpatialIndex(std::span<const Vec3> points);

  Index size() const { return static_cast<Index>(points_.size()); }
  const std::vector<Vec3>& points() const { return points_; }

  // Index of the nearest point to q. Throws EmptyCloud when empty.
  Index nearest(const Vec3& q) const;

  // Indices of the k nearest points, ordered by (distance, index) ascending.
  // Returns fewer when the set is smaller than k.
  std::vector<Index> nearest_k(const Vec3& q, int k) const;

 private:
  struct Node {
    Index begin, end;     // leaf range in order_
    Index left = -1;      // children, -1 for leaf
    Index right = -1;
    int axis = 0;
    double split = 0.0;
  };

  Index build(Index begin, Index end);
  std::vector<Vec3> points_;
  std::vector<Index> order_;
  std::vector<Node> nodes_;
  Index root_ = -1;
};

}  // namespace r2s
