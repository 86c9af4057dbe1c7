#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "fringeslam/geometry/types.hpp"

namespace fringeslam::registration {

// Static 3D kd-tree over an external point array. Median splits with index
// tie-breaking make construction deterministic; queries return the lowest
// index among equidistant neighbors.
class KdTree {
 public:
  explicit KdTree(const std::vector<geometry::Vec3>& points) : points_(points) {
    indices_.resize(points.size());
    for (std::size_t i = 0; i < indices_.size(); ++i) indices_[i] = static_cast<int>(i);
    nodes_.reserve(points.size());
    if (!indices_.empty()) root_ = build(0, static_cast<int>(indices_.size()), 0);
  }

  struct Neighbor {
    int index = -1;
    double squared_distance = std::numeric_limits<double>::infinity();
  };

  Neighbor nearest(const geometry::Vec3& query) const {
    Neighbor best;
    if (root_ >= 0) search(root_, query, best, -1);
    return best;
  }

  // Nearest neighbor skipping one point index; for self-queries over the
  // tree's own points.
  Neighbor nearest_excluding(const geometry::Vec3& query, int exclude) const {
    Neighbor best;
    if (root_ >= 0) search(root_, query, best, exclude);
    return best;
  }

  bool empty() const { return indices_.empty(); }

 private:
  struct Node {
    int point = -1;
    int left = -1, right = -1;
    int axis = 0;
  };

  int build(int begin, int end, int depth) {
    const int axis = depth % 3;
    const int mid = begin + (end - begin) / 2;
    std::nth_element(indices_.begin() + begin, indices_.begin() + mid, indices_.begin() + end,
                     [&](int a, int b) {
                       const double va = points_[a](axis), vb = points_[b](axis);
                       return va < vb || (va == vb && a < b);
                     });
    Node node;
    node.point = indices_[mid];
    node.axis = axis;
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (mid > begin) nodes_[self].left = build(begin, mid, depth + 1);
    if (end > mid + 1) nodes_[self].right = build(mid + 1, end, depth + 1);
    return self;
  }

  void search(int node_index, const geometry::Vec3& query, Neighbor& best, int exclude) const {
    const Node& node = nodes_[node_index];
    const geometry::Vec3& p = points_[node.point];
    if (node.point != exclude) {
      const double d2 = (p - query).squaredNorm();
      if (d2 < best.squared_distance ||
          (d2 == best.squared_distance && node.point < best.index)) {
        best.squared_distance = d2;
        best.index = node.point;
      }
    }
    const double delta = query(node.axis) - p(node.axis);
    const int near = delta < 0 ? node.left : node.right;
    const int far = delta < 0 ? node.right : node.left;
    if (near >= 0) search(near, query, best, exclude);
    if (far >= 0 && delta * delta <= best.squared_distance) search(far, query, best, exclude);
  }

  const std::vector<geometry::Vec3>& points_;
  std::vector<int> indices_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace fringeslam::registration
