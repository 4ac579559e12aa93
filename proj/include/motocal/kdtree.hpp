#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "motocal/geometry.hpp"

namespace motocal {

// Static 3-D kd-tree over a borrowed point array. Build once, query from
// any number of threads. Ties in distance are broken by point index, so
// query results are fully deterministic.
class KdTree {
 public:
  struct Hit {
    std::uint32_t index = 0;
    double sq_dist = 0.0;
  };

  KdTree() = default;
  explicit KdTree(const std::vector<Vec3>& points) { build(points); }

  // Points must outlive the tree.
  void build(const std::vector<Vec3>& points);

  std::size_t size() const { return points_ ? points_->size() : 0; }

  // Up to k nearest neighbors, sorted by (sq_dist, index) ascending.
  std::vector<Hit> knn(const Vec3& query, std::size_t k) const;

  // Up to k nearest neighbors among points for which accept(index) holds.
  std::vector<Hit> knn_if(const Vec3& query, std::size_t k,
                          const std::function<bool(std::uint32_t)>& accept) const;

  // All accepted points within `radius` of the query, unsorted.
  std::vector<Hit> radius_search(const Vec3& query, double radius,
                                 const std::function<bool(std::uint32_t)>& accept) const;

 private:
  struct Node {
    // Leaf when child_left < 0; then [begin, end) indexes into order_.
    std::int32_t child_left = -1;
    std::int32_t child_right = -1;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::uint8_t split_dim = 0;
    double split_val = 0.0;
  };

  static constexpr std::size_t kLeafSize = 16;

  std::int32_t build_node(std::uint32_t begin, std::uint32_t end);

  template <class Accept>
  void search(std::int32_t node_id, const Vec3& query, std::size_t k,
              const Accept& accept, std::vector<Hit>& best) const;

  template <class Accept>
  void search_radius(std::int32_t node_id, const Vec3& query, double sq_radius,
                     const Accept& accept, std::vector<Hit>& out) const;

  const std::vector<Vec3>* points_ = nullptr;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

}  // namespace motocal
