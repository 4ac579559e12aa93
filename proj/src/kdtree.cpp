#include "motocal/kdtree.hpp"

#include <algorithm>
#include <limits>

namespace motocal {

namespace {

inline bool hit_less(const KdTree::Hit& a, const KdTree::Hit& b) {
  if (a.sq_dist != b.sq_dist) return a.sq_dist < b.sq_dist;
  return a.index < b.index;
}

// Keeps `best` sorted ascending with at most k entries.
inline void push_hit(std::vector<KdTree::Hit>& best, std::size_t k,
                     KdTree::Hit hit) {
  if (best.size() == k && !hit_less(hit, best.back())) return;
  auto pos = std::upper_bound(best.begin(), best.end(), hit, hit_less);
  best.insert(pos, hit);
  if (best.size() > k) best.pop_back();
}

}  // namespace

void KdTree::build(const std::vector<Vec3>& points) {
  points_ = &points;
  order_.resize(points.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  nodes_.clear();
  nodes_.reserve(points.empty() ? 1 : 2 * points.size() / kLeafSize + 2);
  root_ = points.empty() ? -1 : build_node(0, static_cast<std::uint32_t>(points.size()));
}

std::int32_t KdTree::build_node(std::uint32_t begin, std::uint32_t end) {
  const std::int32_t id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({});
  Node node;
  node.begin = begin;
  node.end = end;
  if (end - begin <= kLeafSize) {
    nodes_[id] = node;
    return id;
  }

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  const auto& pts = *points_;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(pts[order_[i]]);
    hi = hi.cwiseMax(pts[order_[i]]);
  }
  int dim;
  (hi - lo).maxCoeff(&dim);
  if (hi[dim] == lo[dim]) {  // all points coincide: keep as a leaf
    nodes_[id] = node;
    return id;
  }

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](std::uint32_t a, std::uint32_t b) {
                     if (pts[a][dim] != pts[b][dim]) return pts[a][dim] < pts[b][dim];
                     return a < b;
                   });
  node.split_dim = static_cast<std::uint8_t>(dim);
  node.split_val = pts[order_[mid]][dim];
  node.child_left = build_node(begin, mid);
  node.child_right = build_node(mid, end);
  nodes_[id] = node;
  return id;
}

template <class Accept>
void KdTree::search(std::int32_t node_id, const Vec3& query, std::size_t k,
                    const Accept& accept, std::vector<Hit>& best) const {
  const Node& node = nodes_[node_id];
  if (node.child_left < 0) {
    const auto& pts = *points_;
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t idx = order_[i];
      if (!accept(idx)) continue;
      push_hit(best, k, {idx, (pts[idx] - query).squaredNorm()});
    }
    return;
  }
  const double delta = query[node.split_dim] - node.split_val;
  const std::int32_t near = delta < 0.0 ? node.child_left : node.child_right;
  const std::int32_t far = delta < 0.0 ? node.child_right : node.child_left;
  search(near, query, k, accept, best);
  if (best.size() < k || delta * delta <= best.back().sq_dist) {
    search(far, query, k, accept, best);
  }
}

std::vector<KdTree::Hit> KdTree::knn(const Vec3& query, std::size_t k) const {
  std::vector<Hit> best;
  if (root_ < 0 || k == 0) return best;
  best.reserve(k + 1);
  search(root_, query, k, [](std::uint32_t) { return true; }, best);
  return best;
}

std::vector<KdTree::Hit> KdTree::knn_if(
    const Vec3& query, std::size_t k,
    const std::function<bool(std::uint32_t)>& accept) const {
  std::vector<Hit> best;
  if (root_ < 0 || k == 0) return best;
  best.reserve(k + 1);
  search(root_, query, k, accept, best);
  return best;
}

}  // namespace motocal
