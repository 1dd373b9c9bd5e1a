#pragma once

#include <algorithm>
#include <cstddef>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "aknn/error.hpp"
#include "aknn/norm.hpp"
#include "aknn/points.hpp"

namespace aknn {

// The min(k, N) nearest training points of a query, sorted by ascending
// distance with ties broken by ascending training index.
struct NeighborSet {
  std::vector<std::size_t> indices;
  std::vector<double> distances;

  std::size_t size() const noexcept { return indices.size(); }
  // Distance to the farthest returned neighbor (the kNN radius).
  double radius() const noexcept { return distances.empty() ? 0.0 : distances.back(); }
};

// Immutable kd-tree over the training features. Queries are exact and return
// the same results as a linear scan, including the tie-break order. Safe for
// concurrent queries after construction.
class SpatialIndex {
 public:
  static constexpr std::size_t kLeafSize = 16;

  explicit SpatialIndex(PointSet points, Norm norm = Norm::Euclidean)
      : points_(std::move(points)), norm_(norm) {
    if (points_.empty()) throw Error("empty training set");
    if (!points_.all_finite()) throw Error("invalid coordinate");
    const std::size_t n = points_.size();
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    nodes_.reserve(2 * (n / kLeafSize + 1));
    build_node(0, n);
    pack();
  }

  std::size_t size() const noexcept { return points_.size(); }
  std::size_t dim() const noexcept { return points_.dim(); }
  Norm norm() const noexcept { return norm_; }
  const PointSet& points() const noexcept { return points_; }

  // k > N is clamped to N.
  NeighborSet knn(std::span<const double> query, std::size_t k) const {
    check_query(query);
    if (k == 0) throw Error("k must be positive");
    k = std::min(k, size());
    Heap heap;
    heap.reserve(k);
    if (norm_ == Norm::Euclidean)
      knn_visit<Norm::Euclidean>(0, query.data(), k, heap);
    else
      knn_visit<Norm::Max>(0, query.data(), k, heap);
    std::sort_heap(heap.begin(), heap.end());
    NeighborSet out;
    out.indices.reserve(heap.size());
    out.distances.reserve(heap.size());
    for (const auto& [d, idx] : heap) {
      out.distances.push_back(d);
      out.indices.push_back(idx);
    }
    return out;
  }

  // Number of training points in the closed ball {p : |p - query| <= radius}.
  std::size_t count_within(std::span<const double> query, double radius) const {
    check_query(query);
    if (!(radius > 0.0)) throw Error("radius must be positive");
    return norm_ == Norm::Euclidean
               ? count_visit<Norm::Euclidean>(0, query.data(), radius)
               : count_visit<Norm::Max>(0, query.data(), radius);
  }

  double kth_distance(std::span<const double> query, std::size_t k) const {
    return knn(query, k).radius();
  }

 private:
  struct Node {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::int64_t left = -1;
    std::int64_t right = -1;
    bool leaf() const noexcept { return left < 0; }
  };
  // (distance, index); lexicographic order makes front() of the max-heap the
  // current worst neighbor under the tie-break rule.
  using Entry = std::pair<double, std::size_t>;
  using Heap = std::vector<Entry>;

  void check_query(std::span<const double> query) const {
    if (query.size() != dim()) throw Error("query dimension mismatch");
  }

  std::int64_t build_node(std::size_t begin, std::size_t end) {
    const std::size_t d = dim();
    const auto id = static_cast<std::int64_t>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    lo_.resize(lo_.size() + d);
    hi_.resize(hi_.size() + d);
    double* lo = &lo_[static_cast<std::size_t>(id) * d];
    double* hi = &hi_[static_cast<std::size_t>(id) * d];
    std::fill(lo, lo + d, std::numeric_limits<double>::infinity());
    std::fill(hi, hi + d, -std::numeric_limits<double>::infinity());
    for (std::size_t i = begin; i < end; ++i) {
      const auto p = points_[order_[i]];
      for (std::size_t j = 0; j < d; ++j) {
        lo[j] = std::min(lo[j], p[j]);
        hi[j] = std::max(hi[j], p[j]);
      }
    }
    if (end - begin <= kLeafSize) return id;

    std::size_t axis = 0;
    double spread = -1.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (hi[j] - lo[j] > spread) {
        spread = hi[j] - lo[j];
        axis = j;
      }
    }
    if (spread <= 0.0) return id;  // all points identical

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) {
                       return points_[a][axis] < points_[b][axis];
                     });
    const std::int64_t left = build_node(begin, mid);
    const std::int64_t right = build_node(mid, end);
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    return id;
  }

  // Copies points into tree order so leaf scans touch contiguous memory.
  void pack() {
    const std::size_t d = dim();
    packed_.resize(size() * d);
    for (std::size_t i = 0; i < size(); ++i) {
      const auto p = points_[order_[i]];
      std::copy(p.begin(), p.end(), packed_.begin() + static_cast<std::ptrdiff_t>(i * d));
    }
  }

  // Lower bound on the distance from q to any point in the node's box.
  // Computed with the same rounding-monotone operations as point distances,
  // so it never exceeds a computed point distance.
  template <Norm N>
  double box_min(std::int64_t node, const double* q) const noexcept {
    const std::size_t d = dim();
    const double* lo = &lo_[static_cast<std::size_t>(node) * d];
    const double* hi = &hi_[static_cast<std::size_t>(node) * d];
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      double gap = 0.0;
      if (q[j] < lo[j])
        gap = lo[j] - q[j];
      else if (q[j] > hi[j])
        gap = q[j] - hi[j];
      if constexpr (N == Norm::Euclidean)
        acc += gap * gap;
      else
        acc = std::max(acc, gap);
    }
    if constexpr (N == Norm::Euclidean) return std::sqrt(acc);
    return acc;
  }

  // Upper bound on the distance from q to any point in the node's box.
  template <Norm N>
  double box_max(std::int64_t node, const double* q) const noexcept {
    const std::size_t d = dim();
    const double* lo = &lo_[static_cast<std::size_t>(node) * d];
    const double* hi = &hi_[static_cast<std::size_t>(node) * d];
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double far = std::max(std::abs(q[j] - lo[j]), std::abs(hi[j] - q[j]));
      if constexpr (N == Norm::Euclidean)
        acc += far * far;
      else
        acc = std::max(acc, far);
    }
    if constexpr (N == Norm::Euclidean) return std::sqrt(acc);
    return acc;
  }

  template <Norm N>
  void knn_visit(std::int64_t id, const double* q, std::size_t k, Heap& heap) const {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    const std::size_t d = dim();
    if (node.leaf()) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const Entry e{detail::distance_raw<N>(&packed_[i * d], q, d), order_[i]};
        if (heap.size() < k) {
          heap.push_back(e);
          std::push_heap(heap.begin(), heap.end());
        } else if (e < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = e;
          std::push_heap(heap.begin(), heap.end());
        }
      }
      return;
    }
    const double dl = box_min<N>(node.left, q);
    const double dr = box_min<N>(node.right, q);
    const bool left_first = dl <= dr;
    const std::int64_t first = left_first ? node.left : node.right;
    const std::int64_t second = left_first ? node.right : node.left;
    const double d_first = left_first ? dl : dr;
    const double d_second = left_first ? dr : dl;
    // A tie at the current worst distance can still enter via a smaller index,
    // so only strictly farther boxes are pruned.
    if (heap.size() < k || d_first <= heap.front().first) knn_visit<N>(first, q, k, heap);
    if (heap.size() < k || d_second <= heap.front().first) knn_visit<N>(second, q, k, heap);
  }

  template <Norm N>
  std::size_t count_visit(std::int64_t id, const double* q, double r) const {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (box_min<N>(id, q) > r) return 0;
    if (box_max<N>(id, q) <= r) return node.end - node.begin;
    if (node.leaf()) {
      const std::size_t d = dim();
      std::size_t c = 0;
      for (std::size_t i = node.begin; i < node.end; ++i)
        if (detail::distance_raw<N>(&packed_[i * d], q, d) <= r) ++c;
      return c;
    }
    return count_visit<N>(node.left, q, r) + count_visit<N>(node.right, q, r);
  }

  PointSet points_;
  Norm norm_;
  std::vector<std::size_t> order_;
  std::vector<double> packed_;
  std::vector<Node> nodes_;
  std::vector<double> lo_;
  std::vector<double> hi_;
};

inline SpatialIndex build(PointSet points, Norm norm = Norm::Euclidean) {
  return SpatialIndex(std::move(points), norm);
}

}  // namespace aknn
