#pragma once

// Brute-force reference for the spatial index. Distances are accumulated in
// coordinate order, the same arithmetic any exact index must reproduce.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "aknn/norm.hpp"
#include "aknn/points.hpp"

namespace oracle {

inline double dist(aknn::Norm norm, std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    if (norm == aknn::Norm::Euclidean)
      acc += diff * diff;
    else
      acc = std::max(acc, std::abs(diff));
  }
  return norm == aknn::Norm::Euclidean ? std::sqrt(acc) : acc;
}

struct Scan {
  std::vector<std::size_t> indices;
  std::vector<double> distances;
};

inline Scan knn(const aknn::PointSet& pts, aknn::Norm norm, std::span<const double> q, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t i = 0; i < pts.size(); ++i) all.emplace_back(dist(norm, pts[i], q), i);
  std::sort(all.begin(), all.end());
  Scan s;
  for (std::size_t i = 0; i < std::min(k, all.size()); ++i) {
    s.distances.push_back(all[i].first);
    s.indices.push_back(all[i].second);
  }
  return s;
}

inline std::size_t count_within(const aknn::PointSet& pts, aknn::Norm norm, std::span<const double> q,
                                double r) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) n += dist(norm, pts[i], q) <= r;
  return n;
}

inline double kth_distance(const aknn::PointSet& pts, aknn::Norm norm, std::span<const double> q,
                           std::size_t k) {
  return knn(pts, norm, q, k).distances.back();
}

}  // namespace oracle
