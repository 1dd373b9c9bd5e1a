#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "aknn/error.hpp"

namespace aknn {

// Row-major N x d matrix of reals; one row per sample.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw Error("dimension must be at least 1");
  }
  PointSet(std::vector<double> coords, std::size_t dim)
      : coords_(std::move(coords)), dim_(dim) {
    if (dim == 0) throw Error("dimension must be at least 1");
    if (coords_.size() % dim != 0)
      throw Error("coordinate count is not a multiple of the dimension");
  }

  std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return coords_.empty(); }

  std::span<const double> operator[](std::size_t i) const noexcept {
    return {coords_.data() + i * dim_, dim_};
  }
  std::span<double> row(std::size_t i) noexcept {
    return {coords_.data() + i * dim_, dim_};
  }

  void push_back(std::span<const double> p) {
    if (p.size() != dim_) throw Error("point dimension mismatch");
    coords_.insert(coords_.end(), p.begin(), p.end());
  }
  void resize(std::size_t n) { coords_.resize(n * dim_); }
  void reserve(std::size_t n) { coords_.reserve(n * dim_); }

  const std::vector<double>& coords() const noexcept { return coords_; }

  bool all_finite() const noexcept {
    for (double v : coords_)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  std::vector<double> coords_;
  std::size_t dim_ = 0;
};

}  // namespace aknn
