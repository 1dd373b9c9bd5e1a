#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "aknn/error.hpp"

namespace aknn {

enum class Norm { Euclidean, Max };

namespace detail {

template <Norm N>
inline double distance_raw(const double* a, const double* b, std::size_t d) noexcept {
  if constexpr (N == Norm::Euclidean) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double diff = a[i] - b[i];
      s += diff * diff;
    }
    return std::sqrt(s);
  } else {
    double m = 0.0;
    for (std::size_t i = 0; i < d; ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
  }
}

}  // namespace detail

inline double distance(Norm norm, std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("dimension mismatch");
  return norm == Norm::Euclidean
             ? detail::distance_raw<Norm::Euclidean>(a.data(), b.data(), a.size())
             : detail::distance_raw<Norm::Max>(a.data(), b.data(), a.size());
}

inline std::string_view to_string(Norm n) noexcept {
  return n == Norm::Euclidean ? "euclidean" : "max";
}

inline Norm parse_norm(std::string_view s) {
  if (s == "euclidean" || s == "l2") return Norm::Euclidean;
  if (s == "max" || s == "linf") return Norm::Max;
  throw Error("unknown norm '" + std::string(s) + "'");
}

}  // namespace aknn
