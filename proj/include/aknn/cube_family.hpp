#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>

#include "aknn/error.hpp"
#include "aknn/rng.hpp"

namespace aknn {

// n low-density cubes plus one high-density cube, laid out along the first
// coordinate. Cube j (1-based) spans first coordinate [(4j-1)L, (4j+1)L] and
// [-L, L] in every other coordinate; the features are uniform within each
// cube and eta alternates as a * (-1)^j. Off the support eta is 0.
struct CubeFamily {
  std::size_t n_cubes = 0;
  double half_width = 1.0;
  double low_density = 0.0;
  std::size_t dim = 1;
  double eta_amplitude = 1.0;

  double cube_volume() const { return std::pow(2.0 * half_width, static_cast<double>(dim)); }
  double low_cube_mass() const { return cube_volume() * low_density; }
  double high_cube_mass() const {
    return 1.0 - static_cast<double>(n_cubes) * low_cube_mass();
  }
  double high_density() const { return high_cube_mass() / cube_volume(); }
  double cube_center(std::size_t j) const { return 4.0 * static_cast<double>(j) * half_width; }

  double cube_mass(std::size_t j) const {
    if (j == 0 || j > n_cubes + 1) throw Error("cube index out of range");
    return j <= n_cubes ? low_cube_mass() : high_cube_mass();
  }

  void validate() const {
    if (dim == 0) throw Error("dimension must be at least 1");
    if (!(half_width > 0.0) || !std::isfinite(half_width))
      throw Error("cube half-width must be positive");
    if (!(low_density > 0.0) && n_cubes > 0) throw Error("low density must be positive");
    if (!(eta_amplitude > 0.0) || eta_amplitude > 1.0)
      throw Error("eta amplitude must lie in (0, 1]");
    if (high_cube_mass() < -1e-12) throw Error("infeasible mass budget");
  }

  // 1-based index of the cube containing x, if any.
  std::optional<std::size_t> cube_of(std::span<const double> x) const {
    if (x.size() != dim) throw Error("dimension mismatch");
    for (std::size_t i = 1; i < dim; ++i)
      if (std::abs(x[i]) > half_width) return std::nullopt;
    const double j = std::round(x[0] / (4.0 * half_width));
    if (j < 1.0 || j > static_cast<double>(n_cubes + 1)) return std::nullopt;
    const auto idx = static_cast<std::size_t>(j);
    if (std::abs(x[0] - cube_center(idx)) > half_width) return std::nullopt;
    return idx;
  }

  double eta(std::span<const double> x) const {
    const auto j = cube_of(x);
    if (!j) return 0.0;
    return (*j % 2 == 0) ? eta_amplitude : -eta_amplitude;
  }

  double density(std::span<const double> x) const {
    const auto j = cube_of(x);
    if (!j) return 0.0;
    return *j <= n_cubes ? low_density : high_density();
  }

  void sample(Rng& rng, std::span<double> out) const {
    const double u = uniform01(rng);
    const double p = low_cube_mass();
    std::size_t j = n_cubes + 1;
    if (n_cubes > 0 && u < static_cast<double>(n_cubes) * p)
      j = std::min<std::size_t>(static_cast<std::size_t>(u / p) + 1, n_cubes);
    out[0] = cube_center(j) + half_width * (2.0 * uniform01(rng) - 1.0);
    for (std::size_t i = 1; i < dim; ++i) out[i] = half_width * (2.0 * uniform01(rng) - 1.0);
  }
};

}  // namespace aknn
