#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "aknn/cube_family.hpp"
#include "aknn/error.hpp"
#include "aknn/harness.hpp"
#include "aknn/theory.hpp"
#include "aknn/worlds.hpp"

// Adversarial cube worlds on which the standard kNN rule cannot resolve the
// sign of eta in the low-density cubes: each low-density cube carries about
// k/3 of the N training points, so a k-neighborhood spans three cubes and the
// two outer ones carry the opposite sign.
namespace aknn {

// Unit half-width cubes; low density k / (3 * 2^d * N); eta = +-1.
struct FixedSize {};

// Half-width L = (k N^(delta-1))^(1/d) / 2; low density N^-delta / 3;
// eta amplitude (k N^(delta-1))^(2/d) / 4.
struct AdaptiveSize {
  double delta = 0.5;
};

using CubeVariant = std::variant<FixedSize, AdaptiveSize>;

struct CubeWorld {
  CubeFamily family;
  WorldSpec world;
};

// Every low-density cube carries probability k / (3N) under both variants.
// Without an explicit count, n is the largest value that keeps the
// low-density cubes' total mass at or below one half.
inline CubeWorld make_cube_world(std::size_t k_target, std::size_t N, CubeVariant variant,
                                 std::optional<std::size_t> n_cubes = std::nullopt,
                                 std::size_t dim = 1) {
  if (k_target == 0 || N == 0) throw Error("cube world needs positive k and N");
  if (dim == 0) throw Error("dimension must be at least 1");
  const double k = static_cast<double>(k_target);
  const double n_samples = static_cast<double>(N);
  const double d = static_cast<double>(dim);

  CubeFamily fam;
  fam.dim = dim;
  if (std::holds_alternative<FixedSize>(variant)) {
    fam.half_width = 1.0;
    fam.low_density = k / (3.0 * std::pow(2.0, d) * n_samples);
    fam.eta_amplitude = 1.0;
  } else {
    const double delta = std::get<AdaptiveSize>(variant).delta;
    if (!(delta >= 0.0 && delta <= 1.0)) throw Error("delta must lie in [0, 1]");
    const double scale = k * std::pow(n_samples, delta - 1.0);
    fam.half_width = 0.5 * std::pow(scale, 1.0 / d);
    fam.low_density = std::pow(n_samples, -delta) / 3.0;
    fam.eta_amplitude = 0.25 * std::pow(scale, 2.0 / d);
    if (fam.eta_amplitude > 1.0) throw Error("eta amplitude exceeds 1; reduce k or delta");
  }

  const double cube_mass = fam.low_cube_mass();
  fam.n_cubes = n_cubes ? *n_cubes : static_cast<std::size_t>(std::floor(0.5 / cube_mass + 1e-9));
  if (static_cast<double>(fam.n_cubes) * cube_mass > 1.0 + 1e-12)
    throw Error("infeasible mass budget: " + std::to_string(fam.n_cubes) +
                " low-density cubes exceed total mass 1");
  fam.validate();

  CubeWorld out;
  out.family = fam;
  out.world.name = std::string(std::holds_alternative<FixedSize>(variant) ? "cube_fixed" : "cube_adaptive") +
                   "_k" + std::to_string(k_target) + "_N" + std::to_string(N);
  out.world.features = fam;
  out.world.eta = EtaFunc{EtaKind::CubeSign, 0.0};
  out.world.task = Task::Classification;
  return out;
}

struct GapConfig {
  std::size_t k_target = 30;
  std::vector<std::size_t> N_grid{3000};
  std::size_t trials = 200;
  std::size_t n_test = 1000;
  std::uint64_t seed = 1;
  double K = 1.0;  // adaptive rule, q fixed at the optimal 4 / (d + 4)
  double A = 1.0;
  std::size_t dim = 1;
  std::optional<std::size_t> n_cubes;
  unsigned workers = 0;
};

struct GapResult {
  SweepResult standard;
  SweepResult adaptive;
};

// Standard kNN with k = k_target against the adaptive rule on the fixed-size
// cube world matched to (k_target, N), for each N in the grid. Both methods
// see the same datasets (max norm).
inline GapResult demonstrate_gap(const GapConfig& cfg) {
  if (cfg.N_grid.empty()) throw Error("N_grid must not be empty");
  GapResult out;
  out.standard.method = "standard";
  out.adaptive.method = "adaptive";
  const double q = theory::q_star(static_cast<int>(cfg.dim));
  for (std::size_t N : cfg.N_grid) {
    const CubeWorld cw = make_cube_world(cfg.k_target, N, FixedSize{}, cfg.n_cubes, cfg.dim);
    const EvalOptions opts{cfg.trials, cfg.n_test, cfg.seed, Norm::Max, ClsRiskEstimator::PlugIn,
                           cfg.workers};
    const std::vector<GridPoint> grid{{N, FixedK{cfg.k_target}}, {N, AdaptiveK{cfg.K, q, cfg.A}}};
    const auto risks = run_grid(cw.world, grid, opts);
    out.standard.points.push_back({N, risks[0], cfg.k_target});
    out.adaptive.points.push_back({N, risks[1], 0});
    out.standard.world = out.adaptive.world = "cube_fixed_k" + std::to_string(cfg.k_target);
  }
  attach_fit(out.standard);
  attach_fit(out.adaptive);
  return out;
}

}  // namespace aknn
