// Fits the standard and the adaptive kNN classifier on Laplace features with
// eta(x) = cos(5x) and prints the excess risk at a few sample sizes.

#include <cstdio>
#include <vector>

#include "aknn/aknn.hpp"

int main() {
  using namespace aknn;

  WorldSpec world;
  world.name = "laplace_cos5x";
  world.features = FeatureDist{FeatureKind::Laplace, 1};
  world.eta = EtaFunc{EtaKind::Cos5x};
  world.task = Task::Classification;

  // One trial, by hand.
  const PointSet x = sample_features(world, 2000, 11);
  const std::vector<double> y = sample_labels(world, x, 12);
  const SpatialIndex index(x);
  const KnnPredictor knn(index, y, KnnPredictor::Task::Classification);
  const AdaptiveK adaptive{1.0, theory::q_star(1), 1.0};
  const double probe[] = {4.0};
  const Prediction p = knn.predict(adaptive, probe);
  std::printf("x=4: %d training points within A, k=%zu, label %+d (eta %.3f)\n", static_cast<int>(p.n_in_ball.value_or(0)),
              p.k_used, p.label, world.eta_at(probe));

  // Many trials per N through the harness.
  const std::vector<GridPoint> grid{{500, FixedK{11}},    {500, adaptive},  {2000, FixedK{22}},
                                    {2000, adaptive},     {8000, FixedK{44}}, {8000, adaptive}};
  EvalOptions opts;
  opts.trials = 40;
  const auto risks = run_grid(world, grid, opts);
  for (std::size_t i = 0; i < grid.size(); ++i)
    std::printf("N=%-5zu %-8s excess risk %.5f +- %.5f\n", grid[i].N,
                std::holds_alternative<FixedK>(grid[i].selector) ? "standard" : "adaptive", risks[i].mean,
                risks[i].std_error);
  return 0;
}
