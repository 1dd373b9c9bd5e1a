#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "aknn/error.hpp"
#include "aknn/harness.hpp"
#include "aknn/theory.hpp"
#include "aknn/worlds.hpp"

// The benchmark worlds with their stored rate constants (alpha = 1; beta from
// the feature tail) and theoretical exponents for both rules.
namespace aknn {

enum class Suite { Classification, Regression };

inline Suite parse_suite(std::string_view s) {
  if (s == "classification") return Suite::Classification;
  if (s == "regression") return Suite::Regression;
  throw Error("unknown suite '" + std::string(s) + "'");
}

struct SuiteEntry {
  WorldSpec world;
  double A = 1.0;
  theory::RateParams params;  // alpha, beta, beta_prime, d, q = q*(d)
  theory::Exponent standard;
  theory::Exponent adaptive;
};

namespace detail {

inline SuiteEntry suite_entry(std::string name, FeatureDist features, EtaKind eta, Task task, double A) {
  SuiteEntry e;
  e.world.name = std::move(name);
  e.world.features = features;
  e.world.eta = EtaFunc{eta, 0.0};
  e.world.task = task;
  e.world.validate();
  e.A = A;
  const int d = static_cast<int>(features.dim);
  e.params.alpha = 1.0;
  e.params.beta = tail_beta(features);
  e.params.beta_prime = e.params.beta;
  e.params.d = d;
  e.params.q = theory::q_star(d);
  const auto& p = e.params;
  if (task == Task::Classification) {
    e.standard = theory::standard_cls_rate(p.alpha, p.beta, d);
    e.adaptive = theory::adaptive_cls_rate(p.alpha, p.beta, d, p.q);
  } else if (eta == EtaKind::Identity) {
    e.standard = theory::standard_reg_rate_unbounded(p.beta_prime, d);
    e.adaptive = theory::adaptive_reg_rate_unbounded(p.beta_prime, d, p.q);
  } else {
    e.standard = theory::standard_reg_rate(p.beta, d);
    e.adaptive = theory::adaptive_reg_rate(p.beta, d, p.q);
  }
  return e;
}

inline FeatureDist dist(FeatureKind kind, std::size_t dim, double nu = 5.0) {
  FeatureDist f;
  f.kind = kind;
  f.dim = dim;
  f.nu = nu;
  return f;
}

}  // namespace detail

inline std::vector<SuiteEntry> classification_suite() {
  using detail::dist;
  using detail::suite_entry;
  const auto C = Task::Classification;
  return {
      suite_entry("laplace_d1_cos5x", dist(FeatureKind::Laplace, 1), EtaKind::Cos5x, C, 1.0),
      suite_entry("t5_d1_cos5x", dist(FeatureKind::StudentT, 1, 5.0), EtaKind::Cos5x, C, 1.0),
      suite_entry("t2_d1_cos5x", dist(FeatureKind::StudentT, 1, 2.0), EtaKind::Cos5x, C, 1.0),
      suite_entry("laplace_d1_periodic", dist(FeatureKind::Laplace, 1), EtaKind::PiecewisePeriodic, C, 1.0),
      suite_entry("gaussian_d2_cos2sum", dist(FeatureKind::Gaussian, 2), EtaKind::Cos2Sum, C, 1.0),
      suite_entry("gaussian_d2_cos2first", dist(FeatureKind::Gaussian, 2), EtaKind::Cos2First, C, 1.0),
  };
}

inline std::vector<SuiteEntry> regression_suite() {
  using detail::dist;
  using detail::suite_entry;
  const auto R = Task::Regression;
  return {
      suite_entry("laplace_d1_sin", dist(FeatureKind::Laplace, 1), EtaKind::Sinx, R, 0.5),
      suite_entry("laplace_d1_identity", dist(FeatureKind::Laplace, 1), EtaKind::Identity, R, 0.5),
      suite_entry("t2_d1_sin", dist(FeatureKind::StudentT, 1, 2.0), EtaKind::Sinx, R, 0.5),
      suite_entry("cauchy_d1_sin", dist(FeatureKind::Cauchy, 1), EtaKind::Sinx, R, 0.5),
      suite_entry("laplace_d2_identity", dist(FeatureKind::Laplace, 2), EtaKind::Identity, R, 0.5),
      suite_entry("laplace_d3_identity", dist(FeatureKind::Laplace, 3), EtaKind::Identity, R, 0.5),
  };
}

inline std::vector<SuiteEntry> suite_entries(Suite s) {
  return s == Suite::Classification ? classification_suite() : regression_suite();
}

inline const SuiteEntry& find_entry(const std::vector<SuiteEntry>& entries, std::string_view name) {
  for (const auto& e : entries)
    if (e.world.name == name) return e;
  throw Error("unknown suite world '" + std::string(name) + "'");
}

struct SuiteRunOptions {
  std::vector<std::size_t> N_grid = default_N_grid();
  std::size_t trials = 200;
  std::size_t n_test = 1000;
  std::size_t tune_trials = 100;
  std::size_t tune_at_N = 500;
  std::uint64_t base_seed = 1;
  unsigned workers = 0;
};

// Tuned sweep config for one entry and method.
inline ExperimentConfig suite_config(const SuiteEntry& e, Method method, const SuiteRunOptions& opt) {
  ExperimentConfig c;
  c.world = e.world;
  c.method = method;
  c.A = e.A;
  c.q = e.params.q;
  c.N_grid = opt.N_grid;
  c.trials = opt.trials;
  c.n_test = opt.n_test;
  c.base_seed = opt.base_seed;
  c.tuning = TuningSpec{opt.tune_at_N, {}, opt.tune_trials};
  c.rate_params = theory::RateParams{e.params.alpha, e.params.beta, e.params.beta_prime, e.params.d, e.params.q};
  c.workers = opt.workers;
  return c;
}

struct SuiteRow {
  const SuiteEntry* entry = nullptr;
  SweepResult standard;
  SweepResult adaptive;
};

inline SuiteRow run_suite_entry(const SuiteEntry& e, const SuiteRunOptions& opt) {
  SuiteRow row;
  row.entry = &e;
  row.standard = sweep(suite_config(e, Method::Standard, opt));
  row.adaptive = sweep(suite_config(e, Method::Adaptive, opt));
  return row;
}

}  // namespace aknn
