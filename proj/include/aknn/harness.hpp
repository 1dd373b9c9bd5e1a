#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "aknn/error.hpp"
#include "aknn/estimators.hpp"
#include "aknn/norm.hpp"
#include "aknn/parallel.hpp"
#include "aknn/rng.hpp"
#include "aknn/spatial_index.hpp"
#include "aknn/theory.hpp"
#include "aknn/worlds.hpp"

namespace aknn {

enum class Method { Standard, Adaptive };

inline std::string_view to_string(Method m) noexcept {
  return m == Method::Standard ? "standard" : "adaptive";
}

inline Method parse_method(std::string_view s) {
  if (s == "standard") return Method::Standard;
  if (s == "adaptive") return Method::Adaptive;
  throw Error("unknown method '" + std::string(s) + "'");
}

inline std::vector<std::size_t> default_N_grid() { return {500, 1000, 2000, 4000, 8000, 16000}; }

// k in {1..60} for the standard rule; K in {0.25, 0.5, ..., 4.0} for the
// adaptive rule.
inline std::vector<double> default_tuning_grid(Method m) {
  std::vector<double> grid;
  if (m == Method::Standard) {
    for (int k = 1; k <= 60; ++k) grid.push_back(k);
  } else {
    for (int i = 1; i <= 16; ++i) grid.push_back(0.25 * i);
  }
  return grid;
}

struct TuningSpec {
  std::size_t at_N = 500;
  std::vector<double> grid;  // empty: default grid for the method
  std::size_t trials = 100;
};

struct ExperimentConfig {
  WorldSpec world;
  Method method = Method::Adaptive;
  std::size_t k = 10;          // standard rule: k at anchor_N
  std::size_t anchor_N = 500;  // sample size at which k (or the tuned k) applies
  double K = 1.0;
  std::optional<double> q;  // defaults to the optimal 4 / (d + 4)
  double A = 1.0;
  std::vector<std::size_t> N_grid = default_N_grid();
  std::size_t trials = 200;
  std::size_t n_test = 1000;
  std::uint64_t base_seed = 1;
  std::optional<TuningSpec> tuning;
  std::optional<Norm> norm;  // defaults: max norm on cube families, Euclidean otherwise
  std::optional<theory::RateParams> rate_params;  // alpha/beta/beta_prime overrides
  ClsRiskEstimator risk_estimator = ClsRiskEstimator::PlugIn;
  unsigned workers = 0;

  double q_value() const {
    return q ? *q : theory::q_star(static_cast<int>(world.dim()));
  }

  Norm norm_value() const {
    if (norm) return *norm;
    return world.is_cube_family() ? Norm::Max : Norm::Euclidean;
  }

  // Exponent inputs for the standard k schedule. Unless overridden, alpha = 1
  // and beta = beta' = the tail exponent of the feature law.
  theory::RateParams effective_rate_params() const {
    theory::RateParams p;
    if (rate_params) p = *rate_params;
    else if (const auto* f = std::get_if<FeatureDist>(&world.features)) {
      p.beta = tail_beta(*f);
      p.beta_prime = p.beta;
    }
    p.d = static_cast<int>(world.dim());
    p.q = q_value();
    return p;
  }

  void validate() const {
    world.validate();
    if (N_grid.empty()) throw Error("N_grid must not be empty");
    for (std::size_t i = 0; i < N_grid.size(); ++i) {
      if (N_grid[i] == 0) throw Error("N_grid entries must be positive");
      if (i > 0 && N_grid[i] <= N_grid[i - 1]) throw Error("N_grid must be strictly increasing");
    }
    if (trials == 0) throw Error("trials must be at least 1");
    if (n_test == 0) throw Error("n_test must be at least 1");
    if (anchor_N == 0) throw Error("anchor_N must be positive");
    if (method == Method::Standard && k == 0) throw Error("k must be positive");
    aknn::validate(KSelector{AdaptiveK{K, q_value(), A}});
    if (tuning && (tuning->at_N == 0 || tuning->trials == 0))
      throw Error("tuning needs a positive sample size and trial count");
    effective_rate_params().validate();
  }
};

// ---------------------------------------------------------------------------
// Trial evaluation.
// ---------------------------------------------------------------------------

struct EvalOptions {
  std::size_t trials = 200;
  std::size_t n_test = 1000;
  std::uint64_t base_seed = 1;
  Norm norm = Norm::Euclidean;
  ClsRiskEstimator risk_estimator = ClsRiskEstimator::PlugIn;
  unsigned workers = 0;
};

struct GridPoint {
  std::size_t N = 0;
  KSelector selector;
};

// Fresh training and test samples for one trial. Streams: 0 training
// features, 1 training labels, 2 test features, 3 test labels.
struct TrialData {
  PointSet train_x;
  std::vector<double> train_y;
  PointSet test_x;
  std::vector<double> test_eta;
  std::vector<double> test_y;  // filled only when requested
};

inline TrialData make_trial(const WorldSpec& world, std::size_t N, std::size_t n_test,
                            std::uint64_t seed, bool with_test_labels) {
  TrialData t;
  t.train_x = sample_features(world, N, derive_seed(seed, 0));
  t.train_y = sample_labels(world, t.train_x, derive_seed(seed, 1));
  t.test_x = sample_features(world, n_test, derive_seed(seed, 2));
  t.test_eta.resize(n_test);
  for (std::size_t i = 0; i < n_test; ++i) t.test_eta[i] = world.eta_at(t.test_x[i]);
  if (with_test_labels) t.test_y = sample_labels(world, t.test_x, derive_seed(seed, 3));
  return t;
}

namespace detail {

// Loss of one test prediction; for EmpiricalMinusBayes the Bayes risk is
// subtracted from the mean afterwards.
inline double point_loss(Task task, ClsRiskEstimator est, double value, double eta, double y) {
  if (task == Task::Regression) return (value - eta) * (value - eta);
  const int label = sign_label(value);
  if (est == ClsRiskEstimator::PlugIn) return plugin_classification_loss(label, eta);
  return static_cast<double>(label) != y ? 1.0 : 0.0;
}

inline double bayes_offset(const WorldSpec& world, ClsRiskEstimator est) {
  if (world.task != Task::Classification || est != ClsRiskEstimator::EmpiricalMinusBayes) return 0.0;
  return bayes_risk_classification(world).mean;
}

inline std::string trial_context(std::size_t N, std::size_t trial, std::uint64_t seed) {
  return "trial failed (N=" + std::to_string(N) + ", trial=" + std::to_string(trial) +
         ", seed=" + std::to_string(seed) + ")";
}

}  // namespace detail

inline double default_predict(const KnnPredictor& p, const KSelector& s, std::span<const double> x) {
  return p.predict(s, x).value;
}

// Runs `opts.trials` independent trials at each grid point and returns one
// RiskEstimate per point (mean and standard error across trials). The trial
// seed depends only on (base_seed, N, trial index), so the result does not
// depend on the worker count, and different selectors at the same N share
// their datasets. `predict(predictor, selector, x)` returns the prediction
// value (the estimate of eta).
template <class Predict = decltype(&default_predict)>
std::vector<RiskEstimate> run_grid(const WorldSpec& world, std::span<const GridPoint> grid,
                                   const EvalOptions& opts, Predict predict = &default_predict) {
  world.validate();
  if (opts.trials == 0) throw Error("trials must be at least 1");
  const bool empirical = world.task == Task::Classification &&
                         opts.risk_estimator == ClsRiskEstimator::EmpiricalMinusBayes;
  const double offset = detail::bayes_offset(world, opts.risk_estimator);
  const auto task_kind = world.task == Task::Classification ? KnnPredictor::Task::Classification
                                                            : KnnPredictor::Task::Regression;

  std::vector<double> per_trial(grid.size() * opts.trials);
  parallel_for(per_trial.size(), opts.workers, [&](std::size_t job) {
    const std::size_t g = job / opts.trials;
    const std::size_t trial = job % opts.trials;
    const std::size_t N = grid[g].N;
    const std::uint64_t seed = derive_seed(opts.base_seed, N, trial);
    try {
      const TrialData data = make_trial(world, N, opts.n_test, seed, empirical);
      const SpatialIndex index(data.train_x, opts.norm);
      const KnnPredictor predictor(index, data.train_y, task_kind);
      double sum = 0.0;
      for (std::size_t i = 0; i < opts.n_test; ++i) {
        const double v = predict(predictor, grid[g].selector, data.test_x[i]);
        sum += detail::point_loss(world.task, opts.risk_estimator, v, data.test_eta[i],
                                  empirical ? data.test_y[i] : 0.0);
      }
      per_trial[job] = sum / static_cast<double>(opts.n_test) - offset;
    } catch (const std::exception& e) {
      throw Error(detail::trial_context(N, trial, seed) + ": " + e.what());
    }
  });

  std::vector<RiskEstimate> out;
  out.reserve(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    RiskEstimate r = summarize(std::span<const double>(per_trial).subspan(g * opts.trials, opts.trials));
    r.n_test = opts.n_test;
    r.n_trials = opts.trials;
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rate fitting.
// ---------------------------------------------------------------------------

struct RatePoint {
  double N = 0.0;
  double risk = 0.0;
};

// Least-squares line log10(risk) = intercept + slope * log10(N). The
// empirical convergence rate is -slope.
struct FitResult {
  double slope = 0.0;
  double slope_std_error = 0.0;
  double intercept = 0.0;
  double rate() const noexcept { return -slope; }
};

inline FitResult fit_rate(std::span<const RatePoint> points) {
  if (points.size() < 3) throw Error("need at least 3 grid points to fit a rate");
  std::vector<double> xs, ys;
  for (const auto& p : points) {
    if (!(p.N > 0.0)) throw Error("cannot log nonpositive sample size");
    if (!(p.risk > 0.0)) throw Error("cannot log nonpositive excess risk");
    xs.push_back(std::log10(p.N));
    ys.push_back(std::log10(p.risk));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw Error("sample sizes must not all be equal");
  FitResult f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (f.intercept + f.slope * xs[i]);
    ssr += r * r;
  }
  f.slope_std_error = xs.size() > 2 ? std::sqrt(ssr / (n - 2.0) / sxx) : 0.0;
  return f;
}

// ---------------------------------------------------------------------------
// Sweeps.
// ---------------------------------------------------------------------------

struct SweepPoint {
  std::size_t N = 0;
  RiskEstimate risk;
  std::size_t k = 0;  // standard rule only: k used at this N
};

struct SweepResult {
  std::string method;
  std::string world;
  std::vector<SweepPoint> points;
  std::optional<FitResult> fit;
  std::string fit_error;  // why no fit is available
  std::optional<double> tuned_parameter;

  std::vector<RatePoint> rate_points() const {
    std::vector<RatePoint> out;
    for (const auto& p : points) out.push_back({static_cast<double>(p.N), p.risk.mean});
    return out;
  }
};

// Fits the result's curve when possible; otherwise records the reason. An
// exactly Bayes-optimal predictor has zero excess risk and never gets a rate.
inline void attach_fit(SweepResult& result) {
  try {
    result.fit = fit_rate(result.rate_points());
    result.fit_error.clear();
  } catch (const Error& e) {
    result.fit.reset();
    result.fit_error = e.what();
  }
}

inline EvalOptions eval_options(const ExperimentConfig& cfg) {
  return {cfg.trials, cfg.n_test, cfg.base_seed, cfg.norm_value(), cfg.risk_estimator, cfg.workers};
}

struct TuneResult {
  double best = 0.0;
  std::vector<double> grid;
  std::vector<double> mean_risk;
};

namespace detail {

inline void check_grid(Method method, std::span<const double> grid) {
  if (grid.empty()) throw Error("empty tuning grid");
  for (double c : grid) {
    if (!(c > 0.0) || !std::isfinite(c)) throw Error("tuning candidates must be positive");
    if (method == Method::Standard && c != std::floor(c))
      throw Error("standard tuning candidates must be integers");
  }
}

// Index of the smallest risk; ties go to the smaller parameter.
inline std::size_t argmin_risk(std::span<const double> grid, std::span<const double> risk) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (risk[i] < risk[best] || (risk[i] == risk[best] && grid[i] < grid[best])) best = i;
  }
  return best;
}

constexpr std::uint64_t kTuningStream = 0x7475'6e65;  // keeps tuning data apart from sweeps

}  // namespace detail

// Picks the candidate (k for the standard rule, K for the adaptive rule) with
// the smallest mean excess risk at sample size `at_N` over `trials` trials.
// Every candidate sees the same datasets; predictions come from one neighbor
// query per test point, truncated to each candidate's k.
inline TuneResult tune(const ExperimentConfig& cfg, std::span<const double> grid,
                       std::size_t at_N, std::size_t trials) {
  cfg.validate();
  detail::check_grid(cfg.method, grid);
  if (at_N == 0 || trials == 0) throw Error("tuning needs a positive sample size and trial count");
  const WorldSpec& world = cfg.world;
  const bool empirical = world.task == Task::Classification &&
                         cfg.risk_estimator == ClsRiskEstimator::EmpiricalMinusBayes;
  const double offset = detail::bayes_offset(world, cfg.risk_estimator);
  const double q = cfg.q_value();
  const Norm norm = cfg.norm_value();
  const std::size_t n_cand = grid.size();
  const std::uint64_t base = derive_seed(cfg.base_seed, detail::kTuningStream);

  std::vector<std::vector<double>> per_trial(trials, std::vector<double>(n_cand, 0.0));
  parallel_for(trials, cfg.workers, [&](std::size_t trial) {
    const std::uint64_t seed = derive_seed(base, at_N, trial);
    try {
      const TrialData data = make_trial(world, at_N, cfg.n_test, seed, empirical);
      const SpatialIndex index(data.train_x, norm);
      std::vector<std::size_t> ks(n_cand);
      std::vector<double> prefix;
      auto& acc = per_trial[trial];
      for (std::size_t i = 0; i < cfg.n_test; ++i) {
        const auto x = data.test_x[i];
        if (cfg.method == Method::Standard) {
          for (std::size_t c = 0; c < n_cand; ++c)
            ks[c] = std::min(static_cast<std::size_t>(grid[c]), at_N);
        } else {
          const std::size_t n = index.count_within(x, cfg.A);
          for (std::size_t c = 0; c < n_cand; ++c) ks[c] = std::min(adaptive_k(n, grid[c], q), at_N);
        }
        const std::size_t k_max = *std::max_element(ks.begin(), ks.end());
        const NeighborSet nb = index.knn(x, k_max);
        prefix.assign(1, 0.0);
        for (std::size_t idx : nb.indices) prefix.push_back(prefix.back() + data.train_y[idx]);
        for (std::size_t c = 0; c < n_cand; ++c) {
          const double value = prefix[ks[c]] / static_cast<double>(ks[c]);
          acc[c] += detail::point_loss(world.task, cfg.risk_estimator, value, data.test_eta[i],
                                       empirical ? data.test_y[i] : 0.0);
        }
      }
      for (double& a : acc) a = a / static_cast<double>(cfg.n_test) - offset;
    } catch (const std::exception& e) {
      throw Error(detail::trial_context(at_N, trial, seed) + ": " + e.what());
    }
  });

  TuneResult result;
  result.grid.assign(grid.begin(), grid.end());
  result.mean_risk.assign(n_cand, 0.0);
  for (const auto& row : per_trial)
    for (std::size_t c = 0; c < n_cand; ++c) result.mean_risk[c] += row[c];
  for (double& m : result.mean_risk) m /= static_cast<double>(trials);
  result.best = grid[detail::argmin_risk(grid, result.mean_risk)];
  return result;
}

// Tunes per cfg.tuning (default grid when its grid is empty).
inline TuneResult tune(const ExperimentConfig& cfg) {
  if (!cfg.tuning) throw Error("tuning is not enabled in this config");
  const auto grid = cfg.tuning->grid.empty() ? default_tuning_grid(cfg.method) : cfg.tuning->grid;
  return tune(cfg, grid, cfg.tuning->at_N, cfg.tuning->trials);
}

// Selector used at each N of the sweep. The standard rule grows k from its
// anchor value k0 at N0 as round(k0 * (N / N0)^e), e the rate-optimal growth
// exponent; the adaptive rule keeps (K, q, A) fixed.
inline std::vector<GridPoint> sweep_grid(const ExperimentConfig& cfg, std::optional<double> tuned) {
  std::vector<GridPoint> grid;
  if (cfg.method == Method::Adaptive) {
    const AdaptiveK sel{tuned ? *tuned : cfg.K, cfg.q_value(), cfg.A};
    for (std::size_t N : cfg.N_grid) grid.push_back({N, sel});
    return grid;
  }
  const double k0 = tuned ? *tuned : static_cast<double>(cfg.k);
  const double N0 = static_cast<double>(cfg.tuning ? cfg.tuning->at_N : cfg.anchor_N);
  const theory::RateParams params = cfg.effective_rate_params();
  const double e = standard_k_exponent(cfg.world.problem(), params);
  const double c = k0 / std::pow(N0, e);
  for (std::size_t N : cfg.N_grid)
    grid.push_back({N, FixedK{standard_k_schedule(N, cfg.world.problem(), params, c)}});
  return grid;
}

// Full experiment: optional tuning, then `trials` trials per N, then the
// log-log fit. `predict` may replace the kNN rule (e.g. with an oracle).
template <class Predict = decltype(&default_predict)>
SweepResult sweep(const ExperimentConfig& cfg, Predict predict = &default_predict) {
  cfg.validate();
  SweepResult result;
  result.method = std::string(to_string(cfg.method));
  result.world = cfg.world.name;
  if (cfg.tuning) result.tuned_parameter = tune(cfg).best;
  const auto grid = sweep_grid(cfg, result.tuned_parameter);
  const auto risks = run_grid(cfg.world, grid, eval_options(cfg), predict);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    SweepPoint p{grid[i].N, risks[i], 0};
    if (const auto* f = std::get_if<FixedK>(&grid[i].selector)) p.k = f->k;
    result.points.push_back(p);
  }
  attach_fit(result);
  return result;
}

}  // namespace aknn
