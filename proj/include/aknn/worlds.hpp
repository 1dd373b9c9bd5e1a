#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <boost/math/distributions/cauchy.hpp>
#include <boost/math/distributions/laplace.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/distributions/uniform.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "aknn/cube_family.hpp"
#include "aknn/error.hpp"
#include "aknn/estimators.hpp"
#include "aknn/points.hpp"
#include "aknn/rng.hpp"

namespace aknn {

// ---------------------------------------------------------------------------
// Feature distributions. Coordinates are i.i.d. draws from a standard
// univariate law (Uniform uses [a, b]).
// ---------------------------------------------------------------------------

enum class FeatureKind { Uniform, Gaussian, Laplace, StudentT, Cauchy };

struct FeatureDist {
  FeatureKind kind = FeatureKind::Laplace;
  std::size_t dim = 1;
  double a = -1.0;  // Uniform lower bound
  double b = 1.0;   // Uniform upper bound
  double nu = 5.0;  // StudentT degrees of freedom

  void validate() const {
    if (dim == 0) throw Error("dimension must be at least 1");
    if (kind == FeatureKind::StudentT && !(nu > 0.0))
      throw Error("degrees of freedom must be positive");
    if (kind == FeatureKind::Uniform && !(a < b)) throw Error("uniform bounds must satisfy a < b");
  }
};

namespace detail {

// Draws coordinates for one FeatureDist; reuses distribution state across
// draws from the same generator.
class CoordinateSampler {
 public:
  explicit CoordinateSampler(const FeatureDist& dist) : dist_(dist), chi2_(dist.nu > 0 ? dist.nu : 1.0) {
    dist.validate();
  }

  double operator()(Rng& rng) {
    switch (dist_.kind) {
      case FeatureKind::Uniform:
        return dist_.a + (dist_.b - dist_.a) * uniform01(rng);
      case FeatureKind::Gaussian:
        return normal_(rng);
      case FeatureKind::Laplace: {
        const double e = exponential_(rng);
        return (rng() >> 63) ? e : -e;
      }
      case FeatureKind::StudentT: {
        const double z = normal_(rng);
        const double v = chi2_(rng);
        return z / std::sqrt(v / dist_.nu);
      }
      case FeatureKind::Cauchy: {
        const double z1 = normal_(rng);
        const double z2 = normal_(rng);
        return z1 / z2;
      }
    }
    throw Error("unknown feature distribution");
  }

 private:
  FeatureDist dist_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::exponential_distribution<double> exponential_{1.0};
  std::chi_squared_distribution<double> chi2_;
};

template <class Fn>
decltype(auto) with_boost_dist(const FeatureDist& dist, Fn&& fn) {
  switch (dist.kind) {
    case FeatureKind::Uniform:
      return fn(boost::math::uniform_distribution<double>(dist.a, dist.b));
    case FeatureKind::Gaussian:
      return fn(boost::math::normal_distribution<double>(0.0, 1.0));
    case FeatureKind::Laplace:
      return fn(boost::math::laplace_distribution<double>(0.0, 1.0));
    case FeatureKind::StudentT:
      return fn(boost::math::students_t_distribution<double>(dist.nu));
    case FeatureKind::Cauchy:
      return fn(boost::math::cauchy_distribution<double>(0.0, 1.0));
  }
  throw Error("unknown feature distribution");
}

}  // namespace detail

// Univariate marginal density, CDF and quantile of one coordinate.
inline double marginal_pdf(const FeatureDist& dist, double x) {
  return detail::with_boost_dist(dist, [x](const auto& d) {
    if constexpr (std::is_same_v<std::decay_t<decltype(d)>, boost::math::uniform_distribution<double>>) {
      if (x < d.lower() || x > d.upper()) return 0.0;
    }
    return boost::math::pdf(d, x);
  });
}

inline double marginal_cdf(const FeatureDist& dist, double x) {
  return detail::with_boost_dist(dist, [x](const auto& d) {
    if constexpr (std::is_same_v<std::decay_t<decltype(d)>, boost::math::uniform_distribution<double>>) {
      if (x <= d.lower()) return 0.0;
      if (x >= d.upper()) return 1.0;
    }
    return boost::math::cdf(d, x);
  });
}

inline double marginal_quantile(const FeatureDist& dist, double p) {
  return detail::with_boost_dist(dist, [p](const auto& d) { return boost::math::quantile(d, p); });
}

inline double density(const FeatureDist& dist, std::span<const double> x) {
  if (x.size() != dist.dim) throw Error("dimension mismatch");
  double f = 1.0;
  for (double xi : x) f *= marginal_pdf(dist, xi);
  return f;
}

// Tail exponent beta of the density, P(f(X) <= t) <= C t^beta. Laplace and
// Gaussian sit at 1; Student-t with nu degrees of freedom at nu / (nu + d)
// (Cauchy is nu = 1). Uniform has a density bounded away from zero on its
// support, so any beta works; a large finite stand-in is returned.
inline double tail_beta(const FeatureDist& dist) {
  dist.validate();
  const double d = static_cast<double>(dist.dim);
  switch (dist.kind) {
    case FeatureKind::Gaussian:
    case FeatureKind::Laplace:
      return 1.0;
    case FeatureKind::StudentT:
      return dist.nu / (dist.nu + d);
    case FeatureKind::Cauchy:
      return 1.0 / (1.0 + d);
    case FeatureKind::Uniform:
      return 1e6;
  }
  throw Error("unknown feature distribution");
}

inline PointSet sample_features(const FeatureDist& dist, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error("sample size must be positive");
  detail::CoordinateSampler sampler(dist);
  Rng rng = make_rng(seed);
  std::vector<double> coords(n * dist.dim);
  for (double& c : coords) c = sampler(rng);
  return PointSet(std::move(coords), dist.dim);
}

// ---------------------------------------------------------------------------
// Regression functions.
// ---------------------------------------------------------------------------

enum class EtaKind {
  Cos5x,              // cos(5 x1)
  PiecewisePeriodic,  // period-2 triangle wave in x1
  Cos2Sum,            // cos(2 x1 + 2 x2)
  Cos2First,          // cos(2 x1)
  Sinx,               // sin(x1)
  Identity,           // x1 (unbounded)
  Constant,           // value
  CubeSign,           // alternating sign on a cube family
};

struct EtaFunc {
  EtaKind kind = EtaKind::Cos5x;
  double value = 0.0;  // Constant only
};

inline bool usable_for_classification(const EtaFunc& eta) {
  if (eta.kind == EtaKind::Identity) return false;
  if (eta.kind == EtaKind::Constant) return std::abs(eta.value) <= 1.0;
  return true;
}

inline std::size_t min_dim(const EtaFunc& eta) { return eta.kind == EtaKind::Cos2Sum ? 2 : 1; }

// Triangle wave with period 2: 2x on [0, 1/2), 2(1-x) on [1/2, 3/2),
// 2(x-2) on [3/2, 2).
inline double piecewise_periodic(double x) {
  const double r = x - 2.0 * std::floor(x / 2.0);
  if (r < 0.5) return 2.0 * r;
  if (r < 1.5) return 2.0 * (1.0 - r);
  return 2.0 * (r - 2.0);
}

inline double eta_eval(const EtaFunc& eta, std::span<const double> x) {
  if (x.size() < min_dim(eta)) throw Error("dimension mismatch for regression function");
  switch (eta.kind) {
    case EtaKind::Cos5x:
      return std::cos(5.0 * x[0]);
    case EtaKind::PiecewisePeriodic:
      return piecewise_periodic(x[0]);
    case EtaKind::Cos2Sum:
      return std::cos(2.0 * x[0] + 2.0 * x[1]);
    case EtaKind::Cos2First:
      return std::cos(2.0 * x[0]);
    case EtaKind::Sinx:
      return std::sin(x[0]);
    case EtaKind::Identity:
      return x[0];
    case EtaKind::Constant:
      return eta.value;
    case EtaKind::CubeSign:
      throw Error("cube regression function needs its cube family");
  }
  throw Error("unknown regression function");
}

// ---------------------------------------------------------------------------
// Worlds.
// ---------------------------------------------------------------------------

enum class Task { Classification, Regression };

using FeatureModel = std::variant<FeatureDist, CubeFamily>;

struct WorldSpec {
  std::string name;
  FeatureModel features;
  EtaFunc eta;
  Task task = Task::Classification;
  double noise_sigma = 0.5;  // regression only

  std::size_t dim() const {
    return std::visit([](const auto& f) { return f.dim; }, features);
  }
  bool is_cube_family() const { return std::holds_alternative<CubeFamily>(features); }

  void validate() const {
    std::visit([](const auto& f) { f.validate(); }, features);
    if (is_cube_family() != (eta.kind == EtaKind::CubeSign))
      throw Error("cube-family worlds use the cube regression function and only they do");
    if (!is_cube_family() && dim() < min_dim(eta))
      throw Error("regression function needs more feature dimensions");
    if (task == Task::Classification && !usable_for_classification(eta))
      throw Error("eta out of range for classification");
    if (task == Task::Regression && !(noise_sigma >= 0.0 && std::isfinite(noise_sigma)))
      throw Error("noise sigma must be finite and nonnegative");
  }

  double eta_at(std::span<const double> x) const {
    if (x.size() != dim()) throw Error("dimension mismatch");
    if (const auto* cubes = std::get_if<CubeFamily>(&features)) return cubes->eta(x);
    return eta_eval(eta, x);
  }

  double density_at(std::span<const double> x) const {
    if (const auto* cubes = std::get_if<CubeFamily>(&features)) return cubes->density(x);
    return density(std::get<FeatureDist>(features), x);
  }

  Problem problem() const {
    if (task == Task::Classification) return Problem::Classification;
    return eta.kind == EtaKind::Identity ? Problem::RegressionUnbounded : Problem::Regression;
  }
};

inline PointSet sample_features(const WorldSpec& world, std::size_t n, std::uint64_t seed) {
  if (const auto* dist = std::get_if<FeatureDist>(&world.features))
    return sample_features(*dist, n, seed);
  if (n == 0) throw Error("sample size must be positive");
  const auto& cubes = std::get<CubeFamily>(world.features);
  cubes.validate();
  Rng rng = make_rng(seed);
  PointSet out(cubes.dim);
  out.resize(n);
  for (std::size_t i = 0; i < n; ++i) cubes.sample(rng, out.row(i));
  return out;
}

// P(Y = +1 | x) = (1 + eta(x)) / 2; labels are +1 / -1.
template <class EtaFn>
  requires std::invocable<EtaFn&, std::span<const double>>
std::vector<double> sample_labels_classification(EtaFn&& eta, const PointSet& points,
                                                 std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<double> labels(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double e = eta(points[i]);
    if (!(std::abs(e) <= 1.0)) throw Error("eta out of range for classification");
    labels[i] = uniform01(rng) < 0.5 * (1.0 + e) ? 1.0 : -1.0;
  }
  return labels;
}

inline std::vector<double> sample_labels_classification(const EtaFunc& eta, const PointSet& points,
                                                        std::uint64_t seed) {
  return sample_labels_classification(
      [&eta](std::span<const double> x) { return eta_eval(eta, x); }, points, seed);
}

// Y = eta(x) + sigma * Z with Z standard Gaussian.
template <class EtaFn>
  requires std::invocable<EtaFn&, std::span<const double>>
std::vector<double> sample_labels_regression(EtaFn&& eta, const PointSet& points,
                                             double noise_sigma, std::uint64_t seed) {
  if (!(noise_sigma >= 0.0)) throw Error("noise sigma must be nonnegative");
  Rng rng = make_rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> labels(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    labels[i] = eta(points[i]);
    if (noise_sigma > 0.0) labels[i] += noise_sigma * z(rng);
  }
  return labels;
}

inline std::vector<double> sample_labels_regression(const EtaFunc& eta, const PointSet& points,
                                                    double noise_sigma, std::uint64_t seed) {
  return sample_labels_regression(
      [&eta](std::span<const double> x) { return eta_eval(eta, x); }, points, noise_sigma, seed);
}

inline std::vector<double> sample_labels(const WorldSpec& world, const PointSet& points,
                                         std::uint64_t seed) {
  auto eta = [&world](std::span<const double> x) { return world.eta_at(x); };
  if (world.task == Task::Classification) return sample_labels_classification(eta, points, seed);
  return sample_labels_regression(eta, points, world.noise_sigma, seed);
}

// ---------------------------------------------------------------------------
// Risk.
// ---------------------------------------------------------------------------

struct RiskEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_test = 0;
  std::size_t n_trials = 0;
};

// Mean and standard error of i.i.d. per-unit losses.
inline RiskEstimate summarize(std::span<const double> values) {
  RiskEstimate r;
  const std::size_t n = values.size();
  if (n == 0) return r;
  double sum = 0.0;
  for (double v : values) sum += v;
  r.mean = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.std_error = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
  }
  return r;
}

// Monte-Carlo estimate of E[(1 - |eta(X)|) / 2].
inline RiskEstimate bayes_risk_classification_mc(const WorldSpec& world, std::size_t n,
                                                 std::uint64_t seed) {
  if (world.task != Task::Classification) throw Error("not a classification world");
  world.validate();
  constexpr std::size_t kChunk = 1 << 16;
  std::vector<double> chunk_means;
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t done = 0;
  for (std::uint64_t c = 0; done < n; ++c) {
    const std::size_t m = std::min(kChunk, n - done);
    const PointSet pts = sample_features(world, m, derive_seed(seed, c));
    for (std::size_t i = 0; i < m; ++i) {
      const double v = 0.5 * (1.0 - std::abs(world.eta_at(pts[i])));
      sum += v;
      sum_sq += v * v;
    }
    done += m;
  }
  RiskEstimate r;
  r.n_test = n;
  r.n_trials = 1;
  r.mean = sum / static_cast<double>(n);
  const double var = std::max(0.0, sum_sq / static_cast<double>(n) - r.mean * r.mean);
  r.std_error = std::sqrt(var / static_cast<double>(n));
  return r;
}

namespace detail {

// Average of (1 - |eta|)/2 over one period, for the periodic and constant
// regression functions.
inline std::optional<double> period_mean_half_margin(const EtaFunc& eta) {
  switch (eta.kind) {
    case EtaKind::Cos5x:
    case EtaKind::Sinx:
      return 0.5 - 1.0 / std::numbers::pi;  // mean |cos| = 2/pi
    case EtaKind::PiecewisePeriodic:
      return 0.25;  // |eta| uniform on [0, 1]
    case EtaKind::Constant:
      return 0.5 * (1.0 - std::abs(eta.value));
    default:
      return std::nullopt;
  }
}

// Integral of (1 - |eta|)/2 * f over the real line for a 1-d world. Between
// the 1e-12 quantiles, capped at |x| = 4000, Gauss-Kronrod on panels of width
// 0.5. Only heavy tails reach the cap, and there the density is nearly flat
// over one period of eta, so each tail adds its exact mass times the period
// average (the midpoint 1/4 when eta is not periodic).
inline double bayes_risk_quadrature_1d(const WorldSpec& world) {
  const auto& dist = std::get<FeatureDist>(world.features);
  constexpr double kTail = 1e-12;
  constexpr double kCap = 4000.0;
  constexpr double kPanel = 0.5;
  double lo, hi, tail_mass;
  if (dist.kind == FeatureKind::Uniform) {
    lo = dist.a;
    hi = dist.b;
    tail_mass = 0.0;
  } else {
    lo = std::max(marginal_quantile(dist, kTail), -kCap);
    hi = std::min(marginal_quantile(dist, 1.0 - kTail), kCap);
    tail_mass = marginal_cdf(dist, lo) + (1.0 - marginal_cdf(dist, hi));
  }
  auto integrand = [&](double x) {
    const double xs[1] = {x};
    return 0.5 * (1.0 - std::abs(world.eta_at(xs))) * marginal_pdf(dist, x);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  const auto panels = static_cast<std::size_t>(std::ceil((hi - lo) / kPanel));
  double total = 0.0;
  for (std::size_t i = 0; i < panels; ++i) {
    const double a = lo + static_cast<double>(i) * kPanel;
    const double b = std::min(hi, a + kPanel);
    total += GK::integrate(integrand, a, b, 10, 1e-11);
  }
  return total + tail_mass * period_mean_half_margin(world.eta).value_or(0.25);
}

}  // namespace detail

// Bayes risk R* = E[(1 - |eta(X)|) / 2]. One-dimensional worlds use
// quadrature (absolute error below 1e-6, stderr reported as 0); cube families
// use their closed form; other worlds use Monte Carlo with `mc_draws` draws.
inline RiskEstimate bayes_risk_classification(const WorldSpec& world,
                                              std::size_t mc_draws = 10'000'000,
                                              std::uint64_t seed = 0x5eed) {
  if (world.task != Task::Classification) throw Error("not a classification world");
  world.validate();
  if (const auto* cubes = std::get_if<CubeFamily>(&world.features)) {
    return {0.5 * (1.0 - cubes->eta_amplitude), 0.0, 0, 0};
  }
  if (world.dim() == 1) return {detail::bayes_risk_quadrature_1d(world), 0.0, 0, 0};
  return bayes_risk_classification_mc(world, mc_draws, seed);
}

enum class ClsRiskEstimator {
  PlugIn,               // E[1(g != sign eta) |eta|] with the known eta
  EmpiricalMinusBayes,  // test error rate minus R*
};

// Per-point plug-in loss; points with eta = 0 contribute nothing.
inline double plugin_classification_loss(int label, double eta) {
  if (eta == 0.0) return 0.0;
  return label != sign_label(eta) ? std::abs(eta) : 0.0;
}

// Excess risk of a classifier (callable x -> +1/-1) on n_test fresh points.
template <class Classifier>
RiskEstimate excess_risk_classification(Classifier&& classify, const WorldSpec& world,
                                        std::size_t n_test, std::uint64_t seed,
                                        ClsRiskEstimator estimator = ClsRiskEstimator::PlugIn) {
  if (world.task != Task::Classification) throw Error("not a classification world");
  const PointSet test = sample_features(world, n_test, derive_seed(seed, 0));
  std::vector<double> losses(n_test);
  if (estimator == ClsRiskEstimator::PlugIn) {
    for (std::size_t i = 0; i < n_test; ++i)
      losses[i] = plugin_classification_loss(classify(test[i]), world.eta_at(test[i]));
    RiskEstimate r = summarize(losses);
    r.n_test = n_test;
    r.n_trials = 1;
    return r;
  }
  const std::vector<double> y = sample_labels(world, test, derive_seed(seed, 1));
  for (std::size_t i = 0; i < n_test; ++i)
    losses[i] = static_cast<double>(classify(test[i])) != y[i] ? 1.0 : 0.0;
  RiskEstimate r = summarize(losses);
  r.mean -= bayes_risk_classification(world).mean;
  r.n_test = n_test;
  r.n_trials = 1;
  return r;
}

// Excess risk E[(g(X) - eta(X))^2] of a regressor on n_test fresh points.
template <class Regressor>
RiskEstimate excess_risk_regression(Regressor&& regress, const WorldSpec& world,
                                    std::size_t n_test, std::uint64_t seed) {
  if (world.task != Task::Regression) throw Error("not a regression world");
  const PointSet test = sample_features(world, n_test, derive_seed(seed, 0));
  std::vector<double> losses(n_test);
  for (std::size_t i = 0; i < n_test; ++i) {
    const double diff = regress(test[i]) - world.eta_at(test[i]);
    losses[i] = diff * diff;
  }
  RiskEstimate r = summarize(losses);
  r.n_test = n_test;
  r.n_trials = 1;
  return r;
}

}  // namespace aknn
