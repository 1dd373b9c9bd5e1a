#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "aknn/error.hpp"
#include "aknn/spatial_index.hpp"
#include "aknn/theory.hpp"

namespace aknn {

struct FixedK {
  std::size_t k = 1;
};

// k = floor(K * n^q) + 1 where n counts training points within radius A.
struct AdaptiveK {
  double K = 1.0;
  double q = 0.8;
  double A = 1.0;
};

using KSelector = std::variant<FixedK, AdaptiveK>;

inline void validate(const KSelector& selector) {
  if (const auto* f = std::get_if<FixedK>(&selector)) {
    if (f->k == 0) throw Error("k must be positive");
    return;
  }
  const auto& a = std::get<AdaptiveK>(selector);
  if (!(a.K > 0.0) || !std::isfinite(a.K)) throw Error("K must be positive");
  if (!(a.q > 0.0 && a.q < 1.0)) throw Error("q must lie in (0, 1)");
  if (!(a.A > 0.0) || !std::isfinite(a.A)) throw Error("A must be positive");
}

struct Prediction {
  double value = 0.0;  // mean of the selected neighbor labels
  int label = 0;       // +1 / -1 for classification, 0 for regression
  std::size_t k_used = 0;
  std::optional<std::size_t> n_in_ball;
};

inline std::size_t adaptive_k(std::size_t n, double K, double q) {
  if (!(K > 0.0)) throw Error("K must be positive");
  if (!(q > 0.0 && q < 1.0)) throw Error("q must lie in (0, 1)");
  const double v = std::floor(K * std::pow(static_cast<double>(n), q));
  constexpr auto kMax = static_cast<double>(std::numeric_limits<std::size_t>::max() / 2);
  return static_cast<std::size_t>(std::min(v, kMax)) + 1;
}

// Ties go to +1.
constexpr int sign_label(double value) noexcept { return value >= 0.0 ? 1 : -1; }

// kNN predictor bound to an index and its labels. Labels are validated once
// at construction; the index and labels must outlive the predictor.
class KnnPredictor {
 public:
  enum class Task { Classification, Regression };

  KnnPredictor(const SpatialIndex& index, std::span<const double> labels, Task task)
      : index_(&index), labels_(labels), task_(task) {
    if (labels.size() != index.size())
      throw Error("label count " + std::to_string(labels.size()) +
                  " does not match training set size " + std::to_string(index.size()));
    if (task == Task::Classification) {
      for (double y : labels)
        if (y != 1.0 && y != -1.0) throw Error("classification labels must be +1 or -1");
    } else {
      for (double y : labels)
        if (!std::isfinite(y)) throw Error("regression labels must be finite");
    }
  }

  std::size_t select_k(const KSelector& selector, std::span<const double> x,
                       std::optional<std::size_t>* n_out = nullptr) const {
    const std::size_t n_train = index_->size();
    if (const auto* f = std::get_if<FixedK>(&selector)) {
      if (f->k == 0) throw Error("k must be positive");
      return std::min(f->k, n_train);
    }
    const auto& a = std::get<AdaptiveK>(selector);
    if (!(a.A > 0.0)) throw Error("A must be positive");
    const std::size_t n = index_->count_within(x, a.A);
    if (n_out) *n_out = n;
    return std::min(adaptive_k(n, a.K, a.q), n_train);
  }

  Prediction predict(const KSelector& selector, std::span<const double> x) const {
    Prediction p;
    p.k_used = select_k(selector, x, &p.n_in_ball);
    const NeighborSet nb = index_->knn(x, p.k_used);
    double sum = 0.0;
    for (std::size_t idx : nb.indices) sum += labels_[idx];
    p.value = sum / static_cast<double>(nb.size());
    if (task_ == Task::Classification) p.label = sign_label(p.value);
    return p;
  }

  const SpatialIndex& index() const noexcept { return *index_; }
  std::span<const double> labels() const noexcept { return labels_; }
  Task task() const noexcept { return task_; }

 private:
  const SpatialIndex* index_;
  std::span<const double> labels_;
  Task task_;
};

inline Prediction predict_regression(const SpatialIndex& index, std::span<const double> labels,
                                     const KSelector& selector, std::span<const double> x) {
  return KnnPredictor(index, labels, KnnPredictor::Task::Regression).predict(selector, x);
}

inline Prediction predict_classification(const SpatialIndex& index,
                                         std::span<const double> labels,
                                         const KSelector& selector,
                                         std::span<const double> x) {
  return KnnPredictor(index, labels, KnnPredictor::Task::Classification).predict(selector, x);
}

enum class Problem { Classification, Regression, RegressionUnbounded };

// Growth exponent e of the rate-optimal standard k ~ N^e.
inline double standard_k_exponent(Problem problem, const theory::RateParams& params) {
  params.validate();
  const double d = params.d;
  switch (problem) {
    case Problem::Classification: {
      const double a = params.alpha;
      const double b = params.beta;
      return b <= 2.0 / d ? 2.0 * b / (2.0 * b + a + 1.0) : 4.0 * b / (2.0 * a + b * (d + 4.0));
    }
    case Problem::Regression:
    case Problem::RegressionUnbounded: {
      const double b = problem == Problem::Regression ? params.beta : params.beta_prime;
      return b > 4.0 / d ? 4.0 / (d + 4.0) : b / (b + 1.0);
    }
  }
  throw Error("unknown problem kind");
}

// round(c * N^e), rounding half up, clamped to [1, N].
inline std::size_t standard_k_schedule(std::size_t N, Problem problem,
                                       const theory::RateParams& params, double c = 1.0) {
  if (N == 0) throw Error("sample size must be positive");
  if (!(c > 0.0) || !std::isfinite(c)) throw Error("schedule constant must be positive");
  const double e = standard_k_exponent(problem, params);
  const double k = std::floor(c * std::pow(static_cast<double>(N), e) + 0.5);
  return static_cast<std::size_t>(std::clamp(k, 1.0, static_cast<double>(N)));
}

}  // namespace aknn
