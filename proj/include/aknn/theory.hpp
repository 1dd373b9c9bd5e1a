#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "aknn/error.hpp"

// Closed-form convergence exponents. A rate `mu` means the excess risk decays
// as O(N^-mu); `log_factor` marks boundary cases that carry an extra ln N.
namespace aknn::theory {

struct Exponent {
  double value = 0.0;
  bool log_factor = false;
};

// Distribution parameters that drive the exponents.
//   alpha       margin exponent, P(0 < |eta| <= t) <= C t^alpha
//   beta        tail exponent,   P(f(X) <= t) <= C t^beta
//   beta_prime  strengthened tail exponent used when eta is unbounded
//   d           feature dimension
//   q           adaptive growth exponent, k = floor(K n^q) + 1
struct RateParams {
  double alpha = 1.0;
  double beta = 1.0;
  double beta_prime = 1.0;
  int d = 1;
  double q = 0.8;

  void validate() const;
};

namespace detail {

inline bool same(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error(what);
}

inline void check_alpha(double alpha) {
  require(std::isfinite(alpha) && alpha >= 0.0, "alpha must be finite and nonnegative");
}
inline void check_beta(double beta, const char* name = "beta") {
  require(std::isfinite(beta) && beta > 0.0, std::string(name) + " must be finite and positive");
}
inline void check_dim(int d) { require(d >= 1, "dimension must be at least 1"); }
inline void check_q(double q) { require(q > 0.0 && q < 1.0, "q must lie in (0, 1)"); }

// The tail-limited branch shared by the standard upper bound, the minimax
// bound and the adaptive rate at the optimal q.
inline double tail_limited_cls(double alpha, double beta, int d) {
  return 2.0 * beta * (alpha + 1.0) / (beta * d + 2.0 * (alpha + 2.0 * beta));
}

}  // namespace detail

inline void RateParams::validate() const {
  detail::check_alpha(alpha);
  detail::check_beta(beta);
  detail::check_beta(beta_prime, "beta_prime");
  detail::check_dim(d);
  detail::check_q(q);
}

inline double lambda(double q, int d) {
  detail::check_q(q);
  detail::check_dim(d);
  return std::min(0.5 * q, 2.0 * (1.0 - q) / d);
}

inline double q_star(int d) {
  detail::check_dim(d);
  return 4.0 / (d + 4.0);
}

inline Exponent standard_cls_rate(double alpha, double beta, int d) {
  detail::check_alpha(alpha);
  detail::check_beta(beta);
  detail::check_dim(d);
  const double variance_limited = beta * (alpha + 1.0) / (2.0 * beta + alpha + 1.0);
  return {std::min(variance_limited, detail::tail_limited_cls(alpha, beta, d)),
          detail::same(beta, 2.0 / d)};
}

inline Exponent adaptive_cls_rate(double alpha, double beta, int d, double q) {
  detail::check_alpha(alpha);
  detail::check_beta(beta);
  const double lam = lambda(q, d);
  return {std::min(lam * beta * (alpha + 1.0) / (lam * alpha + beta), beta),
          detail::same(beta, lam)};
}

// Lower bound over all classifiers; requires beta (2 alpha - d) <= 2 alpha.
inline Exponent minimax_cls_rate(double alpha, double beta, int d) {
  detail::check_alpha(alpha);
  detail::check_beta(beta);
  detail::check_dim(d);
  const double lhs = beta * (2.0 * alpha - d);
  if (lhs > 2.0 * alpha && !detail::same(lhs, 2.0 * alpha))
    throw Error("minimax condition beta*(2*alpha - d) <= 2*alpha violated");
  return {std::min(beta, detail::tail_limited_cls(alpha, beta, d)), false};
}

inline Exponent standard_reg_rate(double beta, int d) {
  detail::check_beta(beta);
  detail::check_dim(d);
  const double threshold = 4.0 / d;
  if (detail::same(beta, threshold)) return {beta / (beta + 1.0), true};
  return {beta > threshold ? 4.0 / (d + 4.0) : beta / (beta + 1.0), false};
}

inline Exponent standard_reg_rate_unbounded(double beta_prime, int d) {
  detail::check_beta(beta_prime, "beta_prime");
  return standard_reg_rate(beta_prime, d);
}

inline Exponent adaptive_reg_rate(double beta, int d, double q) {
  detail::check_beta(beta);
  const double two_lambda = 2.0 * lambda(q, d);
  return {std::min(beta, two_lambda), detail::same(beta, two_lambda)};
}

inline Exponent adaptive_reg_rate_unbounded(double beta_prime, int d, double q) {
  detail::check_beta(beta_prime, "beta_prime");
  return adaptive_reg_rate(beta_prime, d, q);
}

inline Exponent minimax_reg_rate(double beta, int d) {
  detail::check_beta(beta);
  detail::check_dim(d);
  return {std::min(4.0 / (d + 4.0), beta), false};
}

}  // namespace aknn::theory
