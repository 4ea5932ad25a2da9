#pragma once

#include <cstdint>
#include <utility>

namespace zib {

// Tail description of the non-zero reward noise: either sub-Weibull(theta; C)
// with E exp(|eps|^theta / C^theta) <= 2, or a heavy-tail moment bound
// E|eps|^(1+eps_order) <= moment_m with eps_order in (0, 1].
struct TailSpec {
  enum class Kind { SubWeibull, HeavyMoment };
  Kind kind = Kind::SubWeibull;
  double theta = 2.0;     // sub-Weibull tail parameter
  double size_c = 1.0;    // sub-Weibull size parameter
  double eps = 1.0;       // heavy-tail moment order
  double moment_m = 1.0;  // heavy-tail centered moment bound

  static TailSpec sub_weibull(double theta, double size_c);
  static TailSpec heavy(double eps, double moment_m);
};

struct ConfidenceLevel {
  double delta;  // failure probability, in (0, 1)
  explicit ConfidenceLevel(double d);
};

// D(theta), E(theta) from the sharper sub-Weibull sample-mean concentration.
// Three branches: theta < 1, 1 <= theta < 2, theta >= 2. The size parameter
// enters D through C^-1 v C^(theta-1) (resp. C^(theta/2-1)) for theta >= 1.
std::pair<double, double> subweibull_constants(double theta, double size_c);

// Hoeffding width for the Bernoulli factor: sqrt(log(2/delta) / (2n)).
double bernoulli_width(std::int64_t n, ConfidenceLevel delta);

// Additive width of the observed-mean bound using the running estimate
// p_hat, as consumed by the light-tailed UCB policy:
//   2e D(theta) C ( sqrt(log(4/d) / (n p_hat / 2))
//                   + E(theta) log^((1/theta) v 1)(4/d) / (n p_hat / 2) ).
double nonzero_width_estimated(std::int64_t n, double p_hat,
                               const TailSpec& tail, ConfidenceLevel delta);

// Same closed form with the true p; valid for n >= 4 log(2/delta) / p^2
// (throws std::domain_error below that threshold). Coverage-test companion.
double nonzero_width_oracle(std::int64_t n, double p_true,
                            const TailSpec& tail, ConfidenceLevel delta);

// Smallest admissible n for nonzero_width_oracle at (p, delta).
std::int64_t oracle_validity_threshold(double p_true, ConfidenceLevel delta);

// The product bound: (x_bar + u_x) * (y_bar + u_y).
double product_ucb(double x_bar, double y_bar, double u_x, double u_y);

// g(p, eps) = p^(-eps/(1+eps)) (1+eps) 2^(eps/(1+eps)) + 4/(3p) + 2/sqrt(p).
double heavy_g(double p, double eps);

// Truncation threshold in the heavy-tailed policy's trimmed mean, algorithm
// form: g(p_hat, eps) M^(1/(1+eps)) (log l^2 / c)^(eps/(1+eps)). Frozen with
// the p_hat/count/round current at arrival. Rounds below 2 are floored to 2
// (log 1 = 0 would degenerate the threshold; the policy only reaches this
// after the forced pulls, so the floor is a totality device).
// The nonzero ordinal is accepted for interface parity with the analytic
// form; the algorithm form does not depend on it.
double heavy_trunc_level(std::int64_t nonzero_index, std::int64_t round_index,
                         double p_hat, std::int64_t count,
                         const TailSpec& tail);

// Analytic-form truncation threshold (j M / log(2/delta))^(1/(1+eps)), used
// by the coverage suite, with j the ordinal of the arriving nonzero sample.
double heavy_trunc_level_analytic(std::int64_t nonzero_index,
                                  ConfidenceLevel delta, const TailSpec& tail);

// Additive width of the trimmed-mean bound:
// M^(1/(1+eps)) (32 log t / c)^(eps/(1+eps)). Rounds floored to 2 as above.
double heavy_width(std::int64_t count, std::int64_t round_index,
                   const TailSpec& tail);

// Analytic heavy-tail margin g(p,eps) M^(1/(1+eps)) (log(2/d)/n)^(eps/(1+eps))
// for the lower-deviation coverage event.
double heavy_margin_analytic(std::int64_t n, double p_true,
                             const TailSpec& tail, ConfidenceLevel delta);

// MGF-matching value of the size-proxy objective at a given s:
//   (2/s^2) [ -s mu p + log(1 - p + p exp(s mu + s^2 C^2 / 2)) ].
double size_proxy_objective(double s, double mu_hat, double p_hat, double c2);

struct SizeProxyResult {
  double value = 0.0;      // tau^2 (or alpha^2 for the sub-exponential variant)
  double maximizer = 0.0;  // the s achieving it
};

// Sub-Gaussian variance proxy (theta = 2) or sub-exponential parameter
// (theta = 1) of the raw ZI reward, by maximizing the MGF-matching objective
// over s. Solved by a coarse log-scale scan on each sign of s followed by
// golden-section refinement over |s| in [1e-6, 1e4]. The sub-exponential
// variant returns max(lambda^2, sup).
SizeProxyResult naive_size_proxy(double mu_hat, double p_hat,
                                 const TailSpec& base);

// Grid oracle for the same maximization: s over +/- logspace(lo, hi, points).
// Test / CLI cross-check companion of naive_size_proxy.
double size_proxy_grid_oracle(double mu_hat, double p_hat, const TailSpec& base,
                              double lo = 1e-4, double hi = 1e3,
                              int points = 100000);

// True sub-Weibull size parameter of the raw ZI reward R = Y (mu + sigma Z),
// Z standard normal: the smallest C with E exp((R - mu p)^2 / C^2) <= 2,
// via the closed-form mixture expectation and bisection. This is the
// definition-level size parameter the naive bounds plug in when "the true
// size parameter" is taken in the E exp(|.|^2 / C^2) <= 2 convention.
double zi_subgaussian_size_param(double mu, double p, double sigma2);

}  // namespace zib
