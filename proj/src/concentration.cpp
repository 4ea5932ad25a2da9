#include "zib/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace zib {

namespace {

constexpr double kE = 2.718281828459045235360287;

double log_int_pow(double log_arg, double theta) {
  // (log x)^((1/theta) v 1), log_arg = log x already positive.
  return std::pow(log_arg, std::max(1.0 / theta, 1.0));
}

}  // namespace

TailSpec TailSpec::sub_weibull(double theta, double size_c) {
  if (!(theta > 0.0) || !(size_c > 0.0)) {
    throw std::invalid_argument("sub-Weibull spec requires theta > 0 and C > 0");
  }
  TailSpec t;
  t.kind = Kind::SubWeibull;
  t.theta = theta;
  t.size_c = size_c;
  return t;
}

TailSpec TailSpec::heavy(double eps, double moment_m) {
  if (!(eps > 0.0) || eps > 1.0 || !(moment_m > 0.0)) {
    throw std::invalid_argument("heavy spec requires eps in (0,1] and M > 0");
  }
  TailSpec t;
  t.kind = Kind::HeavyMoment;
  t.eps = eps;
  t.moment_m = moment_m;
  return t;
}

ConfidenceLevel::ConfidenceLevel(double d) : delta(d) {
  if (!(d > 0.0) || !(d < 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1)");
  }
}

std::pair<double, double> subweibull_constants(double theta, double size_c) {
  if (!(theta > 0.0) || !(size_c > 0.0)) {
    throw std::invalid_argument("subweibull_constants: theta and C must be positive");
  }
  double d = 0.0, e = 0.0;
  if (theta < 1.0) {
    d = std::max(std::sqrt(2.0), std::pow(2.0, 1.0 / theta)) * std::sqrt(8.0) *
        std::pow(kE, 3.0) * std::pow(2.0 * M_PI, 0.25) * std::exp(1.0 / 24.0) *
        std::pow(std::exp(2.0 / kE) / theta, 1.0 / theta);
    e = std::pow(2.0, 2.0 / theta - 0.5);
  } else if (theta < 2.0) {
    d = std::sqrt(3.0 / (2.0 * kE * kE)) *
        std::max(1.0 / size_c, std::pow(size_c, theta - 1.0));
    e = 1.0 / std::sqrt(6.0);
  } else {
    d = std::sqrt(17.0 / (6.0 * kE * kE)) *
        std::max(1.0 / size_c, std::pow(size_c, theta / 2.0 - 1.0));
    e = 0.0;
  }
  return {d, e};
}

double bernoulli_width(std::int64_t n, ConfidenceLevel delta) {
  if (n < 1) throw std::invalid_argument("bernoulli_width: n must be >= 1");
  return std::sqrt(std::log(2.0 / delta.delta) / (2.0 * static_cast<double>(n)));
}

double nonzero_width_estimated(std::int64_t n, double p_hat,
                               const TailSpec& tail, ConfidenceLevel delta) {
  if (tail.kind != TailSpec::Kind::SubWeibull) {
    throw std::invalid_argument("nonzero_width_estimated: sub-Weibull tail required");
  }
  if (n < 1) throw std::invalid_argument("nonzero_width_estimated: n must be >= 1");
  if (!(p_hat > 0.0)) {
    // The light-tailed policy only calls this after a nonzero reward, so
    // p_hat >= 1/n; a zero here is a caller bug, not a data condition.
    throw std::invalid_argument("nonzero_width_estimated: p_hat must be positive");
  }
  const auto [d, e] = subweibull_constants(tail.theta, tail.size_c);
  const double l4 = std::log(4.0 / delta.delta);
  const double half = static_cast<double>(n) * p_hat / 2.0;
  return 2.0 * kE * d * tail.size_c *
         (std::sqrt(l4 / half) + e * log_int_pow(l4, tail.theta) / half);
}

std::int64_t oracle_validity_threshold(double p_true, ConfidenceLevel delta) {
  return static_cast<std::int64_t>(
      std::ceil(4.0 * std::log(2.0 / delta.delta) / (p_true * p_true)));
}

double nonzero_width_oracle(std::int64_t n, double p_true, const TailSpec& tail,
                            ConfidenceLevel delta) {
  if (!(p_true > 0.0) || p_true > 1.0) {
    throw std::invalid_argument("nonzero_width_oracle: p must lie in (0, 1]");
  }
  if (n < oracle_validity_threshold(p_true, delta)) {
    throw std::domain_error(
        "nonzero_width_oracle: n below the validity threshold 4 log(2/delta)/p^2");
  }
  return nonzero_width_estimated(n, p_true, tail, delta);
}

double product_ucb(double x_bar, double y_bar, double u_x, double u_y) {
  return (x_bar + u_x) * (y_bar + u_y);
}

double heavy_g(double p, double eps) {
  if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("heavy_g: p must lie in (0, 1]");
  if (!(eps > 0.0) || eps > 1.0) throw std::invalid_argument("heavy_g: eps must lie in (0, 1]");
  const double q = eps / (1.0 + eps);
  return std::pow(p, -q) * (1.0 + eps) * std::pow(2.0, q) + 4.0 / (3.0 * p) +
         2.0 / std::sqrt(p);
}

double heavy_trunc_level(std::int64_t /*nonzero_index*/, std::int64_t round_index,
                         double p_hat, std::int64_t count, const TailSpec& tail) {
  if (tail.kind != TailSpec::Kind::HeavyMoment) {
    throw std::invalid_argument("heavy_trunc_level: heavy-moment tail required");
  }
  if (count < 1) throw std::invalid_argument("heavy_trunc_level: count must be >= 1");
  const double l = static_cast<double>(std::max<std::int64_t>(round_index, 2));
  const double q = tail.eps / (1.0 + tail.eps);
  return heavy_g(p_hat, tail.eps) * std::pow(tail.moment_m, 1.0 / (1.0 + tail.eps)) *
         std::pow(std::log(l * l) / static_cast<double>(count), q);
}

double heavy_trunc_level_analytic(std::int64_t nonzero_index,
                                  ConfidenceLevel delta, const TailSpec& tail) {
  if (tail.kind != TailSpec::Kind::HeavyMoment) {
    throw std::invalid_argument("heavy_trunc_level_analytic: heavy-moment tail required");
  }
  if (nonzero_index < 1) {
    throw std::invalid_argument("heavy_trunc_level_analytic: index must be >= 1");
  }
  return std::pow(static_cast<double>(nonzero_index) * tail.moment_m /
                      std::log(2.0 / delta.delta),
                  1.0 / (1.0 + tail.eps));
}

double heavy_width(std::int64_t count, std::int64_t round_index,
                   const TailSpec& tail) {
  if (tail.kind != TailSpec::Kind::HeavyMoment) {
    throw std::invalid_argument("heavy_width: heavy-moment tail required");
  }
  if (count < 1) throw std::invalid_argument("heavy_width: count must be >= 1");
  const double t = static_cast<double>(std::max<std::int64_t>(round_index, 2));
  const double q = tail.eps / (1.0 + tail.eps);
  return std::pow(tail.moment_m, 1.0 / (1.0 + tail.eps)) *
         std::pow(32.0 * std::log(t) / static_cast<double>(count), q);
}

double heavy_margin_analytic(std::int64_t n, double p_true, const TailSpec& tail,
                             ConfidenceLevel delta) {
  if (tail.kind != TailSpec::Kind::HeavyMoment) {
    throw std::invalid_argument("heavy_margin_analytic: heavy-moment tail required");
  }
  const double q = tail.eps / (1.0 + tail.eps);
  return heavy_g(p_true, tail.eps) *
         std::pow(tail.moment_m, 1.0 / (1.0 + tail.eps)) *
         std::pow(std::log(2.0 / delta.delta) / static_cast<double>(n), q);
}

double size_proxy_objective(double s, double mu_hat, double p_hat, double c2) {
  // (2/s^2)[ -s mu p + log(1 - p + p e^g) ], g = s mu + s^2 c2 / 2.
  // Evaluated via expm1/log1p; for large g the log switches to
  // g + log p + log1p((1-p) e^-g / p) to avoid overflow.
  const double g = s * mu_hat + s * s * c2 / 2.0;
  double lse;
  if (g > 30.0) {
    lse = g + std::log(p_hat) + std::log1p((1.0 - p_hat) * std::exp(-g) / p_hat);
  } else {
    lse = std::log1p(p_hat * std::expm1(g));
  }
  return (2.0 / (s * s)) * (lse - s * mu_hat * p_hat);
}

namespace {

// Maximize size_proxy_objective over s of one sign: coarse log-spaced scan,
// then golden-section refinement of the best bracket.
SizeProxyResult maximize_one_sign(double sign, double mu, double p, double c2) {
  constexpr double kLogLo = -6.0 * 2.302585092994046;  // ln 1e-6
  constexpr double kLogHi = 4.0 * 2.302585092994046;   // ln 1e4
  constexpr int kScan = 256;

  auto eval = [&](double ln_s) {
    return size_proxy_objective(sign * std::exp(ln_s), mu, p, c2);
  };

  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  std::vector<double> vals(kScan);
  for (int i = 0; i < kScan; ++i) {
    const double ln_s = kLogLo + (kLogHi - kLogLo) * i / (kScan - 1);
    vals[i] = eval(ln_s);
    if (vals[i] > best_val) {
      best_val = vals[i];
      best = i;
    }
  }
  const double step = (kLogHi - kLogLo) / (kScan - 1);
  double a = kLogLo + step * std::max(best - 1, 0);
  double b = kLogLo + step * std::min(best + 1, kScan - 1);

  const double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = eval(x1), f2 = eval(x2);
  for (int it = 0; it < 100 && (b - a) > 1e-12; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = eval(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = eval(x1);
    }
  }
  const double ln_s = 0.5 * (a + b);
  const double s = sign * std::exp(ln_s);
  double v = size_proxy_objective(s, mu, p, c2);
  if (best_val > v) {
    return {best_val, sign * std::exp(kLogLo + step * best)};
  }
  return {v, s};
}

}  // namespace

SizeProxyResult naive_size_proxy(double mu_hat, double p_hat,
                                 const TailSpec& base) {
  if (base.kind != TailSpec::Kind::SubWeibull ||
      (base.theta != 1.0 && base.theta != 2.0)) {
    throw std::invalid_argument(
        "naive_size_proxy: base must be sub-Weibull with theta in {1, 2}");
  }
  if (p_hat < 0.0 || p_hat > 1.0) {
    throw std::invalid_argument("naive_size_proxy: p_hat must lie in [0, 1]");
  }
  const double c2 = base.size_c * base.size_c;
  if (p_hat == 0.0) return {0.0, 0.0};
  if (p_hat == 1.0) {
    // Objective collapses to (2/s^2)(s^2 c2 / 2) = c2 for every s.
    return {c2, 1e-6};
  }
  SizeProxyResult pos = maximize_one_sign(+1.0, mu_hat, p_hat, c2);
  SizeProxyResult neg = maximize_one_sign(-1.0, mu_hat, p_hat, c2);
  SizeProxyResult r = pos.value >= neg.value ? pos : neg;
  if (base.theta == 1.0) r.value = std::max(r.value, c2);
  return r;
}

double size_proxy_grid_oracle(double mu_hat, double p_hat, const TailSpec& base,
                              double lo, double hi, int points) {
  const double c2 = base.size_c * base.size_c;
  if (p_hat == 0.0) return 0.0;
  if (p_hat == 1.0) return c2;
  const double llo = std::log(lo), lhi = std::log(hi);
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double s = std::exp(llo + (lhi - llo) * i / (points - 1));
    best = std::max(best, size_proxy_objective(s, mu_hat, p_hat, c2));
    best = std::max(best, size_proxy_objective(-s, mu_hat, p_hat, c2));
  }
  if (base.theta == 1.0) best = std::max(best, c2);
  return best;
}

double zi_subgaussian_size_param(double mu, double p, double sigma2) {
  if (!(p > 0.0) || p > 1.0) {
    throw std::invalid_argument("zi_subgaussian_size_param: p must lie in (0, 1]");
  }
  if (!(sigma2 > 0.0)) {
    throw std::invalid_argument("zi_subgaussian_size_param: sigma2 must be positive");
  }
  const double r = mu * p;
  const double a = mu - r;  // mu (1 - p)
  // E exp((R - r)^2 / C^2)
  //   = (1-p) exp(r^2/C^2) + p exp(a^2/(C^2 - 2 sigma2)) / sqrt(1 - 2 sigma2/C^2),
  // finite for C^2 > 2 sigma2 and decreasing in C^2.
  auto excess = [&](double c2) {
    const double t1 = (1.0 - p) * std::exp(std::min(r * r / c2, 700.0));
    const double t2 = p * std::exp(std::min(a * a / (c2 - 2.0 * sigma2), 700.0)) /
                      std::sqrt(1.0 - 2.0 * sigma2 / c2);
    return t1 + t2 - 2.0;
  };
  double lo = 2.0 * sigma2 * (1.0 + 1e-12), hi = 4.0 * sigma2;
  while (excess(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e300) return std::sqrt(hi);
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  return std::sqrt(hi);
}

}  // namespace zib
