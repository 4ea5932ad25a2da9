#include "zib/mab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace zib {

namespace {

double log_plus(double x) { return std::max(0.0, std::log(x)); }

void check_arm(int arm, int k) {
  if (arm < 0 || arm >= k) throw std::invalid_argument("arm index out of range");
}

void bump_p_hat(ArmState& a, int y) {
  a.count += 1;
  a.nonzero_count += y;
  a.p_hat += (static_cast<double>(y) - a.p_hat) / static_cast<double>(a.count);
}

}  // namespace

int argmax_tiebreak(const std::vector<double>& values, Rng& rng) {
  const double m = *std::max_element(values.begin(), values.end());
  int n_ties = 0;
  int pick = 0;
  for (int i = 0; i < static_cast<int>(values.size()); ++i) {
    if (values[i] == m) ++n_ties;
  }
  if (n_ties == 1) {
    for (int i = 0; i < static_cast<int>(values.size()); ++i) {
      if (values[i] == m) return i;
    }
  }
  auto j = rng.below(static_cast<std::uint64_t>(n_ties));
  for (int i = 0; i < static_cast<int>(values.size()); ++i) {
    if (values[i] == m && j-- == 0) {
      pick = i;
      break;
    }
  }
  return pick;
}

// ---------------------------------------------------------------- ZiUcbLight

ZiUcbLight::ZiUcbLight(int k, TailSpec tail, ConfidenceLevel delta)
    : MabPolicy(k), tail_(tail), delta_(delta), arms_(k) {
  if (tail.kind != TailSpec::Kind::SubWeibull) {
    throw std::invalid_argument("zi-ucb: sub-Weibull tail spec required");
  }
}

int ZiUcbLight::select(std::int64_t round, Rng& rng) {
  if (int f = forced_arm(round); f >= 0) return f;
  std::vector<double> idx(k_);
  for (int i = 0; i < k_; ++i) idx[i] = arms_[i].u_mu * arms_[i].u_p;
  return argmax_tiebreak(idx, rng);
}

void ZiUcbLight::update(int arm, double r, int y, std::int64_t /*round*/) {
  check_arm(arm, k_);
  ArmState& a = arms_[arm];
  bump_p_hat(a, y);
  a.u_p = a.p_hat + bernoulli_width(a.count, delta_);
  if (r != 0.0) {
    a.sum_nonzero += r;
    a.mu_hat = a.sum_nonzero / static_cast<double>(a.nonzero_count);
    // p_hat was refreshed above, so it is strictly positive here.
    a.u_mu = a.mu_hat + nonzero_width_estimated(a.count, a.p_hat, tail_, delta_);
  }
}

// ---------------------------------------------------------------- ZiUcbHeavy

ZiUcbHeavy::ZiUcbHeavy(int k, TailSpec tail) : MabPolicy(k), tail_(tail), arms_(k) {
  if (tail.kind != TailSpec::Kind::HeavyMoment) {
    throw std::invalid_argument("zi-ucb-heavy: heavy-moment tail spec required");
  }
}

int ZiUcbHeavy::select(std::int64_t round, Rng& rng) {
  if (int f = forced_arm(round); f >= 0) return f;
  std::vector<double> idx(k_);
  for (int i = 0; i < k_; ++i) idx[i] = arms_[i].u_mu * arms_[i].u_p;
  return argmax_tiebreak(idx, rng);
}

void ZiUcbHeavy::update(int arm, double r, int y, std::int64_t round) {
  check_arm(arm, k_);
  ArmState& a = arms_[arm];
  bump_p_hat(a, y);
  const double t = static_cast<double>(std::max<std::int64_t>(round, 2));
  a.u_p = a.p_hat + std::sqrt(2.0 * std::log(t * t) / static_cast<double>(a.count));
  if (r != 0.0) {
    const double level = heavy_trunc_level(a.nonzero_count, round, a.p_hat, a.count, tail_);
    if (std::abs(r) <= level) a.trimmed_sum += r;
    a.mu_hat = a.trimmed_sum / static_cast<double>(a.nonzero_count);
    a.u_mu = a.mu_hat + heavy_width(a.count, round, tail_);
  }
}

// ----------------------------------------------------------------------- TS

double ts_clip_inflation_literal(std::int64_t count, std::int64_t horizon) {
  const double x = 1.0 / std::sqrt(static_cast<double>(count) * static_cast<double>(horizon));
  return 1.0 + 1.0 / std::log1p(x);
}

ZiTs::ZiTs(int k, std::int64_t horizon, ZiTsParams params)
    : MabPolicy(k), horizon_(horizon), prm_(params), arms_(k) {
  if (prm_.gamma < 4.0) throw std::invalid_argument("zi-ts: gamma must be >= 4");
  if (!(prm_.rho > 0.5) || !(prm_.rho < 1.0)) {
    throw std::invalid_argument("zi-ts: rho must lie in (1/2, 1)");
  }
  for (auto& a : arms_) {
    a.ts_alpha = prm_.alpha0;
    a.ts_beta = prm_.beta0;
    a.ts_v = prm_.v0;
  }
}

int ZiTs::select(std::int64_t round, Rng& rng) {
  if (int f = forced_arm(round); f >= 0) return f;
  std::vector<double> idx(k_);
  for (int i = 0; i < k_; ++i) {
    const ArmState& a = arms_[i];
    const double p_tilde = sample_clipped_beta(a.ts_alpha, a.ts_beta, a.ts_clip_p, rng);
    // Before the first nonzero reward p_hat may be 0; max(p_hat, 1/c) is the
    // smallest value it can take once a nonzero is seen, keeping the
    // variance schedule continuous.
    const double c = static_cast<double>(a.count);
    const double var = 2.0 * prm_.sigma2 / (prm_.rho * c * std::max(a.p_hat, 1.0 / c));
    const double mu_tilde = sample_clipped_normal(a.ts_v, var, a.ts_clip_mu, rng);
    idx[i] = p_tilde * mu_tilde;
  }
  return argmax_tiebreak(idx, rng);
}

void ZiTs::update(int arm, double r, int y, std::int64_t /*round*/) {
  check_arm(arm, k_);
  ArmState& a = arms_[arm];
  a.ts_alpha += y;
  a.ts_beta += 1 - y;
  bump_p_hat(a, y);
  const double c = static_cast<double>(a.count);
  const double tk = static_cast<double>(horizon_) / (4.0 * c * static_cast<double>(k_));
  a.ts_clip_p = a.p_hat + std::sqrt(prm_.gamma / (4.0 * c) * log_plus(tk));
  if (r != 0.0) {
    a.sum_nonzero += r;
    a.mu_hat = a.sum_nonzero / static_cast<double>(a.nonzero_count);
    a.ts_v = a.mu_hat;
    const double infl = prm_.literal_inflation
                            ? ts_clip_inflation_literal(a.count, horizon_)
                            : 1.0;
    const double scale = 4.0 * infl * prm_.sigma2 / (a.p_hat * a.p_hat * c);
    a.ts_clip_mu = a.mu_hat + std::sqrt(prm_.gamma * scale) *
                                  std::sqrt(log_plus(scale * static_cast<double>(horizon_) /
                                                     static_cast<double>(k_)));
  }
}

// ----------------------------------------------------------------- NaiveUcb

NaiveUcb::NaiveUcb(int k, NaiveUcbParams params, ConfidenceLevel delta)
    : MabPolicy(k),
      prm_(std::move(params)),
      delta_(delta),
      count_(k, 0),
      nonzero_(k, 0),
      sum_(k, 0.0),
      sumsq_(k, 0.0),
      sum_nonzero_(k, 0.0),
      cached_proxy_(k, 0.0),
      cached_mu_(k, std::numeric_limits<double>::quiet_NaN()),
      cached_p_(k, std::numeric_limits<double>::quiet_NaN()) {
  if (prm_.mode == NaiveSizeMode::TrueProxy &&
      static_cast<int>(prm_.true_proxy.size()) != k) {
    throw std::invalid_argument("naive-ucb: TrueProxy mode needs one proxy per arm");
  }
}

std::string NaiveUcb::name() const {
  switch (prm_.mode) {
    case NaiveSizeMode::NonzeroParam: return "naive-nonzero-param";
    case NaiveSizeMode::EmpiricalVariance: return "naive-emp-var";
    case NaiveSizeMode::SolvedProxy: return "naive-solved";
    case NaiveSizeMode::TrueProxy: return "naive-true";
  }
  return "naive";
}

double NaiveUcb::current_size_sq(int arm) const {
  const double c2 = prm_.size_c * prm_.size_c;
  switch (prm_.mode) {
    case NaiveSizeMode::NonzeroParam:
      return c2;
    case NaiveSizeMode::TrueProxy:
      return prm_.true_proxy[arm];
    case NaiveSizeMode::EmpiricalVariance: {
      if (count_[arm] < 2) return 1e-12;
      const double n = static_cast<double>(count_[arm]);
      const double mean = sum_[arm] / n;
      return std::max((sumsq_[arm] - n * mean * mean) / (n - 1.0), 1e-12);
    }
    case NaiveSizeMode::SolvedProxy: {
      const double p_hat = static_cast<double>(nonzero_[arm]) /
                           static_cast<double>(std::max<std::int64_t>(count_[arm], 1));
      const double mu_hat = nonzero_[arm] > 0
                                ? sum_nonzero_[arm] / static_cast<double>(nonzero_[arm])
                                : 0.0;
      if (mu_hat == cached_mu_[arm] && p_hat == cached_p_[arm]) {
        return cached_proxy_[arm];
      }
      const auto base = prm_.family == NaiveFamily::SubGaussian
                            ? TailSpec::sub_weibull(2.0, prm_.size_c)
                            : TailSpec::sub_weibull(1.0, prm_.size_c);
      const double v = naive_size_proxy(mu_hat, p_hat, base).value;
      cached_mu_[arm] = mu_hat;
      cached_p_[arm] = p_hat;
      cached_proxy_[arm] = v;
      return v;
    }
  }
  return c2;
}

int NaiveUcb::select(std::int64_t round, Rng& rng) {
  if (int f = forced_arm(round); f >= 0) return f;
  const double l2 = std::log(2.0 / delta_.delta);
  std::vector<double> idx(k_);
  for (int i = 0; i < k_; ++i) {
    const double c = static_cast<double>(count_[i]);
    const double mean = sum_[i] / c;
    const double s2 = current_size_sq(i);
    if (prm_.family == NaiveFamily::SubGaussian) {
      idx[i] = mean + std::sqrt(2.0 * s2 * l2 / c);
    } else {
      const double a = std::sqrt(s2);
      idx[i] = mean + s2 * std::sqrt(2.0 * l2 / c) + a * l2 / c;
    }
  }
  return argmax_tiebreak(idx, rng);
}

void NaiveUcb::update(int arm, double r, int y, std::int64_t /*round*/) {
  check_arm(arm, k_);
  count_[arm] += 1;
  sum_[arm] += r;
  sumsq_[arm] += r * r;
  if (y) {
    nonzero_[arm] += 1;
    sum_nonzero_[arm] += r;
  }
}

// ----------------------------------------------------------------- DirectTs

DirectTs::DirectTs(int k, std::int64_t horizon, double gamma, double rho)
    : MabPolicy(k),
      horizon_(horizon),
      gamma_(gamma),
      rho_(rho),
      count_(k, 0),
      sum_(k, 0.0),
      sumsq_(k, 0.0),
      clip_(k, 1.0) {}

int DirectTs::select(std::int64_t round, Rng& rng) {
  if (int f = forced_arm(round); f >= 0) return f;
  std::vector<double> idx(k_);
  for (int i = 0; i < k_; ++i) {
    const double c = static_cast<double>(count_[i]);
    const double mean = sum_[i] / c;
    double var = count_[i] > 1 ? (sumsq_[i] - c * mean * mean) / (c - 1.0) : 1.0;
    var = std::max(var, 1e-12);
    idx[i] = sample_clipped_normal(mean, var / (rho_ * c), clip_[i], rng);
  }
  return argmax_tiebreak(idx, rng);
}

void DirectTs::update(int arm, double r, int /*y*/, std::int64_t /*round*/) {
  check_arm(arm, k_);
  count_[arm] += 1;
  sum_[arm] += r;
  sumsq_[arm] += r * r;
  const double c = static_cast<double>(count_[arm]);
  const double mean = sum_[arm] / c;
  const double tk = static_cast<double>(horizon_) / (4.0 * c * static_cast<double>(k_));
  clip_[arm] = mean + std::sqrt(gamma_ / (4.0 * c) * log_plus(tk));
}

// ----------------------------------------------------------- FixedArmPolicy

FixedArmPolicy::FixedArmPolicy(int k, int arm, std::string label)
    : MabPolicy(k), arm_(arm), label_(std::move(label)) {
  check_arm(arm, k);
}

int FixedArmPolicy::select(std::int64_t /*round*/, Rng& /*rng*/) {
  // Reference policy: no forced initialization, so that handing it the best
  // arm yields an exactly-zero regret trace.
  return arm_;
}

}  // namespace zib
