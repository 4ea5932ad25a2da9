#include "zib/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <thread>

#include "zib/concentration.hpp"

namespace zib {

namespace {

constexpr std::uint64_t kEnvStreamTag = 0xE27D1C3B9A5F4E01ULL;

struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

double PolicySpec::get_num(const std::string& key, double fallback) const {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing chars");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("policy '" + label + "': key '" + key +
                                "' is not a number: " + it->second);
  }
}

std::string PolicySpec::get_str(const std::string& key,
                                const std::string& fallback) const {
  auto it = kv.find(key);
  return it == kv.end() ? fallback : it->second;
}

std::uint64_t label_hash(const std::string& label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void ExperimentConfig::validate() const {
  if (replications < 1) throw std::invalid_argument("experiment: replications must be >= 1");
  if (horizon < 1) throw std::invalid_argument("experiment: horizon must be >= 1");
  if (checkpoints < 1) throw std::invalid_argument("experiment: checkpoints must be >= 1");
  if (kind == ExperimentKind::Mab) {
    mab_env.validate();
    if (horizon < mab_env.k) {
      throw std::invalid_argument("experiment: horizon must cover the K forced pulls");
    }
  } else if (kind == ExperimentKind::Contextual) {
    cb_env.validate();
    for (const auto& p : policies) {
      const auto tau = static_cast<std::int64_t>(p.get_num("tau", 0.0));
      if (horizon < tau) {
        throw std::invalid_argument("experiment: horizon must cover the random period tau");
      }
    }
  }
  if (kind == ExperimentKind::Mab || kind == ExperimentKind::Contextual) {
    if (policies.empty()) throw std::invalid_argument("experiment: at least one [policy] block required");
    for (std::size_t i = 0; i < policies.size(); ++i) {
      for (std::size_t j = i + 1; j < policies.size(); ++j) {
        if (policies[i].label == policies[j].label) {
          throw std::invalid_argument("experiment: duplicate policy label '" +
                                      policies[i].label + "'");
        }
      }
    }
  }
}

std::vector<std::int64_t> checkpoint_rounds(std::int64_t horizon, int count) {
  std::vector<std::int64_t> rounds;
  if (horizon <= count) {
    for (std::int64_t t = 1; t <= horizon; ++t) rounds.push_back(t);
    return rounds;
  }
  const double lo = 0.0, hi = std::log(static_cast<double>(horizon));
  std::int64_t prev = 0;
  for (int i = 0; i < count; ++i) {
    const double u = count == 1 ? hi : lo + (hi - lo) * i / (count - 1);
    auto t = static_cast<std::int64_t>(std::llround(std::exp(u)));
    t = std::clamp<std::int64_t>(t, 1, horizon);
    if (t > prev) {
      rounds.push_back(t);
      prev = t;
    }
  }
  if (rounds.back() != horizon) rounds.push_back(horizon);
  return rounds;
}

int worker_count(int replications) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("ZIB_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap >= 1) n = std::min(n, cap);
    } catch (const std::exception&) {
      // Malformed values fall back to hardware concurrency.
    }
  }
  return std::max(1, std::min(n, replications));
}

// -------------------------------------------------------- policy factories

std::unique_ptr<MabPolicy> make_mab_policy(const PolicySpec& spec,
                                           const MabEnv& env,
                                           std::int64_t horizon) {
  const int k = env.num_arms();
  const double default_delta = 4.0 / (static_cast<double>(horizon) * horizon);
  if (spec.algo == "zi-ucb") {
    const auto tail = TailSpec::sub_weibull(spec.get_num("theta", 2.0),
                                            spec.get_num("size_c", 1.0));
    return std::make_unique<ZiUcbLight>(
        k, tail, ConfidenceLevel(spec.get_num("delta", default_delta)));
  }
  if (spec.algo == "zi-ucb-heavy") {
    const auto tail = TailSpec::heavy(spec.get_num("eps", 1.0),
                                      spec.get_num("moment_m", 1.0));
    return std::make_unique<ZiUcbHeavy>(k, tail);
  }
  if (spec.algo == "zi-ts") {
    ZiTsParams p;
    p.gamma = spec.get_num("gamma", 4.0);
    p.rho = spec.get_num("rho", 0.75);
    p.sigma2 = spec.get_num("sigma2", 1.0);
    p.alpha0 = spec.get_num("alpha0", 1.0);
    p.beta0 = spec.get_num("beta0", 1.0);
    p.v0 = spec.get_num("v0", 0.0);
    p.literal_inflation = spec.get_str("clip_inflation", "proof") == "literal";
    return std::make_unique<ZiTs>(k, horizon, p);
  }
  if (spec.algo == "naive-ucb") {
    NaiveUcbParams p;
    const std::string mode = spec.get_str("mode", "emp_var");
    if (mode == "nonzero_param") p.mode = NaiveSizeMode::NonzeroParam;
    else if (mode == "emp_var") p.mode = NaiveSizeMode::EmpiricalVariance;
    else if (mode == "solved") p.mode = NaiveSizeMode::SolvedProxy;
    else if (mode == "true") p.mode = NaiveSizeMode::TrueProxy;
    else throw std::invalid_argument("naive-ucb: unknown mode '" + mode + "'");
    const std::string family = spec.get_str("family", "sub_gaussian");
    if (family == "sub_gaussian") p.family = NaiveFamily::SubGaussian;
    else if (family == "sub_exponential") p.family = NaiveFamily::SubExponential;
    else throw std::invalid_argument("naive-ucb: unknown family '" + family + "'");
    p.size_c = spec.get_num("size_c", std::sqrt(env.arm(0).noise.variance()));
    if (p.mode == NaiveSizeMode::TrueProxy) {
      // The environment discloses the true per-arm proxy, solved once.
      const double theta = p.family == NaiveFamily::SubGaussian ? 2.0 : 1.0;
      for (int a = 0; a < k; ++a) {
        p.true_proxy.push_back(
            naive_size_proxy(env.arm(a).mu, env.arm(a).p,
                             TailSpec::sub_weibull(theta, p.size_c))
                .value);
      }
    }
    return std::make_unique<NaiveUcb>(
        k, std::move(p), ConfidenceLevel(spec.get_num("delta", default_delta)));
  }
  if (spec.algo == "direct-ts") {
    return std::make_unique<DirectTs>(k, horizon, spec.get_num("gamma", 4.0),
                                      spec.get_num("rho", 0.75));
  }
  if (spec.algo == "oracle") {
    return std::make_unique<FixedArmPolicy>(k, env.best_arm());
  }
  throw std::invalid_argument("unknown mab policy algo '" + spec.algo + "'");
}

std::unique_ptr<CbPolicy> make_cb_policy(const PolicySpec& spec, const CbEnv& env,
                                         std::int64_t horizon) {
  GlmPolicyParams p;
  p.lambda_v = spec.get_num("lambda_v", 1.0);
  p.lambda_u = spec.get_num("lambda_u", 1.0);
  p.delta = spec.get_num("delta", 1.0 / static_cast<double>(horizon));
  p.sigma = spec.get_num("sigma", 1.0);
  p.tau = static_cast<std::int64_t>(spec.get_num("tau", 0.0));
  p.link = env.link();
  if (spec.has("kappa_g")) p.link.kappa_g = spec.get_num("kappa_g", p.link.kappa_g);
  if (spec.has("kappa_h")) p.link.kappa_h = spec.get_num("kappa_h", p.link.kappa_h);
  const int d = static_cast<int>(env.beta().size());
  const int q = static_cast<int>(env.theta().size());
  if (spec.algo == "zi-glm-ucb") return std::make_unique<ZiGlmUcb>(d, q, horizon, p);
  if (spec.algo == "zi-glm-ts") return std::make_unique<ZiGlmTs>(d, q, horizon, p);
  if (spec.algo == "lin-ucb-misspecified") {
    return std::make_unique<MisspecLinUcb>(d, horizon, p);
  }
  if (spec.algo == "lin-ts-misspecified") {
    return std::make_unique<MisspecLinTs>(d, env.num_arms(), horizon, p);
  }
  if (spec.algo == "integrated-ucb") {
    return std::make_unique<IntegratedUcb>(d, q, horizon, p);
  }
  if (spec.algo == "oracle") {
    return std::make_unique<CbOraclePolicy>(env.beta(), env.theta(), env.link().h);
  }
  throw std::invalid_argument("unknown contextual policy algo '" + spec.algo + "'");
}

// ------------------------------------------------------------- experiment

namespace {

RegretTrace run_mab_replication(const ExperimentConfig& cfg, int rep,
                                const PolicySpec& spec) {
  Rng env_rng(derive_seed(cfg.master_seed, {static_cast<std::uint64_t>(rep), kEnvStreamTag}));
  MabEnv env(cfg.mab_env, env_rng);
  auto policy = make_mab_policy(spec, env, cfg.horizon);
  const std::uint64_t lh = label_hash(spec.label);
  Rng policy_rng(derive_seed(cfg.master_seed, {static_cast<std::uint64_t>(rep), lh}));

  const auto checkpoints = checkpoint_rounds(cfg.horizon, cfg.checkpoints);
  RegretTrace trace;
  trace.policy = spec.label;
  trace.replication = rep;
  KahanSum regret;
  std::size_t next_cp = 0;
  for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
    const int a = policy->select(t, policy_rng);
    Rng reward_rng(derive_seed(cfg.master_seed,
                               {static_cast<std::uint64_t>(rep), lh,
                                static_cast<std::uint64_t>(t)}));
    const ZiDraw draw = env.realize(a, reward_rng);
    policy->update(a, draw.r, draw.y, t);
    regret.add(env.gap(a));
    if (next_cp < checkpoints.size() && t == checkpoints[next_cp]) {
      trace.rounds.push_back(t);
      trace.cum_regret.push_back(regret.sum);
      ++next_cp;
    }
  }
  return trace;
}

RegretTrace run_cb_replication(const ExperimentConfig& cfg, int rep,
                               const PolicySpec& spec) {
  Rng env_rng(derive_seed(cfg.master_seed, {static_cast<std::uint64_t>(rep), kEnvStreamTag}));
  CbEnv env(cfg.cb_env, env_rng);
  auto policy = make_cb_policy(spec, env, cfg.horizon);
  const std::uint64_t lh = label_hash(spec.label);
  Rng policy_rng(derive_seed(cfg.master_seed, {static_cast<std::uint64_t>(rep), lh}));

  const auto checkpoints = checkpoint_rounds(cfg.horizon, cfg.checkpoints);
  RegretTrace trace;
  trace.policy = spec.label;
  trace.replication = rep;
  KahanSum regret;
  std::size_t next_cp = 0;
  for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
    Rng round_rng(derive_seed(cfg.master_seed,
                              {static_cast<std::uint64_t>(rep), lh,
                               static_cast<std::uint64_t>(t)}));
    const CbRound round = env.step(round_rng);
    const int a = policy->select(t, round.arms, policy_rng);
    const ZiDraw draw = env.realize(round.arms[a], round_rng);
    policy->update(a, round.arms[a], draw.r, draw.y, t);
    regret.add(round.oracle_mean - round.mean_rewards[a]);
    if (next_cp < checkpoints.size() && t == checkpoints[next_cp]) {
      trace.rounds.push_back(t);
      trace.cum_regret.push_back(regret.sum);
      ++next_cp;
    }
  }
  return trace;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.kind != ExperimentKind::Mab && cfg.kind != ExperimentKind::Contextual) {
    throw std::invalid_argument("run_experiment: kind must be mab or contextual");
  }

  const int n_pol = static_cast<int>(cfg.policies.size());
  const int n_jobs = cfg.replications * n_pol;
  std::vector<RegretTrace> traces(n_jobs);

  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      const int job = next.fetch_add(1);
      if (job >= n_jobs) return;
      const int rep = job / n_pol;
      const int pol = job % n_pol;
      traces[job] = cfg.kind == ExperimentKind::Mab
                        ? run_mab_replication(cfg, rep, cfg.policies[pol])
                        : run_cb_replication(cfg, rep, cfg.policies[pol]);
    }
  };
  const int n_workers = worker_count(cfg.replications);
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ExperimentResult result;
  // Canonical order: policy list order, then replication.
  result.traces.reserve(n_jobs);
  for (int pol = 0; pol < n_pol; ++pol) {
    for (int rep = 0; rep < cfg.replications; ++rep) {
      result.traces.push_back(std::move(traces[rep * n_pol + pol]));
    }
  }

  const auto checkpoints = checkpoint_rounds(cfg.horizon, cfg.checkpoints);
  for (int pol = 0; pol < n_pol; ++pol) {
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      double mean = 0.0;
      for (int rep = 0; rep < cfg.replications; ++rep) {
        mean += result.traces[pol * cfg.replications + rep].cum_regret[c];
      }
      mean /= cfg.replications;
      double var = 0.0;
      for (int rep = 0; rep < cfg.replications; ++rep) {
        const double d = result.traces[pol * cfg.replications + rep].cum_regret[c] - mean;
        var += d * d;
      }
      const double stddev =
          cfg.replications > 1 ? std::sqrt(var / (cfg.replications - 1)) : 0.0;
      result.aggregate.push_back({cfg.policies[pol].label, checkpoints[c], mean,
                                  stddev, cfg.replications});
    }
  }
  return result;
}

// -------------------------------------------------------- bound comparison

std::vector<BoundsRow> bound_comparison(const BoundsParams& prm,
                                        std::uint64_t master_seed) {
  if (prm.n_grid.empty()) throw std::invalid_argument("bounds: empty n grid");
  const double sigma = std::sqrt(prm.sigma2);
  const ConfidenceLevel delta(prm.delta);
  const auto tail = TailSpec::sub_weibull(2.0, sigma);
  const double l2 = std::log(2.0 / prm.delta);
  const double r_true = prm.mu * prm.p;

  const std::int64_t max_n = *std::max_element(prm.n_grid.begin(), prm.n_grid.end());
  Rng stream(derive_seed(master_seed, {0xB0ULL}));
  std::vector<double> xs(max_n);
  std::vector<int> ys(max_n);
  for (std::int64_t i = 0; i < max_n; ++i) {
    ys[i] = stream.bernoulli(prm.p) ? 1 : 0;
    xs[i] = ys[i] ? prm.mu + sigma * stream.normal() : 0.0;
  }

  // True definition-level size parameter of R (shared across the grid).
  const double c_true = zi_subgaussian_size_param(prm.mu, prm.p, prm.sigma2);
  const double tau2_true_def = c_true * c_true;

  std::vector<BoundsRow> rows;
  for (const std::int64_t n : prm.n_grid) {
    double sum_r = 0.0, sumsq_r = 0.0, sum_x = 0.0;
    std::int64_t nz = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      sum_r += xs[i];
      sumsq_r += xs[i] * xs[i];
      if (ys[i]) {
        ++nz;
        sum_x += xs[i];
      }
    }
    const double nd = static_cast<double>(n);
    const double r_bar = sum_r / nd;
    const double p_hat = static_cast<double>(nz) / nd;
    const double x_bar = nz > 0 ? sum_x / static_cast<double>(nz) : 0.0;
    const double var_hat =
        n > 1 ? std::max((sumsq_r - nd * r_bar * r_bar) / (nd - 1.0), 0.0) : 0.0;

    const double u_x = nz > 0 ? nonzero_width_estimated(n, p_hat, tail, delta)
                              : std::numeric_limits<double>::infinity();
    rows.push_back({n, "product", product_ucb(x_bar, p_hat, u_x, bernoulli_width(n, delta))});
    rows.push_back({n, "naive_nonzero_param", r_bar + std::sqrt(2.0 * prm.sigma2 * l2 / nd)});
    rows.push_back({n, "naive_emp_var", r_bar + std::sqrt(2.0 * var_hat * l2 / nd)});
    const double tau2_solved =
        naive_size_proxy(x_bar, p_hat, TailSpec::sub_weibull(2.0, sigma)).value;
    rows.push_back({n, "naive_solved", r_bar + std::sqrt(2.0 * tau2_solved * l2 / nd)});
    rows.push_back({n, "naive_true", r_bar + std::sqrt(2.0 * tau2_true_def * l2 / nd)});

    // Tightest valid mean-centered bound: R_bar + the (1 - delta) quantile of
    // (mu p - R_bar') over fresh resamples.
    Rng mc(derive_seed(master_seed, {0x3CULL, static_cast<std::uint64_t>(n)}));
    std::vector<double> devs(prm.trials);
    for (int tr = 0; tr < prm.trials; ++tr) {
      double s = 0.0;
      for (std::int64_t i = 0; i < n; ++i) {
        if (mc.bernoulli(prm.p)) s += prm.mu + sigma * mc.normal();
      }
      devs[tr] = r_true - s / nd;
    }
    std::sort(devs.begin(), devs.end());
    const auto q_idx = static_cast<std::size_t>(
        std::min<double>(std::ceil((1.0 - prm.delta) * (prm.trials + 1)) - 1.0,
                         prm.trials - 1.0));
    rows.push_back({n, "monte_carlo_quantile", r_bar + devs[q_idx]});
  }
  return rows;
}

// ----------------------------------------------------------- coverage suite

std::vector<CoverageRow> coverage_suite(const CoverageParams& prm,
                                        std::uint64_t master_seed) {
  std::vector<CoverageRow> rows;
  const ConfidenceLevel delta(prm.delta);
  const double binom_se = 3.0 * std::sqrt(prm.delta * (1.0 - prm.delta) /
                                          static_cast<double>(prm.trials));

  if (prm.suite == "light") {
    const std::int64_t n = prm.n > 0 ? prm.n : 200;
    const auto tail = TailSpec::sub_weibull(prm.theta, prm.size_c);
    const bool valid = n >= oracle_validity_threshold(prm.p, delta);
    int violations = 0;
    if (valid) {
      Rng rng(derive_seed(master_seed, {0xC0DAULL}));
      const double r_true = prm.mu * prm.p;
      const double u_x = nonzero_width_oracle(n, prm.p, tail, delta);
      const double u_y = bernoulli_width(n, delta);
      for (int tr = 0; tr < prm.trials; ++tr) {
        double sum_x = 0.0;
        std::int64_t nz = 0, y_count = 0;
        for (std::int64_t i = 0; i < n; ++i) {
          if (rng.bernoulli(prm.p)) {
            ++y_count;
            ++nz;
            sum_x += prm.mu + prm.size_c * rng.normal();
          }
        }
        if (nz == 0) {
          ++violations;  // observed mean undefined; count conservatively
          continue;
        }
        const double x_bar = sum_x / static_cast<double>(nz);
        const double y_bar = static_cast<double>(y_count) / static_cast<double>(n);
        if (r_true > product_ucb(x_bar, y_bar, u_x, u_y)) ++violations;
      }
    }
    const double rate = static_cast<double>(violations) / prm.trials;
    rows.push_back({"product_light", rate, prm.delta, n, prm.trials, valid,
                    !valid || rate <= prm.delta + binom_se});
  } else if (prm.suite == "heavy") {
    const std::int64_t n = prm.n > 0 ? prm.n : 500;
    const auto tail = TailSpec::heavy(prm.eps, prm.moment_m);
    const bool valid = n >= oracle_validity_threshold(prm.p, delta);
    int violations = 0;
    if (valid) {
      Rng rng(derive_seed(master_seed, {0xC0DBULL}));
      const double margin = heavy_margin_analytic(n, prm.p, tail, delta);
      for (int tr = 0; tr < prm.trials; ++tr) {
        double trimmed = 0.0;
        std::int64_t nz = 0;
        for (std::int64_t i = 0; i < n; ++i) {
          if (rng.bernoulli(prm.p)) {
            ++nz;
            const double x = prm.mu + rng.student_t(prm.student_df);
            if (std::abs(x) <= heavy_trunc_level_analytic(nz, delta, tail)) {
              trimmed += x;
            }
          }
        }
        if (nz == 0) {
          ++violations;
          continue;
        }
        const double x_trim = trimmed / static_cast<double>(nz);
        if (prm.mu - x_trim >= margin) ++violations;
      }
    }
    const double rate = static_cast<double>(violations) / prm.trials;
    rows.push_back({"trimmed_mean_heavy", rate, prm.delta, n, prm.trials, valid,
                    !valid || rate <= prm.delta + binom_se});
  } else {
    throw std::invalid_argument("coverage: unknown suite '" + prm.suite + "'");
  }
  return rows;
}

}  // namespace zib
