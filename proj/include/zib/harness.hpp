#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "zib/env.hpp"
#include "zib/mab.hpp"

namespace zib {

// One policy entry from a config: registered algorithm name, free-form
// parameters (validated against the algorithm's whitelist at parse time) and
// a unique label that keys the policy's rng stream and output rows.
struct PolicySpec {
  std::string algo;
  std::string label;
  std::map<std::string, std::string> kv;

  double get_num(const std::string& key, double fallback) const;
  std::string get_str(const std::string& key, const std::string& fallback) const;
  bool has(const std::string& key) const { return kv.count(key) > 0; }
};

enum class ExperimentKind { Mab, Contextual, Bounds, Coverage };

struct BoundsParams {
  double mu = 100.0;
  double sigma2 = 1.0;
  double p = 0.5;
  double delta = 0.05;
  std::vector<std::int64_t> n_grid;
  int trials = 10000;  // Monte-Carlo resamples per grid point
};

struct CoverageParams {
  std::string suite = "light";  // light | heavy
  double mu = 1.0;
  double p = 0.5;
  double delta = 0.05;
  std::int64_t n = 0;  // 0 -> suite default (200 light, 500 heavy)
  int trials = 10000;
  double theta = 2.0;    // light suite tail
  double size_c = 1.0;   // light suite size parameter
  double eps = 0.5;      // heavy suite moment order
  double moment_m = 1.7; // heavy suite moment bound (upper bound for t(3))
  double student_df = 3.0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Mab;
  MabEnvSpec mab_env;
  CbEnvSpec cb_env;
  std::vector<PolicySpec> policies;
  std::int64_t horizon = 1000;
  int replications = 1;
  std::uint64_t master_seed = 1;
  int checkpoints = 200;
  bool full_trace = false;
  BoundsParams bounds;
  CoverageParams coverage;
  void validate() const;
};

// Cumulative regret of one (policy, replication) at the checkpoint rounds.
struct RegretTrace {
  std::string policy;
  int replication = 0;
  std::vector<std::int64_t> rounds;
  std::vector<double> cum_regret;
};

struct AggregateRow {
  std::string policy;
  std::int64_t round;
  double mean_regret;
  double std_regret;
  int n_reps;
};

struct ExperimentResult {
  std::vector<RegretTrace> traces;   // ordered by (policy list order, replication)
  std::vector<AggregateRow> aggregate;
};

// Log-spaced checkpoint rounds in [1, horizon], deduplicated, horizon always
// included.
std::vector<std::int64_t> checkpoint_rounds(std::int64_t horizon, int count);

// Worker count: ZIB_THREADS caps it when set; otherwise hardware concurrency,
// never more than the replication count.
int worker_count(int replications);

// Run every policy against per-replication environment realizations.
// Determinism contract: the environment realization stream is keyed by
// (master_seed, replication); each policy's internal stream by
// (master_seed, replication, label-hash); the reward/context stream by
// (master_seed, replication, label-hash, round). Identical config and seed
// give identical results regardless of thread count; adding a policy leaves
// the other policies' traces unchanged.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct BoundsRow {
  std::int64_t n;
  std::string method;
  double value;
};

// Reproduces the bound-comparison table: the product bound and the naive
// single-sample bounds on one simulated stream, plus a Monte-Carlo quantile
// reference (the tightest valid mean-centered bound, estimated from fresh
// resamples per grid point).
std::vector<BoundsRow> bound_comparison(const BoundsParams& params,
                                        std::uint64_t master_seed);

struct CoverageRow {
  std::string bound;
  double violation_rate;
  double delta;
  std::int64_t n;
  int trials;
  bool validity_ok;  // precondition (Lemma threshold) satisfied
  bool pass;         // violation_rate <= delta + 3 SE, or validity unmet
};

// Monte-Carlo violation-rate estimation for the product bound (light suite)
// and the trimmed-mean lower deviation (heavy suite).
std::vector<CoverageRow> coverage_suite(const CoverageParams& params,
                                        std::uint64_t master_seed);

// Policy factories (exposed for tests).
std::unique_ptr<MabPolicy> make_mab_policy(const PolicySpec& spec,
                                           const MabEnv& env,
                                           std::int64_t horizon);
std::unique_ptr<CbPolicy> make_cb_policy(const PolicySpec& spec, const CbEnv& env,
                                         std::int64_t horizon);

// FNV-1a hash of the policy label; pinned because it keys the rng streams.
std::uint64_t label_hash(const std::string& label);

}  // namespace zib
