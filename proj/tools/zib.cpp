// zib: zero-inflated bandit experiments.
//
// Subcommands:
//   run      --config FILE --out DIR [--seed N]   full experiment -> CSVs
//   bounds   --mu --sigma2 --p --delta --n-grid SPEC --out FILE
//   coverage --suite light|heavy [--out FILE]
//   oracle   --check size-proxy
//
// Exit codes: 0 success, 1 assertion/coverage failure, 2 usage/config error.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "zib/config.hpp"
#include "zib/csv.hpp"
#include "zib/harness.hpp"

namespace fs = std::filesystem;
using namespace zib;

namespace {

void write_traces(const ExperimentResult& result, const fs::path& dir) {
  std::ofstream trace(dir / "trace.csv");
  trace << "policy,replication,round,cumulative_regret\n";
  for (const auto& t : result.traces) {
    for (std::size_t i = 0; i < t.rounds.size(); ++i) {
      trace << t.policy << ',' << t.replication << ',' << t.rounds[i] << ','
            << fmt17(t.cum_regret[i]) << '\n';
    }
  }
  std::ofstream agg(dir / "aggregate.csv");
  agg << "policy,round,mean_regret,std_regret,n_reps\n";
  for (const auto& row : result.aggregate) {
    agg << row.policy << ',' << row.round << ',' << fmt17(row.mean_regret) << ','
        << fmt17(row.std_regret) << ',' << row.n_reps << '\n';
  }
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed_override) {
  ExperimentConfig cfg = parse_config_file(config_path);
  if (seed_override) cfg.master_seed = *seed_override;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  std::ofstream manifest(dir / "manifest.txt");
  manifest << render_manifest(cfg);
  manifest << "resolved_master_seed = " << cfg.master_seed << "\n";

  if (cfg.kind == ExperimentKind::Bounds) {
    if (cfg.bounds.n_grid.empty()) {
      throw ConfigError(0, "bounds experiment needs an n_grid");
    }
    const auto rows = bound_comparison(cfg.bounds, cfg.master_seed);
    std::ofstream out(dir / "bounds.csv");
    out << "n,method,value\n";
    for (const auto& r : rows) out << r.n << ',' << r.method << ',' << fmt17(r.value) << '\n';
    return 0;
  }
  if (cfg.kind == ExperimentKind::Coverage) {
    const auto rows = coverage_suite(cfg.coverage, cfg.master_seed);
    std::ofstream out(dir / "coverage.csv");
    out << "bound,empirical_violation_rate,delta,n,trials,validity,pass\n";
    bool all_pass = true;
    for (const auto& r : rows) {
      out << r.bound << ',' << fmt17(r.violation_rate) << ',' << fmt17(r.delta) << ','
          << r.n << ',' << r.trials << ',' << (r.validity_ok ? "ok" : "validity unmet")
          << ',' << (r.pass ? "pass" : "fail") << '\n';
      all_pass = all_pass && r.pass;
    }
    return all_pass ? 0 : 1;
  }

  const ExperimentResult result = run_experiment(cfg);
  write_traces(result, dir);
  return 0;
}

int cmd_bounds(const BoundsParams& prm, const std::string& out_file,
               std::uint64_t seed) {
  const auto rows = bound_comparison(prm, seed);
  std::ofstream out(out_file);
  if (!out) {
    std::cerr << "cannot open output file: " << out_file << "\n";
    return 2;
  }
  out << "n,method,value\n";
  for (const auto& r : rows) out << r.n << ',' << r.method << ',' << fmt17(r.value) << '\n';
  return 0;
}

int cmd_coverage(const CoverageParams& prm, const std::string& out_file,
                 std::uint64_t seed) {
  const auto rows = coverage_suite(prm, seed);
  std::ofstream out;
  if (!out_file.empty()) {
    out.open(out_file);
    out << "bound,empirical_violation_rate,delta,n,trials,validity,pass\n";
  }
  bool all_pass = true;
  std::printf("%-24s %-12s %-8s %-8s %-10s %s\n", "bound", "violations", "delta", "n",
              "validity", "result");
  for (const auto& r : rows) {
    std::printf("%-24s %-12.5f %-8.4g %-8lld %-10s %s\n", r.bound.c_str(),
                r.violation_rate, r.delta, static_cast<long long>(r.n),
                r.validity_ok ? "ok" : "unmet", r.pass ? "pass" : "FAIL");
    if (out.is_open()) {
      out << r.bound << ',' << fmt17(r.violation_rate) << ',' << fmt17(r.delta) << ','
          << r.n << ',' << r.trials << ',' << (r.validity_ok ? "ok" : "validity unmet")
          << ',' << (r.pass ? "pass" : "fail") << '\n';
    }
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 1;
}

int cmd_oracle_size_proxy(int count, std::uint64_t seed, const std::string& out_file) {
  Rng rng(derive_seed(seed, {0x0EAC1EULL}));
  double worst = 0.0;
  std::ofstream out;
  if (!out_file.empty()) {
    out.open(out_file);
    out << "mu,p,sigma2,solver,grid,rel_gap\n";
  }
  for (int i = 0; i < count; ++i) {
    const double mu = std::exp(rng.uniform(std::log(0.1), std::log(100.0)));
    const double p = rng.uniform(0.05, 1.0);
    const double sigma2 = rng.uniform(0.1, 10.0);
    const auto tail = TailSpec::sub_weibull(2.0, std::sqrt(sigma2));
    const double solver = naive_size_proxy(mu, p, tail).value;
    const double grid = size_proxy_grid_oracle(mu, p, tail);
    const double gap = std::abs(solver - grid) / std::max(1e-30, std::abs(grid));
    worst = std::max(worst, gap);
    if (out.is_open()) {
      out << fmt17(mu) << ',' << fmt17(p) << ',' << fmt17(sigma2) << ','
          << fmt17(solver) << ',' << fmt17(grid) << ',' << fmt17(gap) << '\n';
    }
  }
  std::printf("size-proxy solver vs %d-point grid: max relative gap %.3g over %d inputs\n",
              100000, worst, count);
  const bool ok = worst <= 1e-4;
  std::printf("%s\n", ok ? "pass" : "FAIL");
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zero-inflated bandit toolkit"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed_override;
  run->add_option("--config", config_path, "config file path")->required();
  run->add_option("--out", out_dir, "output directory")->required();
  run->add_option("--seed", seed_override, "override the config master_seed");

  // bounds
  auto* bounds = app.add_subcommand("bounds", "bound-comparison table");
  BoundsParams bprm;
  std::string n_grid_spec = "100:5000:log:20", bounds_out = "bounds.csv";
  std::uint64_t bounds_seed = 1;
  bounds->add_option("--mu", bprm.mu, "nonzero mean");
  bounds->add_option("--sigma2", bprm.sigma2, "nonzero noise variance");
  bounds->add_option("--p", bprm.p, "nonzero probability");
  bounds->add_option("--delta", bprm.delta, "failure probability");
  bounds->add_option("--n-grid", n_grid_spec, "lo:hi:log|lin:count");
  bounds->add_option("--trials", bprm.trials, "Monte-Carlo resamples per n");
  bounds->add_option("--seed", bounds_seed, "master seed");
  bounds->add_option("--out", bounds_out, "output CSV")->required();

  // coverage
  auto* coverage = app.add_subcommand("coverage", "Monte-Carlo coverage suite");
  CoverageParams cprm;
  std::string coverage_out;
  std::uint64_t coverage_seed = 1;
  coverage->add_option("--suite", cprm.suite, "light | heavy")->required();
  coverage->add_option("--mu", cprm.mu, "nonzero mean");
  coverage->add_option("--p", cprm.p, "nonzero probability");
  coverage->add_option("--delta", cprm.delta, "failure probability");
  coverage->add_option("--n", cprm.n, "sample size (0 = suite default)");
  coverage->add_option("--trials", cprm.trials, "Monte-Carlo trials");
  coverage->add_option("--seed", coverage_seed, "master seed");
  coverage->add_option("--out", coverage_out, "output CSV");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "cross-check numeric solvers");
  std::string check = "size-proxy";
  int oracle_count = 100;
  std::uint64_t oracle_seed = 1;
  std::string oracle_out;
  oracle->add_option("--check", check, "which solver to check (size-proxy)");
  oracle->add_option("--count", oracle_count, "number of random inputs");
  oracle->add_option("--seed", oracle_seed, "master seed");
  oracle->add_option("--out", oracle_out, "output CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, seed_override);
    if (bounds->parsed()) {
      bprm.n_grid = parse_n_grid(n_grid_spec);
      return cmd_bounds(bprm, bounds_out, bounds_seed);
    }
    if (coverage->parsed()) return cmd_coverage(cprm, coverage_out, coverage_seed);
    if (oracle->parsed()) {
      if (check != "size-proxy") {
        std::cerr << "unknown oracle check: " << check << "\n";
        return 2;
      }
      return cmd_oracle_size_proxy(oracle_count, oracle_seed, oracle_out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
