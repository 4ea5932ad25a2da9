#include "zib/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "zib/csv.hpp"

namespace zib {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_num(const std::string& v, int line, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(line, "key '" + key + "' expects a number, got '" + v + "'");
  }
}

std::int64_t to_int(const std::string& v, int line, const std::string& key) {
  const double x = to_num(v, line, key);
  if (x != std::floor(x)) throw ConfigError(line, "key '" + key + "' expects an integer");
  return static_cast<std::int64_t>(x);
}

bool to_bool(const std::string& v, int line, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(line, "key '" + key + "' expects true/false");
}

std::vector<double> to_list(const std::string& v, int line, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_num(trim(item), line, key));
  if (out.empty()) throw ConfigError(line, "key '" + key + "' expects a comma list");
  return out;
}

struct Entry {
  std::string value;
  int line;
};
using Section = std::map<std::string, Entry>;

const std::set<std::string>& experiment_keys() {
  static const std::set<std::string> keys{"kind",        "horizon", "replications",
                                          "master_seed", "checkpoints", "full_trace"};
  return keys;
}

const std::set<std::string>& mab_env_keys() {
  static const std::set<std::string> keys{
      "arms",  "p_lo",        "p_hi",      "mu_lo",         "mu_hi", "noise",
      "sigma2", "rate",       "df",        "mix_weights",   "mix_means",
      "mix_variances"};
  return keys;
}

const std::set<std::string>& cb_env_keys() {
  static const std::set<std::string> keys{"arms", "dim", "sparsity", "link", "sigma2"};
  return keys;
}

const std::set<std::string>& bounds_keys() {
  static const std::set<std::string> keys{"mu", "sigma2", "p", "delta", "n_grid", "trials"};
  return keys;
}

const std::set<std::string>& coverage_keys() {
  static const std::set<std::string> keys{"suite", "mu",  "p",        "delta",
                                          "n",     "trials", "theta", "size_c",
                                          "eps",   "moment_m", "df"};
  return keys;
}

// Per-algorithm parameter whitelists; "label" is always allowed.
const std::map<std::string, std::set<std::string>>& policy_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"zi-ucb", {"theta", "size_c", "delta"}},
      {"zi-ucb-heavy", {"eps", "moment_m"}},
      {"zi-ts", {"gamma", "rho", "sigma2", "alpha0", "beta0", "v0", "clip_inflation"}},
      {"naive-ucb", {"mode", "family", "size_c", "delta"}},
      {"direct-ts", {"gamma", "rho"}},
      {"oracle", {}},
      {"zi-glm-ucb", {"lambda_v", "lambda_u", "delta", "sigma", "tau", "kappa_g", "kappa_h"}},
      {"zi-glm-ts", {"lambda_v", "lambda_u", "delta", "sigma", "tau", "kappa_g", "kappa_h"}},
      {"lin-ucb-misspecified", {"lambda_u", "delta", "sigma", "tau", "kappa_g"}},
      {"lin-ts-misspecified", {"lambda_u", "delta", "sigma", "tau"}},
      {"integrated-ucb", {"lambda_v", "lambda_u", "delta", "sigma", "tau"}},
  };
  return keys;
}

NoiseModel parse_noise(const Section& env, int env_line) {
  auto get = [&](const std::string& k) -> const Entry* {
    auto it = env.find(k);
    return it == env.end() ? nullptr : &it->second;
  };
  const std::string kind = get("noise") ? get("noise")->value : "gaussian";
  const int line = get("noise") ? get("noise")->line : env_line;
  if (kind == "gaussian") {
    return NoiseModel::gaussian(get("sigma2") ? to_num(get("sigma2")->value, get("sigma2")->line, "sigma2") : 1.0);
  }
  if (kind == "mixture") {
    std::vector<double> w{0.5, 0.5}, m{-1.0, 1.0}, v{0.5, 0.5};
    if (get("mix_weights")) w = to_list(get("mix_weights")->value, get("mix_weights")->line, "mix_weights");
    if (get("mix_means")) m = to_list(get("mix_means")->value, get("mix_means")->line, "mix_means");
    if (get("mix_variances")) v = to_list(get("mix_variances")->value, get("mix_variances")->line, "mix_variances");
    try {
      return NoiseModel::mixture(w, m, v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(line, e.what());
    }
  }
  if (kind == "exponential") {
    return NoiseModel::centered_exponential(get("rate") ? to_num(get("rate")->value, get("rate")->line, "rate") : 1.0);
  }
  if (kind == "student_t") {
    return NoiseModel::student_t(get("df") ? to_num(get("df")->value, get("df")->line, "df") : 3.0);
  }
  throw ConfigError(line, "unknown noise kind '" + kind + "'");
}

}  // namespace

std::vector<std::int64_t> parse_n_grid(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() != 4) {
    throw ConfigError(0, "n_grid expects lo:hi:log|lin:count, got '" + spec + "'");
  }
  std::int64_t lo, hi, count;
  try {
    lo = std::stoll(parts[0]);
    hi = std::stoll(parts[1]);
    count = std::stoll(parts[3]);
  } catch (const std::exception&) {
    throw ConfigError(0, "n_grid expects integer lo/hi/count in '" + spec + "'");
  }
  if (lo < 1 || hi < lo || count < 1) throw ConfigError(0, "n_grid needs 1 <= lo <= hi, count >= 1");
  const bool logspace = parts[2] == "log";
  if (!logspace && parts[2] != "lin") throw ConfigError(0, "n_grid scale must be log or lin");
  std::vector<std::int64_t> grid;
  for (std::int64_t i = 0; i < count; ++i) {
    double u = count == 1 ? 1.0 : static_cast<double>(i) / (count - 1);
    double val = logspace ? std::exp(std::log((double)lo) + u * (std::log((double)hi) - std::log((double)lo)))
                          : lo + u * (hi - lo);
    auto n = static_cast<std::int64_t>(std::llround(val));
    n = std::clamp(n, lo, hi);
    if (grid.empty() || n != grid.back()) grid.push_back(n);
  }
  return grid;
}

ExperimentConfig parse_config_text(const std::string& text) {
  Section experiment, env, bounds, coverage;
  std::vector<std::pair<Section, int>> policy_sections;
  Section* current = nullptr;
  int env_line = 0;

  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "unterminated section header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name == "experiment") current = &experiment;
      else if (name == "env") { current = &env; env_line = line_no; }
      else if (name == "policy") { policy_sections.push_back({{}, line_no}); current = &policy_sections.back().first; }
      else if (name == "bounds") current = &bounds;
      else if (name == "coverage") current = &coverage;
      else throw ConfigError(line_no, "unknown section [" + name + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(line_no, "empty key");
    if (value.empty()) throw ConfigError(line_no, "key '" + key + "' has no value");
    if (current == nullptr) throw ConfigError(line_no, "key '" + key + "' outside any section");
    if (current->count(key)) throw ConfigError(line_no, "duplicate key '" + key + "'");
    (*current)[key] = {value, line_no};
  }

  ExperimentConfig cfg;

  // [experiment]
  for (const auto& [k, v] : experiment) {
    if (!experiment_keys().count(k)) throw ConfigError(v.line, "unknown key '" + k + "' in [experiment]");
  }
  auto exp_get = [&](const std::string& k) -> const Entry* {
    auto it = experiment.find(k);
    return it == experiment.end() ? nullptr : &it->second;
  };
  const std::string kind = exp_get("kind") ? exp_get("kind")->value : "mab";
  if (kind == "mab") cfg.kind = ExperimentKind::Mab;
  else if (kind == "contextual") cfg.kind = ExperimentKind::Contextual;
  else if (kind == "bounds") cfg.kind = ExperimentKind::Bounds;
  else if (kind == "coverage") cfg.kind = ExperimentKind::Coverage;
  else throw ConfigError(exp_get("kind")->line, "unknown experiment kind '" + kind + "'");
  if (exp_get("horizon")) cfg.horizon = to_int(exp_get("horizon")->value, exp_get("horizon")->line, "horizon");
  if (exp_get("replications")) cfg.replications = static_cast<int>(to_int(exp_get("replications")->value, exp_get("replications")->line, "replications"));
  if (exp_get("master_seed")) cfg.master_seed = static_cast<std::uint64_t>(to_int(exp_get("master_seed")->value, exp_get("master_seed")->line, "master_seed"));
  if (exp_get("checkpoints")) cfg.checkpoints = static_cast<int>(to_int(exp_get("checkpoints")->value, exp_get("checkpoints")->line, "checkpoints"));
  if (exp_get("full_trace")) cfg.full_trace = to_bool(exp_get("full_trace")->value, exp_get("full_trace")->line, "full_trace");
  if (cfg.full_trace) cfg.checkpoints = static_cast<int>(std::min<std::int64_t>(cfg.horizon, 1000000000));

  // [env]
  if (cfg.kind == ExperimentKind::Mab) {
    for (const auto& [k, v] : env) {
      if (!mab_env_keys().count(k)) throw ConfigError(v.line, "unknown key '" + k + "' in [env]");
    }
    auto get = [&](const std::string& k) -> const Entry* {
      auto it = env.find(k);
      return it == env.end() ? nullptr : &it->second;
    };
    if (get("arms")) cfg.mab_env.k = static_cast<int>(to_int(get("arms")->value, get("arms")->line, "arms"));
    if (get("p_lo")) cfg.mab_env.p_lo = to_num(get("p_lo")->value, get("p_lo")->line, "p_lo");
    if (get("p_hi")) cfg.mab_env.p_hi = to_num(get("p_hi")->value, get("p_hi")->line, "p_hi");
    if (get("mu_lo")) cfg.mab_env.mu_lo = to_num(get("mu_lo")->value, get("mu_lo")->line, "mu_lo");
    if (get("mu_hi")) cfg.mab_env.mu_hi = to_num(get("mu_hi")->value, get("mu_hi")->line, "mu_hi");
    cfg.mab_env.noise = parse_noise(env, env_line);
  } else if (cfg.kind == ExperimentKind::Contextual) {
    for (const auto& [k, v] : env) {
      if (!cb_env_keys().count(k)) throw ConfigError(v.line, "unknown key '" + k + "' in [env]");
    }
    auto get = [&](const std::string& k) -> const Entry* {
      auto it = env.find(k);
      return it == env.end() ? nullptr : &it->second;
    };
    if (get("arms")) cfg.cb_env.k = static_cast<int>(to_int(get("arms")->value, get("arms")->line, "arms"));
    if (get("dim")) cfg.cb_env.d = static_cast<int>(to_int(get("dim")->value, get("dim")->line, "dim"));
    if (get("sparsity")) cfg.cb_env.sparsity = static_cast<int>(to_int(get("sparsity")->value, get("sparsity")->line, "sparsity"));
    if (get("link")) cfg.cb_env.link_h = get("link")->value;
    cfg.cb_env.noise = NoiseModel::gaussian(get("sigma2") ? to_num(get("sigma2")->value, get("sigma2")->line, "sigma2") : 1.0);
  }

  // [policy] blocks
  for (auto& [sec, line] : policy_sections) {
    auto algo_it = sec.find("algo");
    if (algo_it == sec.end()) throw ConfigError(line, "[policy] block missing 'algo'");
    const std::string algo = algo_it->second.value;
    auto wl = policy_keys().find(algo);
    if (wl == policy_keys().end()) throw ConfigError(algo_it->second.line, "unknown algorithm '" + algo + "'");
    PolicySpec ps;
    ps.algo = algo;
    ps.label = algo;
    for (const auto& [k, v] : sec) {
      if (k == "algo") continue;
      if (k == "label") {
        ps.label = v.value;
        continue;
      }
      if (!wl->second.count(k)) {
        throw ConfigError(v.line, "unknown key '" + k + "' for algorithm '" + algo + "'");
      }
      ps.kv[k] = v.value;
    }
    cfg.policies.push_back(std::move(ps));
  }

  // [bounds]
  for (const auto& [k, v] : bounds) {
    if (!bounds_keys().count(k)) throw ConfigError(v.line, "unknown key '" + k + "' in [bounds]");
  }
  auto b_get = [&](const std::string& k) -> const Entry* {
    auto it = bounds.find(k);
    return it == bounds.end() ? nullptr : &it->second;
  };
  if (b_get("mu")) cfg.bounds.mu = to_num(b_get("mu")->value, b_get("mu")->line, "mu");
  if (b_get("sigma2")) cfg.bounds.sigma2 = to_num(b_get("sigma2")->value, b_get("sigma2")->line, "sigma2");
  if (b_get("p")) cfg.bounds.p = to_num(b_get("p")->value, b_get("p")->line, "p");
  if (b_get("delta")) cfg.bounds.delta = to_num(b_get("delta")->value, b_get("delta")->line, "delta");
  if (b_get("trials")) cfg.bounds.trials = static_cast<int>(to_int(b_get("trials")->value, b_get("trials")->line, "trials"));
  if (b_get("n_grid")) {
    try {
      cfg.bounds.n_grid = parse_n_grid(b_get("n_grid")->value);
    } catch (const ConfigError& e) {
      throw ConfigError(b_get("n_grid")->line, e.what());
    }
  }

  // [coverage]
  for (const auto& [k, v] : coverage) {
    if (!coverage_keys().count(k)) throw ConfigError(v.line, "unknown key '" + k + "' in [coverage]");
  }
  auto c_get = [&](const std::string& k) -> const Entry* {
    auto it = coverage.find(k);
    return it == coverage.end() ? nullptr : &it->second;
  };
  if (c_get("suite")) cfg.coverage.suite = c_get("suite")->value;
  if (c_get("mu")) cfg.coverage.mu = to_num(c_get("mu")->value, c_get("mu")->line, "mu");
  if (c_get("p")) cfg.coverage.p = to_num(c_get("p")->value, c_get("p")->line, "p");
  if (c_get("delta")) cfg.coverage.delta = to_num(c_get("delta")->value, c_get("delta")->line, "delta");
  if (c_get("n")) cfg.coverage.n = to_int(c_get("n")->value, c_get("n")->line, "n");
  if (c_get("trials")) cfg.coverage.trials = static_cast<int>(to_int(c_get("trials")->value, c_get("trials")->line, "trials"));
  if (c_get("theta")) cfg.coverage.theta = to_num(c_get("theta")->value, c_get("theta")->line, "theta");
  if (c_get("size_c")) cfg.coverage.size_c = to_num(c_get("size_c")->value, c_get("size_c")->line, "size_c");
  if (c_get("eps")) cfg.coverage.eps = to_num(c_get("eps")->value, c_get("eps")->line, "eps");
  if (c_get("moment_m")) cfg.coverage.moment_m = to_num(c_get("moment_m")->value, c_get("moment_m")->line, "moment_m");
  if (c_get("df")) cfg.coverage.student_df = to_num(c_get("df")->value, c_get("df")->line, "df");

  try {
    if (cfg.kind == ExperimentKind::Mab || cfg.kind == ExperimentKind::Contextual) {
      cfg.validate();
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(0, e.what());
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string render_manifest(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "[experiment]\n";
  out << "kind = "
      << (cfg.kind == ExperimentKind::Mab          ? "mab"
          : cfg.kind == ExperimentKind::Contextual ? "contextual"
          : cfg.kind == ExperimentKind::Bounds     ? "bounds"
                                                   : "coverage")
      << "\n";
  out << "horizon = " << cfg.horizon << "\n";
  out << "replications = " << cfg.replications << "\n";
  out << "master_seed = " << cfg.master_seed << "\n";
  out << "checkpoints = " << cfg.checkpoints << "\n";
  if (cfg.kind == ExperimentKind::Mab) {
    const auto& e = cfg.mab_env;
    out << "[env]\n";
    out << "arms = " << e.k << "\n";
    out << "p_lo = " << fmt17(e.p_lo) << "\np_hi = " << fmt17(e.p_hi) << "\n";
    out << "mu_lo = " << fmt17(e.mu_lo) << "\nmu_hi = " << fmt17(e.mu_hi) << "\n";
    switch (e.noise.kind) {
      case NoiseModel::Kind::Gaussian:
        out << "noise = gaussian\nsigma2 = " << fmt17(e.noise.sigma2) << "\n";
        break;
      case NoiseModel::Kind::GaussianMixture:
        out << "noise = mixture\n";
        break;
      case NoiseModel::Kind::CenteredExponential:
        out << "noise = exponential\nrate = " << fmt17(e.noise.rate) << "\n";
        break;
      case NoiseModel::Kind::StudentT:
        out << "noise = student_t\ndf = " << fmt17(e.noise.df) << "\n";
        break;
    }
  } else if (cfg.kind == ExperimentKind::Contextual) {
    const auto& e = cfg.cb_env;
    out << "[env]\n";
    out << "arms = " << e.k << "\ndim = " << e.d << "\nsparsity = " << e.sparsity << "\n";
    out << "link = " << e.link_h << "\nsigma2 = " << fmt17(e.noise.sigma2) << "\n";
  }
  for (const auto& p : cfg.policies) {
    out << "[policy]\n";
    out << "algo = " << p.algo << "\n";
    out << "label = " << p.label << "\n";
    for (const auto& [k, v] : p.kv) out << k << " = " << v << "\n";
  }
  return out.str();
}

}  // namespace zib
