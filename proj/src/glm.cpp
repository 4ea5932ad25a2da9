#include "zib/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace zib {

namespace {
constexpr double kSqrt2Pi = 2.506628274631000502415765;
}

double link_identity(double z) { return z; }
double link_identity_dot(double /*z*/) { return 1.0; }

double link_probit(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double link_probit_dot(double z) { return std::exp(-0.5 * z * z) / kSqrt2Pi; }

double link_logit(double z) { return 1.0 / (1.0 + std::exp(-z)); }
double link_logit_dot(double z) {
  const double h = link_logit(z);
  return h * (1.0 - h);
}

LinkPair LinkPair::make(const std::string& g_name, const std::string& h_name) {
  LinkPair lp;
  lp.name_g = g_name;
  lp.name_h = h_name;
  if (g_name == "identity") {
    lp.g = link_identity;
    lp.g_dot = link_identity_dot;
    lp.kappa_g = 1.0;
  } else {
    throw std::invalid_argument("unknown nonzero link: " + g_name);
  }
  // kappa_h defaults: the derivative infimum over |z| <= 1 (unit features,
  // unit parameter ball).
  if (h_name == "probit") {
    lp.h = link_probit;
    lp.h_dot = link_probit_dot;
    lp.kappa_h = link_probit_dot(1.0);
  } else if (h_name == "logit") {
    lp.h = link_logit;
    lp.h_dot = link_logit_dot;
    lp.kappa_h = link_logit_dot(1.0);
  } else {
    throw std::invalid_argument("unknown gate link: " + h_name);
  }
  return lp;
}

// ------------------------------------------------------ estimating equation

FitResult fit_estimating_equation(const std::vector<Vec>& psis,
                                  const std::vector<double>& ys,
                                  double (*link)(double),
                                  double (*link_dot)(double), int dim,
                                  const Vec& warm_start) {
  FitResult res;
  res.point = Vec::Zero(dim);
  if (psis.empty()) return res;  // fitted stays false
  res.fitted = true;

  auto eq_residual = [&](const Vec& th) {
    Vec f = Vec::Zero(dim);
    for (std::size_t s = 0; s < psis.size(); ++s) {
      f += (ys[s] - link(psis[s].dot(th))) * psis[s];
    }
    return f;
  };
  auto project = [](Vec v) {
    const double n = v.norm();
    if (n > 1.0) v /= n;
    return v;
  };

  Vec th = warm_start.size() == dim ? project(warm_start) : Vec::Zero(dim);
  Vec f = eq_residual(th);
  double best_norm = f.norm();
  Vec best = th;

  constexpr int kMaxIter = 200;
  constexpr double kTol = 1e-8;
  for (int it = 0; it < kMaxIter && best_norm > kTol; ++it) {
    // Gauss-Newton direction on 0.5 ||F||^2: J = -sum w psi psi', w = link'.
    Mat j = Mat::Zero(dim, dim);
    for (std::size_t s = 0; s < psis.size(); ++s) {
      j += link_dot(psis[s].dot(th)) * (psis[s] * psis[s].transpose());
    }
    j.diagonal().array() += 1e-10;
    Vec step = j.ldlt().solve(f);

    double t = 1.0;
    bool improved = false;
    for (int bt = 0; bt < 40; ++bt) {
      Vec cand = project(th + t * step);
      const double n = eq_residual(cand).norm();
      if (n < best_norm) {
        th = cand;
        best_norm = n;
        best = cand;
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved) break;
    f = eq_residual(th);
  }
  res.point = best;
  res.residual_norm = best_norm;
  res.converged = best_norm <= kTol;
  return res;
}

// ------------------------------------------------------------- DesignMatrix

DesignMatrix::DesignMatrix(int dim, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("design matrix: lambda must be positive");
  a_ = lambda * Mat::Identity(dim, dim);
  refactor();
}

void DesignMatrix::refactor() {
  llt_.compute(a_);
  if (llt_.info() != Eigen::Success) {
    throw std::runtime_error("design matrix: Cholesky failed (ridge invariant broken)");
  }
  updates_since_refactor_ = 0;
}

void DesignMatrix::rank_one_update(const Vec& psi) {
  if (psi.size() != a_.rows()) throw std::invalid_argument("design matrix: dimension mismatch");
  a_.selfadjointView<Eigen::Lower>().rankUpdate(psi, 1.0);
  a_ = a_.selfadjointView<Eigen::Lower>();
  if (++updates_since_refactor_ >= 512) {
    refactor();
  } else {
    llt_.rankUpdate(psi, 1.0);
  }
}

double DesignMatrix::inv_norm(const Vec& z) const {
  // z' A^{-1} z = ||L^{-1} z||^2
  Vec w = llt_.matrixL().solve(z);
  return w.norm();
}

double DesignMatrix::norm(const Vec& z) const {
  return std::sqrt(z.dot(a_.selfadjointView<Eigen::Lower>() * z));
}

Vec DesignMatrix::solve(const Vec& b) const { return llt_.solve(b); }

Vec DesignMatrix::sample_gaussian(const Vec& mean, double rho, Rng& rng) const {
  Vec z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  // cov(L^{-T} z) = (L L')^{-1} = A^{-1}
  Vec w = llt_.matrixU().solve(z);
  return mean + rho * w;
}

// ----------------------------------------------------------------- GlmState

GlmState::GlmState(int d, int q, double lambda_v, double lambda_u)
    : v_mat(d, lambda_v), u_mat(q, lambda_u),
      beta_hat(Vec::Zero(d)), theta_hat(Vec::Zero(q)) {}

void GlmState::observe(const Vec& psi_x, const Vec& psi_y, double r, int y) {
  history_all.push_back({psi_y, static_cast<double>(y)});
  u_mat.rank_one_update(psi_y);
  if (r != 0.0) {
    history_nonzero.push_back({psi_x, r});
    v_mat.rank_one_update(psi_x);
  }
}

namespace {
FitResult refit(const std::vector<Observation>& hist, double (*link)(double),
                double (*link_dot)(double), int dim, const Vec& warm) {
  std::vector<Vec> psis;
  std::vector<double> vals;
  psis.reserve(hist.size());
  vals.reserve(hist.size());
  for (const auto& o : hist) {
    psis.push_back(o.psi);
    vals.push_back(o.value);
  }
  return fit_estimating_equation(psis, vals, link, link_dot, dim, warm);
}
}  // namespace

FitResult GlmState::refit_theta(const LinkPair& link) {
  FitResult r = refit(history_all, link.h, link.h_dot,
                      static_cast<int>(theta_hat.size()), theta_hat);
  theta_hat = r.point;
  theta_fitted = r.fitted;
  return r;
}

FitResult GlmState::refit_beta(const LinkPair& link) {
  FitResult r = refit(history_nonzero, link.g, link.g_dot,
                      static_cast<int>(beta_hat.size()), beta_hat);
  beta_hat = r.point;
  beta_fitted = r.fitted;
  return r;
}

// ------------------------------------------------------------ RadiusSchedule

double RadiusSchedule::rho_x(std::int64_t t) const {
  const double td = static_cast<double>(t);
  return sigma / kappa_g *
         std::sqrt(4.0 * std::log(1.0 / delta) +
                   d * std::log(1.0 + td / (lambda_v * d)));
}

double RadiusSchedule::rho_y(std::int64_t t) const {
  const double td = static_cast<double>(t);
  return 1.0 / kappa_h *
         std::sqrt(4.0 * std::log(1.0 / delta) +
                   q * std::log(1.0 + td / (lambda_u * q)));
}

double RadiusSchedule::varrho_x(std::int64_t /*t*/) const {
  return std::sqrt(d * std::log(1.0 / delta) * std::log(static_cast<double>(horizon)));
}

double RadiusSchedule::varrho_y(std::int64_t /*t*/) const {
  return std::sqrt(q * std::log(1.0 / delta) * std::log(static_cast<double>(horizon)));
}

// ------------------------------------------------------------------- scores

double ucb_score(const Vec& psi_x, const Vec& psi_y, const GlmState& state,
                 const RadiusSchedule& radii, std::int64_t t) {
  const double fx = psi_x.dot(state.beta_hat) + radii.rho_x(t) * state.v_mat.inv_norm(psi_x);
  const double fy = psi_y.dot(state.theta_hat) + radii.rho_y(t) * state.u_mat.inv_norm(psi_y);
  return fx * fy;
}

TsDraw ts_draw(const GlmState& state, const RadiusSchedule& radii,
               std::int64_t t, Rng& rng) {
  TsDraw d;
  d.beta_tilde = state.v_mat.sample_gaussian(state.beta_hat, radii.varrho_x(t), rng);
  d.theta_tilde = state.u_mat.sample_gaussian(state.theta_hat, radii.varrho_y(t), rng);
  return d;
}

double ts_score(const Vec& psi_x, const Vec& psi_y, const TsDraw& draw) {
  return psi_x.dot(draw.beta_tilde) * psi_y.dot(draw.theta_tilde);
}

double ts_sample_and_score(const Vec& psi_x, const Vec& psi_y,
                           const GlmState& state, const RadiusSchedule& radii,
                           std::int64_t t, Rng& rng) {
  return ts_score(psi_x, psi_y, ts_draw(state, radii, t, rng));
}

std::int64_t random_period_tau(int d, int q, double delta, double p_star,
                               double sigma_z2, double sigma_w2, double c1,
                               double c2, double c3, double c4) {
  if (d < 1 || q < 1 || !(delta > 0.0) || !(p_star > 0.0) || !(sigma_z2 > 0.0) ||
      !(sigma_w2 > 0.0)) {
    throw std::invalid_argument("random_period_tau: all parameters must be positive");
  }
  const double l = std::log(1.0 / delta);
  const double t1 =
      std::pow((c1 * std::sqrt(d / p_star) + c2 * std::sqrt(l / p_star)) / sigma_z2, 2.0) +
      2.0 / (p_star * sigma_z2);
  const double t2 = 4.0 * l / (p_star * p_star);
  const double t3 =
      std::pow((c3 * std::sqrt(static_cast<double>(q)) + c4 * std::sqrt(l)) / sigma_w2, 2.0) +
      2.0 / sigma_w2;
  return static_cast<std::int64_t>(std::ceil(std::max({t1, t2, t3})));
}

// ----------------------------------------------------------------- policies

ZiGlmUcb::ZiGlmUcb(int d, int q, std::int64_t horizon, GlmPolicyParams prm)
    : prm_(prm), state_(d, q, prm.lambda_v, prm.lambda_u) {
  radii_ = {d, q, prm.sigma, prm.link.kappa_g, prm.link.kappa_h,
            prm.lambda_v, prm.lambda_u, prm.delta, horizon};
}

int ZiGlmUcb::select(std::int64_t round, const std::vector<ArmFeatures>& arms,
                     Rng& rng) {
  if (round <= prm_.tau) return static_cast<int>(rng.below(arms.size()));
  double best = -std::numeric_limits<double>::infinity();
  int pick = 0;
  for (int a = 0; a < static_cast<int>(arms.size()); ++a) {
    const double s = ucb_score(arms[a].psi_x, arms[a].psi_y, state_, radii_, round);
    if (s > best) {
      best = s;
      pick = a;
    }
  }
  return pick;
}

void ZiGlmUcb::update(int /*arm*/, const ArmFeatures& feat, double r, int y,
                      std::int64_t /*round*/) {
  state_.observe(feat.psi_x, feat.psi_y, r, y);
  state_.refit_theta(prm_.link);
  if (r != 0.0) state_.refit_beta(prm_.link);
}

ZiGlmTs::ZiGlmTs(int d, int q, std::int64_t horizon, GlmPolicyParams prm)
    : prm_(prm), state_(d, q, prm.lambda_v, prm.lambda_u) {
  radii_ = {d, q, prm.sigma, prm.link.kappa_g, prm.link.kappa_h,
            prm.lambda_v, prm.lambda_u, prm.delta, horizon};
}

int ZiGlmTs::select(std::int64_t round, const std::vector<ArmFeatures>& arms,
                    Rng& rng) {
  if (round <= prm_.tau) return static_cast<int>(rng.below(arms.size()));
  const TsDraw draw = ts_draw(state_, radii_, round, rng);
  double best = -std::numeric_limits<double>::infinity();
  int pick = 0;
  for (int a = 0; a < static_cast<int>(arms.size()); ++a) {
    const double s = ts_score(arms[a].psi_x, arms[a].psi_y, draw);
    if (s > best) {
      best = s;
      pick = a;
    }
  }
  return pick;
}

void ZiGlmTs::update(int /*arm*/, const ArmFeatures& feat, double r, int y,
                     std::int64_t /*round*/) {
  state_.observe(feat.psi_x, feat.psi_y, r, y);
  state_.refit_theta(prm_.link);
  if (r != 0.0) state_.refit_beta(prm_.link);
}

MisspecLinUcb::MisspecLinUcb(int d, std::int64_t horizon, GlmPolicyParams prm)
    : prm_(prm), u_naive_(d, prm.lambda_u), b_vec_(Vec::Zero(d)) {
  radii_ = {d, d, prm.sigma, prm.link.kappa_g, prm.link.kappa_h,
            prm.lambda_v, prm.lambda_u, prm.delta, horizon};
}

Vec MisspecLinUcb::beta_naive() const { return u_naive_.solve(b_vec_); }

int MisspecLinUcb::select(std::int64_t round, const std::vector<ArmFeatures>& arms,
                          Rng& rng) {
  if (round <= prm_.tau) return static_cast<int>(rng.below(arms.size()));
  const Vec beta = beta_naive();
  const double w = std::sqrt(radii_.rho_x(round));
  double best = -std::numeric_limits<double>::infinity();
  int pick = 0;
  for (int a = 0; a < static_cast<int>(arms.size()); ++a) {
    const double s = arms[a].psi_x.dot(beta) + w * u_naive_.norm(arms[a].psi_x);
    if (s > best) {
      best = s;
      pick = a;
    }
  }
  return pick;
}

void MisspecLinUcb::update(int /*arm*/, const ArmFeatures& feat, double r,
                           int /*y*/, std::int64_t /*round*/) {
  u_naive_.rank_one_update(feat.psi_x);
  b_vec_ += r * feat.psi_x;
}

MisspecLinTs::MisspecLinTs(int d, int num_arms, std::int64_t horizon,
                           GlmPolicyParams prm)
    : prm_(prm), u_naive_(d, prm.lambda_u), b_vec_(Vec::Zero(d)) {
  const double eps_x = 1.0 / std::log(static_cast<double>(horizon));
  phi2_ = 24.0 * prm.sigma * prm.sigma * d /
          (static_cast<double>(num_arms) * num_arms * eps_x) *
          std::log(1.0 / prm.delta);
}

int MisspecLinTs::select(std::int64_t round, const std::vector<ArmFeatures>& arms,
                         Rng& rng) {
  if (round <= prm_.tau) return static_cast<int>(rng.below(arms.size()));
  const Vec beta_tilde =
      u_naive_.sample_gaussian(u_naive_.solve(b_vec_), std::sqrt(phi2_), rng);
  double best = -std::numeric_limits<double>::infinity();
  int pick = 0;
  for (int a = 0; a < static_cast<int>(arms.size()); ++a) {
    const double s = arms[a].psi_x.dot(beta_tilde);
    if (s > best) {
      best = s;
      pick = a;
    }
  }
  return pick;
}

void MisspecLinTs::update(int /*arm*/, const ArmFeatures& feat, double r,
                          int /*y*/, std::int64_t /*round*/) {
  u_naive_.rank_one_update(feat.psi_x);
  b_vec_ += r * feat.psi_x;
}

// -------------------------------------------------------------- integrated

IntegratedFitResult integrated_fit(const std::vector<Observation>& xs,
                                   const std::vector<Observation>& ys,
                                   const std::vector<double>& rewards,
                                   double (*h)(double), double (*h_dot)(double),
                                   int d, int q, int max_outer) {
  IntegratedFitResult res;
  res.beta = Vec::Zero(d);
  res.theta = Vec::Zero(q);
  if (rewards.empty()) {
    res.converged = true;
    return res;
  }
  const std::size_t n = rewards.size();

  auto objective = [&](const Vec& b, const Vec& th) {
    double o = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      const double e = rewards[s] - xs[s].psi.dot(b) * h(ys[s].psi.dot(th));
      o += e * e;
    }
    return o;
  };
  auto project = [](Vec v) {
    const double nn = v.norm();
    if (nn > 1.0) v /= nn;
    return v;
  };

  Vec beta = res.beta, theta = res.theta;
  double obj = objective(beta, theta);
  res.objective_trace.push_back(obj);

  for (int it = 0; it < max_outer; ++it) {
    // beta step: exact weighted least squares, accepted only on descent.
    Mat a = 1e-10 * Mat::Identity(d, d);
    Vec rhs = Vec::Zero(d);
    for (std::size_t s = 0; s < n; ++s) {
      const double w = h(ys[s].psi.dot(theta));
      a.noalias() += (w * w) * (xs[s].psi * xs[s].psi.transpose());
      rhs.noalias() += w * rewards[s] * xs[s].psi;
    }
    Vec beta_new = project(a.ldlt().solve(rhs));
    {
      double t = 1.0;
      for (int bt = 0; bt < 30; ++bt) {
        Vec cand = project(beta + t * (beta_new - beta));
        const double o = objective(cand, theta);
        if (o <= obj) {
          beta = cand;
          obj = o;
          break;
        }
        t *= 0.5;
      }
    }

    // theta step: projected gradient with backtracking.
    Vec grad = Vec::Zero(q);
    for (std::size_t s = 0; s < n; ++s) {
      const double gx = xs[s].psi.dot(beta);
      const double z = ys[s].psi.dot(theta);
      const double e = rewards[s] - gx * h(z);
      grad.noalias() += -2.0 * e * gx * h_dot(z) * ys[s].psi;
    }
    double step = 1.0 / (1.0 + grad.norm());
    for (int bt = 0; bt < 30; ++bt) {
      Vec cand = project(theta - step * grad);
      const double o = objective(beta, cand);
      if (o <= obj) {
        theta = cand;
        obj = o;
        break;
      }
      step *= 0.5;
    }

    res.objective_trace.push_back(obj);
    const std::size_t m = res.objective_trace.size();
    if (m >= 2 && res.objective_trace[m - 2] - obj < 1e-12 * (1.0 + obj)) {
      res.converged = true;
      break;
    }
  }
  res.beta = beta;
  res.theta = theta;
  res.objective = obj;
  return res;
}

IntegratedUcb::IntegratedUcb(int d, int q, std::int64_t horizon, GlmPolicyParams prm)
    : prm_(prm), w_int_(d + q, prm.lambda_v),
      beta_(Vec::Zero(d)), theta_(Vec::Zero(q)) {
  radii_ = {d, q, prm.sigma, prm.link.kappa_g, prm.link.kappa_h,
            prm.lambda_v, prm.lambda_u, prm.delta, horizon};
}

int IntegratedUcb::select(std::int64_t round, const std::vector<ArmFeatures>& arms,
                          Rng& rng) {
  if (round <= prm_.tau) return static_cast<int>(rng.below(arms.size()));
  const double w = std::sqrt(std::max(radii_.rho_x(round), radii_.rho_y(round)));
  double best = -std::numeric_limits<double>::infinity();
  int pick = 0;
  for (int a = 0; a < static_cast<int>(arms.size()); ++a) {
    Vec stacked(arms[a].psi_x.size() + arms[a].psi_y.size());
    stacked << arms[a].psi_x, arms[a].psi_y;
    const double s = arms[a].psi_x.dot(beta_) * prm_.link.h(arms[a].psi_y.dot(theta_)) +
                     w * w_int_.norm(stacked);
    if (s > best) {
      best = s;
      pick = a;
    }
  }
  return pick;
}

void IntegratedUcb::update(int /*arm*/, const ArmFeatures& feat, double r,
                           int /*y*/, std::int64_t /*round*/) {
  Vec stacked(feat.psi_x.size() + feat.psi_y.size());
  stacked << feat.psi_x, feat.psi_y;
  w_int_.rank_one_update(stacked);
  xs_.push_back({feat.psi_x, r});
  ys_.push_back({feat.psi_y, r});
  rewards_.push_back(r);
  auto fit = integrated_fit(xs_, ys_, rewards_, prm_.link.h, prm_.link.h_dot,
                            static_cast<int>(beta_.size()),
                            static_cast<int>(theta_.size()), 10);
  beta_ = fit.beta;
  theta_ = fit.theta;
}

CbOraclePolicy::CbOraclePolicy(Vec beta, Vec theta, double (*h)(double))
    : beta_(std::move(beta)), theta_(std::move(theta)), h_(h) {}

int CbOraclePolicy::select(std::int64_t /*round*/,
                           const std::vector<ArmFeatures>& arms, Rng& /*rng*/) {
  double best = -std::numeric_limits<double>::infinity();
  int pick = 0;
  for (int a = 0; a < static_cast<int>(arms.size()); ++a) {
    const double s = arms[a].psi_x.dot(beta_) * h_(arms[a].psi_y.dot(theta_));
    if (s > best) {
      best = s;
      pick = a;
    }
  }
  return pick;
}

}  // namespace zib
