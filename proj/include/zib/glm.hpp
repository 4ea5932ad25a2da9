#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "zib/rng.hpp"

namespace zib {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Link pair for the GLM contextual model: g for the non-zero part, h for the
// binary gate (codomain [0,1]). kappa_* are the derivative lower bounds over
// the unit feature/parameter balls that enter the UCB radii.
struct LinkPair {
  std::string name_g = "identity";
  std::string name_h = "probit";
  double (*g)(double) = nullptr;
  double (*g_dot)(double) = nullptr;
  double (*h)(double) = nullptr;
  double (*h_dot)(double) = nullptr;
  double kappa_g = 1.0;
  double kappa_h = 1.0;

  static LinkPair make(const std::string& g_name, const std::string& h_name);
};

double link_identity(double z);
double link_identity_dot(double z);
double link_probit(double z);
double link_probit_dot(double z);
double link_logit(double z);
double link_logit_dot(double z);

struct FitResult {
  Vec point;
  double residual_norm = 0.0;
  bool converged = false;
  bool fitted = false;  // false when the history was empty
};

// Solve the estimating equation sum_s [y_s - h(psi_s' theta)] psi_s = 0 over
// the closed unit ball, by damped Gauss-Newton on the squared-residual
// surrogate with projection and backtracking. Max 200 iterations, residual
// tolerance 1e-8; non-convergence returns the best iterate with the flag
// down. Used for both theta (binary outcomes, link h) and beta (nonzero
// rewards, link g).
FitResult fit_estimating_equation(const std::vector<Vec>& psis,
                                  const std::vector<double>& ys,
                                  double (*link)(double),
                                  double (*link_dot)(double),
                                  int dim, const Vec& warm_start);

// Ridge-regularized design matrix with a maintained Cholesky factor.
// Rank-one updates; the factor is recomputed from scratch every 512 updates
// to cap drift.
class DesignMatrix {
 public:
  DesignMatrix(int dim, double lambda);
  void rank_one_update(const Vec& psi);
  // ||z||_{A^{-1}} via two triangular solves against the factor.
  double inv_norm(const Vec& z) const;
  // ||z||_A = sqrt(z' A z).
  double norm(const Vec& z) const;
  Vec solve(const Vec& b) const;
  // mean + rho * L^{-T} z: a draw from N(mean, rho^2 A^{-1}).
  Vec sample_gaussian(const Vec& mean, double rho, Rng& rng) const;
  const Mat& matrix() const { return a_; }
  int dim() const { return static_cast<int>(a_.rows()); }

 private:
  void refactor();
  Mat a_;
  Eigen::LLT<Mat> llt_;
  std::int64_t updates_since_refactor_ = 0;
};

struct Observation {
  Vec psi;
  double value;  // Y for the binary history, R for the nonzero history
};

// Shared estimation state of the ZI GLM policies.
struct GlmState {
  GlmState(int d, int q, double lambda_v, double lambda_u);
  DesignMatrix v_mat;  // nonzero part, d x d
  DesignMatrix u_mat;  // binary part, q x q
  Vec beta_hat;
  Vec theta_hat;
  bool beta_fitted = false;
  bool theta_fitted = false;
  std::vector<Observation> history_all;
  std::vector<Observation> history_nonzero;

  void observe(const Vec& psi_x, const Vec& psi_y, double r, int y);
  FitResult refit_theta(const LinkPair& link);
  FitResult refit_beta(const LinkPair& link);
};

// UCB radii rho_{X,t}, rho_{Y,t} and TS radii varrho_{X,t}, varrho_{Y,t}.
struct RadiusSchedule {
  int d = 1;
  int q = 1;
  double sigma = 1.0;
  double kappa_g = 1.0;
  double kappa_h = 1.0;
  double lambda_v = 1.0;
  double lambda_u = 1.0;
  double delta = 0.05;
  std::int64_t horizon = 1;

  double rho_x(std::int64_t t) const;
  double rho_y(std::int64_t t) const;
  double varrho_x(std::int64_t t) const;
  double varrho_y(std::int64_t t) const;
};

// UCB_t(a) = [psi_X' beta + rho_X ||psi_X||_{V^-1}][psi_Y' theta + rho_Y ||psi_Y||_{U^-1}].
// The displayed score uses the linear predictors, not g/h of them; identity g
// makes the nonzero factor coincide with the linked score.
double ucb_score(const Vec& psi_x, const Vec& psi_y, const GlmState& state,
                 const RadiusSchedule& radii, std::int64_t t);

struct TsDraw {
  Vec beta_tilde;
  Vec theta_tilde;
};

// One posterior draw per round, shared across arms.
TsDraw ts_draw(const GlmState& state, const RadiusSchedule& radii,
               std::int64_t t, Rng& rng);
double ts_score(const Vec& psi_x, const Vec& psi_y, const TsDraw& draw);
// Convenience single-call form: draws and scores in one step.
double ts_sample_and_score(const Vec& psi_x, const Vec& psi_y,
                           const GlmState& state, const RadiusSchedule& radii,
                           std::int64_t t, Rng& rng);

// Random-selection period from the tuning display:
// tau = max{ [((c1 sqrt(d/p*) + c2 sqrt(log(1/d)/p*)) / sz2)^2 + 2/(p* sz2)],
//            4 log(1/d)/p*^2,
//            ((c3 sqrt(q) + c4 sqrt(log(1/d))) / sw2)^2 + 2/sw2 }.
// c1..c4 are the unnamed universal constants, exposed as inputs.
std::int64_t random_period_tau(int d, int q, double delta, double p_star,
                               double sigma_z2, double sigma_w2, double c1,
                               double c2, double c3, double c4);

// ------------------------------------------------------------ CB policies

// Contextual policy contract: select sees this round's per-arm feature pairs.
struct ArmFeatures {
  Vec psi_x;
  Vec psi_y;
};

class CbPolicy {
 public:
  virtual ~CbPolicy() = default;
  virtual int select(std::int64_t round, const std::vector<ArmFeatures>& arms,
                     Rng& rng) = 0;
  virtual void update(int arm, const ArmFeatures& feat, double r, int y,
                      std::int64_t round) = 0;
  virtual std::string name() const = 0;
};

struct GlmPolicyParams {
  double lambda_v = 1.0;
  double lambda_u = 1.0;
  double delta = 0.05;
  double sigma = 1.0;
  std::int64_t tau = 0;  // uniform-random rounds before scoring starts
  LinkPair link;
};

class ZiGlmUcb : public CbPolicy {
 public:
  ZiGlmUcb(int d, int q, std::int64_t horizon, GlmPolicyParams prm);
  int select(std::int64_t round, const std::vector<ArmFeatures>& arms, Rng& rng) override;
  void update(int arm, const ArmFeatures& feat, double r, int y, std::int64_t round) override;
  std::string name() const override { return "zi-glm-ucb"; }
  const GlmState& state() const { return state_; }

 private:
  GlmPolicyParams prm_;
  GlmState state_;
  RadiusSchedule radii_;
};

class ZiGlmTs : public CbPolicy {
 public:
  ZiGlmTs(int d, int q, std::int64_t horizon, GlmPolicyParams prm);
  int select(std::int64_t round, const std::vector<ArmFeatures>& arms, Rng& rng) override;
  void update(int arm, const ArmFeatures& feat, double r, int y, std::int64_t round) override;
  std::string name() const override { return "zi-glm-ts"; }

 private:
  GlmPolicyParams prm_;
  GlmState state_;
  RadiusSchedule radii_;
};

// Misspecified baseline: ridge of raw R on psi_X, ignoring the ZI structure.
// Scores psi' beta_naive + sqrt(rho_{X,t}) ||psi||_{U_naive} -- the norm is
// taken in U_naive itself (not its inverse), per the baseline's displayed
// form; its exploration term therefore grows with t.
class MisspecLinUcb : public CbPolicy {
 public:
  MisspecLinUcb(int d, std::int64_t horizon, GlmPolicyParams prm);
  int select(std::int64_t round, const std::vector<ArmFeatures>& arms, Rng& rng) override;
  void update(int arm, const ArmFeatures& feat, double r, int y, std::int64_t round) override;
  std::string name() const override { return "lin-ucb-misspecified"; }
  Vec beta_naive() const;

 private:
  GlmPolicyParams prm_;
  RadiusSchedule radii_;
  DesignMatrix u_naive_;
  Vec b_vec_;
};

// Misspecified TS: beta_tilde ~ N(beta_naive, phi^2 U_naive^{-1}) with
// phi^2 = 24 sigma^2 d log(1/delta) / (K^2 eps_x), eps_x = 1/log T.
class MisspecLinTs : public CbPolicy {
 public:
  MisspecLinTs(int d, int num_arms, std::int64_t horizon, GlmPolicyParams prm);
  int select(std::int64_t round, const std::vector<ArmFeatures>& arms, Rng& rng) override;
  void update(int arm, const ArmFeatures& feat, double r, int y, std::int64_t round) override;
  std::string name() const override { return "lin-ts-misspecified"; }
  double phi2() const { return phi2_; }

 private:
  GlmPolicyParams prm_;
  DesignMatrix u_naive_;
  Vec b_vec_;
  double phi2_;
};

struct IntegratedFitResult {
  Vec beta;
  Vec theta;
  double objective = 0.0;  // squared-residual objective at the returned point
  bool converged = false;
  std::vector<double> objective_trace;  // per alternating iteration
};

// Joint fit of the integrated baseline: minimize
// sum_s [R_s - (psi_X' beta) h(psi_Y' theta)]^2 by alternating an exact
// weighted least-squares step in beta with projected-gradient steps in theta,
// each guarded by backtracking so the objective never increases.
IntegratedFitResult integrated_fit(const std::vector<Observation>& xs,
                                   const std::vector<Observation>& ys,
                                   const std::vector<double>& rewards,
                                   double (*h)(double), double (*h_dot)(double),
                                   int d, int q, int max_outer = 50);

// Integrated baseline policy: correctly specified joint model, stacked
// ridge widths sqrt(rho_X v rho_Y) ||[psi_X; psi_Y]||_{W_integrated}.
class IntegratedUcb : public CbPolicy {
 public:
  IntegratedUcb(int d, int q, std::int64_t horizon, GlmPolicyParams prm);
  int select(std::int64_t round, const std::vector<ArmFeatures>& arms, Rng& rng) override;
  void update(int arm, const ArmFeatures& feat, double r, int y, std::int64_t round) override;
  std::string name() const override { return "integrated-ucb"; }

 private:
  GlmPolicyParams prm_;
  RadiusSchedule radii_;
  DesignMatrix w_int_;
  std::vector<Observation> xs_, ys_;
  std::vector<double> rewards_;
  Vec beta_, theta_;
};

// Plays the true-parameter argmax; the zero-regret contextual reference.
class CbOraclePolicy : public CbPolicy {
 public:
  CbOraclePolicy(Vec beta, Vec theta, double (*h)(double));
  int select(std::int64_t round, const std::vector<ArmFeatures>& arms, Rng& rng) override;
  void update(int, const ArmFeatures&, double, int, std::int64_t) override {}
  std::string name() const override { return "oracle"; }

 private:
  Vec beta_, theta_;
  double (*h_)(double);
};

}  // namespace zib
