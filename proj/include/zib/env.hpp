#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zib/distributions.hpp"
#include "zib/glm.hpp"
#include "zib/rng.hpp"

namespace zib {

// Synthetic MAB environment: arm parameters drawn once per replication,
// p_k ~ U[p_lo, p_hi], mu_k ~ U[mu_lo, mu_hi].
struct MabEnvSpec {
  int k = 10;
  double p_lo = 0.30;
  double p_hi = 0.35;
  double mu_lo = 1.0;
  double mu_hi = 3.0;
  NoiseModel noise = NoiseModel::gaussian(1.0);
  void validate() const;
};

class MabEnv {
 public:
  MabEnv(const MabEnvSpec& spec, Rng& rng);
  int num_arms() const { return static_cast<int>(arms_.size()); }
  const ZiArm& arm(int k) const { return arms_[k]; }
  double mean_reward(int k) const { return arms_[k].mean_reward(); }
  double best_mean() const { return best_mean_; }
  int best_arm() const { return best_arm_; }
  double gap(int k) const { return best_mean_ - mean_reward(k); }
  // Draw (r, y) for a pull of arm k; instantaneous regret is gap(k).
  ZiDraw realize(int k, Rng& rng) const { return sample_zi(arms_[k], rng); }

 private:
  std::vector<ZiArm> arms_;
  double best_mean_;
  int best_arm_;
};

// Contextual environment: beta normalized to unit norm, theta s-sparse with
// U[0,1] nonzeros (unnormalized, as are the arm centers nu_k), contexts
// x_{k,t} ~ N_d(nu_k, (1/2K) I), features psi_X = x, psi_Y = sin(x)
// elementwise, gate h(theta' sin(x)), nonzero mean beta' x.
struct CbEnvSpec {
  int k = 100;
  int d = 10;
  int sparsity = 7;
  std::string link_h = "probit";
  NoiseModel noise = NoiseModel::gaussian(1.0);
  void validate() const;
};

struct CbRound {
  std::vector<ArmFeatures> arms;  // psi_X = x_a, psi_Y = sin(x_a)
  std::vector<double> mean_rewards;
  int oracle_arm = 0;
  double oracle_mean = 0.0;
};

class CbEnv {
 public:
  CbEnv(const CbEnvSpec& spec, Rng& rng);
  int num_arms() const { return spec_.k; }
  const Vec& beta() const { return beta_; }
  const Vec& theta() const { return theta_; }
  const LinkPair& link() const { return link_; }
  double gate(const Vec& psi_y) const { return link_.h(theta_.dot(psi_y)); }

  // Fresh contexts for every arm plus the oracle identified under the true
  // parameters.
  CbRound step(Rng& rng) const;
  // y ~ Bernoulli(gate), r = y (beta' x + eps).
  ZiDraw realize(const ArmFeatures& feat, Rng& rng) const;

 private:
  CbEnvSpec spec_;
  LinkPair link_;
  Vec beta_, theta_;
  std::vector<Vec> nu_;
  double context_sd_;
};

}  // namespace zib
