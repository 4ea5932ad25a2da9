#include "zib/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace zib {

void MabEnvSpec::validate() const {
  if (k < 1) throw std::invalid_argument("mab env: arms must be >= 1");
  if (!(p_lo > 0.0) || !(p_lo <= p_hi) || !(p_hi <= 1.0)) {
    throw std::invalid_argument("mab env: need 0 < p_lo <= p_hi <= 1");
  }
  if (!(mu_lo <= mu_hi)) throw std::invalid_argument("mab env: need mu_lo <= mu_hi");
}

MabEnv::MabEnv(const MabEnvSpec& spec, Rng& rng) {
  spec.validate();
  arms_.resize(spec.k);
  for (auto& a : arms_) {
    a.p = rng.uniform(spec.p_lo, spec.p_hi);
    a.mu = rng.uniform(spec.mu_lo, spec.mu_hi);
    a.noise = spec.noise;
  }
  best_arm_ = 0;
  best_mean_ = arms_[0].mean_reward();
  for (int i = 1; i < spec.k; ++i) {
    if (arms_[i].mean_reward() > best_mean_) {
      best_mean_ = arms_[i].mean_reward();
      best_arm_ = i;
    }
  }
}

void CbEnvSpec::validate() const {
  if (k < 1) throw std::invalid_argument("cb env: arms must be >= 1");
  if (d < 1) throw std::invalid_argument("cb env: dim must be >= 1");
  if (sparsity < 1 || sparsity > d) {
    throw std::invalid_argument("cb env: sparsity must lie in [1, dim]");
  }
}

namespace {
// s-sparse vector with U[0,1] entries on a uniformly chosen support.
Vec sparse_uniform(int d, int s, Rng& rng) {
  Vec v = Vec::Zero(d);
  std::vector<int> idx(d);
  for (int i = 0; i < d; ++i) idx[i] = i;
  for (int i = 0; i < s; ++i) {
    const int j = i + static_cast<int>(rng.below(d - i));
    std::swap(idx[i], idx[j]);
  }
  for (int i = 0; i < s; ++i) v[idx[i]] = rng.uniform();
  return v;
}
}  // namespace

CbEnv::CbEnv(const CbEnvSpec& spec, Rng& rng)
    : spec_(spec), link_(LinkPair::make("identity", spec.link_h)) {
  spec.validate();
  beta_ = Vec(spec.d);
  for (int i = 0; i < spec.d; ++i) beta_[i] = rng.uniform();
  beta_ /= beta_.norm();
  theta_ = sparse_uniform(spec.d, spec.sparsity, rng);
  nu_.reserve(spec.k);
  for (int a = 0; a < spec.k; ++a) nu_.push_back(sparse_uniform(spec.d, spec.sparsity, rng));
  context_sd_ = std::sqrt(1.0 / (2.0 * spec.k));
}

CbRound CbEnv::step(Rng& rng) const {
  CbRound round;
  round.arms.resize(spec_.k);
  round.mean_rewards.resize(spec_.k);
  for (int a = 0; a < spec_.k; ++a) {
    Vec x(spec_.d);
    for (int i = 0; i < spec_.d; ++i) x[i] = nu_[a][i] + context_sd_ * rng.normal();
    Vec sx = x.array().sin().matrix();
    round.arms[a] = {x, sx};
    round.mean_rewards[a] = beta_.dot(x) * gate(sx);
    if (a == 0 || round.mean_rewards[a] > round.oracle_mean) {
      round.oracle_mean = round.mean_rewards[a];
      round.oracle_arm = a;
    }
  }
  return round;
}

ZiDraw CbEnv::realize(const ArmFeatures& feat, Rng& rng) const {
  const int y = rng.bernoulli(gate(feat.psi_y)) ? 1 : 0;
  const double r = y ? beta_.dot(feat.psi_x) + spec_.noise.sample(rng) : 0.0;
  return {r, y};
}

}  // namespace zib
