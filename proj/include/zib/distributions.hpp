#pragma once

#include <Eigen/Dense>
#include <vector>

#include "zib/rng.hpp"

namespace zib {

// Finite sentinels standing in for -inf / +inf clips.
constexpr double kNegInfClip = -1e300;
constexpr double kPosInfClip = 1e300;

// Mean-zero noise attached to the non-zero reward part.
struct NoiseModel {
  enum class Kind { Gaussian, GaussianMixture, CenteredExponential, StudentT };
  Kind kind = Kind::Gaussian;
  double sigma2 = 1.0;  // Gaussian
  double rate = 1.0;    // CenteredExponential
  double df = 3.0;      // StudentT
  std::vector<double> mix_weights{0.5, 0.5};
  std::vector<double> mix_means{-1.0, 1.0};
  std::vector<double> mix_variances{0.5, 0.5};

  static NoiseModel gaussian(double sigma2);
  static NoiseModel mixture(std::vector<double> w, std::vector<double> m,
                            std::vector<double> v);
  static NoiseModel centered_exponential(double rate);
  static NoiseModel student_t(double df);

  double sample(Rng& rng) const;
  // Population variance; infinite-variance models throw.
  double variance() const;
};

// One zero-inflated arm: R = Y (mu + eps), Y ~ Bernoulli(p).
struct ZiArm {
  double p = 1.0;
  double mu = 0.0;
  NoiseModel noise;
  double mean_reward() const { return mu * p; }
};

struct ZiDraw {
  double r;
  int y;
};

ZiDraw sample_zi(const ZiArm& arm, Rng& rng);

// max(N(mean, variance), clip)
double sample_clipped_normal(double mean, double variance, double clip, Rng& rng);

// max(Beta(alpha, beta), clip)
double sample_clipped_beta(double alpha, double beta, double clip, Rng& rng);

// mean + L z with z a standard normal vector; L a lower-triangular factor of
// the covariance (L L^T = Sigma).
Eigen::VectorXd sample_mvnormal(const Eigen::VectorXd& mean,
                                const Eigen::MatrixXd& cov_factor, Rng& rng);

}  // namespace zib
