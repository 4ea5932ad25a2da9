#include "zib/distributions.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace zib {

NoiseModel NoiseModel::gaussian(double sigma2) {
  if (!(sigma2 > 0.0)) throw std::invalid_argument("gaussian noise: sigma2 must be positive");
  NoiseModel m;
  m.kind = Kind::Gaussian;
  m.sigma2 = sigma2;
  return m;
}

NoiseModel NoiseModel::mixture(std::vector<double> w, std::vector<double> mu,
                               std::vector<double> v) {
  if (w.size() != mu.size() || w.size() != v.size() || w.empty()) {
    throw std::invalid_argument("mixture noise: component lists must align");
  }
  double wsum = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] >= 0.0) || !(v[i] > 0.0)) {
      throw std::invalid_argument("mixture noise: weights >= 0, variances > 0");
    }
    wsum += w[i];
    mean += w[i] * mu[i];
  }
  if (std::abs(wsum - 1.0) > 1e-9) throw std::invalid_argument("mixture noise: weights must sum to 1");
  if (std::abs(mean) > 1e-9) throw std::invalid_argument("mixture noise: overall mean must be zero");
  NoiseModel m;
  m.kind = Kind::GaussianMixture;
  m.mix_weights = std::move(w);
  m.mix_means = std::move(mu);
  m.mix_variances = std::move(v);
  return m;
}

NoiseModel NoiseModel::centered_exponential(double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("exponential noise: rate must be positive");
  NoiseModel m;
  m.kind = Kind::CenteredExponential;
  m.rate = rate;
  return m;
}

NoiseModel NoiseModel::student_t(double df) {
  if (!(df > 1.0)) throw std::invalid_argument("student-t noise: df must exceed 1");
  NoiseModel m;
  m.kind = Kind::StudentT;
  m.df = df;
  return m;
}

double NoiseModel::sample(Rng& rng) const {
  switch (kind) {
    case Kind::Gaussian:
      return rng.normal(0.0, std::sqrt(sigma2));
    case Kind::GaussianMixture: {
      const double u = rng.uniform();
      double acc = 0.0;
      std::size_t pick = mix_weights.size() - 1;
      for (std::size_t i = 0; i < mix_weights.size(); ++i) {
        acc += mix_weights[i];
        if (u < acc) {
          pick = i;
          break;
        }
      }
      return rng.normal(mix_means[pick], std::sqrt(mix_variances[pick]));
    }
    case Kind::CenteredExponential:
      return rng.exponential(rate) - 1.0 / rate;
    case Kind::StudentT:
      return rng.student_t(df);
  }
  return 0.0;
}

double NoiseModel::variance() const {
  switch (kind) {
    case Kind::Gaussian:
      return sigma2;
    case Kind::GaussianMixture: {
      double v = 0.0;
      for (std::size_t i = 0; i < mix_weights.size(); ++i) {
        v += mix_weights[i] * (mix_variances[i] + mix_means[i] * mix_means[i]);
      }
      return v;
    }
    case Kind::CenteredExponential:
      return 1.0 / (rate * rate);
    case Kind::StudentT:
      if (df <= 2.0) throw std::domain_error("student-t variance undefined for df <= 2");
      return df / (df - 2.0);
  }
  return 0.0;
}

ZiDraw sample_zi(const ZiArm& arm, Rng& rng) {
  const int y = rng.bernoulli(arm.p) ? 1 : 0;
  const double r = y ? arm.mu + arm.noise.sample(rng) : 0.0;
  return {r, y};
}

double sample_clipped_normal(double mean, double variance, double clip, Rng& rng) {
  if (!(variance > 0.0)) throw std::invalid_argument("clipped normal: variance must be positive");
  return std::max(rng.normal(mean, std::sqrt(variance)), clip);
}

double sample_clipped_beta(double alpha, double beta, double clip, Rng& rng) {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw std::invalid_argument("clipped beta: alpha and beta must be positive");
  }
  return std::max(rng.beta(alpha, beta), clip);
}

Eigen::VectorXd sample_mvnormal(const Eigen::VectorXd& mean,
                                const Eigen::MatrixXd& cov_factor, Rng& rng) {
  if (cov_factor.rows() != mean.size() || cov_factor.cols() != mean.size()) {
    throw std::invalid_argument("sample_mvnormal: dimension mismatch");
  }
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return mean + cov_factor * z;
}

}  // namespace zib
