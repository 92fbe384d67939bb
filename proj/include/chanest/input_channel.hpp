#pragma once

#include <cstdint>
#include <vector>

#include "chanest/types.hpp"

namespace chanest {

/// Bernoulli / complex-Gaussian-mixture prior
///   p(x) = (1 - kappa) delta(x) + kappa * sum_i weight_i CN(x | mean_i, variance_i).
struct ParamLambda {
  double kappa = 0.1;
  std::vector<double> weights;
  std::vector<Complex> means;
  std::vector<double> variances;

  int components() const { return static_cast<int>(weights.size()); }

  /// Throws InvalidParams when an invariant is violated.
  void validate() const;

  Complex prior_mean() const;
  /// E|x - E x|^2 under the prior.
  double prior_variance() const;
  /// E|x|^2 under the prior.
  double prior_energy() const;

  static ParamLambda gaussian(Complex mean, double variance);
};

/// Posterior membership statistics of each x_n given its pseudo-measurement.
/// spike_prob[n] + sum_i comp_prob(n, i) = 1.
struct Responsibilities {
  RealVector spike_prob;
  RealMatrix comp_prob;
  ComplexMatrix comp_mean;
  RealMatrix comp_var;
};

struct InputPosterior {
  ComplexVector x_hat;
  /// Mean over n of the per-element posterior variance.
  double tau_x = 0.0;
  RealVector var;
  Responsibilities resp;
};

/// Closed-form posterior of x_n under the pseudo-measurement r_hat_n = x_n + CN(0, tau_r).
InputPosterior posterior_x_moments(const ComplexVector& r_hat, double tau_r, const ParamLambda& lambda);

/// log of the integral of CN(r_hat_n | x, tau_r) p(x | lambda) dx, per element.
RealVector prior_log_evidence(const ComplexVector& r_hat, double tau_r, const ParamLambda& lambda);

/// i.i.d. draws from the prior.
ComplexVector sample_prior(const ParamLambda& lambda, Index n, std::uint64_t seed);

/// Input side of GAMP: denoise x from the Gaussian pseudo-measurement.
class InputChannel {
 public:
  virtual ~InputChannel() = default;

  struct Estimate {
    ComplexVector x_hat;
    double tau_x = 0.0;
  };

  virtual Estimate estimate(const ComplexVector& r_hat, double tau_r) const = 0;
  virtual Complex initial_mean() const = 0;
  virtual double initial_variance() const = 0;
};

class MixtureInputChannel final : public InputChannel {
 public:
  explicit MixtureInputChannel(ParamLambda lambda);

  Estimate estimate(const ComplexVector& r_hat, double tau_r) const override;
  Complex initial_mean() const override { return lambda_.prior_mean(); }
  double initial_variance() const override { return lambda_.prior_variance(); }

  const ParamLambda& params() const { return lambda_; }

 private:
  ParamLambda lambda_;
};

}  // namespace chanest
