#pragma once

#include "chanest/quantizer.hpp"
#include "chanest/types.hpp"

namespace chanest {

/// Pre-quantization noise: w ~ CN(0, tau_w), i.e. each real part has variance tau_w / 2.
struct ParamTheta {
  double tau_w = 1.0;

  void validate() const;
};

/// Posterior moments of one real component z ~ N(prior_mean, prior_var) observed
/// through z + w in [lo, hi) with w ~ N(0, noise_var). noise_var may be zero.
struct ScalarMoments {
  double mean = 0.0;
  double var = 0.0;
  double log_prob = 0.0;
};
ScalarMoments interval_posterior(double lo, double hi, double prior_mean, double prior_var, double noise_var);

struct OutputPosterior {
  ComplexVector z_hat;
  /// Complex-variance scalar: twice the mean real-component posterior variance.
  double tau_z = 0.0;
};

/// Per-measurement posterior of z_m under the pseudo-prior CN(p_hat_m, tau_p)
/// and the quantized observation y_m. tau_w >= 0.
OutputPosterior posterior_z_moments(const QuantizedVector& y, const ComplexVector& p_hat, double tau_p,
                                    double tau_w);
OutputPosterior posterior_z_moments(const QuantizedVector& y, const ComplexVector& p_hat, double tau_p,
                                    const ParamTheta& theta);

/// log P(Re bin) + log P(Im bin) per measurement.
RealVector log_bin_probability(const QuantizedVector& y, const ComplexVector& p_hat, double tau_p, double tau_w);

/// Sum over measurements of log_bin_probability together with its first and
/// second derivatives with respect to tau_w.
struct NoiseObjective {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};
NoiseObjective noise_log_likelihood(const QuantizedVector& y, const ComplexVector& p_hat, double tau_p,
                                    double tau_w);

/// Output side of GAMP: denoise z = A x from the observations it owns.
class OutputChannel {
 public:
  virtual ~OutputChannel() = default;

  virtual Index size() const = 0;
  virtual OutputPosterior estimate(const ComplexVector& p_hat, double tau_p) const = 0;
};

class QuantizedOutputChannel final : public OutputChannel {
 public:
  QuantizedOutputChannel(QuantizedVector y, ParamTheta theta);

  Index size() const override { return y_.size(); }
  OutputPosterior estimate(const ComplexVector& p_hat, double tau_p) const override;

  const QuantizedVector& observations() const { return y_; }
  const ParamTheta& params() const { return theta_; }

 private:
  QuantizedVector y_;
  ParamTheta theta_;
};

/// Unquantized observations y = z + CN(0, tau_w).
class AwgnOutputChannel final : public OutputChannel {
 public:
  AwgnOutputChannel(ComplexVector y, double tau_w);

  Index size() const override { return y_.size(); }
  OutputPosterior estimate(const ComplexVector& p_hat, double tau_p) const override;

 private:
  ComplexVector y_;
  double tau_w_;
};

}  // namespace chanest
