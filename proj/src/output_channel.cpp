#include "chanest/output_channel.hpp"

#include <cmath>

#include "chanest/error.hpp"
#include "chanest/normal.hpp"

namespace chanest {
namespace {

void check_sizes(const QuantizedVector& y, const ComplexVector& p_hat) {
  if (y.size() != p_hat.size())
    throw Error(ErrorCode::DimensionMismatch, "observation and pseudo-prior lengths differ");
}

void check_variances(double tau_p, double tau_w) {
  if (!(tau_p > 0.0) || !std::isfinite(tau_p))
    throw Error(ErrorCode::InvalidParams, "tau_p must be positive and finite");
  if (!(tau_w >= 0.0) || !std::isfinite(tau_w))
    throw Error(ErrorCode::InvalidParams, "tau_w must be nonnegative and finite");
}

}  // namespace

void ParamTheta::validate() const {
  if (!(tau_w > 0.0) || !std::isfinite(tau_w)) throw Error(ErrorCode::InvalidParams, "tau_w must be positive");
}

ScalarMoments interval_posterior(double lo, double hi, double prior_mean, double prior_var, double noise_var) {
  const double s2 = prior_var + noise_var;
  const double s = std::sqrt(s2);
  const TruncatedNormal t = truncated_normal((lo - prior_mean) / s, (hi - prior_mean) / s);
  const double gain = prior_var / s;
  ScalarMoments out;
  out.mean = prior_mean + gain * t.mean;
  out.var = prior_var * noise_var / s2 + gain * gain * t.variance();
  out.log_prob = t.log_mass;
  return out;
}

OutputPosterior posterior_z_moments(const QuantizedVector& y, const ComplexVector& p_hat, double tau_p,
                                    double tau_w) {
  check_sizes(y, p_hat);
  check_variances(tau_p, tau_w);
  const QuantizerSpec& spec = y.spec;
  const double vp = 0.5 * tau_p;
  const double vw = 0.5 * tau_w;

  const double s2 = vp + vw;
  const double sd = std::sqrt(s2);
  const double gain = vp / sd;
  const double base_var = vp * vw / s2;
  auto component = [&](int bin, double p, double& mean, double& var) {
    const TruncatedNormal t = truncated_normal((spec.lower(bin) - p) / sd, (spec.upper(bin) - p) / sd, false);
    mean = p + gain * t.mean;
    var = base_var + gain * gain * t.variance();
  };

  OutputPosterior out;
  out.z_hat.resize(y.size());
  double var_sum = 0.0;
  for (Index m = 0; m < y.size(); ++m) {
    double re_mean, re_var, im_mean, im_var;
    component(y.re_idx[m], p_hat[m].real(), re_mean, re_var);
    component(y.im_idx[m], p_hat[m].imag(), im_mean, im_var);
    if (!std::isfinite(re_mean) || !std::isfinite(im_mean) || !std::isfinite(re_var) || !std::isfinite(im_var))
      throw Error(ErrorCode::ChannelEvaluationError,
                  "non-finite output moment at measurement " + std::to_string(m));
    out.z_hat[m] = Complex(re_mean, im_mean);
    var_sum += re_var + im_var;
  }
  out.tau_z = y.size() > 0 ? var_sum / static_cast<double>(y.size()) : 0.0;
  return out;
}

OutputPosterior posterior_z_moments(const QuantizedVector& y, const ComplexVector& p_hat, double tau_p,
                                    const ParamTheta& theta) {
  theta.validate();
  return posterior_z_moments(y, p_hat, tau_p, theta.tau_w);
}

RealVector log_bin_probability(const QuantizedVector& y, const ComplexVector& p_hat, double tau_p, double tau_w) {
  check_sizes(y, p_hat);
  check_variances(tau_p, tau_w);
  const QuantizerSpec& spec = y.spec;
  const double s = std::sqrt(0.5 * (tau_p + tau_w));
  RealVector out(y.size());
  for (Index m = 0; m < y.size(); ++m) {
    const int kr = y.re_idx[m];
    const int ki = y.im_idx[m];
    const double pr = p_hat[m].real();
    const double pi = p_hat[m].imag();
    out[m] = truncated_normal((spec.lower(kr) - pr) / s, (spec.upper(kr) - pr) / s).log_mass +
             truncated_normal((spec.lower(ki) - pi) / s, (spec.upper(ki) - pi) / s).log_mass;
  }
  return out;
}

NoiseObjective noise_log_likelihood(const QuantizedVector& y, const ComplexVector& p_hat, double tau_p,
                                    double tau_w) {
  check_sizes(y, p_hat);
  check_variances(tau_p, tau_w);
  const QuantizerSpec& spec = y.spec;
  const double s2 = 0.5 * (tau_p + tau_w);
  const double s = std::sqrt(s2);
  // Standardized limits move with tau_w at rate h * limit.
  const double h = -0.25 / s2;

  NoiseObjective out;
  auto accumulate = [&](int bin, double p) {
    const TruncatedNormal t = truncated_normal((spec.lower(bin) - p) / s, (spec.upper(bin) - p) / s);
    out.value += t.log_mass;
    out.d1 += -h * t.t1;
    out.d2 += h * h * (t.t3 - 3.0 * t.t1 - t.t1 * t.t1);
  };
  for (Index m = 0; m < y.size(); ++m) {
    accumulate(y.re_idx[m], p_hat[m].real());
    accumulate(y.im_idx[m], p_hat[m].imag());
  }
  return out;
}

QuantizedOutputChannel::QuantizedOutputChannel(QuantizedVector y, ParamTheta theta)
    : y_(std::move(y)), theta_(theta) {
  theta_.validate();
}

OutputPosterior QuantizedOutputChannel::estimate(const ComplexVector& p_hat, double tau_p) const {
  return posterior_z_moments(y_, p_hat, tau_p, theta_.tau_w);
}

AwgnOutputChannel::AwgnOutputChannel(ComplexVector y, double tau_w) : y_(std::move(y)), tau_w_(tau_w) {
  if (!(tau_w_ > 0.0)) throw Error(ErrorCode::InvalidParams, "tau_w must be positive");
}

OutputPosterior AwgnOutputChannel::estimate(const ComplexVector& p_hat, double tau_p) const {
  if (p_hat.size() != y_.size()) throw Error(ErrorCode::DimensionMismatch, "pseudo-prior length");
  OutputPosterior out;
  out.z_hat = (p_hat * tau_w_ + y_ * tau_p) / (tau_p + tau_w_);
  out.tau_z = tau_p * tau_w_ / (tau_p + tau_w_);
  return out;
}

}  // namespace chanest
