#include "chanest/input_channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "chanest/error.hpp"

namespace chanest {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Floor on stored responsibilities so downstream logs stay finite.
constexpr double kMinResp = 1e-300;

double log_cn(Complex r, Complex mean, double var) {
  return -std::log(std::numbers::pi * var) - std::norm(r - mean) / var;
}

// Log weights of the spike and each component for one element; returns the
// log-sum-exp of the vector.
double log_evidences(Complex r, double tau_r, const ParamLambda& lambda, std::vector<double>& logw) {
  const int d = lambda.components();
  logw.resize(d + 1);
  logw[0] = lambda.kappa < 1.0 ? std::log1p(-lambda.kappa) + log_cn(r, 0.0, tau_r) : kNegInf;
  const double log_kappa = lambda.kappa > 0.0 ? std::log(lambda.kappa) : kNegInf;
  for (int i = 0; i < d; ++i) {
    const double w = lambda.weights[i];
    logw[i + 1] = (w > 0.0 && log_kappa > kNegInf)
                      ? log_kappa + std::log(w) + log_cn(r, lambda.means[i], lambda.variances[i] + tau_r)
                      : kNegInf;
  }
  const double top = *std::max_element(logw.begin(), logw.end());
  double acc = 0.0;
  for (double v : logw) acc += v > kNegInf ? std::exp(v - top) : 0.0;
  return top + std::log(acc);
}

void check_tau(double tau_r) {
  if (!(tau_r > 0.0) || !std::isfinite(tau_r))
    throw Error(ErrorCode::InvalidParams, "tau_r must be positive and finite");
}

}  // namespace

void ParamLambda::validate() const {
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw Error(ErrorCode::InvalidParams, "kappa outside [0, 1]");
  const std::size_t d = weights.size();
  if (d == 0) throw Error(ErrorCode::InvalidParams, "mixture needs at least one component");
  if (means.size() != d || variances.size() != d)
    throw Error(ErrorCode::InvalidParams, "mixture component lists differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    if (!(weights[i] >= 0.0)) throw Error(ErrorCode::InvalidParams, "negative mixture weight");
    if (!(variances[i] > 0.0) || !std::isfinite(variances[i]))
      throw Error(ErrorCode::InvalidParams, "mixture variance must be positive");
    if (!std::isfinite(means[i].real()) || !std::isfinite(means[i].imag()))
      throw Error(ErrorCode::InvalidParams, "mixture mean must be finite");
    total += weights[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::InvalidParams, "mixture weights must sum to 1");
}

Complex ParamLambda::prior_mean() const {
  Complex m = 0.0;
  for (int i = 0; i < components(); ++i) m += weights[i] * means[i];
  return kappa * m;
}

double ParamLambda::prior_energy() const {
  double e = 0.0;
  for (int i = 0; i < components(); ++i) e += weights[i] * (variances[i] + std::norm(means[i]));
  return kappa * e;
}

double ParamLambda::prior_variance() const { return prior_energy() - std::norm(prior_mean()); }

ParamLambda ParamLambda::gaussian(Complex mean, double variance) {
  ParamLambda p;
  p.kappa = 1.0;
  p.weights = {1.0};
  p.means = {mean};
  p.variances = {variance};
  return p;
}

namespace {

// Shared kernel. Per-component log constants and gains are hoisted out of the
// element loop; responsibilities are only stored when requested.
InputPosterior mixture_posterior(const ComplexVector& r_hat, double tau_r, const ParamLambda& lambda, bool keep_resp) {
  const Index n = r_hat.size();
  const int d = lambda.components();

  InputPosterior out;
  out.x_hat.resize(n);
  out.var.resize(n);
  if (keep_resp) {
    out.resp.spike_prob.resize(n);
    out.resp.comp_prob.resize(n, d);
    out.resp.comp_mean.resize(n, d);
    out.resp.comp_var.resize(n, d);
  }

  // Slot 0 is the spike, seen as a zero-mean component of variance tau_r.
  std::vector<double> log_const(d + 1), inv_var(d + 1), post_var(d), shrink(d);
  std::vector<Complex> centre(d + 1, Complex(0.0, 0.0));
  log_const[0] = lambda.kappa < 1.0 ? std::log1p(-lambda.kappa) - std::log(std::numbers::pi * tau_r) : kNegInf;
  inv_var[0] = 1.0 / tau_r;
  const double log_kappa = lambda.kappa > 0.0 ? std::log(lambda.kappa) : kNegInf;
  for (int i = 0; i < d; ++i) {
    const double nu = lambda.variances[i];
    const double w = lambda.weights[i];
    log_const[i + 1] = (w > 0.0 && log_kappa > kNegInf)
                           ? log_kappa + std::log(w) - std::log(std::numbers::pi * (nu + tau_r))
                           : kNegInf;
    inv_var[i + 1] = 1.0 / (nu + tau_r);
    centre[i + 1] = lambda.means[i];
    post_var[i] = nu * tau_r / (nu + tau_r);
    shrink[i] = nu / (nu + tau_r);
  }

  std::vector<double> logw(d + 1);
  for (Index k = 0; k < n; ++k) {
    const Complex r = r_hat[k];
    double top = kNegInf;
    for (int j = 0; j <= d; ++j) {
      logw[j] = log_const[j] > kNegInf ? log_const[j] - std::norm(r - centre[j]) * inv_var[j] : kNegInf;
      top = std::max(top, logw[j]);
    }
    double total = 0.0;
    for (int j = 0; j <= d; ++j) {
      logw[j] = logw[j] > kNegInf ? std::exp(logw[j] - top) : 0.0;
      total += logw[j];
    }
    const double inv_total = 1.0 / total;

    Complex mean = 0.0;
    double second = 0.0;
    for (int i = 0; i < d; ++i) {
      const double pi = logw[i + 1] * inv_total;
      const Complex cm = lambda.means[i] + shrink[i] * (r - lambda.means[i]);
      if (keep_resp) {
        out.resp.comp_prob(k, i) = std::max(pi, kMinResp);
        out.resp.comp_mean(k, i) = cm;
        out.resp.comp_var(k, i) = post_var[i];
      }
      mean += pi * cm;
      second += pi * (post_var[i] + std::norm(cm));
    }
    if (keep_resp) out.resp.spike_prob[k] = std::max(logw[0] * inv_total, kMinResp);
    out.x_hat[k] = mean;
    out.var[k] = std::max(second - std::norm(mean), 0.0);
  }
  out.tau_x = n > 0 ? out.var.mean() : 0.0;
  return out;
}

}  // namespace

InputPosterior posterior_x_moments(const ComplexVector& r_hat, double tau_r, const ParamLambda& lambda) {
  lambda.validate();
  check_tau(tau_r);
  return mixture_posterior(r_hat, tau_r, lambda, true);
}

RealVector prior_log_evidence(const ComplexVector& r_hat, double tau_r, const ParamLambda& lambda) {
  lambda.validate();
  check_tau(tau_r);
  RealVector out(r_hat.size());
  std::vector<double> logw;
  for (Index k = 0; k < r_hat.size(); ++k) out[k] = log_evidences(r_hat[k], tau_r, lambda, logw);
  return out;
}

ComplexVector sample_prior(const ParamLambda& lambda, Index n, std::uint64_t seed) {
  lambda.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::discrete_distribution<int> pick(lambda.weights.begin(), lambda.weights.end());

  ComplexVector x(n);
  for (Index k = 0; k < n; ++k) {
    if (unif(rng) >= lambda.kappa) {
      x[k] = 0.0;
      continue;
    }
    const int i = pick(rng);
    const double sd = std::sqrt(0.5 * lambda.variances[i]);
    const double re = gauss(rng);
    const double im = gauss(rng);
    x[k] = lambda.means[i] + Complex(sd * re, sd * im);
  }
  return x;
}

MixtureInputChannel::MixtureInputChannel(ParamLambda lambda) : lambda_(std::move(lambda)) {
  lambda_.validate();
}

InputChannel::Estimate MixtureInputChannel::estimate(const ComplexVector& r_hat, double tau_r) const {
  check_tau(tau_r);
  InputPosterior post = mixture_posterior(r_hat, tau_r, lambda_, false);
  return {std::move(post.x_hat), post.tau_x};
}

}  // namespace chanest
