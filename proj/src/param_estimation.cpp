#include "chanest/param_estimation.hpp"

#include <algorithm>
#include <cmath>

#include "chanest/error.hpp"

namespace chanest {
namespace {

constexpr double kEmptyComponent = 1e-8;
constexpr double kVarianceFloor = 1e-12;

double lambda_change(const ParamLambda& a, const ParamLambda& b) {
  double worst = std::abs(a.kappa - b.kappa) / std::max(a.kappa, 1e-12);
  for (int i = 0; i < a.components(); ++i) {
    worst = std::max(worst, std::abs(a.weights[i] - b.weights[i]));
    worst = std::max(worst, std::abs(a.means[i] - b.means[i]) / std::sqrt(a.variances[i]));
    worst = std::max(worst, std::abs(a.variances[i] - b.variances[i]) / a.variances[i]);
  }
  return worst;
}

}  // namespace

void OuterLoopOptions::validate() const {
  if (max_outer_iters < 1) throw Error(ErrorCode::InvalidParams, "max_outer_iters must be at least 1");
  if (!(param_tol >= 0.0)) throw Error(ErrorCode::InvalidParams, "param_tol must be nonnegative");
  if (!(tau_w_min > 0.0)) throw Error(ErrorCode::InvalidParams, "tau_w_min must be positive");
  if (!(kappa_lo > 0.0 && kappa_lo <= kappa_hi && kappa_hi <= 1.0))
    throw Error(ErrorCode::InvalidParams, "kappa bounds must satisfy 0 < lo <= hi <= 1");
  if (newton_max_steps < 1) throw Error(ErrorCode::InvalidParams, "newton_max_steps must be at least 1");
  if (!(newton_backtrack > 0.0 && newton_backtrack < 1.0))
    throw Error(ErrorCode::InvalidParams, "newton_backtrack must lie in (0, 1)");
  if (components < 1) throw Error(ErrorCode::InvalidParams, "components must be at least 1");
}

ParamLambda update_lambda(const Responsibilities& resp, const ParamLambda& lambda_old, const OuterLoopOptions& opts) {
  const Index n = resp.spike_prob.size();
  const int d = lambda_old.components();
  if (n == 0) throw Error(ErrorCode::EmptyInput, "update_lambda needs at least one element");
  if (resp.comp_prob.cols() != d) throw Error(ErrorCode::DimensionMismatch, "responsibility column count");

  ParamLambda next = lambda_old;
  const double nonzero = static_cast<double>(n) - resp.spike_prob.sum();
  next.kappa = std::clamp(nonzero / static_cast<double>(n), opts.kappa_lo, opts.kappa_hi);

  std::vector<bool> active(d);
  double active_mass = 0.0;
  double frozen_weight = 0.0;
  for (int i = 0; i < d; ++i) {
    const double mass = resp.comp_prob.col(i).sum();
    active[i] = mass >= kEmptyComponent;
    if (!active[i]) {
      frozen_weight += lambda_old.weights[i];
      continue;
    }
    active_mass += mass;
    const auto prob = resp.comp_prob.col(i).array();
    const Complex mu = (prob.cast<Complex>() * resp.comp_mean.col(i).array()).sum() / mass;
    const double spread = (prob * ((resp.comp_mean.col(i).array() - mu).abs2() + resp.comp_var.col(i).array())).sum();
    next.means[i] = mu;
    next.variances[i] = std::max(spread / mass, kVarianceFloor);
  }
  if (active_mass > 0.0) {
    const double share = 1.0 - frozen_weight;
    for (int i = 0; i < d; ++i)
      if (active[i]) next.weights[i] = share * resp.comp_prob.col(i).sum() / active_mass;
    // Renormalize to absorb rounding.
    double total = 0.0;
    for (double w : next.weights) total += w;
    for (double& w : next.weights) w /= total;
  }
  return next;
}

ThetaUpdate update_theta(const QuantizedVector& y, const ComplexVector& p_hat, double tau_p,
                         const ParamTheta& theta_old, const OuterLoopOptions& opts) {
  ThetaUpdate out;
  out.theta = theta_old;
  const double u_min = std::log(opts.tau_w_min);
  double u = std::max(std::log(theta_old.tau_w), u_min);
  NoiseObjective f = noise_log_likelihood(y, p_hat, tau_p, std::exp(u));

  for (int step_no = 0; step_no < opts.newton_max_steps; ++step_no) {
    const double tau = std::exp(u);
    const double grad = tau * f.d1;
    const double hess = tau * tau * f.d2 + tau * f.d1;
    if (grad == 0.0) break;
    double step = hess < 0.0 ? -grad / hess : (grad > 0.0 ? 1.0 : -1.0);
    step = std::clamp(step, -3.0, 3.0);
    if (u + step < u_min) step = u_min - u;
    if (std::abs(step) < 1e-12) break;

    bool accepted = false;
    double scale = 1.0;
    for (int bt = 0; bt < 40; ++bt, scale *= opts.newton_backtrack) {
      const double trial_u = u + scale * step;
      const NoiseObjective g = noise_log_likelihood(y, p_hat, tau_p, std::exp(trial_u));
      if (g.value > f.value) {
        u = trial_u;
        f = g;
        accepted = true;
        break;
      }
    }
    ++out.steps;
    if (!accepted) {
      // A relative slope this small means we are at the optimum to working precision.
      out.failed = std::abs(grad) > 1e-8 * std::max(1.0, std::abs(f.value));
      break;
    }
    out.improved = true;
    if (std::abs(scale * step) < 1e-10) break;
  }
  if (out.improved) out.theta.tau_w = std::exp(u);
  return out;
}

void rescale_estimate(ParamLambda& lambda, ParamTheta& theta, GampState& state, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorCode::InvalidParams, "rescale factor must be positive");
  const double c2 = c * c;
  for (auto& m : lambda.means) m *= c;
  for (auto& v : lambda.variances) v *= c2;
  theta.tau_w *= c2;
  state.x_hat *= c;
  state.p_hat *= c;
  state.z_hat *= c;
  state.r_hat *= c;
  state.s_hat /= c;
  state.tau_x *= c2;
  state.tau_p *= c2;
  state.tau_z *= c2;
  state.tau_r *= c2;
  state.tau_s /= c2;
}

std::pair<ParamLambda, ParamTheta> initialize_params(const QuantizedVector& y, const LinearOperator& op,
                                                     int components) {
  if (components < 1) throw Error(ErrorCode::InvalidParams, "components must be at least 1");
  double rho = y.size() > 0 ? dequantize(y).squaredNorm() / static_cast<double>(y.size()) : 0.0;
  if (!(rho > 0.0) || !std::isfinite(rho)) rho = 1.0;

  const double a2 = op.squared_norm_fro();
  const double energy = static_cast<double>(op.rows()) * rho / a2;

  ParamLambda lambda;
  lambda.kappa = 0.1;
  lambda.weights.assign(components, 1.0 / components);
  lambda.means.assign(components, Complex(0.0, 0.0));
  lambda.variances.resize(components);
  double mean_geometric = 0.0;
  for (int i = 0; i < components; ++i) {
    lambda.variances[i] = std::pow(10.0, i - 0.5 * (components - 1));
    mean_geometric += lambda.variances[i] / components;
  }
  const double scale = energy / (lambda.kappa * mean_geometric);
  for (double& v : lambda.variances) v *= scale;

  return {lambda, ParamTheta{0.1 * rho}};
}

JointEstimate estimate_joint(const LinearOperator& op, const QuantizedVector& y, const GampOptions& opts_inner,
                             const OuterLoopOptions& opts_outer,
                             const std::optional<std::pair<ParamLambda, ParamTheta>>& init) {
  opts_inner.validate();
  opts_outer.validate();
  if (y.size() != op.rows()) throw Error(ErrorCode::DimensionMismatch, "measurement count vs operator rows");

  auto [lambda, theta] = init ? *init : initialize_params(y, op, opts_outer.components);
  lambda.validate();
  theta.validate();

  const Index n = op.cols();
  const Index m = op.rows();
  const bool pin_scale = opts_outer.fix_scale && y.spec.scale_invariant() && y.spec.calibrated_power();
  const double row_gain = op.squared_norm_fro() / static_cast<double>(m);
  JointEstimate est;
  GampState state;
  bool warm = false;
  auto project = [&](ParamLambda& lam, ParamTheta& th) {
    const double implied = row_gain * lam.prior_energy() + th.tau_w;
    const double c = std::sqrt(*y.spec.calibrated_power() / implied);
    rescale_estimate(lam, th, state, c);
    return c;
  };
  if (pin_scale) project(lambda, theta);

  for (int e = 0; e < opts_outer.max_outer_iters; ++e) {
    const MixtureInputChannel input(lambda);
    const QuantizedOutputChannel output(y, theta);
    GampResult res = run_gamp(op, input, output, opts_inner, warm ? &state : nullptr);
    warm = true;
    state = std::move(res.state);
    est.x_hat = std::move(res.x_hat);
    est.inner_iters_total += res.iterations_used;
    est.outer_iters_used = e + 1;

    ParamLambda lambda_next = lambda;
    ParamTheta theta_next = theta;
    if (opts_outer.update_lambda) {
      const InputPosterior post = posterior_x_moments(state.r_hat.head(n), state.tau_r, lambda);
      lambda_next = update_lambda(post.resp, lambda, opts_outer);
    }
    if (opts_outer.update_theta) {
      const ThetaUpdate tu = update_theta(y, state.p_hat.head(m), state.tau_p, theta, opts_outer);
      theta_next = tu.theta;
      est.update_failed = est.update_failed || tu.failed;
    }

    if (pin_scale) est.x_hat *= project(lambda_next, theta_next);

    const double change = std::max(lambda_change(lambda, lambda_next),
                                   std::abs(theta_next.tau_w - theta.tau_w) / theta.tau_w);
    lambda = std::move(lambda_next);
    theta = theta_next;
    if (est.update_failed) break;
    if (change < opts_outer.param_tol) {
      est.converged = true;
      break;
    }
  }
  est.lambda_hat = std::move(lambda);
  est.theta_hat = theta;
  return est;
}

}  // namespace chanest
