#include "chanest/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "chanest/error.hpp"
#include "chanest/param_estimation.hpp"

namespace chanest {

LeastSquaresResult least_squares(const LinearOperator& op, const ComplexVector& target, int max_cg_iters, double tol) {
  if (target.size() != op.rows()) throw Error(ErrorCode::DimensionMismatch, "least_squares: target length");
  LeastSquaresResult res;
  res.x = ComplexVector::Zero(op.cols());
  ComplexVector r = target;
  ComplexVector s = op.adjoint(r);
  const double rhs_norm = s.norm();
  if (rhs_norm == 0.0) {
    res.converged = true;
    return res;
  }
  ComplexVector p = s;
  double gamma = s.squaredNorm();
  for (int it = 0; it < max_cg_iters; ++it) {
    const ComplexVector q = op.forward(p);
    const double qq = q.squaredNorm();
    if (!(qq > 0.0)) break;  // stagnation
    const double alpha = gamma / qq;
    res.x += alpha * p;
    r -= alpha * q;
    s = op.adjoint(r);
    const double gamma_next = s.squaredNorm();
    res.iterations = it + 1;
    if (std::sqrt(gamma_next) <= tol * rhs_norm) {
      res.converged = true;
      break;
    }
    p = s + (gamma_next / gamma) * p;
    gamma = gamma_next;
  }
  return res;
}

LeastSquaresResult least_squares(const LinearOperator& op, const QuantizedVector& y, int max_cg_iters, double tol) {
  return least_squares(op, dequantize(y), max_cg_iters, tol);
}

ComplexVector hard_threshold(const ComplexVector& x, Index k) {
  const Index n = x.size();
  if (k >= n) return x;
  ComplexVector out = ComplexVector::Zero(n);
  if (k <= 0) return out;
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::nth_element(order.begin(), order.begin() + (k - 1), order.end(), [&](Index a, Index b) {
    const double ma = std::norm(x[a]);
    const double mb = std::norm(x[b]);
    return ma > mb || (ma == mb && a < b);
  });
  for (Index i = 0; i < k; ++i) out[order[i]] = x[order[i]];
  return out;
}

double spectral_norm_sq(const LinearOperator& op, int iters, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexVector v(op.cols());
  for (Index i = 0; i < v.size(); ++i) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v[i] = Complex(re, im);
  }
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    ComplexVector w = op.adjoint(op.forward(v));
    lambda = w.norm();
    if (lambda == 0.0) break;
    v = w / lambda;
  }
  return lambda;
}

IhtResult iht(const LinearOperator& op, const ComplexVector& target, const IhtOptions& opts,
              std::optional<double> spectral_norm2) {
  if (target.size() != op.rows()) throw Error(ErrorCode::DimensionMismatch, "iht: target length");
  if (opts.sparsity < 1 || opts.sparsity > op.cols())
    throw Error(ErrorCode::InvalidParams, "iht: sparsity must lie in [1, N]");
  if (opts.max_iters < 1) throw Error(ErrorCode::InvalidParams, "iht: max_iters must be at least 1");

  double step = 0.0;
  if (opts.step_size) {
    step = *opts.step_size;
  } else {
    const double l2 = spectral_norm2 ? *spectral_norm2 : spectral_norm_sq(op, 50, 0x1f7ULL);
    step = 0.9 / l2;
  }
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidParams, "iht: step size must be positive");

  IhtResult res;
  res.x = ComplexVector::Zero(op.cols());
  const double start = target.norm();
  for (int it = 0; it < opts.max_iters; ++it) {
    const ComplexVector resid = target - op.forward(res.x);
    if (resid.norm() > 10.0 * start && start > 0.0)
      throw Error(ErrorCode::NumericalDivergence, "iht: residual grew tenfold (DivergenceDetected)");
    ComplexVector next = hard_threshold(res.x + step * op.adjoint(resid), opts.sparsity);
    const double scale = next.norm();
    const double change = (next - res.x).norm() / (scale > 0.0 ? scale : 1.0);
    res.x = std::move(next);
    res.iterations = it + 1;
    if (change < opts.tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

IhtResult iht(const LinearOperator& op, const QuantizedVector& y, const IhtOptions& opts,
              std::optional<double> spectral_norm2) {
  return iht(op, dequantize(y), opts, spectral_norm2);
}

GampResult amp_oracle(const LinearOperator& op, const QuantizedVector& y, const ParamLambda& lambda_true,
                      const ParamTheta& theta_true, const GampOptions& opts) {
  const MixtureInputChannel input(lambda_true);
  const QuantizedOutputChannel output(y, theta_true);
  return run_gamp(op, input, output, opts);
}

ParamLambda fit_prior_to_signal(const ComplexVector& x, int components, double resolution, int em_iters) {
  if (x.size() == 0) throw Error(ErrorCode::EmptyInput, "fit_prior_to_signal: empty signal");
  const double energy = x.squaredNorm() / static_cast<double>(x.size());
  if (!(energy > 0.0)) throw Error(ErrorCode::ZeroReference, "fit_prior_to_signal: zero signal");

  ParamLambda lambda;
  lambda.kappa = 0.5;
  lambda.weights.assign(components, 1.0 / components);
  lambda.means.assign(components, Complex(0.0, 0.0));
  for (int i = 0; i < components; ++i) lambda.variances.push_back(energy * std::pow(10.0, i - 0.5 * (components - 1)));

  OuterLoopOptions opts;
  for (int it = 0; it < em_iters; ++it) {
    const InputPosterior post = posterior_x_moments(x, resolution, lambda);
    lambda = update_lambda(post.resp, lambda, opts);
  }
  return lambda;
}

Index effective_support(const ComplexVector& x, double energy_fraction) {
  std::vector<double> mags(x.size());
  for (Index i = 0; i < x.size(); ++i) mags[i] = std::norm(x[i]);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  const double total = std::accumulate(mags.begin(), mags.end(), 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < mags.size(); ++i) {
    acc += mags[i];
    if (acc >= energy_fraction * total) return static_cast<Index>(i + 1);
  }
  return x.size();
}

}  // namespace chanest
