#pragma once

#include <cstdint>
#include <optional>

#include "chanest/gamp.hpp"
#include "chanest/input_channel.hpp"
#include "chanest/linear_operator.hpp"
#include "chanest/output_channel.hpp"
#include "chanest/quantizer.hpp"

namespace chanest {

struct LeastSquaresResult {
  ComplexVector x;
  int iterations = 0;
  /// False on stagnation or when max iterations ran out; x is the best iterate.
  bool converged = false;
};

/// min_x ||A x - b||^2 by conjugate gradients on the normal equations (CGLS).
/// Stops once ||A^H (b - A x)|| <= tol ||A^H b||.
LeastSquaresResult least_squares(const LinearOperator& op, const ComplexVector& target, int max_cg_iters, double tol);

/// Least squares against the dequantized measurements.
LeastSquaresResult least_squares(const LinearOperator& op, const QuantizedVector& y, int max_cg_iters, double tol);

struct IhtOptions {
  Index sparsity = 1;
  /// Gradient step; empty selects 0.9 / ||A||_2^2.
  std::optional<double> step_size;
  int max_iters = 200;
  double tol = 1e-6;
};

struct IhtResult {
  ComplexVector x;
  int iterations = 0;
  bool converged = false;
};

/// Keep the k largest-magnitude entries (ties resolved toward lower index).
ComplexVector hard_threshold(const ComplexVector& x, Index k);

/// Largest eigenvalue of A^H A by power iteration.
double spectral_norm_sq(const LinearOperator& op, int iters, std::uint64_t seed);

/// Iterative hard thresholding on the dequantized residual:
///   x <- H_k(x + step * A^H (b - A x)).
/// Throws NumericalDivergence when the residual grows tenfold over its start.
IhtResult iht(const LinearOperator& op, const ComplexVector& target, const IhtOptions& opts,
              std::optional<double> spectral_norm2 = std::nullopt);
IhtResult iht(const LinearOperator& op, const QuantizedVector& y, const IhtOptions& opts,
              std::optional<double> spectral_norm2 = std::nullopt);

/// GAMP with the true generating parameters and no parameter updates.
GampResult amp_oracle(const LinearOperator& op, const QuantizedVector& y, const ParamLambda& lambda_true,
                      const ParamTheta& theta_true, const GampOptions& opts);

/// Mixture parameters fitted by EM directly to a known signal, treating each
/// entry as observed through CN(0, resolution). The spike absorbs entries
/// whose energy is small relative to the resolution.
ParamLambda fit_prior_to_signal(const ComplexVector& x, int components, double resolution, int em_iters = 200);

/// Smallest number of largest-magnitude entries holding the given energy fraction.
Index effective_support(const ComplexVector& x, double energy_fraction);

}  // namespace chanest
