#pragma once

#include <vector>

#include "chanest/input_channel.hpp"
#include "chanest/linear_operator.hpp"
#include "chanest/output_channel.hpp"
#include "chanest/types.hpp"

namespace chanest {

struct GampOptions {
  int max_inner_iters = 100;
  double damping_factor = 0.7;
  bool mean_removal = false;
  double tol_rel_change = 1e-6;
  double variance_floor = 1e-12;

  void validate() const;
};

/// Iterate of the scalar-variance sum-product GAMP recursion.
struct GampState {
  ComplexVector x_hat;
  double tau_x = 0.0;
  ComplexVector p_hat;
  double tau_p = 0.0;
  ComplexVector z_hat;
  double tau_z = 0.0;
  ComplexVector r_hat;
  double tau_r = 0.0;
  ComplexVector s_hat;
  double tau_s = 0.0;
  int iteration = 0;
};

struct GampResult {
  /// Posterior mean E[x | y] at the last iteration.
  ComplexVector x_hat;
  double tau_x = 0.0;
  int iterations_used = 0;
  bool converged = false;
  /// Relative change of the posterior mean per iteration.
  std::vector<double> residual_history;
  /// Final iterate, usable as a warm start. When mean removal is enabled the
  /// vectors carry the two augmentation entries at the end.
  GampState state;
};

/// factor * fresh + (1 - factor) * previous
template <typename T>
T damp(const T& fresh, const T& previous, double factor) {
  return factor * fresh + (1.0 - factor) * previous;
}

/// Scalar-variance GAMP. Uses ||A||_F^2 / (M N) as the mean squared entry:
///   tau_p = (||A||_F^2 / M) tau_x,   tau_r = 1 / ((||A||_F^2 / N) tau_s).
/// Throws NumericalDivergence if an iterate stops being finite.
GampResult run_gamp(const LinearOperator& op, const InputChannel& input, const OutputChannel& output,
                    const GampOptions& opts, const GampState* warm_start = nullptr);

}  // namespace chanest
