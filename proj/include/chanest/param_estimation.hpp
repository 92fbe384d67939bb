#pragma once

#include <optional>
#include <utility>

#include "chanest/gamp.hpp"
#include "chanest/input_channel.hpp"
#include "chanest/linear_operator.hpp"
#include "chanest/output_channel.hpp"
#include "chanest/quantizer.hpp"

namespace chanest {

struct OuterLoopOptions {
  int max_outer_iters = 20;
  double param_tol = 1e-4;
  double tau_w_min = 1e-12;
  double kappa_lo = 1e-4;
  double kappa_hi = 1.0 - 1e-4;
  int newton_max_steps = 20;
  double newton_backtrack = 0.5;
  /// Mixture size used by initialize_params.
  int components = 4;
  /// Disable the parameter updates (GAMP with fixed parameters).
  bool update_lambda = true;
  bool update_theta = true;
  /// With a scale-invariant quantizer the likelihood cannot tell (x, tau_w)
  /// from (c x, c^2 tau_w). When the quantizer records its calibrated input
  /// power, rescale after every update so that
  ///   (||A||_F^2 / M) E_lambda|x|^2 + tau_w
  /// equals that power.
  bool fix_scale = true;

  void validate() const;
};

struct JointEstimate {
  ComplexVector x_hat;
  ParamLambda lambda_hat;
  ParamTheta theta_hat;
  int outer_iters_used = 0;
  int inner_iters_total = 0;
  bool converged = false;
  /// A parameter update could not improve its objective; the loop stopped early.
  bool update_failed = false;
};

/// EM maximizer of the summed prior log-evidence given the E-step statistics.
/// Components with total responsibility below 1e-8 keep their old parameters.
ParamLambda update_lambda(const Responsibilities& resp, const ParamLambda& lambda_old,
                          const OuterLoopOptions& opts);

struct ThetaUpdate {
  ParamTheta theta;
  /// False when no step improved the objective (theta equals the input).
  bool improved = false;
  /// True when the objective could not be increased although its slope is nonzero.
  bool failed = false;
  int steps = 0;
};

/// Maximizes sum_m log P(y_m | p_hat_m, tau_p, tau_w) over tau_w by a
/// backtracking Newton iteration in log(tau_w).
ThetaUpdate update_theta(const QuantizedVector& y, const ComplexVector& p_hat, double tau_p,
                         const ParamTheta& theta_old, const OuterLoopOptions& opts);

/// Multiplies lambda's means by c and variances by c^2, tau_w by c^2, and
/// every GAMP state quantity by the matching power of c.
void rescale_estimate(ParamLambda& lambda, ParamTheta& theta, GampState& state, double c);

/// Starting point derived from the dequantized measurement energy.
std::pair<ParamLambda, ParamTheta> initialize_params(const QuantizedVector& y, const LinearOperator& op,
                                                     int components = 4);

/// Alternate GAMP with the parameter updates until the parameters settle.
JointEstimate estimate_joint(const LinearOperator& op, const QuantizedVector& y, const GampOptions& opts_inner,
                             const OuterLoopOptions& opts_outer,
                             const std::optional<std::pair<ParamLambda, ParamTheta>>& init = std::nullopt);

}  // namespace chanest
