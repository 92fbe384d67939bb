#include "chanest/gamp.hpp"

#include <cmath>
#include <memory>
#include <string>

#include "chanest/error.hpp"

namespace chanest {
namespace {

// Extends a channel pair to the mean-removed system: the two extra unknowns
// get a flat prior and the two extra measurements are hard zero constraints.
class AugmentedInput final : public InputChannel {
 public:
  explicit AugmentedInput(const InputChannel& base) : base_(base) {}

  Estimate estimate(const ComplexVector& r_hat, double tau_r) const override {
    const Index n = r_hat.size() - 2;
    Estimate inner = base_.estimate(r_hat.head(n), tau_r);
    Estimate out;
    out.x_hat.resize(n + 2);
    out.x_hat.head(n) = inner.x_hat;
    out.x_hat.tail(2) = r_hat.tail(2);
    out.tau_x = (inner.tau_x * n + 2.0 * tau_r) / static_cast<double>(n + 2);
    return out;
  }
  Complex initial_mean() const override { return base_.initial_mean(); }
  double initial_variance() const override { return base_.initial_variance(); }

 private:
  const InputChannel& base_;
};

class AugmentedOutput final : public OutputChannel {
 public:
  explicit AugmentedOutput(const OutputChannel& base) : base_(base) {}

  Index size() const override { return base_.size() + 2; }
  OutputPosterior estimate(const ComplexVector& p_hat, double tau_p) const override {
    const Index m = p_hat.size() - 2;
    OutputPosterior inner = base_.estimate(p_hat.head(m), tau_p);
    OutputPosterior out;
    out.z_hat.resize(m + 2);
    out.z_hat.head(m) = inner.z_hat;
    out.z_hat.tail(2).setZero();
    out.tau_z = inner.tau_z * m / static_cast<double>(m + 2);
    return out;
  }

 private:
  const OutputChannel& base_;
};

bool finite(const ComplexVector& v) { return v.allFinite(); }

void require(bool ok, const GampState& s, const char* what) {
  if (!ok)
    throw Error(ErrorCode::NumericalDivergence,
                std::string(what) + " at iteration " + std::to_string(s.iteration) +
                    " (tau_x=" + std::to_string(s.tau_x) + ", tau_p=" + std::to_string(s.tau_p) +
                    ", tau_r=" + std::to_string(s.tau_r) + ")");
}

GampResult iterate(const LinearOperator& op, const InputChannel& input, const OutputChannel& output,
                   const GampOptions& opts, const GampState* warm) {
  const Index m = op.rows();
  const Index n = op.cols();
  if (output.size() != m) throw Error(ErrorCode::DimensionMismatch, "operator rows vs observations");

  const double a2 = op.squared_norm_fro();
  if (!(a2 > 0.0)) throw Error(ErrorCode::DimensionMismatch, "operator has zero Frobenius norm");
  const double row_gain = a2 / static_cast<double>(m);
  const double col_gain = a2 / static_cast<double>(n);
  const double floor = opts.variance_floor;

  GampState st;
  bool have_s = false;
  if (warm != nullptr && warm->x_hat.size() == n && warm->s_hat.size() == m) {
    st = *warm;
    have_s = true;
  } else {
    st.x_hat = ComplexVector::Constant(n, input.initial_mean());
    st.tau_x = std::max(input.initial_variance(), floor);
    st.s_hat = ComplexVector::Zero(m);
    st.tau_s = 0.0;
  }

  GampResult res;
  ComplexVector previous_post;
  const int start_iter = st.iteration;
  for (int t = 0; t < opts.max_inner_iters; ++t) {
    st.iteration = start_iter + t + 1;

    // Output side.
    st.tau_p = row_gain * st.tau_x;
    st.p_hat = op.forward(st.x_hat) - st.tau_p * st.s_hat;
    OutputPosterior out = output.estimate(st.p_hat, st.tau_p);
    st.z_hat = std::move(out.z_hat);
    st.tau_z = std::max(out.tau_z, floor);
    const ComplexVector s_new = (st.z_hat - st.p_hat) / st.tau_p;
    const double tau_s_new = std::max((1.0 - st.tau_z / st.tau_p) / st.tau_p, floor);
    if (have_s) {
      st.s_hat = damp(s_new, st.s_hat, opts.damping_factor);
      st.tau_s = damp(tau_s_new, st.tau_s, opts.damping_factor);
    } else {
      st.s_hat = s_new;
      st.tau_s = tau_s_new;
      have_s = true;
    }

    // Input side.
    st.tau_r = 1.0 / (col_gain * st.tau_s);
    st.r_hat = st.x_hat + st.tau_r * op.adjoint(st.s_hat);
    require(std::isfinite(st.tau_r) && finite(st.r_hat), st, "non-finite pseudo-measurement");
    InputChannel::Estimate in = input.estimate(st.r_hat, st.tau_r);
    require(finite(in.x_hat) && std::isfinite(in.tau_x), st, "non-finite posterior mean");

    double change = 0.0;
    if (previous_post.size() == n) {
      const double scale = in.x_hat.norm();
      const double diff = (in.x_hat - previous_post).norm();
      change = scale > 0.0 ? diff / scale : (diff > 0.0 ? 1.0 : 0.0);
    } else if (warm != nullptr && warm->x_hat.size() == n) {
      const double scale = in.x_hat.norm();
      const double diff = (in.x_hat - warm->x_hat).norm();
      change = scale > 0.0 ? diff / scale : (diff > 0.0 ? 1.0 : 0.0);
    } else {
      change = 1.0;
    }
    res.residual_history.push_back(change);

    const double tau_x_new = std::max(in.tau_x, floor);
    st.x_hat = damp(in.x_hat, st.x_hat, opts.damping_factor);
    st.tau_x = damp(tau_x_new, st.tau_x, opts.damping_factor);
    require(st.tau_x > 0.0 && std::isfinite(st.tau_x) && st.tau_p > 0.0 && std::isfinite(st.tau_p), st,
            "variance left the positive finite range");

    res.x_hat = std::move(in.x_hat);
    res.tau_x = in.tau_x;
    res.iterations_used = t + 1;
    previous_post = res.x_hat;
    if (t > 0 && change < opts.tol_rel_change) {
      res.converged = true;
      break;
    }
  }
  res.state = std::move(st);
  return res;
}

}  // namespace

void GampOptions::validate() const {
  if (max_inner_iters < 1) throw Error(ErrorCode::InvalidParams, "max_inner_iters must be at least 1");
  if (!(damping_factor > 0.0 && damping_factor <= 1.0))
    throw Error(ErrorCode::InvalidParams, "damping_factor must lie in (0, 1]");
  if (!(tol_rel_change >= 0.0)) throw Error(ErrorCode::InvalidParams, "tol_rel_change must be nonnegative");
  if (!(variance_floor > 0.0)) throw Error(ErrorCode::InvalidParams, "variance_floor must be positive");
}

GampResult run_gamp(const LinearOperator& op, const InputChannel& input, const OutputChannel& output,
                    const GampOptions& opts, const GampState* warm_start) {
  opts.validate();
  if (!opts.mean_removal) return iterate(op, input, output, opts, warm_start);

  // Non-owning handle; the wrapper does not outlive this call.
  std::shared_ptr<const LinearOperator> base(&op, [](const LinearOperator*) {});
  const MeanRemovedOperator wrapped(base);
  const AugmentedInput aug_in(input);
  const AugmentedOutput aug_out(output);
  GampResult res = iterate(wrapped, aug_in, aug_out, opts, warm_start);
  res.x_hat.conservativeResize(op.cols());
  return res;
}

}  // namespace chanest
