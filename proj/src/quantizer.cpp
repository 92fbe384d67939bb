#include "chanest/quantizer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "chanest/error.hpp"
#include "chanest/normal.hpp"

namespace chanest {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Contribution of bin [lo, hi) with representative b to E[(v - b)^2] for
// v ~ N(0, 1). Uses the truncated-moment identities so the far bins stay
// accurate.
double bin_mse(double lo, double hi, double b) {
  const TruncatedNormal t = truncated_normal(lo, hi);
  const double mass = std::exp(t.log_mass);
  const double second = 1.0 + t.t1;
  return mass * (second - 2.0 * b * t.mean + b * b);
}

}  // namespace

QuantizerSpec::QuantizerSpec(std::vector<double> interior, std::vector<double> symbols)
    : symbols_(std::move(symbols)) {
  const std::size_t bins = symbols_.size();
  if (bins == 0 || !std::has_single_bit(bins))
    throw Error(ErrorCode::InvalidParams, "quantizer needs a power-of-two number of symbols");
  if (interior.size() + 1 != bins)
    throw Error(ErrorCode::InvalidParams, "quantizer needs exactly bins - 1 interior thresholds");
  bits_ = std::countr_zero(bins);

  thresholds_.reserve(bins + 1);
  thresholds_.push_back(-kInf);
  for (double a : interior) {
    if (!std::isfinite(a)) throw Error(ErrorCode::InvalidParams, "interior thresholds must be finite");
    if (a <= thresholds_.back())
      throw Error(ErrorCode::InvalidParams, "thresholds must be strictly increasing");
    thresholds_.push_back(a);
  }
  thresholds_.push_back(kInf);

  for (std::size_t k = 0; k < bins; ++k) {
    const double b = symbols_[k];
    if (!std::isfinite(b) || b < thresholds_[k] || b >= thresholds_[k + 1])
      throw Error(ErrorCode::InvalidParams, "symbol " + std::to_string(k + 1) + " lies outside its bin");
  }
}

QuantizerSpec QuantizerSpec::uninformative() { return QuantizerSpec({}, {0.0}); }

int QuantizerSpec::bin_of(double v) const {
  const auto it = std::upper_bound(thresholds_.begin(), thresholds_.end(), v);
  return static_cast<int>(it - thresholds_.begin());
}

std::vector<double> QuantizerSpec::interior_thresholds() const {
  return {thresholds_.begin() + 1, thresholds_.end() - 1};
}

bool QuantizerSpec::scale_invariant() const {
  return std::all_of(thresholds_.begin() + 1, thresholds_.end() - 1, [](double a) { return a == 0.0; });
}

void QuantizerSpec::set_calibrated_power(std::optional<double> power) {
  if (power && !(*power > 0.0 && std::isfinite(*power)))
    throw Error(ErrorCode::InvalidParams, "calibrated power must be positive and finite");
  calibrated_power_ = power;
}

double uniform_quantizer_mse(int bits, double step) {
  const int bins = 1 << bits;
  const double half = 0.5 * bins;
  double mse = 0.0;
  for (int k = 0; k < bins; ++k) {
    const double lo = k == 0 ? -kInf : (k - half) * step;
    const double hi = k == bins - 1 ? kInf : (k + 1 - half) * step;
    mse += bin_mse(lo, hi, (k + 0.5 - half) * step);
  }
  return mse;
}

double optimal_uniform_step(int bits) {
  if (bits < 1) throw Error(ErrorCode::InvalidBitDepth, "bit depth must be at least 1");
  switch (bits) {
    case 1: return 1.5956;
    case 2: return 0.9957;
    case 3: return 0.5860;
    default: break;
  }
  // Golden-section search; the MSE is unimodal in the step on this bracket.
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double lo = 1e-3;
  double hi = 8.0 / (1 << (bits - 1));
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = uniform_quantizer_mse(bits, x1);
  double f2 = uniform_quantizer_mse(bits, x2);
  while (hi - lo > 1e-10) {
    if (f1 < f2) {
      hi = x2, x2 = x1, f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = uniform_quantizer_mse(bits, x1);
    } else {
      lo = x1, x1 = x2, f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = uniform_quantizer_mse(bits, x2);
    }
  }
  return 0.5 * (lo + hi);
}

QuantizerSpec default_quantizer(int bits, double input_rms) {
  if (bits < 1) throw Error(ErrorCode::InvalidBitDepth, "bit depth must be at least 1");
  if (!(input_rms > 0.0) || !std::isfinite(input_rms))
    throw Error(ErrorCode::InvalidParams, "input_rms must be positive and finite");
  const double step = optimal_uniform_step(bits) * input_rms / std::sqrt(2.0);
  const int bins = 1 << bits;
  const double half = 0.5 * bins;
  std::vector<double> interior;
  std::vector<double> symbols;
  for (int k = 1; k < bins; ++k) interior.push_back((k - half) * step);
  for (int k = 0; k < bins; ++k) symbols.push_back((k + 0.5 - half) * step);
  QuantizerSpec spec(std::move(interior), std::move(symbols));
  spec.set_calibrated_power(input_rms * input_rms);
  return spec;
}

QuantizedVector quantize(const ComplexVector& v, const QuantizerSpec& spec) {
  QuantizedVector out;
  out.spec = spec;
  out.re_idx.resize(v.size());
  out.im_idx.resize(v.size());
  for (Index m = 0; m < v.size(); ++m) {
    const double re = v[m].real();
    const double im = v[m].imag();
    if (std::isnan(re) || std::isnan(im))
      throw Error(ErrorCode::QuantizeNaN, "NaN at measurement " + std::to_string(m));
    out.re_idx[m] = spec.bin_of(re);
    out.im_idx[m] = spec.bin_of(im);
  }
  return out;
}

ComplexVector dequantize(const QuantizedVector& y) {
  ComplexVector out(y.size());
  for (Index m = 0; m < y.size(); ++m)
    out[m] = Complex(y.spec.symbol(y.re_idx[m]), y.spec.symbol(y.im_idx[m]));
  return out;
}

}  // namespace chanest
