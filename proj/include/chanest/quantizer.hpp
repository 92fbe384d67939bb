#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chanest/types.hpp"

namespace chanest {

/// Scalar quantizer applied separately to the real and imaginary parts.
///
/// Bins are numbered 1..B (B = 2^bits). Bin k covers the half-open interval
/// [thresholds[k-1], thresholds[k]) with thresholds.front() = -inf and
/// thresholds.back() = +inf, and is represented by symbols[k-1].
class QuantizerSpec {
 public:
  /// Validates and builds a spec from the finite interior thresholds
  /// (strictly increasing, B - 1 of them) and the B bin symbols.
  QuantizerSpec(std::vector<double> interior_thresholds, std::vector<double> symbols);

  /// Single-bin spec that carries no information about its input.
  static QuantizerSpec uninformative();

  int bits() const { return bits_; }
  int bins() const { return static_cast<int>(symbols_.size()); }
  const std::vector<double>& thresholds() const { return thresholds_; }
  const std::vector<double>& symbols() const { return symbols_; }

  /// Interval of bin k (1-based).
  double lower(int bin) const { return thresholds_[bin - 1]; }
  double upper(int bin) const { return thresholds_[bin]; }
  double symbol(int bin) const { return symbols_[bin - 1]; }

  /// 1-based bin index of a finite real value.
  int bin_of(double v) const;

  std::vector<double> interior_thresholds() const;

  /// True when every interior threshold is zero, so the bin of v never
  /// changes under v -> c v for c > 0.
  bool scale_invariant() const;

  /// E|v|^2 of the complex input the thresholds were calibrated for, if known.
  const std::optional<double>& calibrated_power() const { return calibrated_power_; }
  void set_calibrated_power(std::optional<double> power);

 private:
  int bits_ = 0;
  std::optional<double> calibrated_power_;
  std::vector<double> thresholds_;
  std::vector<double> symbols_;
};

/// Quantized complex measurements: per-component bin indices plus the spec.
struct QuantizedVector {
  std::vector<int> re_idx;
  std::vector<int> im_idx;
  QuantizerSpec spec = QuantizerSpec::uninformative();

  Index size() const { return static_cast<Index>(re_idx.size()); }
};

/// Step size of the minimum-MSE uniform quantizer with 2^bits levels for a
/// unit-variance real Gaussian input. Tabulated for 1-3 bits, computed by
/// one-dimensional minimization above that.
double optimal_uniform_step(int bits);

/// Mean squared error of the symmetric mid-rise uniform quantizer with 2^bits
/// levels and the given step, for a unit-variance real Gaussian input.
double uniform_quantizer_mse(int bits, double step);

/// Symmetric mid-rise uniform quantizer scaled for a complex input whose
/// E|v|^2 equals input_rms^2 (so each real component has RMS input_rms/sqrt(2)).
/// Records input_rms^2 as the calibrated power.
QuantizerSpec default_quantizer(int bits, double input_rms);

/// Map each component to the bin containing it. Throws QuantizeNaN on NaN.
QuantizedVector quantize(const ComplexVector& v, const QuantizerSpec& spec);

/// Replace every bin index by its symbol value.
ComplexVector dequantize(const QuantizedVector& y);

}  // namespace chanest
