#pragma once

namespace chanest {

/// Scaled complementary error function exp(x^2) * erfc(x).
/// Accurate over the whole real line except where the result overflows
/// (x below about -26.6).
double erfcx(double x);

/// Standard normal density.
double normal_pdf(double t);

/// log Phi(t), stable for large negative t.
double log_normal_cdf(double t);

/// Statistics of a standard normal restricted to [lo, hi). Either end may be
/// infinite. With P = Phi(hi) - Phi(lo):
///   mean   = (phi(lo) - phi(hi)) / P                 = E[t]
///   t1     = (lo phi(lo) - hi phi(hi)) / P           so E[t^2] = 1 + t1
///   t3     = (lo^3 phi(lo) - hi^3 phi(hi)) / P
/// Far tails are handled by factoring out the dominant exponential and
/// evaluating the remainder through erfcx, so nothing underflows for finite
/// limits.
struct TruncatedNormal {
  double log_mass = 0.0;
  double mean = 0.0;
  double t1 = 0.0;
  double t3 = 0.0;

  double variance() const;
};

/// with_log_mass = false leaves log_mass at 0 and skips the logarithm.
TruncatedNormal truncated_normal(double lo, double hi, bool with_log_mass = true);

}  // namespace chanest
