#include "chanest/normal.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

namespace chanest {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Laplace continued fraction for erfc, evaluated bottom-up. Converges quickly
// once x is a few units away from zero.
double erfcx_continued_fraction(double x) {
  constexpr int kTerms = 80;
  double t = x;
  for (int k = kTerms; k >= 1; --k) t = x + 0.5 * k / t;
  return 1.0 / (std::sqrt(std::numbers::pi) * t);
}

// lo*phi(lo) style products with the convention inf * 0 = 0.
double weighted(double power_of_t, double density) {
  return density == 0.0 ? 0.0 : power_of_t * density;
}

TruncatedNormal straddling(double lo, double hi, bool with_log) {
  TruncatedNormal r;
  const double mass = 0.5 * (std::erf(hi * kInvSqrt2) - std::erf(lo * kInvSqrt2));
  const double plo = std::isinf(lo) ? 0.0 : normal_pdf(lo);
  const double phi = std::isinf(hi) ? 0.0 : normal_pdf(hi);
  if (with_log) r.log_mass = std::log(mass);
  r.mean = (plo - phi) / mass;
  r.t1 = (weighted(lo, plo) - weighted(hi, phi)) / mass;
  r.t3 = (weighted(lo * lo * lo, plo) - weighted(hi * hi * hi, phi)) / mass;
  return r;
}

// Interval entirely at or below zero. Everything is expressed relative to
// phi(hi), the larger of the two densities.
TruncatedNormal lower_tail(double lo, double hi, bool with_log) {
  TruncatedNormal r;
  const double ratio = std::isinf(lo) ? 0.0 : std::exp(0.5 * (hi - lo) * (hi + lo));
  const double far = ratio == 0.0 ? 0.0 : erfcx(-lo * kInvSqrt2) * ratio;
  const double scaled_mass = 0.5 * (erfcx(-hi * kInvSqrt2) - far);
  const double norm = kInvSqrt2Pi / scaled_mass;
  if (with_log) r.log_mass = std::log(scaled_mass) - 0.5 * hi * hi;
  r.mean = (ratio - 1.0) * norm;
  r.t1 = (weighted(lo, ratio) - hi) * norm;
  r.t3 = (weighted(lo * lo * lo, ratio) - hi * hi * hi) * norm;
  return r;
}

}  // namespace

double erfcx(double x) {
  if (x < 0.0) {
    if (x < -26.0) return kInf;
    // erfc(x) lies in (1, 2) here, so the direct product is well conditioned.
    return std::exp(x * x) * std::erfc(x);
  }
  // Rounding in x^2 costs about x^2 ulp here, still below 1e-13 at the cutover.
  if (x < 10.0) return std::exp(x * x) * std::erfc(x);
  return erfcx_continued_fraction(x);
}

double normal_pdf(double t) { return kInvSqrt2Pi * std::exp(-0.5 * t * t); }

double log_normal_cdf(double t) {
  if (t == -kInf) return -kInf;
  if (t < -5.0) return std::log(0.5 * erfcx(-t * kInvSqrt2)) - 0.5 * t * t;
  return std::log(0.5 * std::erfc(-t * kInvSqrt2));
}

double TruncatedNormal::variance() const {
  const double v = 1.0 + t1 - mean * mean;
  return v > 0.0 ? v : 0.0;
}

TruncatedNormal truncated_normal(double lo, double hi, bool with_log_mass) {
  if (lo < 0.0 && hi > 0.0) return straddling(lo, hi, with_log_mass);
  if (hi <= 0.0) return lower_tail(lo, hi, with_log_mass);
  // Mirror the upper tail onto the lower one; odd moments flip sign.
  TruncatedNormal r = lower_tail(-hi, -lo, with_log_mass);
  r.mean = -r.mean;
  return r;
}

}  // namespace chanest
