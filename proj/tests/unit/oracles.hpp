#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance binary. Nothing here calls into the library's closed forms.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "chanest/input_channel.hpp"
#include "chanest/types.hpp"

namespace oracle {

using chanest::Complex;
using chanest::ComplexMatrix;
using chanest::ComplexVector;
using chanest::Index;

// log erfc(x); the Laplace continued fraction takes over where erfc
// itself would underflow.
inline double log_erfc(double x) {
  if (x < 20.0) return std::log(boost::math::erfc(x));
  double tail = x;
  for (int k = 120; k >= 1; --k) tail = x + 0.5 * k / tail;
  return -x * x - std::log(tail) - 0.5 * std::log(std::numbers::pi);
}

// log P(lo <= z + w < hi) for w ~ N(0, vw), as a function of z.
inline double log_interval_likelihood(double z, double lo, double hi, double vw) {
  const double sw = std::sqrt(vw);
  const double r2 = std::numbers::sqrt2;
  const double a = (lo - z) / (sw * r2);
  const double b = (hi - z) / (sw * r2);
  const double ninf = -std::numeric_limits<double>::infinity();
  // Difference of two upper tails, taken on whichever side keeps them small.
  auto tail_gap = [&](double near, double far) {
    const double ln = log_erfc(near);
    if (std::isinf(far)) return ln - std::log(2.0);
    const double lf = log_erfc(far);
    const double gap = -std::expm1(lf - ln);
    return gap > 0.0 ? ln + std::log(gap) - std::log(2.0) : ninf;
  };
  if (a >= 0.0) return tail_gap(a, b);
  if (b <= 0.0) return tail_gap(-b, -a);
  const double upper = std::isinf(b) ? 0.0 : 0.5 * boost::math::erfc(b);
  const double lower = std::isinf(a) ? 0.0 : 0.5 * boost::math::erfc(-a);
  return std::log1p(-(upper + lower));
}

struct ScalarMoments {
  double mean = 0.0;
  double var = 0.0;
  double log_prob = 0.0;
};

// Posterior of z ~ N(p, vp) given z + w in [lo, hi), w ~ N(0, vw > 0), by
// adaptive Gauss-Kronrod quadrature of the log-shifted integrand.
inline ScalarMoments output_moments_quadrature(double lo, double hi, double p, double vp, double vw) {
  const double sp = std::sqrt(vp);
  auto log_f = [&](double z) {
    return -0.5 * std::log(2.0 * std::numbers::pi * vp) - 0.5 * (z - p) * (z - p) / vp +
           log_interval_likelihood(z, lo, hi, vw);
  };

  // The integrand is log-concave, so golden-section search finds its mode.
  // The mode lies between p and the nearest finite bin edge.
  double a = p, b = p;
  for (double edge : {lo, hi})
    if (std::isfinite(edge)) a = std::min(a, edge), b = std::max(b, edge);
  a -= 10.0 * sp + 10.0 * std::sqrt(vw);
  b += 10.0 * sp + 10.0 * std::sqrt(vw);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = log_f(c), fd = log_f(d);
  for (int it = 0; it < 300 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
    if (fc > fd) {
      b = d, d = c, fd = fc;
      c = b - g * (b - a), fc = log_f(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + g * (b - a), fd = log_f(d);
    }
  }
  const double mode = 0.5 * (a + b);
  const double top = log_f(mode);

  // Local width from the curvature at the mode; the prior factor alone
  // bounds the tails beyond 14 prior standard deviations.
  const double h = 1e-4 * sp;
  const double curv = -(log_f(mode + h) - 2.0 * top + log_f(mode - h)) / (h * h);
  const double local = curv > 0.0 && std::isfinite(curv) ? std::min(sp, 1.0 / std::sqrt(curv)) : sp;
  std::vector<double> cuts;
  for (double k : {-14.0, -6.0, -2.0, -0.5, 0.0, 0.5, 2.0, 6.0, 14.0}) cuts.push_back(mode + k * local);
  cuts.push_back(mode - 14.0 * sp);
  cuts.push_back(mode + 14.0 * sp);
  // Bin edges become steps of width sqrt(vw); resolve them explicitly.
  const double sw = std::sqrt(vw);
  for (double edge : {lo, hi}) {
    if (!std::isfinite(edge)) continue;
    for (double k : {-10.0, -4.0, -1.0, 0.0, 1.0, 4.0, 10.0}) cuts.push_back(edge + k * sw);
  }
  std::sort(cuts.begin(), cuts.end());
  const double lo_cut = mode - 14.0 * sp, hi_cut = mode + 14.0 * sp;
  std::erase_if(cuts, [&](double c) { return c < lo_cut || c > hi_cut; });

  // Fixed composite Kronrod rule: an adaptive one chases a relative
  // tolerance on the centred first moment, which is near zero, and never
  // terminates. All three moments share one set of integrand values.
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const auto& nodes = GK::abscissa();
  const auto& wts = GK::weights();
  constexpr int kSplit = 6;
  double z0 = 0.0, z1 = 0.0, z2 = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    const double step = (cuts[i + 1] - cuts[i]) / kSplit;
    for (int s = 0; s < kSplit; ++s) {
      const double half = 0.5 * step;
      const double mid = cuts[i] + s * step + half;
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        for (double sign : {1.0, -1.0}) {
          if (k == 0 && sign < 0.0) continue;
          const double z = mid + sign * half * nodes[k];
          const double f = half * wts[k] * std::exp(log_f(z) - top);
          z0 += f;
          z1 += (z - mode) * f;
          z2 += (z - mode) * (z - mode) * f;
        }
      }
    }
  }
  const double m1 = z1 / z0;
  const double mean = mode + m1;
  const double var = z2 / z0 - m1 * m1;
  return {mean, var, top + std::log(z0)};
}

struct InputMoments {
  Complex mean;
  double var = 0.0;
  double log_evidence = 0.0;
};

// Posterior of x under the spike-and-mixture prior given r = x + CN(0, tau_r)
// by direct summation over the grid [-4, 4]^2 at the given step. The spike
// contributes its point mass analytically.
inline InputMoments input_moments_grid(Complex r, double tau_r, const chanest::ParamLambda& lam, double step = 0.005) {
  const int n = static_cast<int>(std::lround(8.0 / step)) + 1;
  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) grid[i] = -4.0 + step * i;
  const double cell = step * step;
  const double pi = std::numbers::pi;

  double i0 = 0.0, i2 = 0.0;
  Complex i1 = 0.0;
  std::vector<double> au(n), bv(n);
  for (int c = 0; c < lam.components(); ++c) {
    const double nu = lam.variances[c];
    const Complex mu = lam.means[c];
    const double scale = lam.kappa * lam.weights[c] / (pi * nu * pi * tau_r);
    // CN densities factor into real and imaginary exponentials.
    for (int i = 0; i < n; ++i) {
      const double u = grid[i];
      au[i] = std::exp(-(u - mu.real()) * (u - mu.real()) / nu - (r.real() - u) * (r.real() - u) / tau_r);
      bv[i] = std::exp(-(u - mu.imag()) * (u - mu.imag()) / nu - (r.imag() - u) * (r.imag() - u) / tau_r);
    }
    double s0 = 0.0, s2 = 0.0;
    Complex s1 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double u = grid[i];
      for (int j = 0; j < n; ++j) {
        const double v = grid[j];
        const double f = au[i] * bv[j];
        s0 += f;
        s1 += Complex(u * f, v * f);
        s2 += (u * u + v * v) * f;
      }
    }
    i0 += scale * cell * s0;
    i1 += scale * cell * s1;
    i2 += scale * cell * s2;
  }
  const double spike = (1.0 - lam.kappa) * std::exp(-std::norm(r) / tau_r) / (pi * tau_r);
  const double z = spike + i0;
  InputMoments out;
  out.mean = i1 / z;
  out.var = i2 / z - std::norm(out.mean);
  out.log_evidence = std::log(z);
  return out;
}

// Linear MMSE estimate of x ~ CN(mu 1, nu I) from y = A x + CN(0, tau_w I).
inline ComplexVector lmmse(const ComplexMatrix& a, const ComplexVector& y, Complex mu, double nu, double tau_w) {
  const Index m = a.rows();
  const ComplexVector prior_mean = ComplexVector::Constant(a.cols(), mu);
  const ComplexMatrix cov = nu * a * a.adjoint() + tau_w * ComplexMatrix::Identity(m, m);
  return prior_mean + nu * a.adjoint() * cov.ldlt().solve(y - a * prior_mean);
}

inline ComplexMatrix random_gaussian_matrix(Index m, Index n, double entry_var, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5 * entry_var));
  ComplexMatrix a(m, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < m; ++i) a(i, j) = Complex(g(rng), g(rng));
  return a;
}

inline ComplexVector random_cn(Index n, double var, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, std::sqrt(0.5 * var));
  ComplexVector v(n);
  for (Index i = 0; i < n; ++i) v[i] = Complex(g(rng), g(rng));
  return v;
}

}  // namespace oracle
