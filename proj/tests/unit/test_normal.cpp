#include <cmath>
#include <limits>

#include <boost/math/special_functions/erf.hpp>

#include "chanest/normal.hpp"
#include "doctest.h"

using chanest::erfcx;
using chanest::truncated_normal;

TEST_CASE("erfcx agrees with exp(x^2) erfc(x) evaluated in extended precision") {
  for (double x = -20.0; x <= 25.0; x += 0.173) {
    const long double ref = std::exp(static_cast<long double>(x) * x) * boost::math::erfc(static_cast<long double>(x));
    CHECK(erfcx(x) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
  }
}

TEST_CASE("erfcx is continuous across the continued-fraction cutover") {
  const double below = erfcx(std::nextafter(10.0, 0.0));
  const double above = erfcx(10.0);
  CHECK(std::abs(below - above) / above < 1e-13);
}

TEST_CASE("erfcx asymptote for large arguments") {
  const double x = 1e6;
  CHECK(erfcx(x) == doctest::Approx(1.0 / (x * std::sqrt(M_PI))).epsilon(1e-12));
  CHECK(std::isinf(erfcx(-30.0)));
}

TEST_CASE("log_normal_cdf stays finite deep in the lower tail") {
  CHECK(chanest::log_normal_cdf(0.0) == doctest::Approx(std::log(0.5)));
  const double t = -40.0;
  // Mills ratio: Phi(t) ~ phi(t) / |t| (1 - 1/t^2 + 3/t^4)
  const double approx = -0.5 * t * t - std::log(std::sqrt(2 * M_PI) * -t) + std::log1p(-1.0 / (t * t) + 3.0 / std::pow(t, 4));
  CHECK(chanest::log_normal_cdf(t) == doctest::Approx(approx).epsilon(1e-9));
}

TEST_CASE("truncated normal moments on a symmetric interval and a half line") {
  const auto sym = truncated_normal(-1.0, 1.0);
  CHECK(std::abs(sym.mean) < 1e-15);
  CHECK(std::exp(sym.log_mass) == doctest::Approx(std::erf(1.0 / std::sqrt(2.0))));

  const auto half = truncated_normal(0.0, std::numeric_limits<double>::infinity());
  CHECK(half.mean == doctest::Approx(std::sqrt(2.0 / M_PI)));
  CHECK(half.variance() == doctest::Approx(1.0 - 2.0 / M_PI));
  CHECK(half.log_mass == doctest::Approx(std::log(0.5)));
}

TEST_CASE("truncated normal far in either tail is finite and mirror symmetric") {
  for (double a : {8.0, 30.0, 200.0}) {
    const auto up = truncated_normal(a, a + 0.5);
    const auto down = truncated_normal(-a - 0.5, -a);
    REQUIRE(std::isfinite(up.log_mass));
    CHECK(up.log_mass == doctest::Approx(down.log_mass).epsilon(1e-13));
    CHECK(up.mean == doctest::Approx(-down.mean).epsilon(1e-13));
    CHECK(up.mean >= a);
    CHECK(up.mean <= a + 0.5);
    CHECK(up.variance() >= 0.0);
  }
}

TEST_CASE("skipping the log mass leaves the moments unchanged") {
  const auto with = truncated_normal(-3.0, 0.7);
  const auto without = truncated_normal(-3.0, 0.7, false);
  CHECK(without.log_mass == 0.0);
  CHECK(with.mean == without.mean);
  CHECK(with.t1 == without.t1);
  CHECK(with.t3 == without.t3);
}
