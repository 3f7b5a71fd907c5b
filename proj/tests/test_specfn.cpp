#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>

#include "evid/specfn.hpp"
#include "oracles.hpp"

using evid::digamma;
using evid::trigamma;

namespace {
constexpr double kEulerGamma = 0.57721566490153286;
constexpr double kLn2 = 0.69314718055994531;
constexpr double kPi2Over6 = 1.64493406684822644;
}  // namespace

TEST_CASE("lgamma fixed points") {
  CHECK(evid::lgamma(1.0) == 0.0);
  CHECK(evid::lgamma(2.0) == 0.0);
  // ln sqrt(pi)
  CHECK(evid::lgamma(0.5) == doctest::Approx(0.57236494292470008).epsilon(1e-13));
}

TEST_CASE("digamma fixed points") {
  CHECK(digamma(1.0) == doctest::Approx(-kEulerGamma).epsilon(1e-12));
  CHECK(digamma(2.0) == doctest::Approx(1.0 - kEulerGamma).epsilon(1e-12));
  CHECK(digamma(0.5) == doctest::Approx(-kEulerGamma - 2.0 * kLn2).epsilon(1e-12));
}

TEST_CASE("trigamma fixed points") {
  CHECK(trigamma(1.0) == doctest::Approx(kPi2Over6).epsilon(1e-13));
  CHECK(trigamma(2.0) == doctest::Approx(kPi2Over6 - 1.0).epsilon(1e-13));
  CHECK(trigamma(0.5) == doctest::Approx(3.0 * kPi2Over6).epsilon(1e-13));
}

TEST_CASE("non-positive arguments are rejected") {
  CHECK_THROWS_AS(evid::lgamma(0.0), std::domain_error);
  CHECK_THROWS_AS(evid::lgamma(-1.5), std::domain_error);
  CHECK_THROWS_AS(digamma(0.0), std::domain_error);
  CHECK_THROWS_AS(digamma(-0.25), std::domain_error);
  CHECK_THROWS_AS(trigamma(0.0), std::domain_error);
  CHECK_THROWS_AS(trigamma(-3.0), std::domain_error);
}

TEST_CASE("recurrence identities on random draws") {
  std::mt19937_64 rng(20240915);
  std::uniform_real_distribution<double> draw(0.01, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = draw(rng);
    CHECK(std::abs(digamma(x + 1.0) - digamma(x) - 1.0 / x) <= 1e-10);
    CHECK(std::abs(trigamma(x + 1.0) - trigamma(x) + 1.0 / (x * x)) <= 1e-8);
  }
}

TEST_CASE("digamma is the derivative of lgamma") {
  const double h = 1e-5;
  for (double x = 0.5; x <= 50.0; x += 0.37) {
    const double fd = oracle::central_diff([](double t) { return evid::lgamma(t); }, x, h);
    CHECK(std::abs(fd - digamma(x)) <= 1e-6);
  }
}

TEST_CASE("digamma increasing, trigamma positive") {
  double prev = digamma(1e-3);
  for (double x = 2e-3; x <= 200.0; x *= 1.17) {
    const double d = digamma(x);
    CHECK(d > prev);
    CHECK(trigamma(x) > 0.0);
    prev = d;
  }
}

TEST_CASE("accuracy against high-precision series on a log grid") {
  // log-uniform grid over the contract domains; skip the 1e-3 neighborhoods
  // of lnGamma's zeros, where the long-double reference itself loses
  // relative precision to cancellation.
  for (int i = 0; i <= 4000; ++i) {
    const double x = std::pow(10.0, -6.0 + 12.0 * i / 4000.0);
    if (std::abs(x - 1.0) > 1e-3 && std::abs(x - 2.0) > 1e-3) {
      const double ref = static_cast<double>(oracle::lgamma_ref(x));
      CHECK(std::abs(evid::lgamma(x) - ref) <= 1e-12 * std::max(1e-300, std::abs(ref)));
    }
    if (x >= 1e-4) {
      CHECK(std::abs(digamma(x) - static_cast<double>(oracle::digamma_ref(x))) <= 1e-10);
      CHECK(std::abs(trigamma(x) - static_cast<double>(oracle::trigamma_ref(x))) <= 1e-8);
    }
  }
}
