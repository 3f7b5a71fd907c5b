#include "evid/specfn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace evid {

namespace {

[[noreturn]] void domain_fail(const char* fn, double x) {
  throw std::domain_error(std::string(fn) + ": argument must be positive, got " +
                          std::to_string(x));
}

// Shift threshold for the asymptotic expansions below. With Bernoulli
// terms through B14 the truncation error at t = 10 is < 5e-17.
constexpr long double kAsymptoticMin = 10.0L;

}  // namespace

double lgamma(double x) {
  if (!(x > 0.0)) domain_fail("lgamma", x);
  // libm carries the dedicated approximations around the zeros at x = 1 and
  // x = 2 that a 1e-12 relative-error contract needs. lgamma_r avoids the
  // signgam global; the sign is always +1 on x > 0.
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

double digamma(double x) {
  if (!(x > 0.0)) domain_fail("digamma", x);
  // Recurrence-shift up to t >= 10, then the Stirling-type series
  //   psi(t) ~ ln t - 1/(2t) - sum_n B_{2n} / (2n t^{2n}).
  // Accumulated in long double: the 1/x terms near the lower domain edge
  // need the extra headroom to hold the absolute-error contract.
  long double acc = 0.0L;
  long double t = x;
  while (t < kAsymptoticMin) {
    acc -= 1.0L / t;
    t += 1.0L;
  }
  const long double z = 1.0L / (t * t);
  // B_{2n}/(2n), n = 1..7
  long double p = 1.0L / 12.0L +
                  z * (-1.0L / 120.0L +
                       z * (1.0L / 252.0L +
                            z * (-1.0L / 240.0L +
                                 z * (1.0L / 132.0L +
                                      z * (-691.0L / 32760.0L + z * (1.0L / 12.0L))))));
  const long double r = acc + std::log(t) - 0.5L / t - z * p;
  return static_cast<double>(r);
}

double trigamma(double x) {
  if (!(x > 0.0)) domain_fail("trigamma", x);
  // psi_1(t) ~ 1/t + 1/(2t^2) + sum_n B_{2n} / t^{2n+1}, shifted as above.
  long double acc = 0.0L;
  long double t = x;
  while (t < kAsymptoticMin) {
    acc += 1.0L / (t * t);
    t += 1.0L;
  }
  const long double z = 1.0L / (t * t);
  // B_{2n}, n = 1..7
  long double p = 1.0L / 6.0L +
                  z * (-1.0L / 30.0L +
                       z * (1.0L / 42.0L +
                            z * (-1.0L / 30.0L +
                                 z * (5.0L / 66.0L +
                                      z * (-691.0L / 2730.0L + z * (7.0L / 6.0L))))));
  const long double r = acc + 1.0L / t + 0.5L * z + (z / t) * p;
  return static_cast<double>(r);
}

}  // namespace evid
