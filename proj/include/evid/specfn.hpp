#pragma once

namespace evid {

// Scalar special functions over the positive reals. All three throw
// std::domain_error for x <= 0 (or non-finite x); none of the callers in
// this library ever needs the negative-axis reflection formulas. Stateless
// and safe for concurrent callers.

/// ln Gamma(x), x > 0. Relative error <= 1e-12 on [1e-6, 1e6].
double lgamma(double x);

/// psi(x) = d/dx ln Gamma(x), x > 0. Absolute error <= 1e-10 on [1e-4, 1e6].
double digamma(double x);

/// psi_1(x) = d/dx psi(x), x > 0. Absolute error <= 1e-8 on [1e-4, 1e6].
double trigamma(double x);

}  // namespace evid
