#pragma once

// Scalar special functions used by the closed-form drift expressions.
// All functions throw std::domain_error on non-finite arguments.

namespace pflow::specfun {

/// Shifted error function 1/2 (1 + erf(sqrt(pi) z / 4)). Its slope at the
/// origin is 1/4, the same as the logistic sigmoid.
double erf_sigmoid(double z);

/// d/dz erf_sigmoid(z) = exp(-pi z^2 / 16) / 4.
double erf_sigmoid_derivative(double z);

/// Standard logistic function 1 / (1 + exp(-z)).
double logistic(double z);

/// Standard normal CDF. Identical to erf_sigmoid(z * sqrt(8 / pi)).
double normal_cdf(double z);

double erfc(double z);

/// Owen's T function T(h, a) = 1/(2 pi) int_0^a exp(-h^2 (1 + x^2) / 2) / (1 + x^2) dx,
/// evaluated by adaptive Gauss-Kronrod quadrature with absolute tolerance 1e-12.
double owens_t(double h, double a);

}  // namespace pflow::specfun
