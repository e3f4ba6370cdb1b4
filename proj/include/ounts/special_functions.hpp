#pragma once

namespace ounts {

// Gauss hypergeometric function 2F1(a, b; c; x) restricted to the two
// parameter families used by the OU-NTS transition formulas:
//
//   pattern A: (a, b, c) = (-alpha, -alpha, 1 - alpha), x <= 1
//   pattern B: (a, b, c) = (1, 1, 1 - alpha),           x != 1
//
// with alpha in (0, 1). For pattern B and x > 1 the function is multivalued;
// the real part of the principal branch is returned (this is the quantity
// that enters the moment generating function of the OU transition noise).
// Throws DomainError for any other parameter triple.
double gauss_2f1(double a, double b, double c, double x);

// 2F1(1, b; 1 + b; w) for 0 <= w < 1, with 1 - w supplied separately so that
// callers can pass it without cancellation. b may be negative (non-integer).
double hyp2f1_unit_kernel(double b, double w, double one_minus_w);

// Modified Bessel function of the second kind K_order(x), x > 0.
double bessel_k(double order, double x);

// log K_order(x), stable for large x where K underflows.
double log_bessel_k(double order, double x);

double log_gamma(double x);
double digamma(double x);

}  // namespace ounts
