#pragma once

#include <cmath>
#include <stdexcept>

namespace massim {

// Lower branch W_{-1} of the Lambert function on [-1/e, 0): the solution
// w <= -1 of w*exp(w) = x. Initial guess from the log expansion (or the
// branch-point series near -1/e), refined with Halley steps until the
// iterate stops moving at double precision. Stopping on the step rather than
// the residual keeps w accurate even far down the branch, where the curve is
// so flat that a small residual still allows a large error in w.
inline double lambert_w_minus1(double x) {
  const double inv_e = std::exp(-1.0);
  if (!(x >= -inv_e) || !(x < 0.0))
    throw std::domain_error("lambert_w_minus1: argument outside [-1/e, 0)");

  double w;
  if (x > -0.25) {
    // Asymptotic start: w0 = ln(-x) - ln(-ln(-x)).
    double l1 = std::log(-x);
    w = l1 - std::log(-l1);
  } else {
    // Branch-point series in p = -sqrt(2(1 + e*x)).
    double p = -std::sqrt(2.0 * (1.0 + std::exp(1.0) * x));
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
    if (w > -1.0) w = -1.0;
  }

  for (int it = 0; it < 100; ++it) {
    double ew = std::exp(w);
    double f = w * ew - x;
    if (f == 0.0) break;
    double fp = ew * (w + 1.0);
    double fpp = ew * (w + 2.0);
    double denom = fp - 0.5 * f * fpp / fp;
    if (denom == 0.0 || !std::isfinite(denom)) break;
    double step = f / denom;
    double next = w - step;
    if (next > -1.0) next = 0.5 * (w - 1.0);  // stay on the lower branch
    w = next;
    if (std::abs(step) <= 4.0 * std::abs(w) * 1e-16) break;
  }
  if (w > -1.0) w = -1.0;
  return w;
}

}  // namespace massim
