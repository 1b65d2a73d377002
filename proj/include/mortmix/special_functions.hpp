#pragma once

// Special functions and generic numerics used by the mixture analytics.

#include <cstddef>
#include <functional>

namespace mortmix {

struct QuadratureConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  std::size_t max_subdivisions = 2000;
};

/// Throws std::invalid_argument unless both tolerances are > 0 and
/// max_subdivisions >= 1.
void validate(const QuadratureConfig& cfg);

/// Adaptive 21-point Gauss-Kronrod quadrature of f over [lower, upper].
///
/// `upper` may be +infinity, in which case the integral is mapped onto [0, 1)
/// with t = lower + s / (1 - s). The integrand is never evaluated at an
/// endpoint, so integrable endpoint singularities are allowed. Subintervals
/// are bisected in order of largest error until the summed error estimate is
/// below max(abs_tol, rel_tol * |result|).
///
/// Throws ConvergenceError (carrying the best estimate and its error bound)
/// when max_subdivisions is exhausted.
double integrate(const std::function<double(double)>& f, double lower, double upper,
                 const QuadratureConfig& cfg = {});

struct RootOptions {
  /// Stop when the bracket is narrower than this.
  double tol = 1e-10;
  std::size_t max_iterations = 500;
  /// Called with the current bracket after every iteration.
  std::function<void(double lo, double hi)> observer;
};

/// Brent's method on a sign-changing bracket. Every iterate keeps
/// f(lo) * f(hi) <= 0. Throws BracketError when the endpoints share a sign.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 const RootOptions& options = {});

/// Upper incomplete gamma function Gamma(u, x) = int_x^inf t^{u-1} e^{-t} dt
/// for real u (including u <= 0) and x > 0.
///
/// Small x with u in (-1, 1] uses a cancellation-free series; u <= -1 is
/// lifted into (-1, 0] and brought back down with
/// Gamma(u, x) = (Gamma(u + 1, x) - x^u e^{-x}) / u. Throws DomainError for x <= 0.
double upper_incomplete_gamma(double u, double x);

/// Gauss hypergeometric 2F1(m, p; q; z) from its Euler integral
///
///   Gamma(q) / (Gamma(p) Gamma(q - p)) * int_0^1 u^{p-1} (1-u)^{q-p-1} (1 - z u)^{-m} du,
///
/// valid for q > p > 0 and z < 1. Throws DomainError outside that domain.
double gauss_2f1(double m, double p, double q, double z);

}  // namespace mortmix
