#pragma once

// Closed-form and series evaluation of the Brownian cover time of a circle
// (equivalently, the first time the range of a Wiener process reaches a
// given length) and of the switchback count.
//
// Notation: theta_L is the cover time for circumference L, theta_1 its unit
// version, theta_L ~ L^2 theta_1. The switchback count nu started from a
// range of length a is Poisson(log(L/a)).

#include "covertime/types.hpp"

namespace covertime::analytic {

/// E[exp(-s theta_L)] = 1 / cosh^2(L sqrt(s/2)), evaluated as
/// 4 e^{-cL} / (1 + e^{-cL})^2 so that large c L cannot overflow.
double laplace_theta(const TransformQuery& q, double L);

/// P(M_a <= y): probability that the maximum before hitting -a stays below y.
double max_before_hit_cdf(double a, double y);

/// F(s, y) = E[exp(-s tau_{-a}) 1{M < y}] = sinh(cy) / sinh(c(a + y)).
/// The s = 0 value is the limit y / (a + y).
double transform_F(const TransformQuery& q, double a, double y);

/// G(s, y) = E[exp(-s tau_y) 1{tau_y < tau_{-a}}] = sinh(ca) / sinh(c(a + y)).
/// The s = 0 value is the limit a / (a + y).
double transform_G(const TransformQuery& q, double a, double y);

/// f(a) = E[exp(-s theta_L) | current range a].
///
/// The integral equation for f has solution
///   (sinh(ca) / sinh(cL)) exp(int_a^L c / sinh(cu) du)
/// and with the antiderivative log tanh(cu/2) this collapses to
///   cosh^2(ca/2) / cosh^2(cL/2),
/// which is what gets evaluated (in exponential form).
double conditional_laplace(const TransformQuery& q, const RangeState& r);

/// Density of theta_1 from the alternating series
///   sum_n 4 (-1)^n (n+1)^2 / (sqrt(2 pi) t^{3/2}) exp(-(n+1)^2 / (2t)).
///
/// Terms are summed with compensation until (n+1)^2 > t and the term falls
/// below rel_tol |sum| + abs_tol. Negative residue within the rounding bound
/// of the sum (plus abs_tol) is clamped to zero; anything more negative, or
/// hitting max_terms first, raises AccuracyError.
DensityPoint density_theta1(double t, const SeriesControl& ctl = {});

/// p_{theta_L}(t) = p_{theta_1}(t / L^2) / L^2.
DensityPoint density_thetaL(double t, double L, const SeriesControl& ctl = {});

/// P(theta_1 <= t) = sum_n 4 (-1)^n (n+1) erfc((n+1) / sqrt(2t)),
/// each term being the integrated first-passage density of level n+1.
/// For t >= 1 it is evaluated as 1 - sum_k exp(-m t / 2) (8 t + 8 / m),
/// m = (2k+1)^2 pi^2, the same function summed from the large-t side, which
/// keeps it monotone where the erfc series is dominated by rounding.
/// Clamped to [0, 1].
double cdf_theta1(double t, const SeriesControl& ctl = {});

/// P(theta_L <= t) = cdf_theta1(t / L^2).
double cdf_thetaL(double t, double L, const SeriesControl& ctl = {});

/// Inverse of cdf_theta1 by geometric bracketing from [1e-3, 10] followed by
/// bisection. The result satisfies |cdf_theta1(t) - p| <= 1e-10.
double quantile_theta1(double p, const SeriesControl& ctl = {});

/// Mean and variance of theta_1.
Moments moments_theta1();

/// Mean and variance of theta_L (scaled by L^2 and L^4).
Moments moments_thetaL(double L);

/// P(nu = k) for the switchback count started from range a with target L:
/// Poisson pmf with rate log(L/a), evaluated in log space.
double switchback_pmf(long k, const RangeState& r);

/// E[t^nu] = exp(lambda (t - 1)) = (a/L)^{1 - t}.
double switchback_pgf(const PgfQuery& pq);

}  // namespace covertime::analytic
