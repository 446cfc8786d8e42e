#pragma once

#include <functional>
#include <initializer_list>

namespace covertime {

/// Adaptive Gauss-Kronrod (61-point) integral of f over [lo, hi]: panels are
/// bisected until the Kronrod error estimate is below `tolerance` (absolute,
/// split evenly between halves) or below the rounding level of the panel.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double tolerance = 1e-13);

/// Same, summed over consecutive panels [b0, b1], [b1, b2], ...
double integrate_panels(const std::function<double(double)>& f, std::initializer_list<double> breaks,
                        double tolerance = 1e-13);

/// Upper integration limit for theta_1 integrals: P(theta_1 > 12) and
/// E[theta_1^2; theta_1 > 12] are both below 1e-18 (exponential-moment bound
/// E[exp(4 theta_1)] = 1 / cos^2(sqrt 2)).
inline constexpr double kTheta1TailCutoff = 12.0;

}  // namespace covertime
