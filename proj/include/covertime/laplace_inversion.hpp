#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace covertime {

/// Real transform evaluated in extended precision. Double-precision callables
/// convert, but their rounding is amplified by the weights (up to ~1e8 at
/// order 14), which caps accuracy near 1e-9.
using TransformFn = std::function<long double(long double)>;

/// Gaver-Stehfest inversion of a real Laplace transform:
///   f(t) ~ (ln 2 / t) sum_{k=1}^{order} V_k F(k ln 2 / t).
/// Weights are exact integer sums rounded once, and the sum is accumulated in long
/// double. order must be even and in [8, 20]. Accuracy is only a few digits
/// for targets that are not smooth or that decay fast in t.
double invert_laplace(const TransformFn& transform, double t, int order = 14);

/// Fixed-Talbot inversion (Abate-Valko contour) of a transform that can be
/// evaluated off the real axis. Used as a second, higher-accuracy oracle
/// next to Gaver-Stehfest.
double invert_laplace_talbot(const std::function<std::complex<double>(std::complex<double>)>& transform,
                             double t, int nodes = 32);

/// Stehfest weights V_1..V_order in long double.
std::vector<long double> stehfest_weights(int order);

}  // namespace covertime
