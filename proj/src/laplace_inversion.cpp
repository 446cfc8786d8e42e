#include "covertime/laplace_inversion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "covertime/errors.hpp"

namespace covertime {

namespace {

__extension__ typedef unsigned __int128 Wide;

Wide binomial(int n, int k) {
    Wide result = 1;
    for (int i = 1; i <= k; ++i) {
        result = result * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    }
    return result;
}

}  // namespace

std::vector<long double> stehfest_weights(int order) {
    if (order % 2 != 0 || order < 8 || order > 20) {
        throw DomainError("Stehfest order must be even and in [8, 20], got " +
                          std::to_string(order));
    }
    // V_k = (-1)^{k+h} / h! sum_j j^{h+1} C(2j, j) C(h, j) C(j, k-j), h = order / 2.
    // Every summand is a positive integer below 2^127 for order <= 20, so the
    // sum is exact and V_k is rounded once.
    const int half = order / 2;
    long double half_factorial = 1.0L;
    for (int i = 2; i <= half; ++i) {
        half_factorial *= i;
    }
    std::vector<long double> weights(static_cast<std::size_t>(order));
    for (int k = 1; k <= order; ++k) {
        Wide sum = 0;
        for (int j = (k + 1) / 2; j <= std::min(k, half); ++j) {
            Wide power = 1;
            for (int i = 0; i <= half; ++i) {
                power *= static_cast<unsigned>(j);
            }
            sum += power * binomial(2 * j, j) * binomial(half, j) * binomial(j, k - j);
        }
        const long double magnitude = static_cast<long double>(sum) / half_factorial;
        const bool negative = ((k + half) % 2) != 0;
        weights[static_cast<std::size_t>(k - 1)] = negative ? -magnitude : magnitude;
    }
    return weights;
}

double invert_laplace(const TransformFn& transform, double t, int order) {
    if (!std::isfinite(t) || t <= 0.0) {
        throw DomainError("inversion time must be positive, got " + std::to_string(t));
    }
    const std::vector<long double> weights = stehfest_weights(order);
    const long double step = std::numbers::ln2_v<long double> / t;
    long double sum = 0.0L;
    for (int k = 1; k <= order; ++k) {
        const long double value = transform(k * step);
        if (!std::isfinite(value)) {
            throw DomainError("transform is not finite at s = " +
                              std::to_string(static_cast<double>(k * step)));
        }
        sum += weights[static_cast<std::size_t>(k - 1)] * value;
    }
    return static_cast<double>(sum * step);
}

double invert_laplace_talbot(
    const std::function<std::complex<double>(std::complex<double>)>& transform, double t,
    int nodes) {
    if (!std::isfinite(t) || t <= 0.0) {
        throw DomainError("inversion time must be positive, got " + std::to_string(t));
    }
    if (nodes < 2) {
        throw DomainError("Talbot inversion needs at least two nodes");
    }
    const double m = nodes;
    const double r = 2.0 * m / (5.0 * t);
    double sum = 0.5 * std::exp(r * t) * transform({r, 0.0}).real();
    for (int k = 1; k < nodes; ++k) {
        const double theta = k * std::numbers::pi / m;
        const double cot = std::cos(theta) / std::sin(theta);
        const std::complex<double> s(r * theta * cot, r * theta);
        const double sigma = theta + (theta * cot - 1.0) * cot;
        sum += (std::exp(t * s) * transform(s) * std::complex<double>(1.0, sigma)).real();
    }
    return r / m * sum;
}

}  // namespace covertime
