#include "covertime/quadrature.hpp"

#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "covertime/errors.hpp"

namespace covertime {

namespace {

using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;

constexpr int kMaxDepth = 30;

double adapt(const std::function<double(double)>& f, double lo, double hi, double tolerance,
             int depth) {
    double error = 0.0;
    double l1 = 0.0;
    const double value = Rule::integrate(f, lo, hi, 0, 0.0, &error, &l1);
    // Below the rounding floor of the panel, bisection cannot improve it.
    const double floor = 1000.0 * std::numeric_limits<double>::epsilon() * l1;
    if (error <= tolerance || error <= floor || depth >= kMaxDepth) {
        return value;
    }
    const double mid = 0.5 * (lo + hi);
    return adapt(f, lo, mid, 0.5 * tolerance, depth + 1) +
           adapt(f, mid, hi, 0.5 * tolerance, depth + 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double lo, double hi, double tolerance) {
    if (!(hi > lo)) {
        throw DomainError("integration interval must have hi > lo");
    }
    if (!(tolerance > 0.0)) {
        throw DomainError("integration tolerance must be positive");
    }
    return adapt(f, lo, hi, tolerance, 0);
}

double integrate_panels(const std::function<double(double)>& f, std::initializer_list<double> breaks,
                        double tolerance) {
    if (breaks.size() < 2) {
        throw DomainError("need at least two panel breaks");
    }
    const double share = tolerance / static_cast<double>(breaks.size() - 1);
    double total = 0.0;
    const double* previous = breaks.begin();
    for (const double* it = breaks.begin() + 1; it != breaks.end(); ++it) {
        total += integrate(f, *previous, *it, share);
        previous = it;
    }
    return total;
}

}  // namespace covertime
