#include "covertime/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "covertime/errors.hpp"
#include "covertime/special.hpp"

namespace covertime::analytic {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// exp(-x) underflows to zero (even as a subnormal) past this argument.
constexpr double kExpUnderflow = 745.2;

// From here on the cdf is 1 minus the residue-series survival function. The
// erfc series sums O(t) terms of size O(1) to a value near 1, and its
// rounding noise breaks monotonicity once the tail drops below ~1e-14.
constexpr double kCdfTailSwitch = 1.0;

void require_length(double L, const char* what) {
    if (!std::isfinite(L) || L <= 0.0) {
        throw DomainError(std::string(what) + " must be positive and finite, got " +
                          std::to_string(L));
    }
}

void require_time(double t) {
    if (!std::isfinite(t) || t <= 0.0) {
        throw DomainError("time t must be positive and finite, got " + std::to_string(t));
    }
}

void require_hit_pair(double a, double y) {
    if (!std::isfinite(a) || a <= 0.0) {
        throw DomainError("hitting level a must be positive, got " + std::to_string(a));
    }
    if (!std::isfinite(y) || y < 0.0) {
        throw DomainError("level y must be non-negative, got " + std::to_string(y));
    }
}

bool converged(int n, double term, const CompensatedSum& sum, double t, const SeriesControl& ctl) {
    const double k = n + 1.0;
    return k * k > t && std::fabs(term) < ctl.rel_tol * std::fabs(sum.value()) + ctl.abs_tol;
}

}  // namespace

double laplace_theta(const TransformQuery& q, double L) {
    const TransformQuery checked = TransformQuery::at(q.s);
    require_length(L, "circumference L");
    // 1 / cosh^2(x) with x = cL / 2.
    const double e = std::exp(-checked.c * L);
    const double denom = 1.0 + e;
    return 4.0 * e / (denom * denom);
}

double max_before_hit_cdf(double a, double y) {
    require_hit_pair(a, y);
    if (std::isinf(y)) {
        return 1.0;
    }
    return y / (a + y);
}

double transform_F(const TransformQuery& q, double a, double y) {
    const TransformQuery checked = TransformQuery::at(q.s);
    require_hit_pair(a, y);
    if (checked.s == 0.0) {
        return y / (a + y);
    }
    const double c = checked.c;
    return std::exp(-c * a) * (-std::expm1(-2.0 * c * y)) / (-std::expm1(-2.0 * c * (a + y)));
}

double transform_G(const TransformQuery& q, double a, double y) {
    const TransformQuery checked = TransformQuery::at(q.s);
    require_hit_pair(a, y);
    if (checked.s == 0.0) {
        return a / (a + y);
    }
    const double c = checked.c;
    return std::exp(-c * y) * (-std::expm1(-2.0 * c * a)) / (-std::expm1(-2.0 * c * (a + y)));
}

double conditional_laplace(const TransformQuery& q, const RangeState& r) {
    const TransformQuery checked = TransformQuery::at(q.s);
    const RangeState range = RangeState::make(r.a, r.L);
    if (checked.s == 0.0) {
        return 1.0;
    }
    const double c = checked.c;
    // cosh(ca/2) / cosh(cL/2)
    const double ratio =
        std::exp(0.5 * c * (range.a - range.L)) * (1.0 + std::exp(-c * range.a)) /
        (1.0 + std::exp(-c * range.L));
    return ratio * ratio;
}

DensityPoint density_theta1(double t, const SeriesControl& ctl) {
    require_time(t);
    ctl.validate();
    if (1.0 / (2.0 * t) > kExpUnderflow) {
        return {t, 0.0};
    }

    const double prefactor = 4.0 / (std::sqrt(2.0 * std::numbers::pi) * t * std::sqrt(t));
    CompensatedSum sum;
    bool done = false;
    for (int n = 0; n < ctl.max_terms; ++n) {
        const double k = n + 1.0;
        const double sign = (n % 2 == 0) ? 1.0 : -1.0;
        const double term = sign * prefactor * k * k * std::exp(-k * k / (2.0 * t));
        sum.add(term);
        if (converged(n, term, sum, t, ctl)) {
            done = true;
            break;
        }
    }
    if (!done) {
        throw AccuracyError("density series did not converge within max_terms at t = " +
                            std::to_string(t));
    }

    double value = sum.value();
    if (value < 0.0) {
        const double allowance = ctl.abs_tol + 4.0 * kEps * sum.magnitude();
        if (value < -allowance) {
            throw AccuracyError("density series produced a negative value " +
                                std::to_string(value) + " at t = " + std::to_string(t));
        }
        value = 0.0;
    }
    return {t, value};
}

DensityPoint density_thetaL(double t, double L, const SeriesControl& ctl) {
    require_time(t);
    require_length(L, "circumference L");
    const double scale = L * L;
    return {t, density_theta1(t / scale, ctl).value / scale};
}

namespace {

double survival_theta1(double t, const SeriesControl& ctl) {
    // P(theta_1 > t) = sum_k exp(-m t / 2) (8 t + 8 / m), m = (2k+1)^2 pi^2.
    CompensatedSum sum;
    for (int k = 0; k < ctl.max_terms; ++k) {
        const double odd = (2.0 * k + 1.0) * std::numbers::pi;
        const double m = odd * odd;
        const double term = std::exp(-0.5 * m * t) * (8.0 * t + 8.0 / m);
        sum.add(term);
        if (term <= ctl.rel_tol * sum.value() + ctl.abs_tol) {
            return sum.value();
        }
    }
    throw AccuracyError("survival series did not converge within max_terms at t = " +
                        std::to_string(t));
}

}  // namespace

double cdf_theta1(double t, const SeriesControl& ctl) {
    require_time(t);
    ctl.validate();
    if (t >= kCdfTailSwitch) {
        return 1.0 - std::min(1.0, survival_theta1(t, ctl));
    }

    const double inv_root = 1.0 / std::sqrt(2.0 * t);
    CompensatedSum sum;
    bool done = false;
    for (int n = 0; n < ctl.max_terms; ++n) {
        const double k = n + 1.0;
        const double sign = (n % 2 == 0) ? 1.0 : -1.0;
        const double term = sign * 4.0 * k * erfc_cody(k * inv_root);
        sum.add(term);
        if (converged(n, term, sum, t, ctl)) {
            done = true;
            break;
        }
    }
    if (!done) {
        throw AccuracyError("cdf series did not converge within max_terms at t = " +
                            std::to_string(t));
    }
    const double value = sum.value();
    return value < 0.0 ? 0.0 : (value > 1.0 ? 1.0 : value);
}

double cdf_thetaL(double t, double L, const SeriesControl& ctl) {
    require_time(t);
    require_length(L, "circumference L");
    return cdf_theta1(t / (L * L), ctl);
}

double quantile_theta1(double p, const SeriesControl& ctl) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("quantile level p must lie in (0, 1), got " + std::to_string(p));
    }
    double lo = 1e-3;
    double hi = 10.0;
    while (cdf_theta1(hi, ctl) < p) {
        hi *= 2.0;
    }
    while (cdf_theta1(lo, ctl) > p) {
        lo *= 0.5;
    }

    double best = hi;
    double best_gap = std::fabs(cdf_theta1(hi, ctl) - p);
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        const double value = cdf_theta1(mid, ctl);
        const double gap = std::fabs(value - p);
        if (gap < best_gap) {
            best = mid;
            best_gap = gap;
        }
        if (value < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (best_gap > 1e-10) {
        throw AccuracyError("quantile bisection stalled at |cdf - p| = " +
                            std::to_string(best_gap));
    }
    return best;
}

Moments moments_theta1() {
    // 1/cosh^2(sqrt(s/2)) = 1 - s/2 + s^2/6 - 17 s^3/360 + ..., so
    // E[theta_1] = 1/2, E[theta_1^2] = 2 * 1/6 = 1/3, Var = 1/3 - 1/4 = 1/12.
    // Reproduced in the unit tests by finite differences of the transform.
    return {0.5, 1.0 / 12.0};
}

Moments moments_thetaL(double L) {
    require_length(L, "circumference L");
    const Moments unit = moments_theta1();
    const double scale = L * L;
    return {unit.mean * scale, unit.variance * scale * scale};
}

double switchback_pmf(long k, const RangeState& r) {
    const RangeState range = RangeState::make(r.a, r.L);
    if (k < 0) {
        throw DomainError("switchback count must be non-negative");
    }
    const double lambda = range.switchback_rate();
    if (lambda == 0.0) {
        return k == 0 ? 1.0 : 0.0;
    }
    const double kd = static_cast<double>(k);
    return std::exp(-lambda + kd * std::log(lambda) - std::lgamma(kd + 1.0));
}

double switchback_pgf(const PgfQuery& pq) {
    const PgfQuery checked = PgfQuery::make(pq.t, pq.lambda);
    return std::exp(checked.lambda * (checked.t - 1.0));
}

}  // namespace covertime::analytic
