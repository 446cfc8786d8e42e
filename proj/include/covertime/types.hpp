#pragma once

#include <cmath>
#include <cstdint>

namespace covertime {

/// Current range length `a` and target range length `L`; 0 < a <= L.
struct RangeState {
    double a;
    double L;

    /// Validating constructor. Throws DomainError unless 0 < a <= L < inf.
    static RangeState make(double a, double L);

    /// Poisson rate of the switchback count, log(L/a).
    [[nodiscard]] double switchback_rate() const { return std::log(L / a); }
};

/// Laplace argument s >= 0 together with its rate c = sqrt(2 s).
struct TransformQuery {
    double s;
    double c;

    /// Throws DomainError for negative or non-finite s.
    static TransformQuery at(double s);
};

/// Truncation policy for the alternating series of the cover-time law.
struct SeriesControl {
    double rel_tol = 1e-15;
    double abs_tol = 1e-30;
    int max_terms = 1000;

    void validate() const;
};

struct DensityPoint {
    double t;
    double value;
};

/// Argument of the switchback probability generating function.
struct PgfQuery {
    double t;
    double lambda;

    static PgfQuery make(double t, double lambda);
    static PgfQuery for_range(double t, const RangeState& r) {
        return make(t, r.switchback_rate());
    }
};

struct Moments {
    double mean;
    double variance;
};

}  // namespace covertime
