#include "covertime/types.hpp"

#include <string>

#include "covertime/errors.hpp"

namespace covertime {

RangeState RangeState::make(double a, double L) {
    if (!std::isfinite(L) || L <= 0.0) {
        throw DomainError("range target L must be positive and finite, got " + std::to_string(L));
    }
    if (!std::isfinite(a) || a <= 0.0 || a > L) {
        throw DomainError("range length a must lie in (0, L], got " + std::to_string(a));
    }
    return RangeState{a, L};
}

TransformQuery TransformQuery::at(double s) {
    if (!std::isfinite(s) || s < 0.0) {
        throw DomainError("Laplace argument s must be finite and >= 0, got " + std::to_string(s));
    }
    return TransformQuery{s, std::sqrt(2.0 * s)};
}

void SeriesControl::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol >= 0.0) || max_terms < 1) {
        throw DomainError("series control needs rel_tol > 0, abs_tol >= 0, max_terms >= 1");
    }
}

PgfQuery PgfQuery::make(double t, double lambda) {
    if (!std::isfinite(t) || !std::isfinite(lambda) || lambda < 0.0) {
        throw DomainError("PGF query needs finite t and finite lambda >= 0");
    }
    return PgfQuery{t, lambda};
}

}  // namespace covertime
