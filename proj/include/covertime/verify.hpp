#pragma once

// Verification suite shared by the acceptance test binary and `covertime
// verify`. Checks C1-C9 are the acceptance criteria; S-checks are extra
// analytic invariants that run with the fast suite.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "covertime/types.hpp"

namespace covertime::verify {

struct CheckResult {
    std::string id;
    std::string title;
    bool pass = false;
    /// Observed figure of merit (error, p-value, ...); see detail.
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

/// The functions a law-dependent check exercises. The reference law is the
/// analytic module; mutants swap one piece for a deliberately wrong one.
struct AnalyticLaw {
    std::function<double(double)> density;
    std::function<double(const PgfQuery&)> pgf;
};

enum class Mutant {
    none,
    /// exp(-lambda (t - 1)) instead of exp(lambda (t - 1)).
    pgf_sign,
    /// density series with the (n+1)^2 factor dropped.
    density_square,
};

AnalyticLaw law_for(Mutant mutant);
std::optional<Mutant> parse_mutant(std::string_view name);
std::string_view mutant_name(Mutant mutant);

struct Options {
    std::uint64_t seed = 7;
    std::size_t workers = 1;
    bool full = false;
    Mutant mutant = Mutant::none;
};

CheckResult transform_limit();
CheckResult integral_equation_residual(std::uint64_t seed);
CheckResult density_transform_duality(const AnalyticLaw& law);
CheckResult stehfest_cross_check(const AnalyticLaw& law);
CheckResult normalization_and_moments(const AnalyticLaw& law);
CheckResult switchback_poisson(const AnalyticLaw& law, std::uint64_t seed, std::size_t workers);
CheckResult cover_time_monte_carlo(std::uint64_t seed, std::size_t workers);
CheckResult scaling_law(std::uint64_t seed, std::size_t workers);
CheckResult mutation_sensitivity(std::uint64_t seed, std::size_t workers);

CheckResult martingale_identity();
CheckResult small_s_limits();
CheckResult pgf_pmf_duality(const AnalyticLaw& law);
CheckResult cdf_density_duality(const AnalyticLaw& law);
CheckResult reduced_ode();
CheckResult talbot_cross_check(const AnalyticLaw& law);

/// Fast checks always; statistical checks (C6-C9) when options.full.
std::vector<CheckResult> run_suite(const Options& options);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace covertime::verify
