// Acceptance suite: one PASS/FAIL line per criterion C1-C9. Exit status is
// nonzero if any criterion fails.
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "covertime/verify.hpp"

namespace {

std::uint64_t seed_from_env() {
    if (const char* env = std::getenv("COVERTIME_SEED"); env != nullptr && *env != '\0') {
        return std::strtoull(env, nullptr, 10);
    }
    return 7;
}

}  // namespace

int main() {
    using namespace covertime::verify;
    const std::uint64_t seed = seed_from_env();
    const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    const AnalyticLaw law = law_for(Mutant::none);

    const std::vector<std::function<CheckResult()>> criteria{
        [] { return transform_limit(); },
        [&] { return integral_equation_residual(seed); },
        [&] { return density_transform_duality(law); },
        [&] { return stehfest_cross_check(law); },
        [&] { return normalization_and_moments(law); },
        [&] { return switchback_poisson(law, seed, workers); },
        [&] { return cover_time_monte_carlo(seed, workers); },
        [&] { return scaling_law(seed, workers); },
        [&] { return mutation_sensitivity(seed, workers); },
    };

    std::printf("acceptance suite, seed %llu\n", static_cast<unsigned long long>(seed));
    int failures = 0;
    for (const auto& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        const CheckResult r = criterion();
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += !r.pass;
        std::printf("[%s] %s %s: value %.6g, threshold %.6g, %.1f s; %s\n", r.pass ? "PASS" : "FAIL",
                    r.id.c_str(), r.title.c_str(), r.value, r.threshold, seconds, r.detail.c_str());
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
