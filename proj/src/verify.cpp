#include "covertime/verify.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "covertime/analytic.hpp"
#include "covertime/errors.hpp"
#include "covertime/laplace_inversion.hpp"
#include "covertime/quadrature.hpp"
#include "covertime/rng.hpp"
#include "covertime/simulate.hpp"
#include "covertime/special.hpp"
#include "covertime/stats.hpp"

namespace covertime::verify {

namespace {

std::string fmt(const char* format, double x) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, format, x);
    return buffer;
}

std::string sci(double x) { return fmt("%.3e", x); }

double theta1_transform(double s) { return analytic::laplace_theta(TransformQuery::at(s), 1.0); }

double reference_density(double t) { return analytic::density_theta1(t).value; }

double reference_pgf(const PgfQuery& q) { return analytic::switchback_pgf(q); }

double density_without_square(double t) {
    if (!(t > 0.0)) {
        throw DomainError("time t must be positive");
    }
    if (1.0 / (2.0 * t) > 745.2) {
        return 0.0;
    }
    const double prefactor = 4.0 / (std::sqrt(2.0 * std::numbers::pi) * t * std::sqrt(t));
    CompensatedSum sum;
    for (int n = 0; n < 5000; ++n) {
        const double k = n + 1.0;
        const double term = ((n % 2 == 0) ? 1.0 : -1.0) * prefactor * std::exp(-k * k / (2.0 * t));
        sum.add(term);
        if (k * k > t && std::fabs(term) < 1e-16 * std::fabs(sum.value())) {
            break;
        }
    }
    return sum.value();
}

double flipped_pgf(const PgfQuery& q) { return std::exp(-q.lambda * (q.t - 1.0)); }

// Panels for integrals over the support of theta_1.
double integrate_theta1(const std::function<double(double)>& f) {
    return integrate_panels(f, {0.0, 0.05, 0.2, 0.5, 1.0, 2.0, 4.0, kTheta1TailCutoff}, 1e-13);
}

CheckResult make(std::string id, std::string title, double value, double threshold, bool pass,
                 std::string detail) {
    return CheckResult{std::move(id), std::move(title), pass, value, threshold, std::move(detail)};
}

CheckResult at_most(std::string id, std::string title, double value, double threshold,
                    std::string detail = {}) {
    const bool pass = std::isfinite(value) && value <= threshold;
    return make(std::move(id), std::move(title), value, threshold, pass, std::move(detail));
}

// Runs fn and turns a thrown error into a failed result.
template <typename Fn>
CheckResult guarded(const char* id, const char* title, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        return make(id, title, std::nan(""), 0.0, false, std::string("error: ") + e.what());
    }
}

struct PairOutcome {
    double chi_square_p = 0.0;
    bool pass = false;
    std::string detail;
};

PairOutcome switchback_pair(const AnalyticLaw& law, double a, double L, std::uint64_t seed,
                            std::size_t workers) {
    constexpr std::size_t kChains = 100000;
    const RangeState range = RangeState::make(a, L);
    const double lambda = range.switchback_rate();

    simulate::SimPlan plan;
    plan.n_samples = kChains;
    plan.base_seed = seed;
    plan.n_streams = workers;
    const auto counts = simulate::switchback_histogram(plan, range);
    const auto gof = stats::chi_square_poisson(counts, lambda);

    const double p_zero = a / L;
    const double observed_zero = static_cast<double>(counts.empty() ? 0 : counts[0]) / kChains;
    const double se_zero = std::sqrt(p_zero * (1.0 - p_zero) / kChains);
    const bool zero_ok = std::fabs(observed_zero - p_zero) <= 3.0 * se_zero;
    const double pgf_zero = law.pgf(PgfQuery::make(0.0, lambda));
    const bool pgf_ok = std::fabs(pgf_zero - p_zero) <= 1e-12;

    PairOutcome out;
    out.chi_square_p = gof.p_value.value_or(0.0);
    out.pass = gof.pass && zero_ok && pgf_ok;
    out.detail = "(a=" + fmt("%g", a) + ",L=" + fmt("%g", L) + ") chi2 p=" + sci(out.chi_square_p) +
                 " P(nu=0) " + fmt("%.5f", observed_zero) + " vs " + fmt("%g", p_zero) +
                 " (3SE " + sci(3.0 * se_zero) + ") PGF(0)=" + fmt("%.6g", pgf_zero);
    return out;
}

}  // namespace

AnalyticLaw law_for(Mutant mutant) {
    AnalyticLaw law{reference_density, reference_pgf};
    if (mutant == Mutant::pgf_sign) {
        law.pgf = flipped_pgf;
    } else if (mutant == Mutant::density_square) {
        law.density = density_without_square;
    }
    return law;
}

std::optional<Mutant> parse_mutant(std::string_view name) {
    if (name == "none") {
        return Mutant::none;
    }
    if (name == "pgf-sign") {
        return Mutant::pgf_sign;
    }
    if (name == "density-square") {
        return Mutant::density_square;
    }
    return std::nullopt;
}

std::string_view mutant_name(Mutant mutant) {
    switch (mutant) {
        case Mutant::pgf_sign:
            return "pgf-sign";
        case Mutant::density_square:
            return "density-square";
        case Mutant::none:
            break;
    }
    return "none";
}

CheckResult transform_limit() {
    return guarded("C1", "conditional transform tends to 1/cosh^2 as a -> 0", [] {
        double worst = 0.0;
        for (const double s : {0.01, 0.1, 1.0, 10.0, 100.0}) {
            const double value =
                analytic::conditional_laplace(TransformQuery::at(s), RangeState::make(1e-8, 1.0));
            const double ch = std::cosh(std::sqrt(s / 2.0));
            worst = std::max(worst, std::fabs(value - 1.0 / (ch * ch)));
        }
        return at_most("C1", "conditional transform tends to 1/cosh^2 as a -> 0", worst, 1e-6,
                       "max abs error over s in {0.01,0.1,1,10,100}");
    });
}

CheckResult integral_equation_residual(std::uint64_t seed) {
    constexpr const char* kTitle = "integral equation residual of the conditional transform";
    return guarded("C2", kTitle, [seed] {
        StreamRng rng(seed, 200);
        double worst = 0.0;
        std::string where;
        for (int i = 0; i < 50; ++i) {
            const double s = 0.1 + 9.9 * rng.uniform();
            const double L = 3.0 * rng.uniform();
            const double a = L * rng.uniform();
            const TransformQuery q = TransformQuery::at(s);
            const double c = q.c;
            auto f = [&](double x) {
                return analytic::conditional_laplace(q, RangeState::make(x, L));
            };
            auto kernel = [&](double x) {
                const double sx = std::sinh(c * x);
                return c * std::sinh(c * a) / (sx * sx) * f(x);
            };
            // Geometric panels resolve the a/x^2 peak at x = a.
            double integral = 0.0;
            double lo = a;
            while (lo < L) {
                const double hi = std::min(L, 2.0 * lo);
                integral += integrate(kernel, lo, hi, 1e-13);
                lo = hi;
            }
            const double residual =
                std::fabs(f(a) - std::sinh(c * a) / std::sinh(c * L) - integral);
            if (residual > worst) {
                worst = residual;
                where = "s=" + fmt("%.4g", s) + " a=" + fmt("%.4g", a) + " L=" + fmt("%.4g", L);
            }
        }
        return at_most("C2", kTitle, worst, 1e-9, "max residual over 50 triples at " + where);
    });
}

CheckResult density_transform_duality(const AnalyticLaw& law) {
    constexpr const char* kTitle = "Laplace transform of the density equals 1/cosh^2";
    return guarded("C3", kTitle, [&] {
        double worst = 0.0;
        for (const double s : {0.25, 1.0, 4.0}) {
            const double integral =
                integrate_theta1([&](double t) { return std::exp(-s * t) * law.density(t); });
            worst = std::max(worst, std::fabs(integral - theta1_transform(s)));
        }
        return at_most("C3", kTitle, worst, 1e-8, "max abs error over s in {0.25,1,4}");
    });
}

CheckResult stehfest_cross_check(const AnalyticLaw& law) {
    constexpr const char* kTitle = "Gaver-Stehfest (order 14) inversion matches the density";
    return guarded("C4", kTitle, [&] {
        double worst = 0.0;
        std::string detail = "relative errors:";
        for (const double t : {0.3, 0.5, 0.7, 1.0, 2.0, 5.0}) {
            const double inverted = invert_laplace(theta1_transform, t, 14);
            const double density = law.density(t);
            const double rel = std::fabs(inverted - density) / std::fabs(density);
            worst = std::max(worst, rel);
            detail += " t=" + fmt("%g", t) + ":" + sci(rel);
        }
        return at_most("C4", kTitle, worst, 1e-6, detail);
    });
}

CheckResult normalization_and_moments(const AnalyticLaw& law) {
    constexpr const char* kTitle = "normalization, mean 1/2 and variance 1/12 by quadrature";
    return guarded("C5", kTitle, [&] {
        const double mass = integrate_theta1(law.density);
        const double first = integrate_theta1([&](double t) { return t * law.density(t); });
        const double second = integrate_theta1([&](double t) { return t * t * law.density(t); });
        const Moments expected = analytic::moments_theta1();
        const double mass_err = std::fabs(mass - 1.0);
        const double mean_err = std::fabs(first - expected.mean);
        const double var_err = std::fabs(second - first * first - expected.variance);
        const double worst = std::max({mass_err / 1e-9, mean_err / 1e-8, var_err / 1e-8});
        return at_most("C5", kTitle, worst, 1.0,
                       "error/tolerance; |mass-1|=" + sci(mass_err) + " |mean-1/2|=" +
                           sci(mean_err) + " |var-1/12|=" + sci(var_err));
    });
}

CheckResult switchback_poisson(const AnalyticLaw& law, std::uint64_t seed, std::size_t workers) {
    constexpr const char* kTitle = "switchback count is Poisson(log(L/a)); P(nu=0) = a/L";
    return guarded("C6", kTitle, [&] {
        const double pairs[3][2] = {{0.5, 1.0}, {0.1, 1.0}, {0.01, 1.0}};
        bool pass = true;
        double min_p = 1.0;
        std::string detail;
        for (int i = 0; i < 3; ++i) {
            const auto outcome = switchback_pair(law, pairs[i][0], pairs[i][1],
                                                 stream_key(seed, 600 + i), workers);
            pass = pass && outcome.pass;
            min_p = std::min(min_p, outcome.chi_square_p);
            detail += (i ? "; " : "") + outcome.detail;
        }
        return make("C6", kTitle, min_p, stats::kDefaultSignificance, pass, detail);
    });
}

CheckResult cover_time_monte_carlo(std::uint64_t seed, std::size_t workers) {
    constexpr const char* kTitle = "simulated cover times (dt=1e-4, bridge) match the law";
    return guarded("C7", kTitle, [&] {
        simulate::SimPlan plan;
        plan.n_samples = 20000;
        plan.dt = 1e-4;
        plan.bridge_correction = true;
        plan.base_seed = stream_key(seed, 700);
        plan.n_streams = workers;
        const auto samples = simulate::sample_cover_times(plan, 1.0);
        auto sorted = simulate::thetas(samples);
        std::sort(sorted.begin(), sorted.end());

        const auto ks = stats::ks_test(sorted, [](double t) {
            return t > 0.0 ? analytic::cdf_theta1(t) : 0.0;
        });
        const double n = static_cast<double>(sorted.size());
        double sum = 0.0;
        for (const double x : sorted) {
            sum += x;
        }
        const double mean = sum / n;
        double squares = 0.0;
        for (const double x : sorted) {
            squares += (x - mean) * (x - mean);
        }
        const double se_mean = std::sqrt(squares / (n - 1.0) / n);
        const double z_mean = (mean - 0.5) / se_mean;

        const auto transform = simulate::estimate_transform(samples, 0.5);
        const double z_transform =
            (transform.estimate - theta1_transform(0.5)) / transform.std_error;

        const bool pass = ks.pass && std::fabs(z_mean) < 4.0 && std::fabs(z_transform) < 4.0;
        return make("C7", kTitle, ks.p_value.value_or(0.0), stats::kDefaultSignificance, pass,
                    "KS D=" + sci(ks.statistic) + " p=" + sci(ks.p_value.value_or(0.0)) +
                        "; mean=" + fmt("%.5f", mean) + " z=" + fmt("%.2f", z_mean) +
                        "; E[exp(-theta/2)]=" + fmt("%.5f", transform.estimate) +
                        " z=" + fmt("%.2f", z_transform));
    });
}

CheckResult scaling_law(std::uint64_t seed, std::size_t workers) {
    constexpr const char* kTitle = "theta_2 / 4 and theta_1 agree in law (two-sample KS)";
    return guarded("C8", kTitle, [&] {
        simulate::SimPlan unit;
        unit.n_samples = 10000;
        unit.dt = 1e-4;
        unit.base_seed = stream_key(seed, 800);
        unit.n_streams = workers;
        simulate::SimPlan doubled = unit;
        doubled.dt = 4e-4;
        doubled.base_seed = stream_key(seed, 801);

        auto a = simulate::thetas(simulate::sample_cover_times(unit, 1.0));
        auto b = simulate::thetas(simulate::sample_cover_times(doubled, 2.0));
        for (double& x : b) {
            x /= 4.0;
        }
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        const auto ks = stats::ks_two_sample(a, b);
        return make("C8", kTitle, ks.p_value.value_or(0.0), stats::kDefaultSignificance, ks.pass,
                    "D=" + sci(ks.statistic) + " p=" + sci(ks.p_value.value_or(0.0)));
    });
}

CheckResult mutation_sensitivity(std::uint64_t seed, std::size_t workers) {
    constexpr const char* kTitle = "mutants fail a check among C3-C6 that the reference passes";
    return guarded("C9", kTitle, [&] {
        auto run = [&](const AnalyticLaw& law) {
            return std::vector<CheckResult>{density_transform_duality(law),
                                            stehfest_cross_check(law),
                                            normalization_and_moments(law),
                                            switchback_poisson(law, seed, workers)};
        };
        const auto reference = run(law_for(Mutant::none));
        int detected = 0;
        std::string detail;
        for (const Mutant mutant : {Mutant::pgf_sign, Mutant::density_square}) {
            const auto mutated = run(law_for(mutant));
            std::string caught;
            for (std::size_t i = 0; i < mutated.size(); ++i) {
                if (reference[i].pass && !mutated[i].pass) {
                    caught += (caught.empty() ? "" : ",") + mutated[i].id;
                }
            }
            if (!caught.empty()) {
                ++detected;
            }
            detail += std::string(detail.empty() ? "" : "; ") + std::string(mutant_name(mutant)) +
                      " caught by [" + caught + "]";
        }
        return make("C9", kTitle, detected, 2.0, detected == 2, detail);
    });
}

CheckResult martingale_identity() {
    constexpr const char* kTitle = "optional-stopping identities for F and G";
    return guarded("S1", kTitle, [] {
        double worst = 0.0;
        for (const double s : {0.05, 0.5, 2.0, 8.0}) {
            const TransformQuery q = TransformQuery::at(s);
            for (const double a : {0.2, 1.0, 2.5}) {
                for (const double y : {0.1, 1.0, 3.0}) {
                    const double f = analytic::transform_F(q, a, y);
                    const double g = analytic::transform_G(q, a, y);
                    const double plus = std::exp(-q.c * a) * f + std::exp(q.c * y) * g;
                    const double minus = std::exp(q.c * a) * f + std::exp(-q.c * y) * g;
                    worst = std::max({worst, std::fabs(plus - 1.0), std::fabs(minus - 1.0)});
                }
            }
        }
        return at_most("S1", kTitle, worst, 1e-12, "max |identity - 1| on the grid");
    });
}

CheckResult small_s_limits() {
    constexpr const char* kTitle = "F and G tend to the ruin probabilities as s -> 0";
    return guarded("S2", kTitle, [] {
        double worst = 0.0;
        const TransformQuery tiny = TransformQuery::at(1e-14);
        for (const double a : {0.1, 1.0, 3.0}) {
            for (const double y : {0.0, 0.5, 2.0}) {
                const double up = analytic::max_before_hit_cdf(a, y);
                worst = std::max(worst, std::fabs(analytic::transform_F(tiny, a, y) - up));
                worst = std::max(worst, std::fabs(analytic::transform_G(tiny, a, y) - (1.0 - up)));
            }
        }
        return at_most("S2", kTitle, worst, 1e-6, "s = 1e-14");
    });
}

CheckResult pgf_pmf_duality(const AnalyticLaw& law) {
    constexpr const char* kTitle = "PGF equals the generating sum of the Poisson pmf";
    return guarded("S3", kTitle, [&] {
        constexpr long kTerms = 60;
        double worst = 0.0;
        for (const double a : {0.5, 0.1, 0.01}) {
            const RangeState range = RangeState::make(a, 1.0);
            const double lambda = range.switchback_rate();
            const double next = analytic::switchback_pmf(kTerms + 1, range);
            const double tail = next * (kTerms + 2.0) / (kTerms + 2.0 - lambda);
            for (const double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
                double sum = 0.0;
                double power = 1.0;
                for (long k = 0; k <= kTerms; ++k) {
                    sum += analytic::switchback_pmf(k, range) * power;
                    power *= t;
                }
                const double gap = std::fabs(sum - law.pgf(PgfQuery::make(t, lambda)));
                worst = std::max(worst, gap / (tail + 1e-13));
            }
        }
        return at_most("S3", kTitle, worst, 1.0, "gap / (tail bound + 1e-13), K = 60");
    });
}

CheckResult cdf_density_duality(const AnalyticLaw& law) {
    constexpr const char* kTitle = "finite-difference derivative of the cdf is the density";
    return guarded("S4", kTitle, [&] {
        constexpr double kStep = 1e-5;
        double worst = 0.0;
        for (double t = 0.05; t <= 10.0 + 1e-12; t += 0.05) {
            const double slope =
                (analytic::cdf_theta1(t + kStep) - analytic::cdf_theta1(t - kStep)) / (2.0 * kStep);
            worst = std::max(worst, std::fabs(slope - law.density(t)));
        }
        return at_most("S4", kTitle, worst, 1e-6, "max abs gap on t in [0.05, 10]");
    });
}

CheckResult reduced_ode() {
    constexpr const char* kTitle = "f(a)/sinh(ca) solves g' = -c g / sinh(ca)";
    return guarded("S5", kTitle, [] {
        constexpr double kStep = 1e-5;
        double worst = 0.0;
        for (const double s : {0.1, 1.0, 10.0}) {
            const TransformQuery q = TransformQuery::at(s);
            const double L = 2.0;
            auto g = [&](double x) {
                return analytic::conditional_laplace(q, RangeState::make(x, L)) /
                       std::sinh(q.c * x);
            };
            for (const double a : {0.1, 0.5, 1.0, 1.5}) {
                const double slope = (g(a + kStep) - g(a - kStep)) / (2.0 * kStep);
                const double rhs = -g(a) * q.c / std::sinh(q.c * a);
                worst = std::max(worst, std::fabs(slope - rhs) / std::fabs(rhs));
            }
        }
        return at_most("S5", kTitle, worst, 1e-6, "max relative gap");
    });
}

CheckResult talbot_cross_check(const AnalyticLaw& law) {
    constexpr const char* kTitle = "fixed-Talbot inversion matches the density for t <= 2";
    return guarded("S6", kTitle, [&] {
        auto transform = [](std::complex<double> s) {
            const auto ch = std::cosh(std::sqrt(s / 2.0));
            return 1.0 / (ch * ch);
        };
        double worst = 0.0;
        for (const double t : {0.3, 0.5, 0.7, 1.0, 2.0}) {
            const double inverted = invert_laplace_talbot(transform, t, 32);
            worst = std::max(worst, std::fabs(inverted / law.density(t) - 1.0));
        }
        return at_most("S6", kTitle, worst, 1e-6, "max relative error, 32 nodes");
    });
}

std::vector<CheckResult> run_suite(const Options& options) {
    const AnalyticLaw law = law_for(options.mutant);
    std::vector<CheckResult> results{
        transform_limit(),
        integral_equation_residual(options.seed),
        density_transform_duality(law),
        stehfest_cross_check(law),
        normalization_and_moments(law),
        martingale_identity(),
        small_s_limits(),
        pgf_pmf_duality(law),
        cdf_density_duality(law),
        reduced_ode(),
        talbot_cross_check(law),
    };
    if (options.full) {
        results.push_back(switchback_poisson(law, options.seed, options.workers));
        results.push_back(cover_time_monte_carlo(options.seed, options.workers));
        results.push_back(scaling_law(options.seed, options.workers));
        results.push_back(mutation_sensitivity(options.seed, options.workers));
    }
    return results;
}

bool all_passed(const std::vector<CheckResult>& results) {
    return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
}

}  // namespace covertime::verify
