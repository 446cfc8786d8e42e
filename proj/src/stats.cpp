#include "covertime/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "covertime/errors.hpp"

namespace covertime::stats {

namespace {

void require_sorted_finite(std::span<const double> samples, const char* what) {
    for (const double x : samples) {
        if (!std::isfinite(x)) {
            throw DomainError(std::string(what) + ": samples must be finite");
        }
    }
    if (!std::is_sorted(samples.begin(), samples.end())) {
        throw DomainError(std::string(what) + ": samples must be sorted ascending");
    }
}

double clamp_unit(double p) { return std::clamp(p, 0.0, 1.0); }

double stephens_argument(double d, double n_eff) {
    const double root = std::sqrt(n_eff);
    return d * (root + 0.12 + 0.11 / root);
}

struct Bin {
    double expected = 0.0;
    double observed = 0.0;
};

}  // namespace

double ks_distance(std::span<const double> sorted, const CdfFn& cdf) {
    if (sorted.empty()) {
        throw DomainError("KS distance needs at least one sample");
    }
    require_sorted_finite(sorted, "ks_distance");
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        if (!(f >= 0.0 && f <= 1.0)) {
            throw DomainError("reference cdf must map into [0, 1]");
        }
        d = std::max(d, f - static_cast<double>(i) / n);
        d = std::max(d, static_cast<double>(i + 1) / n - f);
    }
    return d;
}

double kolmogorov_survival(double x) {
    if (x <= 0.0) {
        return 1.0;
    }
    if (x < 1.18) {
        // Jacobi-transformed form converges fast for small x.
        const double factor = -std::numbers::pi * std::numbers::pi / (8.0 * x * x);
        double sum = 0.0;
        for (int k = 1; k <= 50; ++k) {
            const double odd = 2.0 * k - 1.0;
            const double term = std::exp(factor * odd * odd);
            sum += term;
            if (term < 1e-18 * sum) {
                break;
            }
        }
        return clamp_unit(1.0 - std::sqrt(2.0 * std::numbers::pi) / x * sum);
    }
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 == 1) ? term : -term;
        if (term < 1e-18) {
            break;
        }
    }
    return clamp_unit(2.0 * sum);
}

GofReport ks_test(std::span<const double> sorted, const CdfFn& cdf, double significance) {
    if (sorted.size() < 10) {
        throw DomainError("KS test needs at least 10 samples");
    }
    const double d = ks_distance(sorted, cdf);
    const double n = static_cast<double>(sorted.size());
    const double p = kolmogorov_survival(stephens_argument(d, n));
    return {"ks_one_sample", d, p, sorted.size(), p >= significance};
}

GofReport ks_two_sample(std::span<const double> sorted_a, std::span<const double> sorted_b,
                        double significance) {
    if (sorted_a.size() < 10 || sorted_b.size() < 10) {
        throw DomainError("two-sample KS test needs at least 10 samples per side");
    }
    require_sorted_finite(sorted_a, "ks_two_sample");
    require_sorted_finite(sorted_b, "ks_two_sample");

    const double na = static_cast<double>(sorted_a.size());
    const double nb = static_cast<double>(sorted_b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < sorted_a.size() && j < sorted_b.size()) {
        const double x = std::min(sorted_a[i], sorted_b[j]);
        while (i < sorted_a.size() && sorted_a[i] <= x) {
            ++i;
        }
        while (j < sorted_b.size() && sorted_b[j] <= x) {
            ++j;
        }
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double n_eff = na * nb / (na + nb);
    const double p = kolmogorov_survival(stephens_argument(d, n_eff));
    return {"ks_two_sample", d, p, sorted_a.size() + sorted_b.size(), p >= significance};
}

GofReport chi_square_poisson(std::span<const std::uint64_t> counts, double lambda,
                             double significance, double min_expected) {
    if (!std::isfinite(lambda) || lambda < 0.0) {
        throw DomainError("Poisson rate must be finite and >= 0");
    }
    if (!(min_expected > 0.0)) {
        throw DomainError("minimum expected bin count must be positive");
    }
    double total = 0.0;
    for (const auto c : counts) {
        total += static_cast<double>(c);
    }
    if (total == 0.0) {
        throw DomainError("chi-square test got an all-zero histogram");
    }
    if (total < 100.0) {
        throw DomainError("chi-square test needs at least 100 observations");
    }

    auto count_at = [&](std::size_t k) {
        return k < counts.size() ? static_cast<double>(counts[k]) : 0.0;
    };
    auto pmf = [&](std::size_t k) {
        if (lambda == 0.0) {
            return k == 0 ? 1.0 : 0.0;
        }
        const double kd = static_cast<double>(k);
        return std::exp(-lambda + kd * std::log(lambda) - std::lgamma(kd + 1.0));
    };

    std::vector<Bin> bins;
    Bin current;
    double cumulative = 0.0;
    double observed_so_far = 0.0;
    for (std::size_t k = 0;; ++k) {
        const double p = pmf(k);
        cumulative += p;
        current.expected += total * p;
        current.observed += count_at(k);
        observed_so_far += count_at(k);

        const double rest = total * std::max(0.0, 1.0 - cumulative);
        if (rest < min_expected || k > 100000) {
            current.expected += rest;
            current.observed += total - observed_so_far;
            bins.push_back(current);
            break;
        }
        if (current.expected >= min_expected) {
            bins.push_back(current);
            current = Bin{};
        }
    }
    if (bins.size() > 1 && bins.back().expected < min_expected) {
        const Bin last = bins.back();
        bins.pop_back();
        bins.back().expected += last.expected;
        bins.back().observed += last.observed;
    }

    double statistic = 0.0;
    for (const auto& bin : bins) {
        const double diff = bin.observed - bin.expected;
        statistic += diff * diff / bin.expected;
    }
    const auto df = static_cast<double>(bins.size()) - 1.0;
    double p_value = 0.0;
    if (df == 0.0) {
        p_value = statistic <= 1e-12 ? 1.0 : 0.0;
    } else {
        p_value = boost::math::gamma_q(0.5 * df, 0.5 * statistic);
    }
    return {"chi_square_poisson", statistic, p_value, static_cast<std::size_t>(total),
            p_value >= significance};
}

GofReport moment_report(std::span<const double> samples, double analytic_mean,
                        double analytic_variance) {
    if (samples.size() < 30) {
        throw DomainError("moment report needs at least 30 samples");
    }
    const double n = static_cast<double>(samples.size());
    double sum = 0.0;
    for (const double x : samples) {
        sum += x;
    }
    const double mean = sum / n;
    double m2 = 0.0;
    double m4 = 0.0;
    for (const double x : samples) {
        const double d = x - mean;
        const double d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    const double unbiased = m2 / (n - 1.0);
    m2 /= n;
    m4 /= n;

    auto z_score = [](double diff, double se, double scale) {
        if (se > 0.0) {
            return diff / se;
        }
        return std::fabs(diff) <= 1e-12 * scale ? 0.0 : std::numeric_limits<double>::infinity();
    };
    const double z_mean = z_score(mean - analytic_mean, std::sqrt(unbiased / n),
                                  std::fabs(analytic_mean) + 1.0);
    const double z_var = z_score(unbiased - analytic_variance,
                                 std::sqrt(std::max(0.0, m4 - m2 * m2) / n),
                                 std::fabs(analytic_variance) + 1.0);
    const double worst = std::max(std::fabs(z_mean), std::fabs(z_var));
    return {"moment_z", worst, std::nullopt, samples.size(), worst < 4.0};
}

}  // namespace covertime::stats
