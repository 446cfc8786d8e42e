#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>

namespace covertime::stats {

inline constexpr double kDefaultSignificance = 0.001;

struct GofReport {
    std::string test_name;
    double statistic = 0.0;
    /// Absent when no p-value applies (moment z-tests).
    std::optional<double> p_value;
    std::size_t n = 0;
    bool pass = false;
};

using CdfFn = std::function<double(double)>;

/// sup_x |F_n(x) - F(x)| for sorted samples; no minimum sample size.
double ks_distance(std::span<const double> sorted, const CdfFn& cdf);

/// Kolmogorov survival function Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
double kolmogorov_survival(double x);

/// One-sample KS test, p-value Q(D (sqrt(n) + 0.12 + 0.11 / sqrt(n))).
/// Requires n >= 10 and sorted input.
GofReport ks_test(std::span<const double> sorted, const CdfFn& cdf,
                  double significance = kDefaultSignificance);

/// Two-sample KS test with effective size n1 n2 / (n1 + n2).
GofReport ks_two_sample(std::span<const double> sorted_a, std::span<const double> sorted_b,
                        double significance = kDefaultSignificance);

/// Pearson chi-square test of a count histogram (index k = #{nu = k})
/// against Poisson(lambda). Bins are grown from k = 0 upward until each
/// expected count reaches min_expected; the last bin is the open tail.
/// Requires at least 100 observations.
GofReport chi_square_poisson(std::span<const std::uint64_t> counts, double lambda,
                             double significance = kDefaultSignificance,
                             double min_expected = 5.0);

/// z-tests of sample mean and variance against analytic values; the
/// variance standard error uses the fourth central moment. Passes iff both
/// |z| < 4. statistic is the larger |z|.
GofReport moment_report(std::span<const double> samples, double analytic_mean,
                        double analytic_variance);

}  // namespace covertime::stats
