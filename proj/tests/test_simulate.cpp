#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "covertime/analytic.hpp"
#include "covertime/errors.hpp"
#include "covertime/rng.hpp"
#include "covertime/simulate.hpp"
#include "covertime/stats.hpp"

namespace covertime::simulate {
namespace {

SimPlan plan(std::size_t n, double dt, std::uint64_t seed, bool bridge = true) {
    SimPlan p;
    p.n_samples = n;
    p.dt = dt;
    p.bridge_correction = bridge;
    p.base_seed = seed;
    return p;
}

double correlation(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

double ks_distance_theta1(const std::vector<CoverTimeSample>& samples) {
    auto t = thetas(samples);
    std::sort(t.begin(), t.end());
    return stats::ks_distance(t, [](double x) { return analytic::cdf_theta1(x); });
}

stats::GofReport ks_theta1(const std::vector<CoverTimeSample>& samples, double L = 1.0) {
    auto t = thetas(samples);
    for (double& x : t) {
        x /= L * L;
    }
    std::sort(t.begin(), t.end());
    return stats::ks_test(t, [](double x) { return analytic::cdf_theta1(x); });
}

// ---------------------------------------------------------------- rng

TEST(Rng, SplitMixFinalizerReference) {
    // First output of SplitMix64 seeded with 0.
    EXPECT_EQ(splitmix64_mix(0x9e3779b97f4a7c15ULL), 0xe220a8397b1dcdafULL);
}

TEST(Rng, UniformIsOpenInterval) {
    StreamRng rng(1, 2);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(Rng, NormalMoments) {
    StreamRng rng(5, 0);
    const int n = 200000;
    double s1 = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        s1 += z;
        s2 += z * z;
    }
    EXPECT_NEAR(s1 / n, 0.0, 4.0 / std::sqrt(n));
    EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
}

TEST(Rng, AdjacentStreamsUncorrelated) {
    const int n = 50000;
    for (std::uint64_t k : {0ULL, 1ULL, 1000ULL}) {
        StreamRng a(11, k);
        StreamRng b(11, k + 1);
        std::vector<double> x(n);
        std::vector<double> y(n);
        for (int i = 0; i < n; ++i) {
            x[i] = a.uniform();
            y[i] = b.uniform();
        }
        EXPECT_LT(std::fabs(correlation(x, y)), 4.0 / std::sqrt(n)) << "stream " << k;
    }
}

// ---------------------------------------------------------------- plan

TEST(SimPlan, Validation) {
    EXPECT_NO_THROW(plan(1, 1e-3, 0).validate());
    EXPECT_THROW(plan(0, 1e-3, 0).validate(), DomainError);
    EXPECT_THROW(plan(1, 0.0, 0).validate(), DomainError);
    EXPECT_THROW(plan(1, -1e-3, 0).validate(), DomainError);
    auto p = plan(1, 1e-3, 0);
    p.n_streams = 0;
    EXPECT_THROW(p.validate(), DomainError);
}

// ---------------------------------------------------------------- cover time

TEST(CoverTime, DeterministicPerStream) {
    const auto p = plan(1, 1e-3, 123);
    for (std::uint64_t i : {0ULL, 7ULL, 99ULL}) {
        const auto x = sample_cover_time(p, 1.0, i);
        const auto y = sample_cover_time(p, 1.0, i);
        EXPECT_EQ(x.theta, y.theta);
        EXPECT_EQ(x.n_steps, y.n_steps);
        EXPECT_EQ(x.final_min, y.final_min);
        EXPECT_EQ(x.final_max, y.final_max);
    }
    EXPECT_NE(sample_cover_time(p, 1.0, 0).theta, sample_cover_time(p, 1.0, 1).theta);
}

TEST(CoverTime, BatchIndependentOfWorkerCount) {
    auto p = plan(300, 1e-3, 77);
    const auto one = sample_cover_times(p, 1.0);
    p.n_streams = 4;
    const auto four = sample_cover_times(p, 1.0);
    ASSERT_EQ(one.size(), four.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        EXPECT_EQ(one[i].theta, four[i].theta);
        EXPECT_EQ(one[i].theta, sample_cover_time(p, 1.0, i).theta);
    }
}

TEST(CoverTime, SampleInvariants) {
    const double dt = 1e-3;
    for (bool bridge : {false, true}) {
        const auto p = plan(500, dt, 3, bridge);
        for (const auto& s : sample_cover_times(p, 1.0)) {
            EXPECT_GT(s.theta, 0.0);
            EXPECT_LE(s.final_min, 0.0);
            EXPECT_GE(s.final_max, 0.0);
            EXPECT_GE(s.final_max - s.final_min, 1.0 - 1e-12);
            EXPECT_LE(s.theta, s.n_steps * dt + 1e-12);
            EXPECT_GT(s.theta, (s.n_steps - 1) * dt - 1e-12);
        }
    }
}

TEST(CoverTime, CoarseStepRejected) {
    EXPECT_THROW(sample_cover_time(plan(1, 0.25, 0), 1.0, 0), DomainError);
    EXPECT_THROW(sample_cover_time(plan(1, 1.0, 0), 2.0, 0), DomainError);
    EXPECT_NO_THROW(sample_cover_time(plan(1, 0.2, 0), 1.0, 0));
    EXPECT_THROW(sample_cover_time(plan(1, 1e-3, 0), 0.0, 0), DomainError);
}

TEST(CoverTime, MeanAtFineStep) {
    const std::size_t n = 20000;
    const auto samples = sample_cover_times(plan(n, 1e-4, 2718), 1.0);
    const auto t = thetas(samples);
    const double mean = std::accumulate(t.begin(), t.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : t) {
        ss += (x - mean) * (x - mean);
    }
    const double sd = std::sqrt(ss / (n - 1));
    EXPECT_LT(std::fabs(mean - 0.5), 3.0 * sd / std::sqrt(static_cast<double>(n)));
    const auto report = stats::moment_report(t, 0.5, 1.0 / 12.0);
    EXPECT_TRUE(report.pass) << "max |z| = " << report.statistic;
}

TEST(CoverTime, ScalingLaw) {
    const auto one = sample_cover_times(plan(10000, 1e-3, 31), 1.0);
    const auto two = sample_cover_times(plan(10000, 4e-3, 32), 2.0);
    auto a = thetas(one);
    auto b = thetas(two);
    for (double& x : b) {
        x /= 4.0;
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const auto report = stats::ks_two_sample(a, b);
    ASSERT_TRUE(report.p_value.has_value());
    EXPECT_GT(*report.p_value, 0.01);
}

TEST(CoverTime, DiscretizationConvergence) {
    const std::size_t n = 10000;
    const double dts[] = {1e-2, 1e-3, 1e-4};
    double previous = 1.0;
    for (double dt : dts) {
        const double d = ks_distance_theta1(sample_cover_times(plan(n, dt, 404, false), 1.0));
        EXPECT_LT(d, previous) << "uncorrected dt=" << dt;
        previous = d;
    }
    for (double dt : dts) {
        const auto report = ks_theta1(sample_cover_times(plan(n, dt, 405, true), 1.0));
        EXPECT_TRUE(report.pass) << "corrected dt=" << dt << " D=" << report.statistic;
    }
}

TEST(CoverTime, BridgeCorrectionReducesBias) {
    const std::size_t n = 10000;
    const double raw = ks_distance_theta1(sample_cover_times(plan(n, 1e-2, 17, false), 1.0));
    const double fixed = ks_distance_theta1(sample_cover_times(plan(n, 1e-2, 17, true), 1.0));
    EXPECT_LT(fixed, 0.5 * raw);
}

TEST(CoverTime, UpperQuantileAgainstOrderStatistics) {
    const std::size_t n = 1000000;
    auto t = thetas(sample_cover_times(plan(n, 1e-3, 99), 1.0));
    const double q = analytic::quantile_theta1(0.99);
    // 4-sigma binomial band on the rank of the analytic quantile.
    const double nd = static_cast<double>(n);
    const double half = 4.0 * std::sqrt(nd * 0.99 * 0.01);
    const auto lo = static_cast<std::size_t>(std::floor(0.99 * nd - half));
    const auto hi = static_cast<std::size_t>(std::ceil(0.99 * nd + half));
    std::nth_element(t.begin(), t.begin() + lo, t.end());
    const double t_lo = t[lo];
    std::nth_element(t.begin(), t.begin() + hi, t.end());
    const double t_hi = t[hi];
    EXPECT_LE(t_lo, q);
    EXPECT_GE(t_hi, q);
}

TEST(CoverTime, AdjacentStreamsUncorrelated) {
    const std::size_t n = 20000;
    const auto t = thetas(sample_cover_times(plan(n + 1, 1e-3, 8), 1.0));
    const std::vector<double> x(t.begin(), t.end() - 1);
    const std::vector<double> y(t.begin() + 1, t.end());
    EXPECT_LT(std::fabs(correlation(x, y)), 4.0 / std::sqrt(static_cast<double>(n)));
}

// ---------------------------------------------------------------- transform estimate

TEST(EstimateTransform, Examples) {
    const auto samples = sample_cover_times(plan(2000, 1e-3, 5), 1.0);
    const auto zero = estimate_transform(samples, 0.0);
    EXPECT_EQ(zero.estimate, 1.0);
    EXPECT_EQ(zero.std_error, 0.0);
    EXPECT_LE(estimate_transform(samples, 1.0).estimate, estimate_transform(samples, 0.5).estimate);
    EXPECT_THROW(estimate_transform(std::span<const CoverTimeSample>{}, 0.5), DomainError);
    EXPECT_THROW(estimate_transform(samples, -1.0), DomainError);
}

TEST(EstimateTransform, MatchesClosedForm) {
    auto p = plan(100000, 1e-4, 6);
    const auto samples = sample_cover_times(p, 1.0);
    const auto est = estimate_transform(samples, 0.5);
    EXPECT_LT(std::fabs(est.estimate - 0.78644773), 3.0 * est.std_error)
        << est.estimate << " +- " << est.std_error;
}

TEST(EstimateTransform, HandComputed) {
    std::vector<CoverTimeSample> s(2);
    s[0].theta = 0.0;
    s[1].theta = 2.0;
    const auto est = estimate_transform(s, 1.0);
    const double e = std::exp(-2.0);
    EXPECT_NEAR(est.estimate, (1.0 + e) / 2.0, 1e-15);
    EXPECT_NEAR(est.std_error, (1.0 - e) / std::sqrt(2.0) / std::sqrt(2.0), 1e-15);
}

// ---------------------------------------------------------------- interval exit

TEST(IntervalExit, TransformFByMonteCarlo) {
    const std::size_t n = 20000;
    const auto p = plan(1, 1e-3, 61);
    const double s = 0.5;
    double sum = 0.0;
    double sum2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto e = sample_interval_exit(p, 1.0, 1.0, i);
        const double v = e.hit_upper ? 0.0 : std::exp(-s * e.time);
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / (n - 1));
    EXPECT_LT(std::fabs(mean - analytic::transform_F(TransformQuery::at(s), 1.0, 1.0)), 3.0 * se);
}

TEST(IntervalExit, TransformGByMonteCarlo) {
    const std::size_t n = 20000;
    const auto p = plan(1, 1e-3, 62);
    const double s = 1.0;
    double sum = 0.0;
    double sum2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto e = sample_interval_exit(p, 0.5, 1.5, i);
        const double v = e.hit_upper ? std::exp(-s * e.time) : 0.0;
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / (n - 1));
    EXPECT_LT(std::fabs(mean - analytic::transform_G(TransformQuery::at(s), 0.5, 1.5)), 3.0 * se);
}

TEST(IntervalExit, Errors) {
    EXPECT_THROW(sample_interval_exit(plan(1, 1e-3, 0), 0.0, 1.0, 0), DomainError);
    EXPECT_THROW(sample_interval_exit(plan(1, 1e-3, 0), 1.0, -1.0, 0), DomainError);
    EXPECT_THROW(sample_interval_exit(plan(1, 1.0, 0), 0.5, 0.5, 0), DomainError);
}

// ---------------------------------------------------------------- switchbacks

TEST(Switchbacks, ChainInvariants) {
    const auto p = plan(1, 1.0, 12);
    for (std::uint64_t i = 0; i < 5000; ++i) {
        const auto chain = sample_switchbacks(p, RangeState::make(0.01, 1.0), i);
        ASSERT_EQ(chain.a_trajectory.size(), static_cast<std::size_t>(chain.nu) + 1);
        EXPECT_EQ(chain.a_trajectory.front(), 0.01);
        EXPECT_EQ(chain.initial_a, 0.01);
        EXPECT_EQ(chain.L, 1.0);
        for (std::size_t k = 1; k < chain.a_trajectory.size(); ++k) {
            EXPECT_GT(chain.a_trajectory[k], chain.a_trajectory[k - 1]);
        }
        EXPECT_LT(chain.a_trajectory.back(), 1.0);
    }
}

TEST(Switchbacks, Deterministic) {
    const auto p = plan(1, 1.0, 12);
    const auto r = RangeState::make(0.1, 1.0);
    const auto x = sample_switchbacks(p, r, 42);
    const auto y = sample_switchbacks(p, r, 42);
    EXPECT_EQ(x.nu, y.nu);
    EXPECT_EQ(x.a_trajectory, y.a_trajectory);
}

TEST(Switchbacks, FullRangeHasNoSwitchbacks) {
    const auto p = plan(1000, 1.0, 1);
    const auto chain = sample_switchbacks(p, RangeState::make(1.0, 1.0), 0);
    EXPECT_EQ(chain.nu, 0);
    EXPECT_EQ(chain.a_trajectory, std::vector<double>{1.0});
    const auto h = switchback_histogram(p, RangeState::make(1.0, 1.0));
    ASSERT_EQ(h.size(), 1u);
    EXPECT_EQ(h[0], 1000u);
}

TEST(Switchbacks, RangeBeyondTargetRejected) {
    EXPECT_THROW(sample_switchbacks(plan(1, 1.0, 0), RangeState{1.5, 1.0}, 0), DomainError);
}

TEST(Switchbacks, ZeroAndMeanAgainstPoisson) {
    const std::size_t n = 100000;
    const auto h = switchback_histogram(plan(n, 1.0, 2020), RangeState::make(0.1, 1.0));
    const double nd = static_cast<double>(n);
    const double p0 = h[0] / nd;
    EXPECT_LT(std::fabs(p0 - 0.1), 3.0 * std::sqrt(0.1 * 0.9 / nd));
    double mean = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
        mean += static_cast<double>(k) * h[k];
    }
    mean /= nd;
    const double lambda = std::log(10.0);
    EXPECT_NEAR(lambda, 2.302585, 1e-6);
    EXPECT_LT(std::fabs(mean - lambda), 3.0 * std::sqrt(lambda / nd));
    EXPECT_LT(std::fabs(h[2] / nd - 0.26509), 3.0 * std::sqrt(0.26509 * (1 - 0.26509) / nd));
}

TEST(Switchbacks, ChiSquareAgainstPoisson) {
    for (double a : {0.5, 0.1, 0.01}) {
        const auto r = RangeState::make(a, 1.0);
        const auto h = switchback_histogram(plan(100000, 1.0, 555), r);
        const auto report = stats::chi_square_poisson(h, r.switchback_rate());
        EXPECT_TRUE(report.pass) << "a=" << a << " p=" << report.p_value.value_or(-1);
    }
}

TEST(Switchbacks, HistogramIndependentOfWorkerCount) {
    auto p = plan(20000, 1.0, 9);
    const auto r = RangeState::make(0.05, 1.0);
    const auto one = switchback_histogram(p, r);
    p.n_streams = 3;
    EXPECT_EQ(one, switchback_histogram(p, r));
}

}  // namespace
}  // namespace covertime::simulate
