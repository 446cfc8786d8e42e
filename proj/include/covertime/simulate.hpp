#pragma once

// Monte Carlo engines for the cover time and the switchback count.
//
// Every sample i of a batch is drawn from its own random stream keyed by
// (base_seed, i), so a batch is a pure function of the SimPlan no matter how
// many worker threads produce it.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "covertime/types.hpp"

namespace covertime::simulate {

struct SimPlan {
    std::size_t n_samples = 1;
    double dt = 1e-4;
    bool bridge_correction = true;
    std::uint64_t base_seed = 0;
    /// Worker threads used by the batch drivers; does not affect results.
    std::size_t n_streams = 1;

    void validate() const;
};

struct CoverTimeSample {
    double theta = 0.0;
    std::uint64_t n_steps = 0;
    double final_min = 0.0;
    double final_max = 0.0;
};

struct SwitchbackChain {
    double initial_a = 0.0;
    double L = 0.0;
    long nu = 0;
    /// a_0 < a_1 < ... < a_nu; always holds at least the initial range.
    std::vector<double> a_trajectory;
};

/// First exit of a Wiener path started at 0 from the interval (-a, y).
struct IntervalExit {
    double time = 0.0;
    bool hit_upper = false;
};

struct TransformEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

/// One discretized Wiener path run until its range reaches length L.
///
/// Per step: x1 = x0 + sqrt(dt) Z. A discrete crossing of the upper barrier
/// min + L (or the lower barrier max - L) ends the path with theta linearly
/// interpolated by overshoot fraction.
///
/// With bridge_correction, every step whose bridge can get near the running
/// max (min) draws the bridge maximum (minimum) exactly from
///   P(max >= b) = exp(-2 (b - x0)(b - x1) / dt),
/// tests it against the upper barrier and then the lower one, and folds the
/// drawn extremes into the running min and max. A crossing found only by the
/// bridge puts theta at the step midpoint. Draws whose probability of
/// mattering is below exp(-40) are skipped.
///
/// Throws DomainError if dt >= L^2 / 4.
CoverTimeSample sample_cover_time(const SimPlan& plan, double L, std::uint64_t stream_index);

/// plan.n_samples cover times, sample i drawn on stream i.
std::vector<CoverTimeSample> sample_cover_times(const SimPlan& plan, double L);

/// Exact switchback chain: draw M = a U / (1 - U) (inverse of y / (a + y)),
/// stop when M >= L - a, otherwise count a switchback and set a <- a + M.
/// For a == L no draw is made and nu = 0. Throws DomainError for a > L.
SwitchbackChain sample_switchbacks(const SimPlan& plan, const RangeState& r,
                                   std::uint64_t stream_index);

/// Counts of nu over plan.n_samples chains; index k holds #{nu = k}.
std::vector<std::uint64_t> switchback_histogram(const SimPlan& plan, const RangeState& r);

/// Exit of (-a, y) for a discretized path with the same bridge correction as
/// sample_cover_time. Used to check the joint transforms F and G.
IntervalExit sample_interval_exit(const SimPlan& plan, double a, double y,
                                  std::uint64_t stream_index);

/// Sample mean and standard error of exp(-s theta_i).
TransformEstimate estimate_transform(std::span<const CoverTimeSample> samples, double s);

/// Thetas of a batch, in sample order.
std::vector<double> thetas(std::span<const CoverTimeSample> samples);

}  // namespace covertime::simulate
