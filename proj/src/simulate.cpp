#include "covertime/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "covertime/errors.hpp"
#include "covertime/rng.hpp"

namespace covertime::simulate {

namespace {

// Bridge tests with (b - x0)(b - x1) above this multiple of dt have crossing
// probability below exp(-40) and are skipped.
constexpr double kBridgeCutoff = 20.0;

template <typename Fn>
void fan_out(std::size_t n_items, std::size_t n_workers, Fn&& work) {
    n_workers = std::max<std::size_t>(1, std::min(n_workers, n_items));
    if (n_workers == 1) {
        for (std::size_t i = 0; i < n_items; ++i) {
            work(i);
        }
        return;
    }
    std::vector<std::jthread> workers;
    workers.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        workers.emplace_back([&, w] {
            for (std::size_t i = w; i < n_items; i += n_workers) {
                work(i);
            }
        });
    }
}

// Whether the bridge from x0 to x1 can reach `level` with probability
// above exp(-40); always true when an endpoint is already past it.
bool near_level(double level, double x0, double x1, double dt) {
    return (level - x0) * (level - x1) < kBridgeCutoff * dt;
}

// Exact draw of the maximum of a Brownian bridge from x0 to x1 over dt:
// P(max >= b) = exp(-2 (b - x0)(b - x1) / dt) for b >= max(x0, x1).
double bridge_maximum(StreamRng& rng, double x0, double x1, double dt) {
    const double d = x1 - x0;
    return 0.5 * (x0 + x1 + std::sqrt(d * d - 2.0 * dt * std::log(rng.uniform())));
}

double bridge_minimum(StreamRng& rng, double x0, double x1, double dt) {
    const double d = x1 - x0;
    return 0.5 * (x0 + x1 - std::sqrt(d * d - 2.0 * dt * std::log(rng.uniform())));
}

bool bridge_crossed(StreamRng& rng, double gap_product, double dt) {
    if (gap_product >= kBridgeCutoff * dt) {
        return false;
    }
    return rng.uniform() < std::exp(-2.0 * gap_product / dt);
}

}  // namespace

void SimPlan::validate() const {
    if (n_samples < 1) {
        throw DomainError("simulation needs at least one sample");
    }
    if (!std::isfinite(dt) || dt <= 0.0) {
        throw DomainError("time step dt must be positive and finite");
    }
    if (n_streams < 1) {
        throw DomainError("simulation needs at least one stream");
    }
}

CoverTimeSample sample_cover_time(const SimPlan& plan, double L, std::uint64_t stream_index) {
    plan.validate();
    if (!std::isfinite(L) || L <= 0.0) {
        throw DomainError("circumference L must be positive and finite");
    }
    if (plan.dt >= 0.25 * L * L) {
        throw DomainError("time step dt = " + std::to_string(plan.dt) +
                          " is too coarse; need dt < L^2 / 4");
    }

    StreamRng rng(plan.base_seed, stream_index);
    const double dt = plan.dt;
    const double sigma = std::sqrt(dt);
    double x = 0.0;
    double lo = 0.0;
    double hi = 0.0;

    for (std::uint64_t step = 1;; ++step) {
        const double start = static_cast<double>(step - 1) * dt;
        const double next = x + sigma * rng.normal();
        if (!std::isfinite(next)) {
            throw AccuracyError("non-finite Wiener increment");
        }
        const double upper = lo + L;
        const double lower = hi - L;

        double top = std::max(x, next);
        double bottom = std::min(x, next);
        if (plan.bridge_correction) {
            if (near_level(hi, x, next, dt)) {
                top = bridge_maximum(rng, x, next, dt);
            }
            if (near_level(lo, x, next, dt)) {
                bottom = bridge_minimum(rng, x, next, dt);
            }
        }

        if (top >= upper) {
            if (next >= upper) {
                return {start + (upper - x) / (next - x) * dt, step, lo, next};
            }
            return {start + 0.5 * dt, step, lo, upper};
        }
        if (bottom <= lower) {
            if (next <= lower) {
                return {start + (x - lower) / (x - next) * dt, step, next, hi};
            }
            return {start + 0.5 * dt, step, lower, hi};
        }

        x = next;
        lo = std::min(lo, bottom);
        hi = std::max(hi, top);
    }
}

std::vector<CoverTimeSample> sample_cover_times(const SimPlan& plan, double L) {
    plan.validate();
    std::vector<CoverTimeSample> out(plan.n_samples);
    // Surface argument errors before spawning workers.
    out[0] = sample_cover_time(plan, L, 0);
    fan_out(plan.n_samples - 1, plan.n_streams,
            [&](std::size_t i) { out[i + 1] = sample_cover_time(plan, L, i + 1); });
    return out;
}

SwitchbackChain sample_switchbacks(const SimPlan& plan, const RangeState& r,
                                   std::uint64_t stream_index) {
    const RangeState range = RangeState::make(r.a, r.L);
    SwitchbackChain chain{range.a, range.L, 0, {range.a}};
    if (range.a == range.L) {
        return chain;
    }

    StreamRng rng(plan.base_seed, stream_index);
    double current = range.a;
    for (;;) {
        const double u = rng.uniform();
        const double overshoot = current * u / (1.0 - u);
        if (overshoot >= range.L - current) {
            break;
        }
        current = std::max(current + overshoot,
                           std::nextafter(current, std::numeric_limits<double>::infinity()));
        chain.a_trajectory.push_back(current);
        ++chain.nu;
    }
    return chain;
}

std::vector<std::uint64_t> switchback_histogram(const SimPlan& plan, const RangeState& r) {
    plan.validate();
    std::vector<long> nus(plan.n_samples);
    nus[0] = sample_switchbacks(plan, r, 0).nu;
    fan_out(plan.n_samples - 1, plan.n_streams,
            [&](std::size_t i) { nus[i + 1] = sample_switchbacks(plan, r, i + 1).nu; });

    std::vector<std::uint64_t> counts;
    for (const long nu : nus) {
        const auto k = static_cast<std::size_t>(nu);
        if (k >= counts.size()) {
            counts.resize(k + 1, 0);
        }
        ++counts[k];
    }
    return counts;
}

IntervalExit sample_interval_exit(const SimPlan& plan, double a, double y,
                                  std::uint64_t stream_index) {
    plan.validate();
    if (!std::isfinite(a) || a <= 0.0 || !std::isfinite(y) || y < 0.0) {
        throw DomainError("interval exit needs a > 0 and y >= 0");
    }
    if (y == 0.0) {
        return {0.0, true};
    }
    const double width = a + y;
    if (plan.dt >= 0.25 * width * width) {
        throw DomainError("time step dt is too coarse for the interval");
    }

    StreamRng rng(plan.base_seed, stream_index);
    const double dt = plan.dt;
    const double sigma = std::sqrt(dt);
    const double lower = -a;
    double x = 0.0;

    for (std::uint64_t step = 1;; ++step) {
        const double start = static_cast<double>(step - 1) * dt;
        const double next = x + sigma * rng.normal();
        if (!std::isfinite(next)) {
            throw AccuracyError("non-finite Wiener increment");
        }
        if (next >= y) {
            return {start + (y - x) / (next - x) * dt, true};
        }
        if (next <= lower) {
            return {start + (x - lower) / (x - next) * dt, false};
        }
        if (plan.bridge_correction) {
            if (bridge_crossed(rng, (y - x) * (y - next), dt)) {
                return {start + 0.5 * dt, true};
            }
            if (bridge_crossed(rng, (x - lower) * (next - lower), dt)) {
                return {start + 0.5 * dt, false};
            }
        }
        x = next;
    }
}

TransformEstimate estimate_transform(std::span<const CoverTimeSample> samples, double s) {
    if (samples.empty()) {
        throw DomainError("transform estimate needs at least one sample");
    }
    if (!std::isfinite(s) || s < 0.0) {
        throw DomainError("Laplace argument s must be finite and >= 0");
    }
    const double n = static_cast<double>(samples.size());
    double sum = 0.0;
    for (const auto& sample : samples) {
        sum += std::exp(-s * sample.theta);
    }
    const double mean = sum / n;
    if (samples.size() == 1) {
        return {mean, 0.0};
    }
    double squares = 0.0;
    for (const auto& sample : samples) {
        const double d = std::exp(-s * sample.theta) - mean;
        squares += d * d;
    }
    return {mean, std::sqrt(squares / (n - 1.0) / n)};
}

std::vector<double> thetas(std::span<const CoverTimeSample> samples) {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& sample : samples) {
        out.push_back(sample.theta);
    }
    return out;
}

}  // namespace covertime::simulate
