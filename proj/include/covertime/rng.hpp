#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace covertime {

/// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Stream key h(base_seed, stream_index):
///   mix(base_seed ^ mix(stream_index + golden))
/// where mix is the SplitMix64 finalizer and golden = 0x9e3779b97f4a7c15.
constexpr std::uint64_t stream_key(std::uint64_t base_seed, std::uint64_t stream_index) {
    return splitmix64_mix(base_seed ^ splitmix64_mix(stream_index + 0x9e3779b97f4a7c15ULL));
}

/// xoshiro256** generator whose state is filled by a SplitMix64 sequence
/// started at stream_key(base_seed, stream_index). One instance per stream;
/// the sequence depends on nothing but the two seeds.
class StreamRng {
public:
    StreamRng(std::uint64_t base_seed, std::uint64_t stream_index) {
        std::uint64_t x = stream_key(base_seed, stream_index);
        for (auto& word : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            word = splitmix64_mix(x);
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal by the Box-Muller transform; the second variate of
    /// each pair is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double radius = std::sqrt(-2.0 * std::log(uniform()));
        const double angle = 2.0 * std::numbers::pi * uniform();
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4]{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace covertime
