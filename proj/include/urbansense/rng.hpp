#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace urbansense {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d4ecda1ce2a3f7ULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Deterministic per-entity random stream (xoshiro256**). Each node and each
// node-gateway pair gets its own substream so runs are reproducible and
// removing one node never perturbs another node's draws. std::normal_distribution
// is implementation-defined, so the transforms live here.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) noexcept {
        for (auto& w : state_) w = seed = splitmix64(seed);
    }

    // substream keyed by run seed and an entity label
    static RngStream derive(std::uint64_t seed, std::string_view label) {
        return RngStream(splitmix64(seed ^ fnv1a(label)));
    }

    std::uint64_t next_u64() noexcept {
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

    double uniform() noexcept {  // [0,1)
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    double normal(double sigma) noexcept {
        if (sigma == 0.0) return 0.0;
        // Box-Muller, single-value (no cached spare, keeps draw count obvious)
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return sigma * std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
};

}  // namespace urbansense
