//
// rng.hpp - seedable, splittable pseudorandom stream
//
// Every randomized operation in the library consumes an explicit RngStream,
// so any run replays bit-identically from its seed on any platform. The
// generator is xoshiro256++ seeded through splitmix64; Gaussian variates use
// the Marsaglia polar method. Derived stream seeds come from derive_seed(),
// a splitmix64 chain over the field list (strings enter via FNV-1a 64).
//

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace amm {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// FNV-1a 64 over the bytes of a tag string; used to feed tags to derive_seed.
inline std::uint64_t tag_field(std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Chains fields into a derived seed: each step xors the next field into the
// running value and advances it through splitmix64.
inline std::uint64_t derive_seed(std::uint64_t seed) { return seed; }

template <typename... Rest>
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t field, Rest... rest) {
    std::uint64_t state = seed ^ field;
    return derive_seed(detail::splitmix64(state), rest...);
}

class RngStream {
public:
    explicit RngStream(std::uint64_t seed) {
        std::uint64_t st = seed;
        for (auto& word : state_) word = detail::splitmix64(st);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl64(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl64(state_[3], 45);
        return result;
    }

    // Uniform on [0,1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, bound); bound >= 1. Rejection from the top of
    // the range avoids modulo bias.
    std::uint64_t uniform_below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % bound;
        }
    }

    // Standard normal via Marsaglia's polar method; the pair's second
    // variate is cached on the stream.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u = 0.0, v = 0.0, s = 0.0;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        cached_ = v * f;
        has_cached_ = true;
        return u * f;
    }

    // Derived independent stream; consumes nothing from this stream.
    RngStream split(std::uint64_t tag) const {
        return RngStream(derive_seed(state_[0] ^ detail::rotl64(state_[3], 17), tag));
    }

private:
    std::array<std::uint64_t, 4> state_{};
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace amm
