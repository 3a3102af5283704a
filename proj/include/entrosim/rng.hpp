#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace entrosim {

namespace detail {

// SplitMix64 step (Steele, Lea, Flood). Used for seeding and stream mixing.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// xoshiro256** with splitmix64 seeding. All sampling is done from the raw
// 64-bit stream so that trajectories replay bit-exactly on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) w = detail::splitmix64_next(s);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = detail::rotl64(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl64(state_[3], 45);
        return result;
    }

    // uniform in [0, 1), 53 significant bits
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Exp(rate); uniform() < 1 keeps the log argument positive
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    // uniform integer in [0, n); n <= 2^53 assumed (lattice-sized draws)
    std::uint64_t below(std::uint64_t n) {
        std::uint64_t k = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
        return k < n ? k : n - 1;
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::array<std::uint64_t, 4> state_{};
};

// Counter-based stream derivation: a stream is keyed by (master seed, a, b),
// never by enumeration order, so extending a sweep grid leaves the streams of
// existing points untouched.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = master;
    s ^= detail::splitmix64_next(s) ^ (0x9E3779B97F4A7C15ull * (a + 1));
    std::uint64_t h = detail::splitmix64_next(s);
    s ^= h ^ (0xC2B2AE3D27D4EB4Full * (b + 1));
    return detail::splitmix64_next(s);
}

// Order-insensitive-free hash of raw double bits; canonical parameter order is
// fixed by the caller. Used to key sweep grid points by value.
inline std::uint64_t hash_doubles(const double* vals, std::size_t n, std::uint64_t init = 0x6A09E667F3BCC909ull) {
    std::uint64_t s = init;
    for (std::size_t i = 0; i < n; ++i) {
        std::uint64_t bits;
        static_assert(sizeof(double) == sizeof(std::uint64_t));
        __builtin_memcpy(&bits, &vals[i], sizeof(bits));
        s ^= bits + 0x9E3779B97F4A7C15ull + (s << 6) + (s >> 2);
        s = detail::splitmix64_next(s);
    }
    return s;
}

}  // namespace entrosim
