#pragma once

#include <cstdint>
#include <random>

#include "lightiot/bits.hpp"

namespace lightiot {

/// Seeded generator with platform-independent draws. std::mt19937_64 is
/// fully specified by the standard; the distributions below are hand-rolled
/// because the library ones are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Independent stream for (run seed, stream id).
    static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream_id),
                          static_cast<std::uint32_t>(stream_id >> 32)};
        Rng r(0);
        r.engine_.seed(seq);
        return r;
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [lo, hi], inclusive; rejection sampling keeps it unbiased.
    std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {
        if (hi <= lo) return lo;
        const std::uint64_t span = hi - lo + 1;
        if (span == 0) return next_u64();
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t x;
        do { x = next_u64(); } while (x >= limit);
        return lo + x % span;
    }

    /// Uniform double in [0, 1) with 53 bits of precision.
    double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return unit() < p;
    }

    IdBits next_id() {
        IdBits out;
        for (std::size_t half = 0; half < 2; ++half) {
            std::uint64_t w = next_u64();
            for (std::size_t i = 0; i < 8; ++i) out.bytes[half * 8 + i] = static_cast<std::uint8_t>(w >> (56 - 8 * i));
        }
        return out;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace lightiot
