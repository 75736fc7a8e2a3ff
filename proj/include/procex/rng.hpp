#pragma once

#include <cstdint>
#include <random>

namespace procex {

/// Seedable, portable random stream.
///
/// The engine is `std::mt19937_64`, whose output sequence is fixed by the
/// standard. The distribution transforms are written out here (the standard
/// library's are implementation-defined), so a given (seed, stream) pair
/// yields the same values on every conforming toolchain.
///
/// Stream splitting: substream `k` of seed `s` is seeded with
/// `splitmix64(splitmix64(s) ^ (k + 1))`. Simulation uses the case ordinal as
/// `k`, which makes each case independent of how many cases are generated.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    static std::uint64_t splitmix64(std::uint64_t x);

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform();

    /// Uniform integer on [0, bound), unbiased. `bound` must be positive.
    std::uint64_t below(std::uint64_t bound);

    /// Standard normal by the Box-Muller transform (one draw per call).
    double normal();

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

}  // namespace procex
