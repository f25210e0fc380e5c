#pragma once

#include <cstdint>

namespace resetridge {

// Deterministic random stream: xoshiro256++ seeded through SplitMix64.
// All samplers are implemented here rather than via <random> distributions so
// that identical seeds give identical draws on every platform/libstdc++.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // uniform on [0,1) with 53 random bits
    double uniform();
    // uniform on (0,1], safe as a log() argument
    double uniform_pos();

    // standard normal, Marsaglia polar method (second draw cached)
    double normal();

    // exponential with the given rate (mean 1/rate)
    double exponential(double rate);

    // gamma(shape, scale), Marsaglia–Tsang squeeze; shape < 1 via the
    // boost G(k+1) * U^{1/k} identity
    double gamma(double shape, double scale);

private:
    std::uint64_t s_[4];
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace resetridge
