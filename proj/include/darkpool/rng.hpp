#pragma once

#include <cmath>
#include <cstdint>

#include "darkpool/math_util.hpp"

namespace darkpool {

// Counter-based splitmix64 stream. Deterministic across platforms (we avoid
// std::normal_distribution, whose draw sequence is implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() { return splitmix64(state_++); }

    // Uniform on (0, 1); never returns exactly 0 or 1.
    double uniform() {
        const double u = (next_u64() >> 11) * 0x1.0p-53;
        return u > 0.0 ? u : 0x1.0p-53;
    }

    double gaussian() {
        const double u1 = uniform(), u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double exponential(double mean) { return -mean * std::log(uniform()); }

private:
    std::uint64_t state_;
};

}  // namespace darkpool
