#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace jdctrl {

/// Counter-based generator: the n-th output is a pure function of (seed, n),
/// so replication streams seeded seed + replication_index are independent and
/// reproducible regardless of thread scheduling.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : key_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = key_ + counter_ * 0x9E3779B97F4A7C15ull;
        ++counter_;
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    /// Uniform on (0, 1).
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (one draw per call, no caching).
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace jdctrl
