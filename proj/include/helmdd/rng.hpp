// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace helmdd {

/// Deterministic random source used for all experiment randomness.
///
/// The engine is the standard mt19937_64 generator, whose output sequence is
/// specified by the C++ standard; doubles are derived from the raw 64-bit
/// words as (x >> 11) * 2^-53 rather than through the library distribution
/// templates, so seeded runs produce identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t raw() { return eng_(); }

    /// Uniform in [0, 1).
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    /// Uniform on the closed unit disc of the complex plane (rejection sampling).
    std::complex<double> unit_disc() {
        while (true) {
            const double x = uniform(-1.0, 1.0);
            const double y = uniform(-1.0, 1.0);
            if (x * x + y * y <= 1.0) return {x, y};
        }
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace helmdd
