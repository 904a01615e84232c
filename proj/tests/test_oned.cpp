// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helmdd/oned.hpp"

using namespace helmdd;

namespace {

HarmonicError1d random_error(int N, Rng& rng) {
    HarmonicError1d e;
    for (int l = 0; l < N; ++l) {
        e.a.push_back(rng.unit_disc());
        e.b.push_back(rng.unit_disc());
    }
    return e;
}

}  // namespace

TEST_CASE("interval construction validates neighbour-only overlap") {
    const auto d = strip_intervals_1d(4.0, 3, 0.25, 10.0);
    CHECK(d.size() == 3);
    // huge overlap reaches the second neighbour
    CHECK_THROWS_AS(strip_intervals_1d(4.0, 4, 0.75, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(strip_intervals_1d(4.0, 1, 0.25, 10.0), std::invalid_argument);
}

TEST_CASE("zero error stays zero") {
    const auto d = strip_intervals_1d(4.0, 4, 0.25, 7.0);
    HarmonicError1d e;
    e.a.assign(4, 0.0);
    e.b.assign(4, 0.0);
    const auto w = apply_T_1d(d, e);
    CHECK(trace_norm_1d(d, w) == 0.0);
}

TEST_CASE("two subdomains annihilate the error in two sweeps") {
    const auto d = strip_intervals_1d(3.0, 2, 0.25, 9.0);
    Rng rng(1);
    const HarmonicError1d e = random_error(2, rng);
    const double base = trace_norm_1d(d, e);
    const auto w = apply_T_1d(d, apply_T_1d(d, e));
    CHECK(trace_norm_1d(d, w) <= 1e-13 * base);
}

TEST_CASE("transmitted-facing multipliers vanish, reflected ones are phases") {
    const double k = 11.0;
    const auto d = strip_intervals_1d(5.0, 4, 0.2, k);
    for (int l = 1; l < 4; ++l) CHECK(imp_map_multiplier_1d(d, l, Leg1d::TransmitFromLeft) == cplx1d(0.0));
    for (int l = 0; l < 3; ++l) CHECK(imp_map_multiplier_1d(d, l, Leg1d::TransmitFromRight) == cplx1d(0.0));
    for (int l = 0; l < 3; ++l) {
        const cplx1d m = imp_map_multiplier_1d(d, l, Leg1d::ReflectFromLeft);
        CHECK(std::abs(m) == Catch::Approx(1.0).epsilon(1e-14));
        const cplx1d expected = std::exp(cplx1d(0.0, k * (d.lo[l + 1] - d.lo[l])));
        CHECK(std::abs(m - expected) < 1e-13);
    }
    for (int l = 1; l < 4; ++l)
        CHECK(std::abs(imp_map_multiplier_1d(d, l, Leg1d::ReflectFromRight)) ==
              Catch::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(imp_map_multiplier_1d(d, 0, Leg1d::TransmitFromLeft), std::invalid_argument);
    CHECK_THROWS_AS(imp_map_multiplier_1d(d, 3, Leg1d::ReflectFromLeft), std::invalid_argument);
}

TEST_CASE("the N-th power annihilates every harmonic error") {
    for (int N = 2; N <= 8; ++N)
        for (double k : {1.0, 10.0, 40.0}) {
            const auto d = strip_intervals_1d(2.0 * N, N, 0.25, k);
            CHECK(verify_nilpotency(d, 25, 1000 + N) <= 1e-12);
        }
}

TEST_CASE("intermediate powers are generally nonzero") {
    const int N = 5;
    const auto d = strip_intervals_1d(10.0, N, 0.25, 13.0);
    Rng rng(3);
    HarmonicError1d e = random_error(N, rng);
    for (int n = 1; n < N; ++n) {
        e = apply_T_1d(d, e);
        CHECK(trace_norm_1d(d, e) > 0.0);
    }
    e = apply_T_1d(d, e);
    CHECK(trace_norm_1d(d, e) <= 1e-13);
}

TEST_CASE("one-directional sweeps compose to zero both ways") {
    const int N = 4;
    const auto d = strip_intervals_1d(8.0, N, 0.25, 17.0);
    Rng rng(5);
    const HarmonicError1d e = random_error(N, rng);
    const double base = trace_norm_1d(d, e);
    CHECK(trace_norm_1d(d, apply_L_1d(d, apply_U_1d(d, e))) <= 1e-13 * base);
    CHECK(trace_norm_1d(d, apply_U_1d(d, apply_L_1d(d, e))) <= 1e-13 * base);
}

TEST_CASE("the full sweep splits into one-directional powers") {
    const int N = 5;
    const auto d = strip_intervals_1d(10.0, N, 0.3, 6.0);
    Rng rng(7);
    const HarmonicError1d e0 = random_error(N, rng);
    HarmonicError1d t = e0, l = e0, u = e0;
    for (int n = 1; n <= N; ++n) {
        t = apply_T_1d(d, t);
        l = apply_L_1d(d, l);
        u = apply_U_1d(d, u);
        double diff = 0.0;
        for (int j = 0; j < N; ++j) {
            diff += std::norm(t.a[j] - (l.a[j] + u.a[j]));
            diff += std::norm(t.b[j] - (l.b[j] + u.b[j]));
        }
        CHECK(std::sqrt(diff) <= 1e-12 * (trace_norm_1d(d, e0) / (2.0 * d.k)));
    }
}

TEST_CASE("impedance-trace isometry is exact in closed form") {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const double k = rng.uniform(0.5, 40.0);
        const double lo = rng.uniform(-1.0, 0.5);
        const double hi = lo + rng.uniform(0.3, 3.0);
        const cplx1d a = rng.unit_disc(), b = rng.unit_disc();
        if (std::abs(a) + std::abs(b) == 0.0) continue;
        CHECK(isometry_defect_1d(k, lo, hi, a, b) <= 1e-13);
    }
    CHECK_THROWS_AS(isometry_defect_1d(2.0, 0.0, 1.0, 0.0, 0.0), std::invalid_argument);
}
