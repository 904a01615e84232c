// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "helmdd/rng.hpp"

namespace helmdd {

using cplx1d = std::complex<double>;

/// Overlapping interval cover of a 1-d domain. Neighbour-only overlap is
/// enforced: lo[l] < lo[l+1] < hi[l] < hi[l+1].
struct Interval1dDecomposition {
    double k = 0.0;
    std::vector<double> lo, hi;

    int size() const { return static_cast<int>(lo.size()); }

    void validate() const {
        if (!(k > 0.0)) throw std::invalid_argument("interval decomposition: k must be positive");
        if (lo.size() != hi.size() || lo.empty())
            throw std::invalid_argument("interval decomposition: endpoint lists inconsistent");
        for (std::size_t l = 0; l < lo.size(); ++l) {
            if (!(lo[l] < hi[l])) throw std::invalid_argument("interval decomposition: empty interval");
            if (l + 1 < lo.size() && !(lo[l] < lo[l + 1] && lo[l + 1] < hi[l] && hi[l] < hi[l + 1]))
                throw std::invalid_argument("interval decomposition: overlap must involve neighbours only");
            if (l + 2 < lo.size() && hi[l] > lo[l + 2])
                throw std::invalid_argument("interval decomposition: overlap reaches a non-neighbour");
        }
    }
};

/// Same construction as the 2-d strips: N blocks of width L/N extended by
/// r*L/N into each neighbour.
inline Interval1dDecomposition strip_intervals_1d(double length, int N, double r, double k) {
    if (N < 2) throw std::invalid_argument("strip_intervals_1d: N must be at least 2");
    if (!(r > 0.0)) throw std::invalid_argument("strip_intervals_1d: r must be positive");
    Interval1dDecomposition d;
    d.k = k;
    const double W = length / N;
    for (int l = 0; l < N; ++l) {
        d.lo.push_back(std::max(0.0, l * W - r * W));
        d.hi.push_back(std::min(length, (l + 1) * W + r * W));
    }
    d.validate();
    return d;
}

/// Helmholtz-harmonic error on each interval, stored as the coefficients of
/// the right-going wave a e^{ikx} and the left-going wave b e^{-ikx}. Every
/// 1-d Helmholtz-harmonic function is such a combination, so the error
/// propagation sweep acts exactly on these coefficients.
struct HarmonicError1d {
    std::vector<cplx1d> a, b;
};

namespace oned_detail {

inline cplx1d eik(double k, double x) { return std::exp(cplx1d(0.0, k * x)); }

// Impedance traces of v = a e^{ikx} + b e^{-ikx}:
//   left-facing  (-v' - ikv)(x) = -2ik a e^{ ikx}
//   right-facing ( v' - ikv)(x) = -2ik b e^{-ikx}
inline cplx1d left_facing_trace(double k, cplx1d a, double x) {
    return cplx1d(0.0, -2.0 * k) * a * eik(k, x);
}
inline cplx1d right_facing_trace(double k, cplx1d b, double x) {
    return cplx1d(0.0, -2.0 * k) * b * eik(k, -x);
}

// Solve v'' + k^2 v = 0 on [lo, hi] with (-v'-ikv)(lo) = gl, (v'-ikv)(hi) = gr.
inline void solve_interval(double k, double lo, double hi, cplx1d gl, cplx1d gr, cplx1d& a,
                           cplx1d& b) {
    a = cplx1d(0.0, 1.0 / (2.0 * k)) * gl * eik(k, -lo);
    b = cplx1d(0.0, 1.0 / (2.0 * k)) * gr * eik(k, hi);
}

}  // namespace oned_detail

/// One sweep of the error propagation operator: each interval solves with
/// the left-facing impedance trace of its left neighbour at its left
/// endpoint and the right-facing trace of its right neighbour at its right
/// endpoint (zero at the outer boundary). The partition of unity equals 1 at
/// the neighbours' interfaces, so the transmitted data is the neighbour's
/// trace alone.
inline HarmonicError1d apply_T_1d(const Interval1dDecomposition& d, const HarmonicError1d& e,
                                  bool lower_part = true, bool upper_part = true) {
    const int N = d.size();
    if (static_cast<int>(e.a.size()) != N || static_cast<int>(e.b.size()) != N)
        throw std::invalid_argument("apply_T_1d: coefficient count mismatch");
    HarmonicError1d out;
    out.a.assign(N, 0.0);
    out.b.assign(N, 0.0);
    for (int j = 0; j < N; ++j) {
        const cplx1d gl = (lower_part && j > 0)
                              ? oned_detail::left_facing_trace(d.k, e.a[j - 1], d.lo[j])
                              : cplx1d(0.0);
        const cplx1d gr = (upper_part && j + 1 < N)
                              ? oned_detail::right_facing_trace(d.k, e.b[j + 1], d.hi[j])
                              : cplx1d(0.0);
        oned_detail::solve_interval(d.k, d.lo[j], d.hi[j], gl, gr, out.a[j], out.b[j]);
    }
    return out;
}

/// Lower-triangular (left-to-right) part of the sweep.
inline HarmonicError1d apply_L_1d(const Interval1dDecomposition& d, const HarmonicError1d& e) {
    return apply_T_1d(d, e, true, false);
}
/// Upper-triangular (right-to-left) part of the sweep.
inline HarmonicError1d apply_U_1d(const Interval1dDecomposition& d, const HarmonicError1d& e) {
    return apply_T_1d(d, e, false, true);
}

/// Norm built from the moduli of the boundary impedance traces,
/// sqrt(sum_l 4 k^2 (|a_l|^2 + |b_l|^2)).
inline double trace_norm_1d(const Interval1dDecomposition& d, const HarmonicError1d& e) {
    double acc = 0.0;
    for (int l = 0; l < d.size(); ++l) acc += std::norm(e.a[l]) + std::norm(e.b[l]);
    return 2.0 * d.k * std::sqrt(acc);
}

/// The four single-interface impedance-to-impedance multipliers in 1-d.
/// Transmitted-facing maps vanish identically; reflected-facing maps are
/// unimodular phases.
enum class Leg1d {
    TransmitFromLeft,   ///< left data, right-facing trace at the left neighbour's interface
    ReflectFromLeft,    ///< left data, left-facing trace at the right neighbour's interface
    TransmitFromRight,  ///< right data, left-facing trace at the right neighbour's interface
    ReflectFromRight,   ///< right data, right-facing trace at the left neighbour's interface
};

inline cplx1d imp_map_multiplier_1d(const Interval1dDecomposition& d, int l, Leg1d leg) {
    const int N = d.size();
    auto need = [&](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("imp_map_multiplier_1d: ") + what);
    };
    switch (leg) {
        case Leg1d::TransmitFromLeft:
            need(l >= 1 && l < N, "no left neighbour");
            return 0.0;
        case Leg1d::ReflectFromLeft:
            need(l >= 0 && l + 1 < N, "no right neighbour");
            return oned_detail::eik(d.k, d.lo[l + 1] - d.lo[l]);
        case Leg1d::TransmitFromRight:
            need(l >= 0 && l + 1 < N, "no right neighbour");
            return 0.0;
        case Leg1d::ReflectFromRight:
            need(l >= 1 && l < N, "no left neighbour");
            return oned_detail::eik(d.k, d.hi[l] - d.hi[l - 1]);
    }
    throw std::logic_error("imp_map_multiplier_1d: unknown leg");
}

/// Max over random starts of ||T^N e|| / ||e||; exact nilpotency makes this
/// machine-precision small.
inline double verify_nilpotency(const Interval1dDecomposition& d, int trials, std::uint64_t seed) {
    Rng rng(seed);
    const int N = d.size();
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        HarmonicError1d e;
        for (int l = 0; l < N; ++l) {
            e.a.push_back(rng.unit_disc());
            e.b.push_back(rng.unit_disc());
        }
        const double base = trace_norm_1d(d, e);
        HarmonicError1d w = e;
        for (int n = 0; n < N; ++n) w = apply_T_1d(d, w);
        if (base > 0.0) worst = std::max(worst, trace_norm_1d(d, w) / base);
    }
    return worst;
}

/// Impedance-trace isometry defect of a single harmonic wave on [lo, hi]:
/// zero in exact arithmetic.
inline double isometry_defect_1d(double k, double lo, double hi, cplx1d a, cplx1d b) {
    const cplx1d v_lo = a * oned_detail::eik(k, lo) + b * oned_detail::eik(k, -lo);
    const cplx1d v_hi = a * oned_detail::eik(k, hi) + b * oned_detail::eik(k, -hi);
    const cplx1d dv_lo = cplx1d(0.0, k) * (a * oned_detail::eik(k, lo) - b * oned_detail::eik(k, -lo));
    const cplx1d dv_hi = cplx1d(0.0, k) * (a * oned_detail::eik(k, hi) - b * oned_detail::eik(k, -hi));
    const cplx1d ik(0.0, k);
    // Outward normal derivative: -v' at lo, +v' at hi.
    const double minus = std::norm(-dv_lo - ik * v_lo) + std::norm(dv_hi - ik * v_hi);
    const double plus = std::norm(-dv_lo + ik * v_lo) + std::norm(dv_hi + ik * v_hi);
    const double denom = std::norm(dv_lo) + std::norm(dv_hi) + k * k * (std::norm(v_lo) + std::norm(v_hi));
    if (denom == 0.0) throw std::invalid_argument("isometry_defect_1d: zero wave");
    return std::abs(minus - plus) / denom;
}

}  // namespace helmdd
