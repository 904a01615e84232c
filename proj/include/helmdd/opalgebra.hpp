// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "helmdd/rng.hpp"

namespace helmdd {

/// Two-symbol monomial in run-length encoding: the starting symbol and the
/// lengths of the alternating runs. Order = sum of runs, transitions = number
/// of runs minus one; alternation is implicit, so the encoding is
/// duplicate-free.
struct Monomial {
    bool starts_with_x = true;
    std::vector<int> runs;

    int order() const {
        int n = 0;
        for (int s : runs) n += s;
        return n;
    }
    int transitions() const { return static_cast<int>(runs.size()) - 1; }
};

namespace opalgebra_detail {

inline void compositions(int n, int parts, std::vector<int>& cur,
                         const std::function<void(const std::vector<int>&)>& emit) {
    if (parts == 1) {
        if (n >= 1) {
            cur.push_back(n);
            emit(cur);
            cur.pop_back();
        }
        return;
    }
    for (int first = 1; first <= n - (parts - 1); ++first) {
        cur.push_back(first);
        compositions(n - first, parts - 1, cur, emit);
        cur.pop_back();
    }
}

}  // namespace opalgebra_detail

/// All order-n monomials with exactly j transitions: one composition of n
/// into j+1 positive runs per starting symbol, 2*C(n-1, j) in total.
inline std::vector<Monomial> enumerate_monomials(int n, int j) {
    if (n < 1) throw std::invalid_argument("enumerate_monomials: order must be positive");
    if (j < 0 || j > n - 1) throw std::invalid_argument("enumerate_monomials: transitions out of range");
    std::vector<Monomial> out;
    std::vector<int> cur;
    opalgebra_detail::compositions(n, j + 1, cur, [&](const std::vector<int>& runs) {
        out.push_back({true, runs});
        out.push_back({false, runs});
    });
    return out;
}

inline double binomial(int n, int j) {
    if (j < 0 || j > n) return 0.0;
    double v = 1.0;
    for (int i = 0; i < j; ++i) v = v * (n - i) / (i + 1);
    return v;
}

/// Relative Frobenius defect of (X+Y)^n against the sum of all monomials
/// p(X, Y) over every transition count, evaluated on random complex matrices
/// of the given dimension. Guards n <= 12 (the monomial count is 2^n).
inline double expansion_defect(int n, int dim, std::uint64_t seed) {
    if (n < 1 || n > 12) throw std::invalid_argument("expansion_defect: n must be in [1, 12]");
    if (dim < 1) throw std::invalid_argument("expansion_defect: dim must be positive");
    Rng rng(seed);
    using Mat = Eigen::MatrixXcd;
    Mat X(dim, dim), Y(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
            X(i, j) = rng.unit_disc();
            Y(i, j) = rng.unit_disc();
        }

    std::vector<Mat> xp(n + 1), yp(n + 1);
    xp[0] = yp[0] = Mat::Identity(dim, dim);
    for (int p = 1; p <= n; ++p) {
        xp[p] = xp[p - 1] * X;
        yp[p] = yp[p - 1] * Y;
    }

    Mat lhs = Mat::Identity(dim, dim);
    const Mat S = X + Y;
    for (int p = 0; p < n; ++p) lhs = lhs * S;

    Mat rhs = Mat::Zero(dim, dim);
    for (int j = 0; j <= n - 1; ++j) {
        for (const Monomial& m : enumerate_monomials(n, j)) {
            Mat term = Mat::Identity(dim, dim);
            bool use_x = m.starts_with_x;
            for (int run : m.runs) {
                term = term * (use_x ? xp[run] : yp[run]);
                use_x = !use_x;
            }
            rhs += term;
        }
    }
    return (lhs - rhs).norm() / lhs.norm();
}

/// Closed-form bound 2 sqrt(g^2 + r^2) [(g + r)^{N-1} - g^{N-1}] on the norm
/// of the N-th power of the strip error propagation operator, in terms of
/// the transmitted-facing norm r and reflected-facing norm g.
inline double error_power_bound(double rho, double gamma, int N) {
    if (rho < 0.0 || gamma < 0.0)
        throw std::invalid_argument("error_power_bound: norms must be nonnegative");
    if (N < 2) throw std::invalid_argument("error_power_bound: N must be at least 2");
    return 2.0 * std::sqrt(gamma * gamma + rho * rho) *
           (std::pow(gamma + rho, N - 1) - std::pow(gamma, N - 1));
}

/// First-order-in-rho form: 2 sqrt(2) g^{N-1} (N-1) r + C(N, g) r^2 with
/// C(N, g) = sqrt(2) (N-1)(N-2) g (g + rho0)^{N-3}; requires r <= rho0 <= g.
inline double error_power_bound_small_rho(double rho, double gamma, int N, double rho0) {
    if (!(rho >= 0.0 && rho <= rho0 && rho0 <= gamma))
        throw std::invalid_argument("error_power_bound_small_rho: need 0 <= rho <= rho0 <= gamma");
    if (N < 3) throw std::invalid_argument("error_power_bound_small_rho: N must be at least 3");
    const double c = std::sqrt(2.0) * (N - 1) * (N - 2) * gamma * std::pow(gamma + rho0, N - 3);
    return 2.0 * std::sqrt(2.0) * std::pow(gamma, N - 1) * (N - 1) * rho + c * rho * rho;
}

/// Bound on the (sN)-th power: monomials with fewer than s transitions
/// vanish by nilpotency, leaving
/// 2 sqrt(g^2 + r^2) sum_{j=s}^{sN-1} C(sN-1, j) g^{sN-1-j} r^j.
inline double error_power_bound_batched(double rho, double gamma, int N, int s) {
    if (rho < 0.0 || gamma < 0.0)
        throw std::invalid_argument("error_power_bound_batched: norms must be nonnegative");
    if (N < 2 || s < 1) throw std::invalid_argument("error_power_bound_batched: need N >= 2, s >= 1");
    double sum = 0.0;
    const int m = s * N - 1;
    for (int j = s; j <= m; ++j)
        sum += binomial(m, j) * std::pow(gamma, m - j) * std::pow(rho, j);
    return 2.0 * std::sqrt(gamma * gamma + rho * rho) * sum;
}

}  // namespace helmdd
