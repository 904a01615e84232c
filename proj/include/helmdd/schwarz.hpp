// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>

#include "helmdd/decomp.hpp"
#include "helmdd/fem.hpp"
#include "helmdd/linalg.hpp"
#include "helmdd/rng.hpp"

namespace helmdd {

/// One-level overlapping Schwarz solver with impedance transmission
/// conditions. Holds the global impedance Helmholtz operator and, per
/// subdomain, the local operator (impedance form on the whole local
/// boundary), its factorization, the restriction index map, the
/// partition-of-unity weights, and the boundary mass factors used by the
/// discrete-harmonic error norm.
struct OrasSolver {
    const FemSpace* space = nullptr;
    double k = 0.0;
    Decomposition decomp;
    ComplexSparseMatrix A;
    std::unique_ptr<SparseFactorization> A_fact;

    struct Local {
        ComplexSparseMatrix A;
        std::unique_ptr<SparseFactorization> fact;
        std::vector<int> boundary_local;       ///< local indices of dofs on the subdomain boundary
        Eigen::LLT<Eigen::MatrixXd> Mb_chol;   ///< Cholesky of the local boundary mass
    };
    std::vector<Local> locals;

    Vector restrict_to(int l, const Vector& v) const {
        const auto& dl = decomp.dofs[l];
        Vector out(dl.size());
        for (std::size_t i = 0; i < dl.size(); ++i) out[i] = v[dl[i]];
        return out;
    }
};

/// Per-sweep record of the fixed-point iteration. rel_error is the
/// discrete-harmonic-norm error against the exact discrete solution,
/// normalized by the first sweep (the random start itself is not
/// discrete-harmonic, so histories begin there); rel_residual is the
/// Euclidean residual normalized by the starting residual.
struct IterationHistory {
    std::vector<int> iter;            ///< sweep index, starting at 1
    std::vector<double> rel_error;    ///< first entry 1 by normalization
    std::vector<double> rel_residual;
    int iterations = -1;              ///< sweeps to reach the tolerance; -1 if the cap was hit
    bool reached = false;
    double wall_seconds = 0.0;
};

enum class StopCriterion { ErrorNorm, Residual };

inline OrasSolver oras_setup(const FemSpace& space, double k, Decomposition decomp) {
    OrasSolver s;
    s.space = &space;
    s.k = k;
    s.decomp = std::move(decomp);
    s.A = assemble_helmholtz(space, k, space.mesh->boundary_edges);
    s.A_fact = std::make_unique<SparseFactorization>(s.A);

    // Discrete counterpart of sum_l R~^T_l R_l = I: the weights over the
    // subdomains containing each dof must sum to 1.
    {
        std::vector<double> total(space.n_dofs, 0.0);
        for (int l = 0; l < s.decomp.n; ++l)
            for (std::size_t i = 0; i < s.decomp.dofs[l].size(); ++i)
                total[s.decomp.dofs[l][i]] += s.decomp.weights[l][i];
        for (int d = 0; d < space.n_dofs; ++d)
            if (std::abs(total[d] - 1.0) > 1e-12)
                throw std::logic_error("oras_setup: prolongation identity violated");
    }

    s.locals.resize(s.decomp.n);
    for (int l = 0; l < s.decomp.n; ++l) {
        auto& loc = s.locals[l];
        const auto& dl = s.decomp.dofs[l];
        std::vector<int> g2l(space.n_dofs, -1);
        for (std::size_t i = 0; i < dl.size(); ++i) g2l[dl[i]] = static_cast<int>(i);
        loc.A = assemble_helmholtz_on(space, k, s.decomp.elements[l], s.decomp.boundary_edges[l],
                                      &g2l, static_cast<int>(dl.size()));
        try {
            loc.fact = std::make_unique<SparseFactorization>(loc.A);
        } catch (const SingularMatrixError& err) {
            throw SingularMatrixError("oras_setup: subdomain " + std::to_string(l) + ": " +
                                      err.what());
        }
        const std::vector<int> bdofs = dofs_on_edges(space, s.decomp.boundary_edges[l]);
        loc.boundary_local.reserve(bdofs.size());
        for (int d : bdofs) loc.boundary_local.push_back(g2l[d]);
        const Eigen::MatrixXd Mb = edge_mass_dense(space, s.decomp.boundary_edges[l], bdofs);
        loc.Mb_chol.compute(Mb);
        if (loc.Mb_chol.info() != Eigen::Success)
            throw std::runtime_error("oras_setup: boundary mass not positive definite");
    }
    return s;
}

/// Weighted recombination u = sum_l R~^T_l u_l of local dof vectors, in fixed
/// subdomain order.
inline Vector combine_locals(const OrasSolver& s, const std::vector<Vector>& locals) {
    Vector u = Vector::Zero(s.space->n_dofs);
    for (int l = 0; l < s.decomp.n; ++l)
        for (std::size_t i = 0; i < s.decomp.dofs[l].size(); ++i)
            u[s.decomp.dofs[l][i]] += s.decomp.weights[l][i] * locals[l][i];
    return u;
}

/// One sweep in local form: u_l <- u|_l + A_l^{-1} R_l (F - A u) with
/// u = sum_l R~^T_l u_l the weighted combination of the current locals.
inline std::vector<Vector> oras_sweep_locals(const OrasSolver& s, const std::vector<Vector>& locals,
                                             const Vector& F) {
    const Vector u = combine_locals(s, locals);
    const Vector r = F - s.A * u;
    std::vector<Vector> next(s.decomp.n);
    for (int l = 0; l < s.decomp.n; ++l)
        next[l] = s.restrict_to(l, u) + s.locals[l].fact->solve(s.restrict_to(l, r));
    return next;
}

/// One sweep from a global iterate:
/// u_next = sum_l R~^T_l [ u|_l + A_l^{-1} R_l (F - A u) ].
/// Solving A u = F exactly makes this a fixed point.
inline Vector oras_iterate(const OrasSolver& s, const Vector& u, const Vector& F) {
    if (u.size() != s.space->n_dofs || F.size() != s.space->n_dofs)
        throw std::invalid_argument("oras_iterate: vector size mismatch");
    const Vector r = F - s.A * u;
    Vector next = Vector::Zero(s.space->n_dofs);
    for (int l = 0; l < s.decomp.n; ++l) {
        const Vector loc = s.restrict_to(l, u) + s.locals[l].fact->solve(s.restrict_to(l, r));
        for (std::size_t i = 0; i < s.decomp.dofs[l].size(); ++i)
            next[s.decomp.dofs[l][i]] += s.decomp.weights[l][i] * loc[i];
    }
    return next;
}

/// Preconditioner application r -> sum_l R~^T_l A_l^{-1} R_l r; one Schwarz
/// sweep equals a Richardson step with this operator.
inline Vector apply_oras_preconditioner(const OrasSolver& s, const Vector& r) {
    Vector z = Vector::Zero(s.space->n_dofs);
    for (int l = 0; l < s.decomp.n; ++l) {
        const Vector c = s.locals[l].fact->solve(s.restrict_to(l, r));
        for (std::size_t i = 0; i < s.decomp.dofs[l].size(); ++i)
            z[s.decomp.dofs[l][i]] += s.decomp.weights[l][i] * c[i];
    }
    return z;
}

/// Norm of a discrete-harmonic local error vector: per subdomain the residual
/// r = A_l v_l is supported on the boundary dofs (interior rows vanish for
/// harmonic v_l), and the norm is sqrt(sum_l r_b^H M_b^{-1} r_b) — the dual
/// norm realizing the trace-sup formulation. Inputs whose interior residual
/// exceeds 1e-8 of the boundary residual are rejected.
inline double error_norm_v0(const OrasSolver& s, const std::vector<Vector>& locals) {
    if (static_cast<int>(locals.size()) != s.decomp.n)
        throw std::invalid_argument("error_norm_v0: one local vector per subdomain required");
    double acc = 0.0;
    for (int l = 0; l < s.decomp.n; ++l) {
        const Vector r = s.locals[l].A * locals[l];
        const auto& bd = s.locals[l].boundary_local;
        Eigen::VectorXd br(bd.size()), bi(bd.size());
        std::vector<char> on_boundary(r.size(), 0);
        for (std::size_t i = 0; i < bd.size(); ++i) {
            on_boundary[bd[i]] = 1;
            br[i] = r[bd[i]].real();
            bi[i] = r[bd[i]].imag();
        }
        double interior2 = 0.0, boundary2 = 0.0;
        for (Eigen::Index i = 0; i < r.size(); ++i)
            (on_boundary[i] ? boundary2 : interior2) += std::norm(r[i]);
        if (std::sqrt(interior2) > 1e-8 * std::sqrt(boundary2))
            throw std::invalid_argument("error_norm_v0: input is not discrete-harmonic");
        acc += br.dot(s.locals[l].Mb_chol.solve(br)) + bi.dot(s.locals[l].Mb_chol.solve(bi));
    }
    return std::sqrt(acc);
}

/// Runs the fixed-point iteration from the global start u0, recording per
/// sweep the discrete-harmonic-norm error (normalized by sweep 1) and the
/// Euclidean residual (normalized by the start). Stops when the selected
/// measure reaches tol; iterations = -1 if maxit sweeps were not enough.
inline IterationHistory run_fixed_point(const OrasSolver& s, const Vector& F, const Vector& u0,
                                        double tol, int maxit,
                                        StopCriterion stop = StopCriterion::ErrorNorm) {
    const auto t_start = std::chrono::steady_clock::now();
    IterationHistory hist;
    const Vector u_exact = s.A_fact->solve(F);
    const double r0 = (F - s.A * u0).norm();

    std::vector<Vector> locals(s.decomp.n);
    for (int l = 0; l < s.decomp.n; ++l) locals[l] = s.restrict_to(l, u0);

    double e1 = 0.0;
    for (int n = 1; n <= maxit; ++n) {
        locals = oras_sweep_locals(s, locals, F);
        const Vector u = combine_locals(s, locals);
        std::vector<Vector> err(s.decomp.n);
        for (int l = 0; l < s.decomp.n; ++l) err[l] = s.restrict_to(l, u_exact) - locals[l];
        const double en = error_norm_v0(s, err);
        if (n == 1) e1 = en;
        const double rel_err = e1 > 0.0 ? en / e1 : 0.0;
        const double rel_res = r0 > 0.0 ? (F - s.A * u).norm() / r0 : 0.0;
        hist.iter.push_back(n);
        hist.rel_error.push_back(rel_err);
        hist.rel_residual.push_back(rel_res);
        const double measure = stop == StopCriterion::ErrorNorm ? rel_err : rel_res;
        if (measure <= tol) {
            hist.iterations = n;
            hist.reached = true;
            break;
        }
    }
    hist.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return hist;
}

struct ContractionStats {
    double max_ratio = 0.0;
    double mean_ratio = 0.0;
    int trials = 0;
};

/// Measures ||T^n v|| / ||v|| in the discrete-harmonic norm over random
/// starts, where T is the error propagation sweep and v is the (harmonic)
/// state after one sweep from a random nodal start with values uniform in
/// the complex unit disc.
inline ContractionStats estimate_contraction(const OrasSolver& s, int n_power, int trials,
                                             std::uint64_t seed) {
    if (n_power < 1 || trials < 1)
        throw std::invalid_argument("estimate_contraction: n_power and trials must be positive");
    Rng rng(seed);
    const Vector F = Vector::Zero(s.space->n_dofs);
    ContractionStats st;
    st.trials = trials;
    for (int tr = 0; tr < trials; ++tr) {
        Vector u0(s.space->n_dofs);
        for (int i = 0; i < s.space->n_dofs; ++i) u0[i] = rng.unit_disc();
        std::vector<Vector> v(s.decomp.n);
        for (int l = 0; l < s.decomp.n; ++l) v[l] = s.restrict_to(l, u0);
        v = oras_sweep_locals(s, v, F);  // now discrete-harmonic
        const double base = error_norm_v0(s, v);
        std::vector<Vector> w = v;
        for (int p = 0; p < n_power; ++p) w = oras_sweep_locals(s, w, F);
        const double ratio = base > 0.0 ? error_norm_v0(s, w) / base : 0.0;
        st.max_ratio = std::max(st.max_ratio, ratio);
        st.mean_ratio += ratio / trials;
    }
    return st;
}

/// Iteration count for right-preconditioned GMRES on A u = 0 started from
/// u0 (equivalently, on the correction equation with residual right-hand
/// side), to the given relative residual. Returns -1 when maxit is reached.
inline int gmres_iterations(const OrasSolver& s, const Vector& u0, double tol, int maxit) {
    const Vector b = -(s.A * u0);
    auto applyA = [&](const Vector& v) { return s.A * v; };
    auto applyM = [&](const Vector& v) { return apply_oras_preconditioner(s, v); };
    const GmresResult res = gmres(applyA, applyM, b, tol, maxit);
    return res.converged ? res.iterations : -1;
}

}  // namespace helmdd
