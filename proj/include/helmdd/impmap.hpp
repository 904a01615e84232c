// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "helmdd/fem.hpp"
#include "helmdd/linalg.hpp"
#include "helmdd/mesh.hpp"

namespace helmdd {

/// Trace space on a vertical chain of edges: the edges, their dofs ordered by
/// ascending y, and the 1-d mass matrix of the traces in that order.
struct TraceChain {
    std::vector<int> edges;
    std::vector<int> dofs;
    Eigen::MatrixXd mass;
};

inline TraceChain boundary_trace_chain(const FemSpace& space, Side side) {
    TraceChain tc;
    for (int e : space.mesh->boundary_edges)
        if (space.mesh->edges[e].side == side) tc.edges.push_back(e);
    if (tc.edges.empty()) throw std::invalid_argument("boundary_trace_chain: no edges on side");
    tc.dofs = dofs_on_edges(space, tc.edges);
    tc.mass = edge_mass_dense(space, tc.edges, tc.dofs);
    return tc;
}

inline TraceChain interface_trace_chain(const FemSpace& space, double x0) {
    TraceChain tc;
    tc.edges = vertical_interface_edges(*space.mesh, x0);
    tc.dofs = dofs_on_edges(space, tc.edges);
    tc.mass = edge_mass_dense(space, tc.edges, tc.dofs);
    return tc;
}

/// Finite-dimensional impedance-to-impedance map between trace spaces:
/// matrix acting on source-trace coefficients, producing target-trace
/// coefficients, together with the two trace mass matrices.
struct ImpMapOperator {
    Eigen::MatrixXcd K;       ///< (dst trace dofs) x (src trace dofs)
    Eigen::MatrixXd M_src;
    Eigen::MatrixXd M_dst;
    double k = 0.0;
    double L = 0.0;           ///< canonical domain length
    double delta = 0.0;       ///< target interface position
    Side source = Side::Left;
    int facing = +1;          ///< +1: transmitted trace (+d/dx - ik); -1: reflected (-d/dx - ik)
};

/// Canonical rectangle with its Helmholtz operator (impedance on the whole
/// outer boundary) factorized once; impedance maps for several interfaces can
/// be assembled against it.
struct CanonicalProblem {
    RectMesh mesh;
    FemSpace space;
    double k;
    ComplexSparseMatrix A;
    SparseFactorization fact;

    CanonicalProblem(double L, double height, double k_, double h,
                     std::vector<double> abscissae, std::size_t max_vertices = 4000000)
        : mesh(build_uniform_rect_mesh(L, height, h, std::move(abscissae), max_vertices)),
          space(make_fem_space(mesh)),
          k(k_),
          A(assemble_helmholtz(space, k_, mesh.boundary_edges)),
          fact(A) {}
};

namespace impmap_detail {

/// Triangles with barycenter strictly left (or right) of the line x = x0.
inline std::vector<int> triangles_beside(const RectMesh& mesh, double x0, bool left) {
    std::vector<int> out;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const double bx = mesh.barycenter(static_cast<int>(t)).x;
        if (left ? (bx < x0) : (bx > x0)) out.push_back(static_cast<int>(t));
    }
    return out;
}

/// Boundary edges of the sub-rectangle spanned by the given triangles:
/// edges adjacent to exactly one listed triangle.
inline std::vector<int> region_boundary_edges(const RectMesh& mesh, const std::vector<int>& tris) {
    std::vector<char> in(mesh.triangles.size(), 0);
    for (int t : tris) in[t] = 1;
    std::vector<int> out;
    for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
        const Edge& ed = mesh.edges[e];
        const int c = (ed.tri[0] >= 0 && in[ed.tri[0]]) + (ed.tri[1] >= 0 && in[ed.tri[1]]);
        if (c == 1) out.push_back(static_cast<int>(e));
    }
    return out;
}

}  // namespace impmap_detail

/// Assembles the discrete impedance-to-impedance map on a canonical
/// rectangle: impedance data g on the source side, zero impedance data on the
/// rest of the outer boundary, trace evaluated on the interior interface at
/// x = delta via the variational identity
///   <I g, v> = a_t(u_h, E v) - a(u_h, E v),
/// where E is the nodewise zero extension of the interface trace function v
/// and a_t is the impedance form on the sub-rectangle whose outward normal at
/// the interface points in the facing direction.
inline ImpMapOperator assemble_imp_map(CanonicalProblem& cp, double delta, int facing,
                                       Side source = Side::Left) {
    if (facing != +1 && facing != -1) throw std::invalid_argument("assemble_imp_map: facing must be +1 or -1");
    if (source != Side::Left && source != Side::Right)
        throw std::invalid_argument("assemble_imp_map: source must be a vertical side");
    if (!(delta > 0.0) || !(delta < cp.mesh.width))
        throw std::invalid_argument("assemble_imp_map: delta must lie inside (0, L)");

    const FemSpace& space = cp.space;
    const TraceChain src = boundary_trace_chain(space, source);
    const TraceChain dst = interface_trace_chain(space, delta);

    // Sub-rectangle carrying the facing form: its outward normal at the
    // interface is +x for the left piece, -x for the right piece.
    const auto tris_t = impmap_detail::triangles_beside(cp.mesh, delta, facing == +1);
    const auto edges_t = impmap_detail::region_boundary_edges(cp.mesh, tris_t);
    const ComplexSparseMatrix A_t = assemble_helmholtz_on(space, cp.k, tris_t, edges_t);

    const int ns = static_cast<int>(src.dofs.size());
    const int nd = static_cast<int>(dst.dofs.size());
    Eigen::MatrixXcd W(nd, ns);
    for (int j = 0; j < ns; ++j) {
        // Source basis function j: load vector = j-th column of the source mass.
        Vector b = Vector::Zero(space.n_dofs);
        for (int i = 0; i < ns; ++i) b[src.dofs[i]] = src.mass(i, j);
        const Vector u = cp.fact.solve(b);
        const Vector r = A_t * u - cp.A * u;
        for (int i = 0; i < nd; ++i) W(i, j) = r[dst.dofs[i]];
    }

    ImpMapOperator op;
    op.M_src = src.mass;
    op.M_dst = dst.mass;
    op.K = Eigen::LLT<Eigen::MatrixXd>(dst.mass).solve(W.real()) +
           cplx(0, 1) * Eigen::LLT<Eigen::MatrixXd>(dst.mass).solve(W.imag());
    op.k = cp.k;
    op.L = cp.mesh.width;
    op.delta = delta;
    op.source = source;
    op.facing = facing;
    return op;
}

/// Brute-force alternative assembly: the impedance trace on the interface is
/// computed by elementwise normal differentiation of each column solution on
/// the facing side, then L2-projected onto the interface trace space. Used to
/// cross-check the variational route.
inline ImpMapOperator assemble_imp_map_bruteforce(CanonicalProblem& cp, double delta, int facing,
                                                  Side source = Side::Left) {
    const FemSpace& space = cp.space;
    const TraceChain src = boundary_trace_chain(space, source);
    const TraceChain dst = interface_trace_chain(space, delta);

    const int ns = static_cast<int>(src.dofs.size());
    const int nd = static_cast<int>(dst.dofs.size());
    std::vector<int> pos(space.n_dofs, -1);
    for (int i = 0; i < nd; ++i) pos[dst.dofs[i]] = i;

    Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(nd, ns);
    for (int j = 0; j < ns; ++j) {
        Vector b = Vector::Zero(space.n_dofs);
        for (int i = 0; i < ns; ++i) b[src.dofs[i]] = src.mass(i, j);
        const Vector u = cp.fact.solve(b);
        // Moments <I g, v_i> of (facing * du/dx - i k u) along the chain, with
        // du/dx taken from the triangle on the facing side of each edge.
        for (int e : dst.edges) {
            const Edge& ed = space.mesh->edges[e];
            const Vec2 pa = space.mesh->vertices[ed.a], pb = space.mesh->vertices[ed.b];
            const double len = space.mesh->edge_length(e);
            int town = -1;
            for (int cand : {ed.tri[0], ed.tri[1]}) {
                if (cand < 0) continue;
                const double bx = space.mesh->barycenter(cand).x;
                if ((facing == +1 && bx < delta) || (facing == -1 && bx > delta)) town = cand;
            }
            if (town < 0) throw std::logic_error("assemble_imp_map_bruteforce: no owning triangle");
            const auto geo = fem_detail::tri_geometry(*space.mesh, town);
            const auto& tdofs = space.tri_dofs[town];
            const auto edofs = space.edge_dofs(e);
            for (const auto& q : fem_detail::line_quadrature()) {
                const Vec2 p{pa.x, pa.y + q.t * (pb.y - pa.y)};
                const Vec2 xi = geo.to_reference(p);
                const auto vals = fem_detail::p2_values(xi.x, xi.y);
                const auto refg = fem_detail::p2_ref_gradients(xi.x, xi.y);
                cplx uh = 0.0, dx = 0.0;
                for (int i = 0; i < 6; ++i) {
                    uh += u[tdofs[i]] * vals[i];
                    dx += u[tdofs[i]] * geo.push_gradient(refg[i]).x;
                }
                const cplx trace = static_cast<double>(facing) * dx - cplx(0, cp.k) * uh;
                const auto tv = fem_detail::edge_trace_values(q.t);
                for (int i = 0; i < 3; ++i) W(pos[edofs[i]], j) += q.w * len * trace * tv[i];
            }
        }
    }

    ImpMapOperator op;
    op.M_src = src.mass;
    op.M_dst = dst.mass;
    op.K = Eigen::LLT<Eigen::MatrixXd>(dst.mass).solve(W.real()) +
           cplx(0, 1) * Eigen::LLT<Eigen::MatrixXd>(dst.mass).solve(W.imag());
    op.k = cp.k;
    op.L = cp.mesh.width;
    op.delta = delta;
    op.source = source;
    op.facing = facing;
    return op;
}

/// Largest generalized singular value sup_x ||K x||_{M_dst} / ||x||_{M_src},
/// by power iteration on M_src^{-1} K^H M_dst K with relative eigenvalue
/// tolerance 1e-8. Throws after 10000 non-converged steps.
inline double l2_operator_norm(const ImpMapOperator& op, double tol = 1e-8, int maxit = 10000) {
    const int ns = static_cast<int>(op.K.cols());
    if (ns == 0 || op.K.rows() == 0) return 0.0;
    const Eigen::LLT<Eigen::MatrixXd> llt_src(op.M_src);
    if (llt_src.info() != Eigen::Success)
        throw std::runtime_error("l2_operator_norm: source mass not positive definite");

    Vector x = Vector::Ones(ns);
    x /= std::sqrt(std::real(x.dot(op.M_src * x)));
    double lambda = 0.0;
    for (int it = 0; it < maxit; ++it) {
        const Vector Kx = op.K * x;
        const Vector w = op.K.adjoint() * (op.M_dst * Kx);
        const double lam = std::real(x.dot(w));  // Rayleigh quotient, x is M_src-normalized
        Vector y = llt_src.solve(w.real()).cast<cplx>() +
                   cplx(0, 1) * llt_src.solve(w.imag()).cast<cplx>();
        const double yn = std::sqrt(std::abs(std::real(y.dot(op.M_src * y))));
        if (lam <= 0.0 || yn == 0.0) return 0.0;  // K x = 0: map vanishes on the iterate
        x = y / yn;
        if (it > 0 && std::abs(lam - lambda) <= tol * std::abs(lam)) return std::sqrt(lam);
        lambda = lam;
    }
    throw std::runtime_error("l2_operator_norm: power iteration did not converge");
}

/// Dense cross-check of l2_operator_norm: sigma_max of
/// L_dst^T K L_src^{-T} with M = L L^T.
inline double l2_operator_norm_dense(const ImpMapOperator& op) {
    const Eigen::LLT<Eigen::MatrixXd> llt_src(op.M_src), llt_dst(op.M_dst);
    const Eigen::MatrixXd Lsrc = llt_src.matrixL();
    const Eigen::MatrixXd Ldst = llt_dst.matrixL();
    Eigen::MatrixXcd B = Ldst.transpose().cast<cplx>() * op.K;
    // Right-multiply by L_src^{-T}: solve X L_src^T = B.
    Eigen::MatrixXcd Bt = B.transpose();
    Eigen::MatrixXcd sol = Lsrc.triangularView<Eigen::Lower>().solve(Bt.real()).cast<cplx>() +
                           cplx(0, 1) * Lsrc.triangularView<Eigen::Lower>().solve(Bt.imag()).cast<cplx>();
    B = sol.transpose();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(B);
    return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

/// Norm of the transmitted-facing canonical map at distance delta from the
/// source side (left data, trace +d/dx - ik at x = delta).
inline double rho(double k, double delta, double L, double h) {
    CanonicalProblem cp(L, 1.0, k, h, {delta});
    return l2_operator_norm(assemble_imp_map(cp, delta, +1));
}

/// Norm of the reflected-facing canonical map at distance delta from the
/// source side (left data, trace -d/dx - ik at x = delta).
inline double gamma_map(double k, double delta, double L, double h) {
    CanonicalProblem cp(L, 1.0, k, h, {delta});
    return l2_operator_norm(assemble_imp_map(cp, delta, -1));
}

/// Physical strips of height H reduce to the canonical domain by the affine
/// scaling x -> x/H, giving rho(kH, delta/H, L/H) with the mesh scaled too.
inline double rho_scaled(double k, double H, double delta, double L, double h) {
    return rho(k * H, delta / H, L / H, h / H);
}
inline double gamma_scaled(double k, double H, double delta, double L, double h) {
    return gamma_map(k * H, delta / H, L / H, h / H);
}

/// Scaled norm of the composite impedance map chained across N-1 subdomains
/// of length L with overlap delta: one transmitted leg at distance delta
/// followed by N-2 reflected legs at distance L - delta, composed as a matrix
/// product on matching trace spaces; the result is scaled by 2(N-1).
inline double composite_zeta(double k, int N, double L, double delta, double h,
                             std::size_t max_vertices = 4000000) {
    if (N < 2) throw std::invalid_argument("composite_zeta: N must be at least 2");
    std::vector<double> absc = {delta};
    if (N > 2) absc.push_back(L - delta);
    CanonicalProblem cp(L, 1.0, k, h, absc, max_vertices);
    ImpMapOperator first = assemble_imp_map(cp, delta, +1);
    if (N == 2) return 2.0 * (N - 1) * l2_operator_norm(first);

    const ImpMapOperator chain = assemble_imp_map(cp, L - delta, -1);
    ImpMapOperator composite = first;
    for (int leg = 0; leg < N - 2; ++leg) composite.K = chain.K * composite.K;
    composite.M_dst = chain.M_dst;
    return 2.0 * (N - 1) * l2_operator_norm(composite);
}

/// Closed-form high-frequency reference value (1 - cos t)/(1 + cos t) with
/// t = arctan(1/delta): the large-k limit bound for the transmitted map when
/// the outer boundary absorbs perfectly. A consistency reference for the
/// computed rho, not a certified bound for it.
inline double semiclassical_bound(double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("semiclassical_bound: delta must be positive");
    const double c = std::cos(std::atan(1.0 / delta));
    return (1.0 - c) / (1.0 + c);
}

}  // namespace helmdd
