// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "helmdd/linalg.hpp"
#include "helmdd/mesh.hpp"

namespace helmdd {

/// Degree-2 Lagrange space on a RectMesh. Dofs are the mesh vertices followed
/// by one midpoint dof per mesh edge, so n_dofs = #vertices + #edges. Each
/// triangle sees six dofs in the order (v0, v1, v2, m01, m12, m20).
struct FemSpace {
    const RectMesh* mesh = nullptr;
    int n_vertex = 0;
    int n_dofs = 0;
    std::vector<std::array<int, 6>> tri_dofs;
    std::array<std::vector<int>, 4> side_dofs;  ///< boundary dofs per Side, ascending dof id

    Vec2 dof_position(int d) const {
        if (d < n_vertex) return mesh->vertices[d];
        const Edge& e = mesh->edges[d - n_vertex];
        return {0.5 * (mesh->vertices[e.a].x + mesh->vertices[e.b].x),
                0.5 * (mesh->vertices[e.a].y + mesh->vertices[e.b].y)};
    }

    int midpoint_dof(int edge) const { return n_vertex + edge; }

    /// Dofs supported on edge e: its two endpoints and its midpoint.
    std::array<int, 3> edge_dofs(int e) const {
        return {mesh->edges[e].a, mesh->edges[e].b, n_vertex + e};
    }
};

inline FemSpace make_fem_space(const RectMesh& mesh) {
    if (mesh.triangles.empty()) throw std::invalid_argument("make_fem_space: empty mesh");
    FemSpace s;
    s.mesh = &mesh;
    s.n_vertex = static_cast<int>(mesh.vertices.size());
    s.n_dofs = s.n_vertex + static_cast<int>(mesh.edges.size());
    s.tri_dofs.resize(mesh.triangles.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& v = mesh.triangles[t].v;
        const auto& e = mesh.tri_edges[t];
        s.tri_dofs[t] = {v[0], v[1], v[2],
                         s.n_vertex + e[0], s.n_vertex + e[1], s.n_vertex + e[2]};
    }
    for (int be : mesh.boundary_edges) {
        const auto side = static_cast<int>(mesh.edges[be].side);
        for (int d : s.edge_dofs(be)) s.side_dofs[side].push_back(d);
    }
    for (auto& v : s.side_dofs) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    return s;
}

namespace fem_detail {

// Degree-4 six-point triangle rule; weights sum to 1 and scale by the area.
struct TriQuad {
    double xi, eta, w;
};
inline const std::array<TriQuad, 6>& tri_quadrature() {
    static const std::array<TriQuad, 6> q = {{
        {0.445948490915965, 0.445948490915965, 0.223381589678011},
        {0.108103018168070, 0.445948490915965, 0.223381589678011},
        {0.445948490915965, 0.108103018168070, 0.223381589678011},
        {0.091576213509771, 0.091576213509771, 0.109951743655322},
        {0.816847572980459, 0.091576213509771, 0.109951743655322},
        {0.091576213509771, 0.816847572980459, 0.109951743655322},
    }};
    return q;
}

// Three-point Gauss on [0,1], exact through degree 5.
struct LineQuad {
    double t, w;
};
inline const std::array<LineQuad, 3>& line_quadrature() {
    static const std::array<LineQuad, 3> q = {{
        {0.5 - 0.3872983346207417, 5.0 / 18.0},
        {0.5, 8.0 / 18.0},
        {0.5 + 0.3872983346207417, 5.0 / 18.0},
    }};
    return q;
}

inline std::array<double, 6> p2_values(double xi, double eta) {
    const double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
    return {l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1),
            4 * l0 * l1, 4 * l1 * l2, 4 * l2 * l0};
}

inline std::array<Vec2, 6> p2_ref_gradients(double xi, double eta) {
    const double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
    const Vec2 g0{-1, -1}, g1{1, 0}, g2{0, 1};
    auto ax = [](double c, Vec2 g) { return Vec2{c * g.x, c * g.y}; };
    auto add = [](Vec2 p, Vec2 q) { return Vec2{p.x + q.x, p.y + q.y}; };
    return {ax(4 * l0 - 1, g0), ax(4 * l1 - 1, g1), ax(4 * l2 - 1, g2),
            add(ax(4 * l1, g0), ax(4 * l0, g1)),
            add(ax(4 * l2, g1), ax(4 * l1, g2)),
            add(ax(4 * l0, g2), ax(4 * l2, g0))};
}

// Values of the three edge-trace quadratics at parameter t in [0,1],
// in the order (endpoint a, endpoint b, midpoint).
inline std::array<double, 3> edge_trace_values(double t) {
    return {(1 - t) * (1 - 2 * t), t * (2 * t - 1), 4 * t * (1 - t)};
}

struct TriGeometry {
    Vec2 p0;
    double j11, j12, j21, j22;  // Jacobian columns (p1-p0, p2-p0)
    double det;
    double area;

    Vec2 to_reference(Vec2 x) const {
        const double dx = x.x - p0.x, dy = x.y - p0.y;
        return {(j22 * dx - j12 * dy) / det, (-j21 * dx + j11 * dy) / det};
    }
    Vec2 push_gradient(Vec2 g) const {  // J^{-T} g
        return {(j22 * g.x - j21 * g.y) / det, (-j12 * g.x + j11 * g.y) / det};
    }
};

inline TriGeometry tri_geometry(const RectMesh& m, int t) {
    const auto& v = m.triangles[t].v;
    const Vec2 p0 = m.vertices[v[0]], p1 = m.vertices[v[1]], p2 = m.vertices[v[2]];
    TriGeometry g;
    g.p0 = p0;
    g.j11 = p1.x - p0.x;
    g.j21 = p1.y - p0.y;
    g.j12 = p2.x - p0.x;
    g.j22 = p2.y - p0.y;
    g.det = g.j11 * g.j22 - g.j12 * g.j21;
    g.area = 0.5 * g.det;
    if (!(g.area > 0.0)) throw std::logic_error("tri_geometry: nonpositive element area");
    return g;
}

inline Vec2 side_normal(Side s) {
    switch (s) {
        case Side::Left: return {-1, 0};
        case Side::Right: return {1, 0};
        case Side::Bottom: return {0, -1};
        case Side::Top: return {0, 1};
        default: throw std::invalid_argument("side_normal: interior edge has no side normal");
    }
}

}  // namespace fem_detail

/// Assembles (grad u, grad v) - k^2 (u, v) over the listed triangles plus the
/// impedance boundary term -ik <u, v> over the listed edges. When
/// global_to_compact is given, dofs are renumbered through it (entries < 0
/// must not occur on the listed elements) and the matrix has size n_compact;
/// otherwise the matrix lives on the full dof set.
inline ComplexSparseMatrix assemble_helmholtz_on(const FemSpace& space, double k,
                                                 const std::vector<int>& tris,
                                                 const std::vector<int>& impedance_edges,
                                                 const std::vector<int>* global_to_compact = nullptr,
                                                 int n_compact = -1) {
    if (!(k > 0.0)) throw std::invalid_argument("assemble_helmholtz: k must be positive");
    const RectMesh& mesh = *space.mesh;
    const int n = global_to_compact ? n_compact : space.n_dofs;
    auto mapped = [&](int d) {
        if (!global_to_compact) return d;
        const int c = (*global_to_compact)[d];
        if (c < 0) throw std::logic_error("assemble_helmholtz: dof missing from compact map");
        return c;
    };

    std::vector<Triplet> trip;
    trip.reserve(36 * tris.size() + 9 * impedance_edges.size());
    const auto& quad = fem_detail::tri_quadrature();

    for (int t : tris) {
        const auto geo = fem_detail::tri_geometry(mesh, t);
        std::array<std::array<double, 36>, 1> ke{};  // row-major 6x6
        for (const auto& q : quad) {
            const auto vals = fem_detail::p2_values(q.xi, q.eta);
            const auto refg = fem_detail::p2_ref_gradients(q.xi, q.eta);
            std::array<Vec2, 6> g;
            for (int i = 0; i < 6; ++i) g[i] = geo.push_gradient(refg[i]);
            const double w = q.w * geo.area;
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j)
                    ke[0][6 * i + j] += w * (dot(g[i], g[j]) - k * k * vals[i] * vals[j]);
        }
        const auto& dofs = space.tri_dofs[t];
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                trip.emplace_back(mapped(dofs[i]), mapped(dofs[j]), cplx(ke[0][6 * i + j], 0.0));
    }

    const cplx minus_ik(0.0, -k);
    for (int e : impedance_edges) {
        const double len = mesh.edge_length(e);
        const auto dofs = space.edge_dofs(e);
        std::array<double, 9> me{};
        for (const auto& q : fem_detail::line_quadrature()) {
            const auto tv = fem_detail::edge_trace_values(q.t);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) me[3 * i + j] += q.w * len * tv[i] * tv[j];
        }
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trip.emplace_back(mapped(dofs[i]), mapped(dofs[j]), minus_ik * me[3 * i + j]);
    }
    return ComplexSparseMatrix(n, n, trip);
}

/// Global Helmholtz operator with impedance on the given boundary edges.
inline ComplexSparseMatrix assemble_helmholtz(const FemSpace& space, double k,
                                              const std::vector<int>& impedance_edges) {
    std::vector<int> all(space.mesh->triangles.size());
    std::iota(all.begin(), all.end(), 0);
    return assemble_helmholtz_on(space, k, all, impedance_edges);
}

/// Dofs supported on the given edges, sorted by (y, x) position so vertical
/// chains come out ordered along the chain.
inline std::vector<int> dofs_on_edges(const FemSpace& space, const std::vector<int>& edges) {
    std::vector<int> dofs;
    dofs.reserve(3 * edges.size());
    for (int e : edges)
        for (int d : space.edge_dofs(e)) dofs.push_back(d);
    std::sort(dofs.begin(), dofs.end());
    dofs.erase(std::unique(dofs.begin(), dofs.end()), dofs.end());
    std::stable_sort(dofs.begin(), dofs.end(), [&](int a, int b) {
        const Vec2 pa = space.dof_position(a), pb = space.dof_position(b);
        if (pa.y != pb.y) return pa.y < pb.y;
        return pa.x < pb.x;
    });
    return dofs;
}

/// Dense edge mass matrix <u, v> over the given edges, in the dof order of
/// `dofs` (every dof on the edges must be listed). Symmetric positive
/// definite on that span.
inline Eigen::MatrixXd edge_mass_dense(const FemSpace& space, const std::vector<int>& edges,
                                       const std::vector<int>& dofs) {
    if (edges.empty()) throw std::invalid_argument("edge_mass_dense: empty edge set");
    std::vector<int> pos(space.n_dofs, -1);
    for (std::size_t i = 0; i < dofs.size(); ++i) pos[dofs[i]] = static_cast<int>(i);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dofs.size(), dofs.size());
    for (int e : edges) {
        const double len = space.mesh->edge_length(e);
        const auto ed = space.edge_dofs(e);
        for (const auto& q : fem_detail::line_quadrature()) {
            const auto tv = fem_detail::edge_trace_values(q.t);
            for (int i = 0; i < 3; ++i) {
                const int pi = pos[ed[i]];
                if (pi < 0) throw std::logic_error("edge_mass_dense: dof missing from list");
                for (int j = 0; j < 3; ++j) M(pi, pos[ed[j]]) += q.w * len * tv[i] * tv[j];
            }
        }
    }
    return M;
}

/// Boundary mass matrix on the full dof set, supported on the dofs of the
/// given edges.
inline ComplexSparseMatrix assemble_boundary_mass(const FemSpace& space,
                                                  const std::vector<int>& edges) {
    if (edges.empty()) throw std::invalid_argument("assemble_boundary_mass: empty edge set");
    std::vector<Triplet> trip;
    trip.reserve(9 * edges.size());
    for (int e : edges) {
        const double len = space.mesh->edge_length(e);
        const auto ed = space.edge_dofs(e);
        for (const auto& q : fem_detail::line_quadrature()) {
            const auto tv = fem_detail::edge_trace_values(q.t);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    trip.emplace_back(ed[i], ed[j], cplx(q.w * len * tv[i] * tv[j], 0.0));
        }
    }
    return ComplexSparseMatrix(space.n_dofs, space.n_dofs, trip);
}

/// Boundary functional <g, v> over the given boundary edges; g is evaluated
/// at quadrature points together with the outward side normal. Entries vanish
/// for dofs not on the edge set.
inline Vector impedance_load(const FemSpace& space, const std::vector<int>& edges,
                             const std::function<cplx(Vec2, Vec2)>& g) {
    Vector F = Vector::Zero(space.n_dofs);
    for (int e : edges) {
        const Edge& ed = space.mesh->edges[e];
        const Vec2 n = fem_detail::side_normal(ed.side);
        const Vec2 pa = space.mesh->vertices[ed.a], pb = space.mesh->vertices[ed.b];
        const double len = space.mesh->edge_length(e);
        const auto dofs = space.edge_dofs(e);
        for (const auto& q : fem_detail::line_quadrature()) {
            const Vec2 p{pa.x + q.t * (pb.x - pa.x), pa.y + q.t * (pb.y - pa.y)};
            const cplx gv = g(p, n);
            const auto tv = fem_detail::edge_trace_values(q.t);
            for (int i = 0; i < 3; ++i) F[dofs[i]] += q.w * len * gv * tv[i];
        }
    }
    return F;
}

/// Volume functional (f, v).
inline Vector volume_load(const FemSpace& space, const std::function<cplx(Vec2)>& f) {
    Vector F = Vector::Zero(space.n_dofs);
    for (std::size_t t = 0; t < space.mesh->triangles.size(); ++t) {
        const auto geo = fem_detail::tri_geometry(*space.mesh, static_cast<int>(t));
        const auto& dofs = space.tri_dofs[t];
        for (const auto& q : fem_detail::tri_quadrature()) {
            const Vec2 p{geo.p0.x + geo.j11 * q.xi + geo.j12 * q.eta,
                         geo.p0.y + geo.j21 * q.xi + geo.j22 * q.eta};
            const cplx fv = f(p);
            const auto vals = fem_detail::p2_values(q.xi, q.eta);
            for (int i = 0; i < 6; ++i) F[dofs[i]] += q.w * geo.area * fv * vals[i];
        }
    }
    return F;
}

/// Solves the interior impedance problem with volume source f (may be null)
/// and impedance data g on the whole outer boundary. The residual check
/// ||A u - F|| <= residual_tol ||F|| guards against a bad factorization.
inline Vector solve_interior_impedance(const FemSpace& space, double k,
                                       const std::function<cplx(Vec2)>& f,
                                       const std::function<cplx(Vec2, Vec2)>& g,
                                       double residual_tol = 1e-10) {
    const ComplexSparseMatrix A = assemble_helmholtz(space, k, space.mesh->boundary_edges);
    Vector F = impedance_load(space, space.mesh->boundary_edges, g);
    if (f) F += volume_load(space, f);
    const SparseFactorization fact(A);
    Vector u = fact.solve(F);
    const double fn = F.norm();
    if (fn > 0.0 && (A * u - F).norm() > residual_tol * fn)
        throw std::runtime_error("solve_interior_impedance: residual check failed");
    return u;
}

inline double l2_norm(const FemSpace& space, const Vector& u) {
    double acc = 0.0;
    for (std::size_t t = 0; t < space.mesh->triangles.size(); ++t) {
        const auto geo = fem_detail::tri_geometry(*space.mesh, static_cast<int>(t));
        const auto& dofs = space.tri_dofs[t];
        for (const auto& q : fem_detail::tri_quadrature()) {
            const auto vals = fem_detail::p2_values(q.xi, q.eta);
            cplx uh = 0.0;
            for (int i = 0; i < 6; ++i) uh += u[dofs[i]] * vals[i];
            acc += q.w * geo.area * std::norm(uh);
        }
    }
    return std::sqrt(acc);
}

/// || u_h - exact ||_L2 over the domain.
inline double l2_error(const FemSpace& space, const Vector& u,
                       const std::function<cplx(Vec2)>& exact) {
    double acc = 0.0;
    for (std::size_t t = 0; t < space.mesh->triangles.size(); ++t) {
        const auto geo = fem_detail::tri_geometry(*space.mesh, static_cast<int>(t));
        const auto& dofs = space.tri_dofs[t];
        for (const auto& q : fem_detail::tri_quadrature()) {
            const Vec2 p{geo.p0.x + geo.j11 * q.xi + geo.j12 * q.eta,
                         geo.p0.y + geo.j21 * q.xi + geo.j22 * q.eta};
            const auto vals = fem_detail::p2_values(q.xi, q.eta);
            cplx uh = 0.0;
            for (int i = 0; i < 6; ++i) uh += u[dofs[i]] * vals[i];
            acc += q.w * geo.area * std::norm(uh - exact(p));
        }
    }
    return std::sqrt(acc);
}

/// Wavenumber-weighted H1 norm (|grad u|^2 + k^2 |u|^2)^(1/2); diagnostic only.
inline double h1k_norm(const FemSpace& space, const Vector& u, double k) {
    double acc = 0.0;
    for (std::size_t t = 0; t < space.mesh->triangles.size(); ++t) {
        const auto geo = fem_detail::tri_geometry(*space.mesh, static_cast<int>(t));
        const auto& dofs = space.tri_dofs[t];
        for (const auto& q : fem_detail::tri_quadrature()) {
            const auto vals = fem_detail::p2_values(q.xi, q.eta);
            const auto refg = fem_detail::p2_ref_gradients(q.xi, q.eta);
            cplx uh = 0.0, gx = 0.0, gy = 0.0;
            for (int i = 0; i < 6; ++i) {
                uh += u[dofs[i]] * vals[i];
                const Vec2 gi = geo.push_gradient(refg[i]);
                gx += u[dofs[i]] * gi.x;
                gy += u[dofs[i]] * gi.y;
            }
            acc += q.w * geo.area * (std::norm(gx) + std::norm(gy) + k * k * std::norm(uh));
        }
    }
    return std::sqrt(acc);
}

/// Relative defect | ||du/dn - iku||^2 - ||du/dn + iku||^2 | / ||u||^2_{1,k,boundary}
/// over the given boundary edges (defaults to the whole outer boundary),
/// with the normal derivative taken elementwise from the owning triangle.
/// For discrete solutions of the homogeneous problem this tends to 0 as the
/// mesh is refined; it does not vanish at finite h.
inline double impedance_isometry_defect(const FemSpace& space, double k, const Vector& u,
                                        const std::vector<int>* edge_subset = nullptr) {
    const std::vector<int>& edges = edge_subset ? *edge_subset : space.mesh->boundary_edges;
    double minus = 0.0, plus = 0.0, denom = 0.0;
    for (int e : edges) {
        const Edge& ed = space.mesh->edges[e];
        const int t = ed.tri[0];
        const auto geo = fem_detail::tri_geometry(*space.mesh, t);
        const Vec2 n = fem_detail::side_normal(ed.side);
        const Vec2 pa = space.mesh->vertices[ed.a], pb = space.mesh->vertices[ed.b];
        const double len = space.mesh->edge_length(e);
        const auto& dofs = space.tri_dofs[t];
        for (const auto& q : fem_detail::line_quadrature()) {
            const Vec2 p{pa.x + q.t * (pb.x - pa.x), pa.y + q.t * (pb.y - pa.y)};
            const Vec2 xi = geo.to_reference(p);
            const auto vals = fem_detail::p2_values(xi.x, xi.y);
            const auto refg = fem_detail::p2_ref_gradients(xi.x, xi.y);
            cplx uh = 0.0, dn = 0.0;
            for (int i = 0; i < 6; ++i) {
                uh += u[dofs[i]] * vals[i];
                const Vec2 gi = geo.push_gradient(refg[i]);
                dn += u[dofs[i]] * (gi.x * n.x + gi.y * n.y);
            }
            const cplx iku = cplx(0.0, k) * uh;
            minus += q.w * len * std::norm(dn - iku);
            plus += q.w * len * std::norm(dn + iku);
            denom += q.w * len * (std::norm(dn) + k * k * std::norm(uh));
        }
    }
    if (denom == 0.0)
        throw std::invalid_argument("impedance_isometry_defect: zero impedance-trace norm");
    return std::abs(minus - plus) / denom;
}

}  // namespace helmdd
