// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace helmdd {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

enum class Side : int { Left = 0, Right = 1, Bottom = 2, Top = 3, None = 4 };

struct Tri {
    std::array<int, 3> v;  ///< counterclockwise vertex indices
};

struct Edge {
    int a = -1;               ///< vertex indices, a < b
    int b = -1;
    int tri[2] = {-1, -1};    ///< adjacent triangles; tri[1] = -1 on the boundary
    Side side = Side::None;   ///< boundary side tag; None for interior edges

    bool on_boundary() const { return tri[1] < 0; }
};

/// Triangulated axis-aligned rectangle [0,Lx] x [0,Ly].
///
/// The grid is a tensor product of x-columns and y-rows; between consecutive
/// required abscissae the columns are uniform, so every requested interior
/// vertical line lands exactly on a vertex column. Each cell is split into
/// two triangles along its bottom-left to top-right diagonal. Immutable once
/// built and safely shareable across threads.
struct RectMesh {
    double width = 0.0;
    double height = 0.0;
    double h = 0.0;  ///< nominal mesh size (largest cell edge)

    std::vector<double> columns;  ///< x grid lines, ascending
    std::vector<double> rows;     ///< y grid lines, ascending
    std::vector<Vec2> vertices;   ///< vertex (i,j) at index j*columns.size()+i
    std::vector<Tri> triangles;
    std::vector<Edge> edges;                    ///< unique edges
    std::vector<std::array<int, 3>> tri_edges;  ///< per triangle: edges (v0v1, v1v2, v2v0)
    std::vector<int> boundary_edges;            ///< indices into edges

    int vertex_index(int i, int j) const { return j * static_cast<int>(columns.size()) + i; }

    Vec2 barycenter(int t) const {
        const auto& v = triangles[t].v;
        return {(vertices[v[0]].x + vertices[v[1]].x + vertices[v[2]].x) / 3.0,
                (vertices[v[0]].y + vertices[v[1]].y + vertices[v[2]].y) / 3.0};
    }

    double tri_area(int t) const {
        const auto& v = triangles[t].v;
        const Vec2 p0 = vertices[v[0]], p1 = vertices[v[1]], p2 = vertices[v[2]];
        return 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
    }

    double edge_length(int e) const { return norm(vertices[edges[e].a] - vertices[edges[e].b]); }

    /// Index of the vertex column matching x0 within 1e-12*width, or -1.
    int find_column(double x0) const {
        const double tol = 1e-12 * std::max(width, 1.0);
        auto it = std::lower_bound(columns.begin(), columns.end(), x0 - tol);
        if (it != columns.end() && std::abs(*it - x0) <= tol)
            return static_cast<int>(it - columns.begin());
        return -1;
    }
};

namespace detail {

inline void append_uniform(std::vector<double>& pts, double a, double b, double h_target) {
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / h_target - 1e-12)));
    for (int i = 0; i < n; ++i) pts.push_back(a + (b - a) * static_cast<double>(i) / n);
}

}  // namespace detail

/// Builds the piecewise-uniform rectangle mesh. Every abscissa in
/// `required_abscissae` becomes a vertex column; actual cell sizes never
/// exceed h_target. Throws if an abscissa is outside [0, Lx] or the vertex
/// count would exceed max_vertices (resource guard).
inline RectMesh build_uniform_rect_mesh(double Lx, double Ly, double h_target,
                                        std::vector<double> required_abscissae = {},
                                        std::size_t max_vertices = 4000000) {
    if (!(Lx > 0.0) || !(Ly > 0.0) || !(h_target > 0.0))
        throw std::invalid_argument("build_uniform_rect_mesh: Lx, Ly, h_target must be positive");
    const double xtol = 1e-12 * std::max(Lx, 1.0);
    for (double a : required_abscissae)
        if (a < -xtol || a > Lx + xtol)
            throw std::invalid_argument("build_uniform_rect_mesh: abscissa outside [0, Lx]");

    std::vector<double> brk = {0.0, Lx};
    for (double a : required_abscissae)
        if (a > xtol && a < Lx - xtol) brk.push_back(a);
    std::sort(brk.begin(), brk.end());
    brk.erase(std::unique(brk.begin(), brk.end(),
                          [xtol](double p, double q) { return std::abs(p - q) <= xtol; }),
              brk.end());

    RectMesh m;
    m.width = Lx;
    m.height = Ly;
    for (std::size_t s = 0; s + 1 < brk.size(); ++s)
        detail::append_uniform(m.columns, brk[s], brk[s + 1], h_target);
    m.columns.push_back(Lx);
    detail::append_uniform(m.rows, 0.0, Ly, h_target);
    m.rows.push_back(Ly);

    const int ncol = static_cast<int>(m.columns.size());
    const int nrow = static_cast<int>(m.rows.size());
    if (static_cast<std::size_t>(ncol) * static_cast<std::size_t>(nrow) > max_vertices)
        throw std::runtime_error("build_uniform_rect_mesh: vertex count exceeds resource cap");

    double hmax = 0.0;
    for (int i = 0; i + 1 < ncol; ++i) hmax = std::max(hmax, m.columns[i + 1] - m.columns[i]);
    for (int j = 0; j + 1 < nrow; ++j) hmax = std::max(hmax, m.rows[j + 1] - m.rows[j]);
    m.h = hmax;

    m.vertices.resize(static_cast<std::size_t>(ncol) * nrow);
    for (int j = 0; j < nrow; ++j)
        for (int i = 0; i < ncol; ++i) m.vertices[m.vertex_index(i, j)] = {m.columns[i], m.rows[j]};

    m.triangles.reserve(2 * static_cast<std::size_t>(ncol - 1) * (nrow - 1));
    for (int j = 0; j + 1 < nrow; ++j) {
        for (int i = 0; i + 1 < ncol; ++i) {
            const int v00 = m.vertex_index(i, j), v10 = m.vertex_index(i + 1, j);
            const int v01 = m.vertex_index(i, j + 1), v11 = m.vertex_index(i + 1, j + 1);
            m.triangles.push_back({{v00, v10, v11}});
            m.triangles.push_back({{v00, v11, v01}});
        }
    }

    // Unique-edge enumeration in deterministic (triangle traversal) order.
    std::unordered_map<std::uint64_t, int> edge_of;
    edge_of.reserve(3 * m.triangles.size() / 2);
    m.tri_edges.resize(m.triangles.size());
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        const auto& v = m.triangles[t].v;
        for (int s = 0; s < 3; ++s) {
            const int p = std::min(v[s], v[(s + 1) % 3]);
            const int q = std::max(v[s], v[(s + 1) % 3]);
            const std::uint64_t key = (static_cast<std::uint64_t>(p) << 32) | static_cast<std::uint32_t>(q);
            auto [it, inserted] = edge_of.try_emplace(key, static_cast<int>(m.edges.size()));
            if (inserted) {
                Edge e;
                e.a = p;
                e.b = q;
                e.tri[0] = static_cast<int>(t);
                m.edges.push_back(e);
            } else {
                m.edges[it->second].tri[1] = static_cast<int>(t);
            }
            m.tri_edges[t][s] = it->second;
        }
    }

    const double ytol = 1e-12 * std::max(Ly, 1.0);
    for (std::size_t e = 0; e < m.edges.size(); ++e) {
        Edge& ed = m.edges[e];
        if (!ed.on_boundary()) continue;
        const Vec2 pa = m.vertices[ed.a], pb = m.vertices[ed.b];
        if (std::abs(pa.x) <= xtol && std::abs(pb.x) <= xtol) ed.side = Side::Left;
        else if (std::abs(pa.x - Lx) <= xtol && std::abs(pb.x - Lx) <= xtol) ed.side = Side::Right;
        else if (std::abs(pa.y) <= ytol && std::abs(pb.y) <= ytol) ed.side = Side::Bottom;
        else if (std::abs(pa.y - Ly) <= ytol && std::abs(pb.y - Ly) <= ytol) ed.side = Side::Top;
        else throw std::logic_error("mesh edge with one adjacent triangle not on the rectangle boundary");
        m.boundary_edges.push_back(static_cast<int>(e));
    }
    return m;
}

/// Interior edges on the vertical line x = x0, ordered by ascending y. The
/// chain covers [0, Ly] with each edge listed once. Throws if x0 is not an
/// interior vertex column.
inline std::vector<int> vertical_interface_edges(const RectMesh& m, double x0) {
    const int c = m.find_column(x0);
    if (c < 0) throw std::invalid_argument("vertical_interface_edges: x0 is not on a grid line");
    if (c == 0 || c == static_cast<int>(m.columns.size()) - 1)
        throw std::invalid_argument("vertical_interface_edges: x0 must be interior");

    std::vector<int> chain;
    chain.reserve(m.rows.size() - 1);
    for (std::size_t j = 0; j + 1 < m.rows.size(); ++j) {
        const int va = m.vertex_index(c, static_cast<int>(j));
        const int vb = m.vertex_index(c, static_cast<int>(j + 1));
        // The cell to the right of column c owns this edge as its left side.
        bool found = false;
        const int t = 2 * (static_cast<int>(j) * (static_cast<int>(m.columns.size()) - 1) + c) + 1;
        for (int s = 0; s < 3 && !found; ++s) {
            const int e = m.tri_edges[t][s];
            if ((m.edges[e].a == va && m.edges[e].b == vb) ||
                (m.edges[e].a == vb && m.edges[e].b == va)) {
                chain.push_back(e);
                found = true;
            }
        }
        if (!found) throw std::logic_error("vertical_interface_edges: chain edge missing");
    }
    return chain;
}

/// Plain-text dump: header "vertices N triangles M", one vertex per line,
/// one triangle per line.
inline void write_mesh(const RectMesh& m, std::ostream& os) {
    os << "vertices " << m.vertices.size() << " triangles " << m.triangles.size() << "\n";
    os.precision(17);
    for (const auto& v : m.vertices) os << v.x << " " << v.y << "\n";
    for (const auto& t : m.triangles) os << t.v[0] << " " << t.v[1] << " " << t.v[2] << "\n";
}

inline void write_mesh(const RectMesh& m, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_mesh: cannot open " + path);
    write_mesh(m, os);
}

}  // namespace helmdd
