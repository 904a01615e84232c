// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "helmdd/fem.hpp"
#include "helmdd/mesh.hpp"

namespace helmdd {

/// Overlapping subdomain cover with per-dof partition-of-unity weights.
///
/// Invariants held after construction: the element sets cover the mesh; for
/// every dof the weights over subdomains containing it sum to 1 (within
/// 1e-12); weights lie in [0,1] and vanish on the part of the subdomain
/// boundary interior to the domain. For strips the weight equals 1 on the
/// neighbouring subdomains' interface lines.
struct Decomposition {
    int n = 0;
    std::vector<std::vector<int>> elements;        ///< per subdomain, ascending element ids
    std::vector<std::vector<int>> dofs;            ///< per subdomain, ascending global dof ids
    std::vector<std::vector<int>> boundary_edges;  ///< per subdomain, edges on its whole boundary
    std::vector<std::vector<int>> internal_edges;  ///< subset not on the outer boundary
    std::vector<std::vector<double>> weights;      ///< aligned with dofs[l]
    std::vector<std::vector<char>> dof_on_internal_boundary;  ///< aligned with dofs[l]
    std::vector<std::vector<char>> dof_on_outer_boundary;     ///< aligned with dofs[l]

    // Strip metadata (strip covers only).
    bool strip = false;
    std::vector<double> strip_lo, strip_hi;  ///< extended intervals [a_l, b_l]
    double overlap = 0.0;                    ///< interface-to-interface overlap width
    double extension = 0.0;                  ///< per-side extension distance (ramp width)
};

namespace decomp_detail {

inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 q{a.x + t * ab.x, a.y + t * ab.y};
    return norm(p - q);
}

/// Fills dofs, boundary edge lists and dof boundary flags from the element sets.
inline void fill_topology(Decomposition& d, const FemSpace& space) {
    const RectMesh& mesh = *space.mesh;
    d.dofs.assign(d.n, {});
    d.boundary_edges.assign(d.n, {});
    d.internal_edges.assign(d.n, {});
    d.dof_on_internal_boundary.assign(d.n, {});
    d.dof_on_outer_boundary.assign(d.n, {});

    std::vector<char> covered(mesh.triangles.size(), 0);
    for (int l = 0; l < d.n; ++l) {
        std::vector<char> in(mesh.triangles.size(), 0);
        for (int t : d.elements[l]) {
            in[t] = 1;
            covered[t] = 1;
        }
        // Dofs of the subdomain's elements.
        std::vector<int>& dl = d.dofs[l];
        for (int t : d.elements[l])
            for (int dof : space.tri_dofs[t]) dl.push_back(dof);
        std::sort(dl.begin(), dl.end());
        dl.erase(std::unique(dl.begin(), dl.end()), dl.end());

        // Subdomain boundary: edges adjacent to exactly one covered triangle.
        for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
            const Edge& ed = mesh.edges[e];
            const int c = (ed.tri[0] >= 0 && in[ed.tri[0]]) + (ed.tri[1] >= 0 && in[ed.tri[1]]);
            if (c != 1) continue;
            d.boundary_edges[l].push_back(static_cast<int>(e));
            if (ed.side == Side::None) d.internal_edges[l].push_back(static_cast<int>(e));
        }

        std::vector<char> flag_int(space.n_dofs, 0), flag_out(space.n_dofs, 0);
        for (int e : d.boundary_edges[l]) {
            const bool internal = mesh.edges[e].side == Side::None;
            for (int dof : space.edge_dofs(e)) (internal ? flag_int : flag_out)[dof] = 1;
        }
        d.dof_on_internal_boundary[l].resize(dl.size());
        d.dof_on_outer_boundary[l].resize(dl.size());
        for (std::size_t i = 0; i < dl.size(); ++i) {
            d.dof_on_internal_boundary[l][i] = flag_int[dl[i]];
            d.dof_on_outer_boundary[l][i] = flag_out[dl[i]];
        }
    }
    for (std::size_t t = 0; t < covered.size(); ++t)
        if (!covered[t]) throw std::runtime_error("decomposition: element covered by no subdomain");
}

inline void validate_pou(const Decomposition& d, const FemSpace& space) {
    std::vector<double> total(space.n_dofs, 0.0);
    for (int l = 0; l < d.n; ++l) {
        for (std::size_t i = 0; i < d.dofs[l].size(); ++i) {
            const double w = d.weights[l][i];
            if (w < -1e-14 || w > 1.0 + 1e-14)
                throw std::logic_error("partition of unity: weight outside [0,1]");
            if (d.dof_on_internal_boundary[l][i] && w != 0.0)
                throw std::logic_error("partition of unity: nonzero weight on internal boundary");
            total[d.dofs[l][i]] += w;
        }
    }
    for (int dof = 0; dof < space.n_dofs; ++dof)
        if (std::abs(total[dof] - 1.0) > 1e-12)
            throw std::logic_error("partition of unity: weights do not sum to 1");
}

}  // namespace decomp_detail

/// Builds the partition-of-unity weights. Strips get exact piecewise-linear
/// ramps across each overlap (weight 1 on the neighbours' interface lines);
/// general covers use the clamped linear distance to the subdomain's internal
/// boundary with the extension distance as ramp width, normalized per dof.
inline void build_pou(Decomposition& d, const FemSpace& space) {
    d.weights.assign(d.n, {});
    std::vector<double> raw_total(space.n_dofs, 0.0);

    for (int l = 0; l < d.n; ++l) {
        d.weights[l].resize(d.dofs[l].size());
        for (std::size_t i = 0; i < d.dofs[l].size(); ++i) {
            const Vec2 p = space.dof_position(d.dofs[l][i]);
            double w = 1.0;
            if (d.strip) {
                if (l > 0) {
                    const double dl = d.strip_hi[l - 1] - d.strip_lo[l];
                    w = std::min(w, std::clamp((p.x - d.strip_lo[l]) / dl, 0.0, 1.0));
                }
                if (l + 1 < d.n) {
                    const double dr = d.strip_hi[l] - d.strip_lo[l + 1];
                    w = std::min(w, std::clamp((d.strip_hi[l] - p.x) / dr, 0.0, 1.0));
                }
            } else if (!d.internal_edges[l].empty()) {
                if (d.dof_on_internal_boundary[l][i]) {
                    w = 0.0;
                } else {
                    double dist = std::numeric_limits<double>::max();
                    for (int e : d.internal_edges[l])
                        dist = std::min(dist, decomp_detail::point_segment_distance(
                                                  p, space.mesh->vertices[space.mesh->edges[e].a],
                                                  space.mesh->vertices[space.mesh->edges[e].b]));
                    w = d.extension > 0.0 ? std::clamp(dist / d.extension, 0.0, 1.0) : 1.0;
                }
            }
            if (d.dof_on_internal_boundary[l][i]) w = 0.0;  // support condition, exact
            d.weights[l][i] = w;
            raw_total[d.dofs[l][i]] += w;
        }
    }
    for (int l = 0; l < d.n; ++l)
        for (std::size_t i = 0; i < d.dofs[l].size(); ++i) {
            const double tot = raw_total[d.dofs[l][i]];
            if (tot <= 0.0)
                throw std::runtime_error(
                    "build_pou: dof carries zero weight in every covering subdomain "
                    "(overlap too small)");
            d.weights[l][i] /= tot;
        }
    decomp_detail::validate_pou(d, space);
}

/// Geometry of a strip experiment with subdomain length L and overlap delta:
/// the global length, extension fraction r, and the interface abscissae the
/// mesh has to resolve.
struct StripGeometry {
    double global_length = 0.0;
    double r = 0.0;
    std::vector<double> abscissae;
};

inline StripGeometry strip_geometry(double L, double delta, int N) {
    if (!(delta > 0.0) || !(delta < L))
        throw std::invalid_argument("strip_geometry: need 0 < delta < L");
    if (N < 1) throw std::invalid_argument("strip_geometry: N must be positive");
    StripGeometry g;
    const double W = L - delta;  // interior length (1+2r)W with overlap 2rW
    g.global_length = N * W;
    g.r = delta / (2.0 * W);
    for (int l = 0; l < N; ++l) {
        const double a = std::max(0.0, l * W - g.r * W);
        const double b = std::min(g.global_length, (l + 1) * W + g.r * W);
        if (l > 0) g.abscissae.push_back(a);
        if (l + 1 < N) g.abscissae.push_back(b);
    }
    return g;
}

/// Vertical strip cover of a rectangle: N equal blocks of width L/N, each
/// extended by r*L/N into its neighbours. Interior subdomains have length
/// (1+2r)L/N, end subdomains (1+r)L/N, and the overlap is 2r*L/N. Every
/// interface must land on a mesh column.
inline Decomposition strip_decomposition(const FemSpace& space, int N, double r) {
    if (N < 1) throw std::invalid_argument("strip_decomposition: N must be positive");
    if (r < 0.0) throw std::invalid_argument("strip_decomposition: r must be nonnegative");
    if (N >= 3 && r >= 0.5)
        throw std::invalid_argument("strip_decomposition: overlap reaches beyond immediate neighbours");
    const RectMesh& mesh = *space.mesh;
    const double W = mesh.width / N;

    Decomposition d;
    d.n = N;
    d.strip = true;
    d.extension = r * W;
    d.overlap = 2.0 * r * W;
    d.elements.assign(N, {});
    for (int l = 0; l < N; ++l) {
        const double a = std::max(0.0, l * W - r * W);
        const double b = std::min(mesh.width, (l + 1) * W + r * W);
        d.strip_lo.push_back(a);
        d.strip_hi.push_back(b);
        if ((l > 0 && mesh.find_column(a) < 0) || (l + 1 < N && mesh.find_column(b) < 0))
            throw std::invalid_argument("strip_decomposition: interface not resolved by the mesh");
    }
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const double bx = mesh.barycenter(static_cast<int>(t)).x;
        for (int l = 0; l < N; ++l)
            if (bx > d.strip_lo[l] && bx < d.strip_hi[l]) d.elements[l].push_back(static_cast<int>(t));
    }
    decomp_detail::fill_topology(d, space);
    build_pou(d, space);
    return d;
}

/// Overlapping cover from a nonoverlapping element partition: each part keeps
/// its own elements plus every element whose barycenter lies within distance
/// delta of the part (measured to the part's boundary edges), so facing
/// neighbours overlap by about 2*delta.
inline Decomposition overlapping_from_parts(const FemSpace& space,
                                            const std::vector<int>& part_of_element, int n_parts,
                                            double delta) {
    const RectMesh& mesh = *space.mesh;
    if (part_of_element.size() != mesh.triangles.size())
        throw std::invalid_argument("overlapping_from_parts: one part id per element required");
    if (n_parts < 1) throw std::invalid_argument("overlapping_from_parts: empty partition");
    std::vector<std::size_t> count(n_parts, 0);
    for (int p : part_of_element) {
        if (p < 0 || p >= n_parts)
            throw std::invalid_argument("overlapping_from_parts: part id out of range");
        ++count[p];
    }
    for (int p = 0; p < n_parts; ++p)
        if (count[p] == 0) throw std::invalid_argument("overlapping_from_parts: empty part");

    Decomposition d;
    d.n = n_parts;
    d.extension = delta;
    d.overlap = 2.0 * delta;
    d.elements.assign(n_parts, {});

    // Boundary segments and bounding box per part, for the distance test.
    std::vector<std::vector<std::pair<Vec2, Vec2>>> segs(n_parts);
    std::vector<std::array<double, 4>> bbox(n_parts, {1e300, -1e300, 1e300, -1e300});
    for (std::size_t e = 0; e < mesh.edges.size(); ++e) {
        const Edge& ed = mesh.edges[e];
        const int p0 = ed.tri[0] >= 0 ? part_of_element[ed.tri[0]] : -1;
        const int p1 = ed.tri[1] >= 0 ? part_of_element[ed.tri[1]] : -1;
        if (p0 >= 0 && p0 != p1) segs[p0].emplace_back(mesh.vertices[ed.a], mesh.vertices[ed.b]);
        if (p1 >= 0 && p1 != p0) segs[p1].emplace_back(mesh.vertices[ed.a], mesh.vertices[ed.b]);
    }
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const int p = part_of_element[t];
        for (int v : mesh.triangles[t].v) {
            bbox[p][0] = std::min(bbox[p][0], mesh.vertices[v].x);
            bbox[p][1] = std::max(bbox[p][1], mesh.vertices[v].x);
            bbox[p][2] = std::min(bbox[p][2], mesh.vertices[v].y);
            bbox[p][3] = std::max(bbox[p][3], mesh.vertices[v].y);
        }
    }

    const double tol = 1e-12 * std::max(mesh.width, mesh.height);
    for (int p = 0; p < n_parts; ++p) {
        for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
            if (part_of_element[t] == p) {
                d.elements[p].push_back(static_cast<int>(t));
                continue;
            }
            if (delta <= 0.0) continue;
            const Vec2 c = mesh.barycenter(static_cast<int>(t));
            if (c.x < bbox[p][0] - delta - tol || c.x > bbox[p][1] + delta + tol ||
                c.y < bbox[p][2] - delta - tol || c.y > bbox[p][3] + delta + tol)
                continue;
            double dist = std::numeric_limits<double>::max();
            for (const auto& s : segs[p]) {
                dist = std::min(dist, decomp_detail::point_segment_distance(c, s.first, s.second));
                if (dist <= delta + tol) break;
            }
            if (dist <= delta + tol) d.elements[p].push_back(static_cast<int>(t));
        }
    }
    decomp_detail::fill_topology(d, space);
    build_pou(d, space);
    return d;
}

/// Uniform checkerboard: N x N blocks of side (width/N, height/N), extended
/// by distance delta.
inline Decomposition checkerboard_decomposition(const FemSpace& space, int N, double delta) {
    if (N < 1) throw std::invalid_argument("checkerboard_decomposition: N must be positive");
    const RectMesh& mesh = *space.mesh;
    const double Hx = mesh.width / N, Hy = mesh.height / N;
    std::vector<int> part(mesh.triangles.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Vec2 c = mesh.barycenter(static_cast<int>(t));
        const int ix = std::min(N - 1, static_cast<int>(c.x / Hx));
        const int iy = std::min(N - 1, static_cast<int>(c.y / Hy));
        part[t] = iy * N + ix;
    }
    return overlapping_from_parts(space, part, N * N, delta);
}

/// Recursive coordinate bisection of element barycenters into N balanced
/// connected parts, then overlap extension by delta.
inline Decomposition rcb_partition(const FemSpace& space, int N, double delta) {
    if (N < 1) throw std::invalid_argument("rcb_partition: N must be positive");
    const RectMesh& mesh = *space.mesh;
    std::vector<int> part(mesh.triangles.size(), -1);
    std::vector<int> ids(mesh.triangles.size());
    for (std::size_t t = 0; t < ids.size(); ++t) ids[t] = static_cast<int>(t);

    struct Task {
        std::vector<int> elems;
        int parts;
        int first_id;
    };
    std::vector<Task> stack{{std::move(ids), N, 0}};
    while (!stack.empty()) {
        Task task = std::move(stack.back());
        stack.pop_back();
        if (task.parts == 1) {
            for (int t : task.elems) part[t] = task.first_id;
            continue;
        }
        double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
        for (int t : task.elems) {
            const Vec2 c = mesh.barycenter(t);
            xmin = std::min(xmin, c.x), xmax = std::max(xmax, c.x);
            ymin = std::min(ymin, c.y), ymax = std::max(ymax, c.y);
        }
        const bool split_x = (xmax - xmin) >= (ymax - ymin);
        std::sort(task.elems.begin(), task.elems.end(), [&](int a, int b) {
            const Vec2 ca = mesh.barycenter(a), cb = mesh.barycenter(b);
            return split_x ? (ca.x != cb.x ? ca.x < cb.x : ca.y < cb.y)
                           : (ca.y != cb.y ? ca.y < cb.y : ca.x < cb.x);
        });
        const int nl = task.parts / 2;
        const std::size_t cut =
            static_cast<std::size_t>(static_cast<double>(task.elems.size()) * nl / task.parts + 0.5);
        std::vector<int> left(task.elems.begin(), task.elems.begin() + cut);
        std::vector<int> right(task.elems.begin() + cut, task.elems.end());
        stack.push_back({std::move(left), nl, task.first_id});
        stack.push_back({std::move(right), task.parts - nl, task.first_id + nl});
    }
    return overlapping_from_parts(space, part, N, delta);
}

/// Partition file: header "parts N elements M", then line i holds the part
/// id of element i.
inline std::vector<int> read_partition_ids(const std::string& path, int* n_parts_out = nullptr) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_partition_ids: cannot open " + path);
    std::string kw1, kw2;
    int n_parts = 0;
    std::size_t n_elems = 0;
    if (!(is >> kw1 >> n_parts >> kw2 >> n_elems) || kw1 != "parts" || kw2 != "elements")
        throw std::runtime_error("read_partition_ids: malformed header in " + path);
    std::vector<int> ids(n_elems);
    for (std::size_t i = 0; i < n_elems; ++i)
        if (!(is >> ids[i]))
            throw std::runtime_error("read_partition_ids: missing element ids in " + path);
    if (n_parts_out) *n_parts_out = n_parts;
    return ids;
}

inline void write_partition(const std::string& path, const std::vector<int>& ids, int n_parts) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_partition: cannot open " + path);
    os << "parts " << n_parts << " elements " << ids.size() << "\n";
    for (int p : ids) os << p << "\n";
}

inline Decomposition partition_from_file(const FemSpace& space, const std::string& path,
                                         double delta) {
    int n_parts = 0;
    const std::vector<int> ids = read_partition_ids(path, &n_parts);
    if (ids.size() != space.mesh->triangles.size())
        throw std::invalid_argument("partition_from_file: element count mismatch with mesh");
    return overlapping_from_parts(space, ids, n_parts, delta);
}

}  // namespace helmdd
