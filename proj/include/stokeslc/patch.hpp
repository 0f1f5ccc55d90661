#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "stokeslc/errors.hpp"
#include "stokeslc/mesh.hpp"

namespace stokeslc {

/// Three-element macroelement topologies:
///  - Type1: fan of three triangles around one interior vertex,
///  - Type2: strip, the middle element sharing one edge with each end,
///  - Type3: strip whose first element has two sides on the domain boundary
///    (analyzed with the tied constant over elements 1 and 2).
enum class PatchClass { Type1, Type2, Type3 };

inline const char* to_string(PatchClass c) {
    switch (c) {
        case PatchClass::Type1: return "type1";
        case PatchClass::Type2: return "type2";
        case PatchClass::Type3: return "type3";
    }
    return "?";
}

/// A classified patch.  Pressure vertex order follows the strip/fan
/// conventions used throughout the patch algebra:
///  - Type1: the outer vertex shared by elements (1,3), by (1,2), by (2,3),
///    then the central vertex;
///  - Type2/Type3: far vertex of element 1, the non-common vertex of edge
///    (1,2), of edge (2,3), far vertex of element 3, the vertex common to
///    all three elements.
/// Element constants follow the vertices: one per element (Type1/Type2) or
/// one for elements 1+2 and one for element 3 (Type3).
struct Patch {
    PatchClass cls = PatchClass::Type2;
    std::array<int, 3> elements{-1, -1, -1};
    std::vector<int> pressure_vertices;  // global vertex ids, strip/fan order
    std::vector<int> interior_nodes;     // velocity nodes strictly inside the patch

    int num_vertex_dofs() const { return static_cast<int>(pressure_vertices.size()); }
    int num_constant_dofs() const { return cls == PatchClass::Type1 ? 3
                                         : cls == PatchClass::Type2 ? 3 : 2; }
    int num_pressure_dofs() const { return num_vertex_dofs() + num_constant_dofs(); }
    int num_velocity_dofs() const { return 2 * static_cast<int>(interior_nodes.size()); }
};

namespace detail {

inline int other_edge_vertex(const Edge& e, int v) { return e.a == v ? e.b : e.a; }

inline int common_edge_vertex(const Edge& e1, const Edge& e2) {
    if (e1.a == e2.a || e1.a == e2.b) return e1.a;
    if (e1.b == e2.a || e1.b == e2.b) return e1.b;
    return -1;
}

inline Patch make_strip_patch(const Mesh& mesh, PatchClass cls, int t1, int t2, int t3) {
    const int e12 = mesh.shared_edge(t1, t2);
    const int e23 = mesh.shared_edge(t2, t3);
    const int common = common_edge_vertex(mesh.edges[e12], mesh.edges[e23]);
    if (common < 0) throw PatchUnavailable("strip patch: edges do not meet");

    auto far_vertex = [&](int t, int edge_id) {
        const Edge& e = mesh.edges[edge_id];
        for (int v : mesh.triangles[t].v)
            if (v != e.a && v != e.b) return v;
        return -1;
    };

    Patch p;
    p.cls = cls;
    p.elements = {t1, t2, t3};
    p.pressure_vertices = {far_vertex(t1, e12),
                           other_edge_vertex(mesh.edges[e12], common),
                           other_edge_vertex(mesh.edges[e23], common),
                           far_vertex(t3, e23), common};
    p.interior_nodes = {mesh.midpoint_node(e12), mesh.midpoint_node(e23)};
    return p;
}

inline Patch make_fan_patch(const Mesh& mesh, int ta, int tb, int tc) {
    std::array<int, 3> el{ta, tb, tc};
    std::sort(el.begin(), el.end());
    const int e12 = mesh.shared_edge(el[0], el[1]);
    const int e23 = mesh.shared_edge(el[1], el[2]);
    const int e31 = mesh.shared_edge(el[2], el[0]);
    if (e12 < 0 || e23 < 0 || e31 < 0)
        throw PatchUnavailable("fan patch: elements not pairwise adjacent");
    const int center = common_edge_vertex(mesh.edges[e12], mesh.edges[e23]);
    if (center < 0 || common_edge_vertex(mesh.edges[e23], mesh.edges[e31]) != center)
        throw PatchUnavailable("fan patch: no common central vertex");

    Patch p;
    p.cls = PatchClass::Type1;
    p.elements = el;
    p.pressure_vertices = {other_edge_vertex(mesh.edges[e31], center),
                           other_edge_vertex(mesh.edges[e12], center),
                           other_edge_vertex(mesh.edges[e23], center), center};
    p.interior_nodes = {mesh.midpoint_node(e12), mesh.midpoint_node(e23),
                        mesh.midpoint_node(e31), center};
    return p;
}

}  // namespace detail

/// Patch around `element`.  Elements with at most one boundary side become
/// the middle of a Type2 strip when two mutually non-adjacent neighbours
/// exist (smallest admissible pair), or the fan Type1 when every neighbour
/// pair is adjacent.  A two-boundary-side element becomes element 1 of a
/// Type3 strip through its unique neighbour.
inline Patch extract_patch(const Mesh& mesh, int element) {
    if (element < 0 || element >= mesh.num_triangles())
        throw std::invalid_argument("extract_patch: no such element");
    const Triangle& tri = mesh.triangles[element];
    std::vector<int> nbrs;
    for (int k = 0; k < 3; ++k)
        if (tri.neighbor[k] >= 0) nbrs.push_back(tri.neighbor[k]);
    std::sort(nbrs.begin(), nbrs.end());

    if (tri.boundary_edge_count == 2) {
        const int mid = nbrs.at(0);
        std::vector<int> third;
        for (int k = 0; k < 3; ++k) {
            const int c = mesh.triangles[mid].neighbor[k];
            if (c >= 0 && c != element && !mesh.adjacent(c, element)) third.push_back(c);
        }
        if (third.empty())
            throw PatchUnavailable("extract_patch: no strip continuation for a "
                                   "two-boundary-side element");
        std::sort(third.begin(), third.end());
        return detail::make_strip_patch(mesh, PatchClass::Type3, element, mid, third[0]);
    }

    if (nbrs.size() < 2)
        throw PatchUnavailable("extract_patch: fewer than two neighbours");

    for (std::size_t i = 0; i < nbrs.size(); ++i) {
        for (std::size_t j = i + 1; j < nbrs.size(); ++j) {
            if (mesh.adjacent(nbrs[i], nbrs[j])) continue;
            // Keep a two-boundary-side element in the third slot so the
            // strip classification stays consistent.
            int t1 = nbrs[i], t3 = nbrs[j];
            if (mesh.triangles[t1].boundary_edge_count == 2 &&
                mesh.triangles[t3].boundary_edge_count != 2)
                std::swap(t1, t3);
            return detail::make_strip_patch(mesh, PatchClass::Type2, t1, element, t3);
        }
    }
    return detail::make_fan_patch(mesh, element, nbrs[0], nbrs[1]);
}

/// Recomputes the class of a patch from adjacency and boundary data.
inline PatchClass classify(const Mesh& mesh, const Patch& p) {
    const auto [t1, t2, t3] = p.elements;
    const bool fan = mesh.adjacent(t1, t2) && mesh.adjacent(t2, t3) &&
                     mesh.adjacent(t3, t1);
    if (fan) return PatchClass::Type1;
    if (!mesh.adjacent(t1, t2) || !mesh.adjacent(t2, t3) || mesh.adjacent(t1, t3))
        throw PatchUnavailable("classify: not a recognized three-element patch");
    return mesh.triangles[t1].boundary_edge_count == 2 ? PatchClass::Type3
                                                       : PatchClass::Type2;
}

/// A free-standing three-element mesh together with its extracted patch.
struct SampledPatch {
    Mesh mesh;
    Patch patch;
};

/// Draws a random patch geometry of the requested class with every element
/// satisfying shape_ratio <= max_ratio.  Deterministic for a fixed engine
/// state.  A random similarity transform (rotation, scale in [0.5, 2],
/// translation) is applied to vary the pose.
inline SampledPatch random_patch(PatchClass cls, std::mt19937_64& rng,
                                 double max_ratio = 5.0) {
    constexpr double pi = 3.14159265358979323846;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uni = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

    for (int attempt = 0; attempt < 10000; ++attempt) {
        std::vector<Point2> pts;
        std::vector<std::array<int, 3>> tris;
        if (cls == PatchClass::Type1) {
            double g1 = uni(0.5, 2.5), g2 = uni(0.5, 2.5), g3 = uni(0.5, 2.5);
            const double scale = 2.0 * pi / (g1 + g2 + g3);
            g1 *= scale; g2 *= scale; g3 *= scale;
            if (std::min({g1, g2, g3}) < 0.4 || std::max({g1, g2, g3}) > 2.6) continue;
            const std::array<double, 3> theta{0.0, g1, g1 + g2};
            pts.push_back({0.0, 0.0});  // center, vertex 0
            for (int k = 0; k < 3; ++k) {
                const double r = uni(0.6, 1.6);
                pts.push_back({r * std::cos(theta[k]), r * std::sin(theta[k])});
            }
            tris = {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}};
        } else {
            const Point2 u{0.0, 0.0}, v{1.0, 0.0};
            const Point2 w{uni(-0.2, 1.2), uni(0.35, 1.3)};
            const Point2 x{uni(-0.2, 1.2), -uni(0.35, 1.3)};
            const Vec2 d = w - v;
            const double len = norm(d);
            Vec2 n{d.y / len, -d.x / len};  // unit normal of edge (v,w)
            if (dot(n, u - v) > 0.0) n = -1.0 * n;
            const Point2 y = v + uni(-0.2, 1.2) * d + uni(0.35, 1.3) * len * n;
            pts = {u, v, w, x, y};
            tris = {{0, 3, 1}, {0, 1, 2}, {1, 4, 2}};
        }

        // Random pose.
        const double phi = uni(0.0, 2.0 * pi);
        const double s = uni(0.5, 2.0);
        const Vec2 shift{uni(-5.0, 5.0), uni(-5.0, 5.0)};
        for (Point2& p : pts) {
            const Point2 q{s * (std::cos(phi) * p.x - std::sin(phi) * p.y),
                           s * (std::sin(phi) * p.x + std::cos(phi) * p.y)};
            p = q + shift;
        }

        bool ok = true;
        for (const auto& t : tris) {
            if (std::abs(signed_area(pts[t[0]], pts[t[1]], pts[t[2]])) < 1e-3 * s * s ||
                shape_ratio(pts[t[0]], pts[t[1]], pts[t[2]]) > max_ratio) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;

        SampledPatch out{build_mesh(std::move(pts), std::move(tris)), {}};
        const int seed_element = (cls == PatchClass::Type1) ? 0
                               : (cls == PatchClass::Type2) ? 1 : 0;
        out.patch = extract_patch(out.mesh, seed_element);
        if (out.patch.cls != cls) continue;
        return out;
    }
    throw std::runtime_error("random_patch: sampling failed");
}

}  // namespace stokeslc
