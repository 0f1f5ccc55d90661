#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stokeslc/errors.hpp"
#include "stokeslc/geometry.hpp"

namespace stokeslc {

struct Triangle {
    std::array<int, 3> v{};        // vertex ids, counter-clockwise
    double area = 0.0;
    std::array<Vec2, 3> b{};       // edge vector b_j opposite vertex j
    std::array<int, 3> edge{};     // edge id opposite vertex j
    std::array<int, 3> neighbor{}; // triangle across that edge, -1 on boundary
    int boundary_edge_count = 0;
};

struct Edge {
    int a = -1, b = -1;            // endpoint vertex ids, a < b
    std::array<int, 2> tri{-1, -1};
    bool boundary = false;
};

/// Conforming triangulation of a simply-connected polygonal domain.
/// Velocity nodes are the vertices followed by the edge midpoints:
/// node id < V refers to a vertex, otherwise to edge (id - V).
class Mesh {
public:
    std::vector<Point2> vertices;
    std::vector<bool> vertex_on_boundary;
    std::vector<Triangle> triangles;
    std::vector<Edge> edges;

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }
    int num_edges() const { return static_cast<int>(edges.size()); }
    int num_nodes() const { return num_vertices() + num_edges(); }

    int midpoint_node(int edge_id) const { return num_vertices() + edge_id; }

    Point2 node_point(int node) const {
        if (node < num_vertices()) return vertices[node];
        const Edge& e = edges[node - num_vertices()];
        return 0.5 * (vertices[e.a] + vertices[e.b]);
    }

    bool node_on_boundary(int node) const {
        if (node < num_vertices()) return vertex_on_boundary[node];
        return edges[node - num_vertices()].boundary;
    }

    double total_area() const {
        double a = 0.0;
        for (const Triangle& t : triangles) a += t.area;
        return a;
    }

    bool adjacent(int t1, int t2) const {
        for (int k = 0; k < 3; ++k)
            if (triangles[t1].neighbor[k] == t2) return true;
        return false;
    }

    /// Edge id shared by two triangles, or -1.
    int shared_edge(int t1, int t2) const {
        for (int k = 0; k < 3; ++k)
            if (triangles[t1].neighbor[k] == t2) return triangles[t1].edge[k];
        return -1;
    }
};

/// Builds a mesh from raw vertices and triangles.  Triangles given clockwise
/// are reordered, not rejected.  Throws InvalidMesh when the edge structure
/// is non-manifold or the domain is not simply connected (Euler relation).
inline Mesh build_mesh(std::vector<Point2> points,
                       std::vector<std::array<int, 3>> tris) {
    Mesh m;
    m.vertices = std::move(points);
    const int nv = m.num_vertices();

    m.triangles.resize(tris.size());
    for (std::size_t t = 0; t < tris.size(); ++t) {
        std::array<int, 3> v = tris[t];
        for (int k = 0; k < 3; ++k)
            if (v[k] < 0 || v[k] >= nv)
                throw InvalidMesh("build_mesh: vertex id out of range");
        if (signed_area(m.vertices[v[0]], m.vertices[v[1]], m.vertices[v[2]]) < 0.0)
            std::swap(v[1], v[2]);
        Triangle& tri = m.triangles[t];
        tri.v = v;
        const TriangleGeometry g =
            triangle_geometry(m.vertices[v[0]], m.vertices[v[1]], m.vertices[v[2]]);
        tri.area = g.area;
        tri.b = g.b;
        tri.neighbor = {-1, -1, -1};
    }

    std::map<std::pair<int, int>, int> edge_ids;
    for (std::size_t t = 0; t < m.triangles.size(); ++t) {
        Triangle& tri = m.triangles[t];
        for (int j = 0; j < 3; ++j) {
            const int a = tri.v[(j + 1) % 3];
            const int b = tri.v[(j + 2) % 3];
            const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
            auto it = edge_ids.find(key);
            if (it == edge_ids.end()) {
                Edge e;
                e.a = key.first;
                e.b = key.second;
                e.tri[0] = static_cast<int>(t);
                m.edges.push_back(e);
                it = edge_ids.emplace(key, m.num_edges() - 1).first;
            } else {
                Edge& e = m.edges[it->second];
                if (e.tri[1] != -1)
                    throw InvalidMesh("build_mesh: edge shared by more than two triangles");
                e.tri[1] = static_cast<int>(t);
            }
            tri.edge[j] = it->second;
        }
    }

    m.vertex_on_boundary.assign(nv, false);
    for (Edge& e : m.edges) {
        e.boundary = (e.tri[1] == -1);
        if (e.boundary) {
            m.vertex_on_boundary[e.a] = true;
            m.vertex_on_boundary[e.b] = true;
        }
    }
    for (int t = 0; t < m.num_triangles(); ++t) {
        Triangle& tri = m.triangles[t];
        for (int j = 0; j < 3; ++j) {
            const Edge& e = m.edges[tri.edge[j]];
            if (e.boundary)
                ++tri.boundary_edge_count;
            else
                tri.neighbor[j] = (e.tri[0] == t) ? e.tri[1] : e.tri[0];
        }
    }

    if (m.num_vertices() - m.num_edges() + m.num_triangles() != 1)
        throw InvalidMesh("build_mesh: Euler relation V - E + T = 1 violated");
    return m;
}

enum class DiagonalPattern { Right, Left };

inline const char* to_string(DiagonalPattern p) {
    return p == DiagonalPattern::Right ? "right" : "left";
}

/// Uniform n x n grid of the unit square, each cell split along one
/// diagonal.  Right: diagonals run lower-left to upper-right; Left: the
/// other way.  With split_corner_cells the two cells whose diagonal cuts
/// off a corner of the square are split the opposite way, so no element
/// has two boundary sides ("triangulated into the corners").
inline Mesh generate_structured(int n, DiagonalPattern pattern,
                                bool split_corner_cells = false) {
    if (n < 2) throw std::invalid_argument("generate_structured: need n >= 2");
    const double h = 1.0 / n;
    std::vector<Point2> pts;
    pts.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i) pts.push_back({i * h, j * h});

    auto vid = [n](int i, int j) { return j * (n + 1) + i; };
    std::vector<std::array<int, 3>> tris;
    tris.reserve(2 * static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int ll = vid(i, j), lr = vid(i + 1, j);
            const int ur = vid(i + 1, j + 1), ul = vid(i, j + 1);
            bool right = (pattern == DiagonalPattern::Right);
            if (split_corner_cells) {
                const bool corner_cell =
                    right ? ((i == n - 1 && j == 0) || (i == 0 && j == n - 1))
                          : ((i == 0 && j == 0) || (i == n - 1 && j == n - 1));
                if (corner_cell) right = !right;
            }
            if (right) {
                tris.push_back({ll, lr, ur});
                tris.push_back({ll, ur, ul});
            } else {
                tris.push_back({ll, lr, ul});
                tris.push_back({lr, ur, ul});
            }
        }
    }
    return build_mesh(std::move(pts), std::move(tris));
}

/// Elements with exactly two sides on the domain boundary.  An element with
/// three boundary sides has no interior coupling at all and is rejected.
inline std::vector<int> corner_elements(const Mesh& mesh) {
    std::vector<int> out;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const int bec = mesh.triangles[t].boundary_edge_count;
        if (bec >= 3)
            throw InvalidMesh("corner_elements: element " + std::to_string(t) +
                              " has three boundary sides");
        if (bec == 2) out.push_back(t);
    }
    return out;
}

/// Largest shape ratio h / rho over the mesh (longest side over inscribed
/// circle diameter).
inline double regularity_ratio(const Mesh& mesh) {
    double r = 0.0;
    for (const Triangle& t : mesh.triangles)
        r = std::max(r, shape_ratio(mesh.vertices[t.v[0]], mesh.vertices[t.v[1]],
                                    mesh.vertices[t.v[2]]));
    return r;
}

/// Text format: "NV NT", NV lines "x y flag", NT lines "v1 v2 v3" (1-based).
inline void save_mesh_text(const Mesh& mesh, std::ostream& os) {
    os.precision(17);
    os << mesh.num_vertices() << ' ' << mesh.num_triangles() << '\n';
    for (int i = 0; i < mesh.num_vertices(); ++i)
        os << mesh.vertices[i].x << ' ' << mesh.vertices[i].y << ' '
           << (mesh.vertex_on_boundary[i] ? 1 : 0) << '\n';
    for (const Triangle& t : mesh.triangles)
        os << t.v[0] + 1 << ' ' << t.v[1] + 1 << ' ' << t.v[2] + 1 << '\n';
}

inline void save_mesh_text(const Mesh& mesh, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_mesh_text: cannot open " + path);
    save_mesh_text(mesh, os);
}

inline Mesh load_mesh_text(std::istream& is) {
    int nv = 0, nt = 0;
    if (!(is >> nv >> nt) || nv < 3 || nt < 1)
        throw InvalidMesh("load_mesh_text: bad header");
    std::vector<Point2> pts(nv);
    std::vector<int> flags(nv);
    for (int i = 0; i < nv; ++i)
        if (!(is >> pts[i].x >> pts[i].y >> flags[i]))
            throw InvalidMesh("load_mesh_text: bad vertex line");
    std::vector<std::array<int, 3>> tris(nt);
    for (int t = 0; t < nt; ++t) {
        int a, b, c;
        if (!(is >> a >> b >> c)) throw InvalidMesh("load_mesh_text: bad triangle line");
        tris[t] = {a - 1, b - 1, c - 1};
    }
    Mesh m = build_mesh(std::move(pts), std::move(tris));
    for (int i = 0; i < nv; ++i)
        if ((flags[i] != 0) != m.vertex_on_boundary[i])
            throw InvalidMesh("load_mesh_text: boundary flag of vertex " +
                              std::to_string(i + 1) + " inconsistent with topology");
    return m;
}

inline Mesh load_mesh_text(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_mesh_text: cannot open " + path);
    return load_mesh_text(is);
}

}  // namespace stokeslc
