#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "stokeslc/errors.hpp"
#include "stokeslc/mesh.hpp"
#include "stokeslc/shape_functions.hpp"

namespace stokeslc {

/// Numbering of the velocity and pressure unknowns.
///
/// Velocity: two components per node (vertices then edge midpoints),
/// dof = 2 * node + component.
///
/// Pressure ("raw" numbering): one dof per vertex, followed by one dof per
/// element constant for the LC kinds.  Tied constants keep their raw id but
/// share a column in the merged numbering used for assembly and solves.
/// Pinned dofs (enclosed flow, or explicitly pinned element constants) keep
/// a merged id as well; they are removed only when the system is solved.
struct DofMap {
    PressureSpaceKind kind = PressureSpaceKind::TaylorHood;
    bool enclosed = false;

    int n_velocity = 0;
    std::vector<bool> velocity_on_boundary;  // per velocity dof

    int n_pressure_raw = 0;
    int n_pressure_merged = 0;
    int vertex_count = 0;  // raw ids < vertex_count are vertex pressures
    std::vector<int> raw_to_merged;
    std::vector<std::pair<int, int>> ties;  // (slave raw id, master raw id)
    std::vector<int> pins;                  // raw ids with a fixed value
    std::vector<double> pin_values;         // parallel to pins

    int velocity_dof(int node, int component) const { return 2 * node + component; }
    int pressure_vertex_dof(int vertex) const { return vertex; }
    int pressure_element_dof(int element) const { return vertex_count + element; }

    bool is_pinned_raw(int raw) const {
        return std::find(pins.begin(), pins.end(), raw) != pins.end();
    }
};

struct DofMapOptions {
    /// Pin the element constant of every two-boundary-side element to zero
    /// (the alternative repair to tying; LC only).
    bool pin_corner_centroids = false;
    /// Explicit element-constant pins (element id, value); LC only.
    std::vector<std::pair<int, double>> element_pins;
    /// Vertex whose pressure is pinned in enclosed mode.
    int pinned_vertex = 0;
    /// Element whose constant is pinned in enclosed mode; -1 picks the
    /// lowest-id element without two boundary sides.
    int pinned_element = -1;
};

/// Builds the dof map.  In enclosed mode one vertex pressure is pinned,
/// plus one element constant for the LC kinds (the lowest-id element that
/// is not a two-boundary-side element).  LCTied ties the constant of every
/// two-boundary-side element to its neighbour's; a two-boundary-side
/// element whose neighbour is again two-boundary-side is not supported.
inline DofMap build_dof_map(const Mesh& mesh, PressureSpaceKind kind,
                            bool enclosed, const DofMapOptions& options = {}) {
    DofMap d;
    d.kind = kind;
    d.enclosed = enclosed;
    d.vertex_count = mesh.num_vertices();

    d.n_velocity = 2 * mesh.num_nodes();
    d.velocity_on_boundary.assign(d.n_velocity, false);
    for (int node = 0; node < mesh.num_nodes(); ++node) {
        if (mesh.node_on_boundary(node)) {
            d.velocity_on_boundary[2 * node] = true;
            d.velocity_on_boundary[2 * node + 1] = true;
        }
    }

    d.n_pressure_raw = mesh.num_vertices() +
                       (has_element_constants(kind) ? mesh.num_triangles() : 0);

    std::vector<int> corners;
    if (kind == PressureSpaceKind::LCTied || options.pin_corner_centroids)
        corners = corner_elements(mesh);

    if (kind == PressureSpaceKind::LCTied) {
        for (int e : corners) {
            int nbr = -1;
            for (int k = 0; k < 3; ++k)
                if (mesh.triangles[e].neighbor[k] >= 0) nbr = mesh.triangles[e].neighbor[k];
            if (nbr < 0 || mesh.triangles[nbr].boundary_edge_count == 2)
                throw UnsupportedGrid(
                    "build_dof_map: two-boundary-side element " + std::to_string(e) +
                    " has no interior neighbour to tie its constant to");
            d.ties.emplace_back(d.pressure_element_dof(e), d.pressure_element_dof(nbr));
        }
    }

    auto add_pin = [&](int raw, double value) {
        d.pins.push_back(raw);
        d.pin_values.push_back(value);
    };

    if (options.pin_corner_centroids || !options.element_pins.empty()) {
        if (kind != PressureSpaceKind::LC)
            throw std::invalid_argument(
                "build_dof_map: element-constant pins apply to the LC kind only");
        for (int e : corners) add_pin(d.pressure_element_dof(e), 0.0);
        for (const auto& [e, value] : options.element_pins) {
            if (e < 0 || e >= mesh.num_triangles())
                throw std::invalid_argument("build_dof_map: pinned element out of range");
            add_pin(d.pressure_element_dof(e), value);
        }
    }

    if (enclosed) {
        if (options.pinned_vertex < 0 || options.pinned_vertex >= mesh.num_vertices())
            throw std::invalid_argument("build_dof_map: pinned vertex out of range");
        add_pin(d.pressure_vertex_dof(options.pinned_vertex), 0.0);
        if (has_element_constants(kind)) {
            int pick = options.pinned_element;
            if (pick < 0)
                for (int e = 0; e < mesh.num_triangles() && pick < 0; ++e)
                    if (mesh.triangles[e].boundary_edge_count != 2) pick = e;
            if (pick < 0 || pick >= mesh.num_triangles() ||
                mesh.triangles[pick].boundary_edge_count == 2)
                throw std::invalid_argument(
                    "build_dof_map: no usable element for the enclosed-flow "
                    "constant pin");
            add_pin(d.pressure_element_dof(pick), 0.0);
        }
    }

    // Merged numbering: slaves adopt the master's id.
    d.raw_to_merged.assign(d.n_pressure_raw, -1);
    for (const auto& [slave, master] : d.ties) d.raw_to_merged[slave] = -2;
    int next = 0;
    for (int raw = 0; raw < d.n_pressure_raw; ++raw)
        if (d.raw_to_merged[raw] == -1) d.raw_to_merged[raw] = next++;
    d.n_pressure_merged = next;
    for (const auto& [slave, master] : d.ties)
        d.raw_to_merged[slave] = d.raw_to_merged[master];
    return d;
}

}  // namespace stokeslc
