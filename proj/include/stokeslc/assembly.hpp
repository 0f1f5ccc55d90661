#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "stokeslc/dof_map.hpp"
#include "stokeslc/mesh.hpp"
#include "stokeslc/quadrature.hpp"
#include "stokeslc/shape_functions.hpp"

namespace stokeslc {

using BodyForce = std::function<Vec2(Point2)>;

namespace detail {

/// One rule for every bilinear form; degree 5 integrates each integrand
/// that occurs (gradient and divergence products) exactly.
inline const QuadratureRule& form_rule() {
    static const QuadratureRule rule = quadrature(5);
    return rule;
}

inline TriangleGeometry geometry_of(const Triangle& t) {
    return TriangleGeometry{t.area, t.b};
}

/// Global velocity node of local basis index 0..5.
inline int local_velocity_node(const Mesh& mesh, const Triangle& t, int basis) {
    return basis < 3 ? t.v[basis] : mesh.midpoint_node(t.edge[basis - 3]);
}

}  // namespace detail

/// Local viscous matrix nu * (grad u, grad v), 12x12, ordered as the six
/// x-components then the six y-components; block diagonal over components.
inline Eigen::Matrix<double, 12, 12> element_viscous(const TriangleGeometry& g,
                                                     double nu) {
    Eigen::Matrix<double, 6, 6> k = Eigen::Matrix<double, 6, 6>::Zero();
    for (const QuadraturePoint& q : detail::form_rule().points) {
        const ShapeSet s = p2_basis(q.bary, g);
        const double w = q.weight * g.area * nu;
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) k(i, j) += w * dot(s.grad[i], s.grad[j]);
    }
    Eigen::Matrix<double, 12, 12> m = Eigen::Matrix<double, 12, 12>::Zero();
    m.block<6, 6>(0, 0) = k;
    m.block<6, 6>(6, 6) = k;
    return m;
}

/// Local divergence coupling (div phi_i, psi_j), 12 x 3 (Taylor-Hood) or
/// 12 x 4 (LC kinds, element constant last).
inline Eigen::Matrix<double, 12, Eigen::Dynamic> element_divergence(
    const TriangleGeometry& g, PressureSpaceKind kind) {
    const int np = local_pressure_size(kind);
    Eigen::Matrix<double, 12, Eigen::Dynamic> d =
        Eigen::Matrix<double, 12, Eigen::Dynamic>::Zero(12, np);
    for (const QuadraturePoint& q : detail::form_rule().points) {
        const ShapeSet s = p2_basis(q.bary, g);
        const auto psi = pressure_basis(kind, q.bary);
        const double w = q.weight * g.area;
        for (int i = 0; i < 6; ++i) {
            for (int j = 0; j < np; ++j) {
                d(i, j) += w * s.grad[i].x * psi[j];
                d(6 + i, j) += w * s.grad[i].y * psi[j];
            }
        }
    }
    return d;
}

/// Local pressure mass matrix (psi_i, psi_j).
inline Eigen::MatrixXd element_pressure_mass(const TriangleGeometry& g,
                                             PressureSpaceKind kind) {
    const int np = local_pressure_size(kind);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(np, np);
    for (const QuadraturePoint& q : detail::form_rule().points) {
        const auto psi = pressure_basis(kind, q.bary);
        const double w = q.weight * g.area;
        for (int i = 0; i < np; ++i)
            for (int j = 0; j < np; ++j) m(i, j) += w * psi[i] * psi[j];
    }
    return m;
}

/// The discrete saddle-point system
///   [ A  -B ] [u]   [f]
///   [ B^T 0 ] [p] = [g]
/// with A the viscous block and B the divergence coupling.  velocity_index
/// and pressure_index map the current rows/columns back to the full
/// velocity dofs and the merged pressure dofs.
struct SaddleSystem {
    Eigen::SparseMatrix<double> A;
    Eigen::SparseMatrix<double> B;
    Eigen::VectorXd f;
    Eigen::VectorXd g;

    PressureSpaceKind kind = PressureSpaceKind::TaylorHood;
    double nu = 1.0;

    std::vector<int> velocity_index;
    std::vector<int> pressure_index;
    Eigen::VectorXd boundary_values;  // full velocity size; set by apply_dirichlet
    bool dirichlet_applied = false;
    bool pins_dropped = false;

    int n_velocity() const { return static_cast<int>(A.rows()); }
    int n_pressure() const { return static_cast<int>(B.cols()); }
};

/// Assembles the global system over all velocity dofs and the merged
/// pressure dofs (tie slaves already share their master's column).
inline SaddleSystem assemble(const Mesh& mesh, const DofMap& dofmap,
                             PressureSpaceKind kind, double nu,
                             const BodyForce& body_force = {}) {
    if (kind != dofmap.kind)
        throw std::invalid_argument("assemble: dof map was built for a different kind");

    SaddleSystem sys;
    sys.kind = kind;
    sys.nu = nu;
    const int nu_dofs = dofmap.n_velocity;
    const int np = dofmap.n_pressure_merged;

    std::vector<Eigen::Triplet<double>> ta, tb;
    ta.reserve(mesh.num_triangles() * 72);
    tb.reserve(mesh.num_triangles() * 48);
    sys.f = Eigen::VectorXd::Zero(nu_dofs);
    sys.g = Eigen::VectorXd::Zero(np);

    const int np_loc = local_pressure_size(kind);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Triangle& tri = mesh.triangles[t];
        const TriangleGeometry g = detail::geometry_of(tri);

        std::array<int, 12> vdof;
        for (int l = 0; l < 12; ++l) {
            const int node = detail::local_velocity_node(mesh, tri, l % 6);
            vdof[l] = dofmap.velocity_dof(node, l / 6);
        }
        std::array<int, 4> pdof{};
        for (int j = 0; j < 3; ++j)
            pdof[j] = dofmap.raw_to_merged[dofmap.pressure_vertex_dof(tri.v[j])];
        if (np_loc == 4)
            pdof[3] = dofmap.raw_to_merged[dofmap.pressure_element_dof(t)];

        const auto ke = element_viscous(g, nu);
        const auto de = element_divergence(g, kind);
        for (int i = 0; i < 12; ++i) {
            for (int j = 0; j < 12; ++j)
                if (ke(i, j) != 0.0) ta.emplace_back(vdof[i], vdof[j], ke(i, j));
            for (int j = 0; j < np_loc; ++j)
                tb.emplace_back(vdof[i], pdof[j], de(i, j));
        }

        if (body_force) {
            for (const QuadraturePoint& q : detail::form_rule().points) {
                const ShapeSet s = p2_basis(q.bary, g);
                Point2 x{0.0, 0.0};
                for (int j = 0; j < 3; ++j) x += q.bary[j] * mesh.vertices[tri.v[j]];
                const Vec2 fv = body_force(x);
                const double w = q.weight * g.area;
                for (int i = 0; i < 6; ++i) {
                    sys.f[vdof[i]] += w * fv.x * s.value[i];
                    sys.f[vdof[6 + i]] += w * fv.y * s.value[i];
                }
            }
        }
    }

    sys.A.resize(nu_dofs, nu_dofs);
    sys.A.setFromTriplets(ta.begin(), ta.end());
    sys.B.resize(nu_dofs, np);
    sys.B.setFromTriplets(tb.begin(), tb.end());

    sys.velocity_index.resize(nu_dofs);
    for (int i = 0; i < nu_dofs; ++i) sys.velocity_index[i] = i;
    sys.pressure_index.resize(np);
    for (int j = 0; j < np; ++j) sys.pressure_index[j] = j;
    return sys;
}

/// Prescribed values for every velocity dof flagged as boundary.
struct BoundaryData {
    Eigen::VectorXd values;  // full velocity size; interior entries ignored
};

inline BoundaryData homogeneous_boundary(const DofMap& dofmap) {
    return BoundaryData{Eigen::VectorXd::Zero(dofmap.n_velocity)};
}

/// Interpolates an exact velocity field at the boundary nodes.
inline BoundaryData boundary_from_velocity(const Mesh& mesh, const DofMap& dofmap,
                                           const std::function<Vec2(Point2)>& u) {
    BoundaryData bd{Eigen::VectorXd::Zero(dofmap.n_velocity)};
    for (int node = 0; node < mesh.num_nodes(); ++node) {
        if (!mesh.node_on_boundary(node)) continue;
        const Vec2 v = u(mesh.node_point(node));
        bd.values[dofmap.velocity_dof(node, 0)] = v.x;
        bd.values[dofmap.velocity_dof(node, 1)] = v.y;
    }
    return bd;
}

namespace detail {

inline Eigen::SparseMatrix<double> select(const Eigen::SparseMatrix<double>& m,
                                          const std::vector<int>& row_of,
                                          int n_rows,
                                          const std::vector<int>& col_of,
                                          int n_cols) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(m.nonZeros());
    for (int k = 0; k < m.outerSize(); ++k) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it) {
            const int r = row_of.empty() ? static_cast<int>(it.row())
                                         : row_of[it.row()];
            const int c = col_of.empty() ? static_cast<int>(it.col())
                                         : col_of[it.col()];
            if (r >= 0 && c >= 0) trip.emplace_back(r, c, it.value());
        }
    }
    Eigen::SparseMatrix<double> out(n_rows, n_cols);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

}  // namespace detail

/// Eliminates the boundary velocity dofs.  Their contributions move to the
/// right-hand sides: f_i -= A_ib u_b and g -= B_b^T u_b.
inline SaddleSystem apply_dirichlet(const SaddleSystem& sys, const DofMap& dofmap,
                                    const BoundaryData& boundary) {
    if (sys.dirichlet_applied)
        throw std::invalid_argument("apply_dirichlet: already applied");
    if (boundary.values.size() != dofmap.n_velocity)
        throw std::invalid_argument("apply_dirichlet: boundary data does not cover "
                                    "the velocity dofs");
    for (int i = 0; i < dofmap.n_velocity; ++i)
        if (dofmap.velocity_on_boundary[i] && !std::isfinite(boundary.values[i]))
            throw std::invalid_argument("apply_dirichlet: missing boundary value");

    std::vector<int> to_reduced(dofmap.n_velocity, -1);
    std::vector<int> interior;
    for (int i = 0; i < dofmap.n_velocity; ++i) {
        if (!dofmap.velocity_on_boundary[i]) {
            to_reduced[i] = static_cast<int>(interior.size());
            interior.push_back(i);
        }
    }
    const int ni = static_cast<int>(interior.size());

    Eigen::VectorXd ub = Eigen::VectorXd::Zero(dofmap.n_velocity);
    for (int i = 0; i < dofmap.n_velocity; ++i)
        if (dofmap.velocity_on_boundary[i]) ub[i] = boundary.values[i];

    SaddleSystem red;
    red.kind = sys.kind;
    red.nu = sys.nu;
    red.dirichlet_applied = true;
    red.pins_dropped = sys.pins_dropped;
    red.pressure_index = sys.pressure_index;
    red.velocity_index = interior;
    red.boundary_values = ub;

    const Eigen::VectorXd lift_f = sys.A * ub;   // A_ib u_b on interior rows
    const Eigen::VectorXd lift_g = sys.B.transpose() * ub;

    red.A = detail::select(sys.A, to_reduced, ni, to_reduced, ni);
    red.B = detail::select(sys.B, to_reduced, ni, {}, sys.n_pressure());
    red.f.resize(ni);
    for (int i = 0; i < ni; ++i) red.f[i] = sys.f[interior[i]] - lift_f[interior[i]];
    red.g = sys.g - lift_g;
    return red;
}

/// Removes the pinned pressure dofs and their equations.  A nonzero pinned
/// value contributes to the momentum right-hand side (the system carries
/// -B in the velocity block).
inline SaddleSystem drop_pinned_pressure(const SaddleSystem& sys, const DofMap& dofmap) {
    if (sys.pins_dropped)
        throw std::invalid_argument("drop_pinned_pressure: already applied");
    std::vector<double> pin_value(dofmap.n_pressure_merged, 0.0);
    std::vector<bool> pinned(dofmap.n_pressure_merged, false);
    for (std::size_t k = 0; k < dofmap.pins.size(); ++k) {
        const int merged = dofmap.raw_to_merged[dofmap.pins[k]];
        pinned[merged] = true;
        pin_value[merged] = dofmap.pin_values[k];
    }

    std::vector<int> to_reduced(sys.n_pressure(), -1);
    std::vector<int> keep;
    for (int j = 0; j < sys.n_pressure(); ++j) {
        if (!pinned[sys.pressure_index[j]]) {
            to_reduced[j] = static_cast<int>(keep.size());
            keep.push_back(sys.pressure_index[j]);
        }
    }

    SaddleSystem red = sys;
    red.pins_dropped = true;
    red.pressure_index = keep;
    red.B = detail::select(sys.B, {}, sys.n_velocity(), to_reduced,
                           static_cast<int>(keep.size()));
    for (int j = 0; j < sys.n_pressure(); ++j) {
        const double value = pin_value[sys.pressure_index[j]];
        if (pinned[sys.pressure_index[j]] && value != 0.0)
            red.f += value * Eigen::VectorXd(sys.B.col(j));
    }
    red.g.resize(keep.size());
    int r = 0;
    for (int j = 0; j < sys.n_pressure(); ++j)
        if (to_reduced[j] >= 0) red.g[r++] = sys.g[j];
    return red;
}

/// Integral of div u over one element, evaluated from the velocity
/// coefficients (full numbering).  The elementwise continuity measure.
inline double element_divergence_integral(const Mesh& mesh, const DofMap& dofmap,
                                          int element, const Eigen::VectorXd& u) {
    const Triangle& tri = mesh.triangles[element];
    const TriangleGeometry g = detail::geometry_of(tri);
    const auto de = element_divergence(g, PressureSpaceKind::LC);
    double s = 0.0;
    for (int l = 0; l < 12; ++l) {
        const int node = detail::local_velocity_node(mesh, tri, l % 6);
        s += u[dofmap.velocity_dof(node, l / 6)] * de(l, 3);
    }
    return s;
}

}  // namespace stokeslc
