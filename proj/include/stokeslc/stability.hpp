#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "stokeslc/assembly.hpp"
#include "stokeslc/dof_map.hpp"
#include "stokeslc/errors.hpp"
#include "stokeslc/mesh.hpp"
#include "stokeslc/patch.hpp"

namespace stokeslc {

namespace detail {

/// Index of a global vertex inside the patch pressure ordering.
inline int patch_vertex_index(const Patch& p, int vertex) {
    for (int i = 0; i < p.num_vertex_dofs(); ++i)
        if (p.pressure_vertices[i] == vertex) return i;
    throw std::invalid_argument("patch_vertex_index: vertex not in patch");
}

/// Index of element slot (0..2) among the patch constant dofs.
inline int patch_constant_index(const Patch& p, int slot) {
    const int nv = p.num_vertex_dofs();
    if (p.cls == PatchClass::Type3) return nv + (slot < 2 ? 0 : 1);
    return nv + slot;
}

/// Index of an interior velocity node, or -1 when the node lies on the
/// patch boundary.
inline int patch_node_index(const Patch& p, int node) {
    for (std::size_t i = 0; i < p.interior_nodes.size(); ++i)
        if (p.interior_nodes[i] == node) return static_cast<int>(i);
    return -1;
}

inline std::array<double, 3> patch_areas(const Mesh& mesh, const Patch& p) {
    return {mesh.triangles[p.elements[0]].area, mesh.triangles[p.elements[1]].area,
            mesh.triangles[p.elements[2]].area};
}

}  // namespace detail

/// Discrete divergence form of a patch: rows are the interior velocity dofs
/// (2 per interior node, x then y), columns the patch pressure dofs in the
/// vertex-then-constant ordering.  The pressure space is the LC one; for
/// Type3 the constants of elements 1 and 2 share a column.
inline Eigen::MatrixXd patch_system(const Mesh& mesh, const Patch& patch) {
    for (int e : patch.elements)
        if (e < 0 || e >= mesh.num_triangles())
            throw std::invalid_argument("patch_system: unclassified patch");

    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(patch.num_velocity_dofs(),
                                              patch.num_pressure_dofs());
    for (int slot = 0; slot < 3; ++slot) {
        const Triangle& tri = mesh.triangles[patch.elements[slot]];
        const auto de = element_divergence(detail::geometry_of(tri),
                                           PressureSpaceKind::LC);
        std::array<int, 4> col{};
        for (int j = 0; j < 3; ++j)
            col[j] = detail::patch_vertex_index(patch, tri.v[j]);
        col[3] = detail::patch_constant_index(patch, slot);
        for (int l = 0; l < 12; ++l) {
            const int node = detail::local_velocity_node(mesh, tri, l % 6);
            const int idx = detail::patch_node_index(patch, node);
            if (idx < 0) continue;
            const int row = 2 * idx + l / 6;
            for (int j = 0; j < 4; ++j) B(row, col[j]) += de(l, j);
        }
    }
    return B;
}

/// The known null-space basis of the patch divergence form, columns in the
/// standard order: the two ways of writing a constant (vertex part, then
/// constant part), followed by the corner-element dependencies
/// 4 * (far vertex hat) - (element constant).
inline Eigen::MatrixXd analytic_null_basis(const Patch& patch) {
    const int n = patch.num_pressure_dofs();
    const int nv = patch.num_vertex_dofs();
    auto col_const_vertices = [&] {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
        c.head(nv).setOnes();
        return c;
    };
    auto col_const_elements = [&] {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
        c.tail(n - nv).setOnes();
        return c;
    };
    auto col_corner = [&](int vertex_idx, int const_idx) {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
        c[vertex_idx] = 4.0;
        c[const_idx] = -1.0;
        return c;
    };

    switch (patch.cls) {
        case PatchClass::Type1: {
            Eigen::MatrixXd s(n, 2);
            s.col(0) = col_const_vertices();
            s.col(1) = col_const_elements();
            return s;
        }
        case PatchClass::Type2: {
            Eigen::MatrixXd s(n, 4);
            s.col(0) = col_const_vertices();
            s.col(1) = col_const_elements();
            s.col(2) = col_corner(0, nv + 0);
            s.col(3) = col_corner(3, nv + 2);
            return s;
        }
        case PatchClass::Type3: {
            Eigen::MatrixXd s(n, 3);
            s.col(0) = col_const_vertices();
            s.col(1) = col_const_elements();
            s.col(2) = col_corner(3, nv + 1);
            return s;
        }
    }
    throw std::invalid_argument("analytic_null_basis: unclassified patch");
}

/// Constraint rows defining the stable pressure subspace of the patch:
/// zero mean of the constant part, zero mean of the linear part, and zero
/// element mean of the total on every strip end with two sides on the
/// patch boundary (element 3 only for Type3).
inline Eigen::MatrixXd constraint_rows(const Mesh& mesh, const Patch& patch) {
    const auto [a1, a2, a3] = detail::patch_areas(mesh, patch);
    const double m = a1 + a2 + a3;
    const int n = patch.num_pressure_dofs();

    switch (patch.cls) {
        case PatchClass::Type1: {
            Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, n);
            h.row(0) << 0, 0, 0, 0, a1, a2, a3;
            h.row(1) << a1 + a3, a2 + a1, a3 + a2, m, 0, 0, 0;
            return h;
        }
        case PatchClass::Type2: {
            Eigen::MatrixXd h = Eigen::MatrixXd::Zero(4, n);
            h.row(0) << 0, 0, 0, 0, 0, a1, a2, a3;
            h.row(1) << a1, a1 + a2, a2 + a3, a3, m, 0, 0, 0;
            h.row(2) << 1, 1, 0, 0, 1, 3, 0, 0;
            h.row(3) << 0, 0, 1, 1, 1, 0, 0, 3;
            return h;
        }
        case PatchClass::Type3: {
            Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, n);
            h.row(0) << 0, 0, 0, 0, 0, a1 + a2, a3;
            h.row(1) << a1, a1 + a2, a2 + a3, a3, m, 0, 0;
            h.row(2) << 0, 0, 1, 1, 1, 0, 3;
            return h;
        }
    }
    throw std::invalid_argument("constraint_rows: unclassified patch");
}

/// Orthonormal kernel basis via singular value decomposition; singular
/// values below tol * sigma_max count as zero.
inline Eigen::MatrixXd null_space(const Eigen::MatrixXd& m, double tol = 1e-10) {
    if (!m.allFinite()) throw std::invalid_argument("null_space: non-finite entries");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv[0] : 0.0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > tol * smax) ++rank;
    return svd.matrixV().rightCols(m.cols() - rank);
}

struct ConstraintProduct {
    Eigen::MatrixXd C;  // H * S, square
    bool full_rank = false;
};

/// The four matrices of the patch stability argument in one place.
struct PatchMatrices {
    Eigen::MatrixXd B;  // divergence form on interior velocities
    Eigen::MatrixXd S;  // analytic null basis of B
    Eigen::MatrixXd H;  // constraint rows defining the stable subspace
    Eigen::MatrixXd C;  // H * S; full column rank certifies stability
};

inline PatchMatrices patch_matrices(const Mesh& mesh, const Patch& patch) {
    PatchMatrices m;
    m.B = patch_system(mesh, patch);
    m.S = analytic_null_basis(patch);
    m.H = constraint_rows(mesh, patch);
    m.C = m.H * m.S;
    return m;
}

/// Product of the constraint rows with the analytic null basis.  Full rank
/// certifies that the constraints annihilate the null space, i.e. the patch
/// is stable.
inline ConstraintProduct c_matrix(const Mesh& mesh, const Patch& patch) {
    ConstraintProduct out;
    out.C = constraint_rows(mesh, patch) * analytic_null_basis(patch);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(out.C);
    const Eigen::VectorXd& sv = svd.singularValues();
    out.full_rank = sv.size() > 0 && sv[sv.size() - 1] > 1e-10 * sv[0];
    return out;
}

/// Local pressure projection whose range is annihilated by the patch
/// divergence form and whose residual satisfies the patch constraints.
/// Input and output are patch pressure coefficients; the vertex entries
/// carry the linear part of the split, the trailing entries the constants.
inline Eigen::VectorXd pi_project(const Mesh& mesh, const Patch& patch,
                                  const Eigen::VectorXd& p) {
    if (p.size() != patch.num_pressure_dofs())
        throw std::invalid_argument("pi_project: coefficient size mismatch");
    const auto [a1, a2, a3] = detail::patch_areas(mesh, patch);
    const double m = a1 + a2 + a3;
    const int nv = patch.num_vertex_dofs();

    // Element means and the integral of the linear part.
    std::array<double, 3> k{}, vsum{};
    double int_p1 = 0.0, int_p0 = 0.0;
    const std::array<double, 3> areas{a1, a2, a3};
    for (int slot = 0; slot < 3; ++slot) {
        const Triangle& tri = mesh.triangles[patch.elements[slot]];
        double s = 0.0;
        for (int j = 0; j < 3; ++j) s += p[detail::patch_vertex_index(patch, tri.v[j])];
        vsum[slot] = s;
        const double p0 = p[detail::patch_constant_index(patch, slot)];
        k[slot] = s / 3.0 + p0;
        int_p1 += areas[slot] * s / 3.0;
        int_p0 += areas[slot] * p0;
    }

    Eigen::VectorXd out = Eigen::VectorXd::Zero(p.size());
    switch (patch.cls) {
        case PatchClass::Type1: {
            const double k1 = int_p1 / m;
            const double k0 = int_p0 / m;
            out.head(nv).setConstant(k1);
            out.tail(3).setConstant(k0);
            return out;
        }
        case PatchClass::Type2: {
            const double k2 = k[1];
            // t = alpha * k2 chosen so both split parts have zero patch mean;
            // well defined even when the middle mean vanishes.
            const double t =
                (int_p1 + 4.0 * (k2 - k[0]) * a1 + 4.0 * (k2 - k[2]) * a3) / m;
            out.head(nv).setConstant(t);
            out[0] -= 12.0 * (k2 - k[0]);
            out[3] -= 12.0 * (k2 - k[2]);
            out[nv + 0] = (k2 - t) + 3.0 * (k2 - k[0]);
            out[nv + 1] = k2 - t;
            out[nv + 2] = (k2 - t) + 3.0 * (k2 - k[2]);
            return out;
        }
        case PatchClass::Type3: {
            // Mean over the tied pair of elements.
            const double kk = (k[0] * a1 + k[1] * a2) / (a1 + a2);
            const double k3 = k[2];
            const double alpha = (kk * m + 3.0 * (kk - k3) * a3 - int_p0) / m;
            out.head(nv).setConstant(alpha);
            out[3] += 12.0 * (k3 - kk);
            out[nv + 0] = kk - alpha;
            out[nv + 1] = 4.0 * kk - 3.0 * k3 - alpha;
            return out;
        }
    }
    throw std::invalid_argument("pi_project: unclassified patch");
}

struct ProjectionResiduals {
    double constraint = 0.0;  // max violation of the constraint rows by p - Pi p
    double divergence = 0.0;  // norm of B * Pi p relative to the norm of B
};

inline ProjectionResiduals verify_projection_theorems(const Mesh& mesh,
                                                      const Patch& patch,
                                                      const Eigen::VectorXd& p) {
    const Eigen::VectorXd proj = pi_project(mesh, patch, p);
    const Eigen::MatrixXd h = constraint_rows(mesh, patch);
    const Eigen::MatrixXd b = patch_system(mesh, patch);
    ProjectionResiduals r;
    r.constraint = (h * (p - proj)).cwiseAbs().maxCoeff();
    const double bnorm = b.cwiseAbs().rowwise().sum().maxCoeff();
    r.divergence = (b * proj).cwiseAbs().maxCoeff() / bnorm;
    return r;
}

/// Elementwise mean of the discrete pressure (raw coefficients).  For the
/// tied kind each tied pair carries the mean over the union of the two
/// elements.
inline Eigen::VectorXd mu_project(const Mesh& mesh, const DofMap& dofmap,
                                  const Eigen::VectorXd& p) {
    Eigen::VectorXd mu(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Triangle& tri = mesh.triangles[t];
        double mean = (p[dofmap.pressure_vertex_dof(tri.v[0])] +
                       p[dofmap.pressure_vertex_dof(tri.v[1])] +
                       p[dofmap.pressure_vertex_dof(tri.v[2])]) / 3.0;
        if (has_element_constants(dofmap.kind))
            mean += p[dofmap.pressure_element_dof(t)];
        mu[t] = mean;
    }
    for (const auto& [slave, master] : dofmap.ties) {
        const int es = slave - dofmap.vertex_count;
        const int em = master - dofmap.vertex_count;
        const double as = mesh.triangles[es].area;
        const double am = mesh.triangles[em].area;
        const double joint = (mu[es] * as + mu[em] * am) / (as + am);
        mu[es] = joint;
        mu[em] = joint;
    }
    return mu;
}

namespace detail {

/// Patch viscous matrix (unit viscosity) on the interior velocity dofs.
inline Eigen::MatrixXd patch_viscous(const Mesh& mesh, const Patch& patch) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(patch.num_velocity_dofs(),
                                              patch.num_velocity_dofs());
    for (int slot = 0; slot < 3; ++slot) {
        const Triangle& tri = mesh.triangles[patch.elements[slot]];
        const auto ke = element_viscous(geometry_of(tri), 1.0);
        std::array<int, 12> row{};
        for (int l = 0; l < 12; ++l) {
            const int node = local_velocity_node(mesh, tri, l % 6);
            const int idx = patch_node_index(patch, node);
            row[l] = idx < 0 ? -1 : 2 * idx + l / 6;
        }
        for (int i = 0; i < 12; ++i) {
            if (row[i] < 0) continue;
            for (int j = 0; j < 12; ++j)
                if (row[j] >= 0) a(row[i], row[j]) += ke(i, j);
        }
    }
    return a;
}

/// Patch pressure mass matrix in the patch coefficient ordering.
inline Eigen::MatrixXd patch_pressure_mass(const Mesh& mesh, const Patch& patch) {
    Eigen::MatrixXd mp = Eigen::MatrixXd::Zero(patch.num_pressure_dofs(),
                                               patch.num_pressure_dofs());
    for (int slot = 0; slot < 3; ++slot) {
        const Triangle& tri = mesh.triangles[patch.elements[slot]];
        const Eigen::MatrixXd me =
            element_pressure_mass(geometry_of(tri), PressureSpaceKind::LC);
        std::array<int, 4> col{};
        for (int j = 0; j < 3; ++j) col[j] = patch_vertex_index(patch, tri.v[j]);
        col[3] = patch_constant_index(patch, slot);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) mp(col[i], col[j]) += me(i, j);
    }
    return mp;
}

/// Smallest generalized eigenvalue of (K, M) restricted to range(Z).
inline double min_generalized_eigenvalue(const Eigen::MatrixXd& k,
                                         const Eigen::MatrixXd& m,
                                         const Eigen::MatrixXd& z) {
    const Eigen::MatrixXd kz = z.transpose() * k * z;
    const Eigen::MatrixXd mz = z.transpose() * m * z;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(
        0.5 * (kz + kz.transpose()), 0.5 * (mz + mz.transpose()));
    if (ges.info() != Eigen::Success)
        throw std::runtime_error("generalized eigensolve failed");
    return ges.eigenvalues()[0];
}

}  // namespace detail

/// Patch inf-sup constant: the square root of the smallest eigenvalue of
/// B^T A^-1 B p = lambda M_p p over the constrained subspace (H p = 0),
/// with A the unit-viscosity patch matrix.
inline double patch_inf_sup(const Mesh& mesh, const Patch& patch) {
    const Eigen::MatrixXd b = patch_system(mesh, patch);
    const Eigen::MatrixXd z = null_space(constraint_rows(mesh, patch), 1e-12);
    if (z.cols() == 0)
        throw std::runtime_error("patch_inf_sup: degenerate patch, empty "
                                 "constrained subspace");
    const Eigen::MatrixXd a = detail::patch_viscous(mesh, patch);
    const Eigen::MatrixXd w = a.llt().solve(b);
    const Eigen::MatrixXd k = b.transpose() * w;
    const Eigen::MatrixXd mp = detail::patch_pressure_mass(mesh, patch);
    const double lambda = detail::min_generalized_eigenvalue(k, mp, z);
    return std::sqrt(std::max(lambda, 0.0));
}

struct InfSupReport {
    double beta = 0.0;
    int pressure_null_dim = 0;
    int n_velocity = 0;  // interior velocity dofs
    int n_pressure = 0;  // merged pressure dofs
};

/// Global inf-sup constant of a grid: detects the pressure modes with
/// vanishing divergence coupling, then computes the smallest generalized
/// eigenvalue on their orthogonal complement.  The velocity space carries
/// homogeneous Dirichlet data; no pressure dof is pinned.
inline InfSupReport global_inf_sup(const Mesh& mesh, PressureSpaceKind kind) {
    const DofMap dofmap = build_dof_map(mesh, kind, /*enclosed=*/false);
    SaddleSystem sys = assemble(mesh, dofmap, kind, 1.0);
    sys = apply_dirichlet(sys, dofmap, homogeneous_boundary(dofmap));

    const Eigen::MatrixXd b = Eigen::MatrixXd(sys.B);
    InfSupReport rep;
    rep.n_velocity = static_cast<int>(b.rows());
    rep.n_pressure = static_cast<int>(b.cols());

    Eigen::BDCSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv[0] : 0.0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > 1e-10 * smax) ++rank;
    rep.pressure_null_dim = rep.n_pressure - rank;
    const Eigen::MatrixXd range = svd.matrixV().leftCols(rank);

    const Eigen::MatrixXd a = Eigen::MatrixXd(sys.A);
    const Eigen::MatrixXd w = a.llt().solve(b);
    const Eigen::MatrixXd k = b.transpose() * w;

    // Merged pressure mass matrix.
    Eigen::MatrixXd mp = Eigen::MatrixXd::Zero(rep.n_pressure, rep.n_pressure);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Triangle& tri = mesh.triangles[t];
        const Eigen::MatrixXd me =
            element_pressure_mass(detail::geometry_of(tri), kind);
        std::array<int, 4> col{};
        for (int j = 0; j < 3; ++j)
            col[j] = dofmap.raw_to_merged[dofmap.pressure_vertex_dof(tri.v[j])];
        if (has_element_constants(kind))
            col[3] = dofmap.raw_to_merged[dofmap.pressure_element_dof(t)];
        const int nloc = local_pressure_size(kind);
        for (int i = 0; i < nloc; ++i)
            for (int j = 0; j < nloc; ++j) mp(col[i], col[j]) += me(i, j);
    }

    const double lambda = detail::min_generalized_eigenvalue(k, mp, range);
    rep.beta = std::sqrt(std::max(lambda, 0.0));
    return rep;
}

}  // namespace stokeslc
