#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "stokeslc/assembly.hpp"
#include "stokeslc/dof_map.hpp"
#include "stokeslc/errors.hpp"
#include "stokeslc/mesh.hpp"

namespace stokeslc {

struct SolveReport {
    double relative_residual = 0.0;
    double pivot_ratio = 0.0;  // smallest |pivot| / largest |pivot|
    int system_size = 0;
};

/// Solved fields in full numbering: u over all velocity dofs (boundary
/// values re-inserted), p over the raw pressure dofs (pins at zero, tie
/// slaves carrying their master's value).
struct Solution {
    Eigen::VectorXd u;
    Eigen::VectorXd p;
    SolveReport report;
};

/// Direct factorization of the reduced saddle-point system.  Requires the
/// Dirichlet elimination and the pressure pins to be applied.  A pivot
/// below 1e-12 of the largest signals a rank-deficient pressure space and
/// raises SingularSystem.
inline Solution solve(const SaddleSystem& sys, const DofMap& dofmap) {
    if (!sys.dirichlet_applied || !sys.pins_dropped)
        throw std::invalid_argument("solve: apply_dirichlet and drop_pinned_pressure "
                                    "must run first");

    const int nu = sys.n_velocity();
    const int np = sys.n_pressure();
    const int n = nu + np;

    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n, n);
    kkt.topLeftCorner(nu, nu) = Eigen::MatrixXd(sys.A);
    const Eigen::MatrixXd bd = Eigen::MatrixXd(sys.B);
    kkt.topRightCorner(nu, np) = -bd;
    kkt.bottomLeftCorner(np, nu) = bd.transpose();

    Eigen::VectorXd rhs(n);
    rhs.head(nu) = sys.f;
    rhs.tail(np) = sys.g;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt);
    const Eigen::VectorXd piv = lu.matrixLU().diagonal().cwiseAbs();
    const double piv_max = piv.maxCoeff();
    const double piv_min = piv.minCoeff();
    if (!(piv_min > 1e-12 * piv_max))
        throw SingularSystem("solve: zero pivot in the saddle-point factorization; "
                             "the pressure space has unconstrained modes");

    const Eigen::VectorXd x = lu.solve(rhs);

    Solution sol;
    sol.report.system_size = n;
    sol.report.pivot_ratio = piv_min / piv_max;
    const double scale = kkt.cwiseAbs().rowwise().sum().maxCoeff() * x.norm() + rhs.norm();
    sol.report.relative_residual = (kkt * x - rhs).norm() / (scale > 0.0 ? scale : 1.0);

    sol.u = sys.boundary_values;
    for (int i = 0; i < nu; ++i) sol.u[sys.velocity_index[i]] = x[i];

    Eigen::VectorXd merged = Eigen::VectorXd::Zero(dofmap.n_pressure_merged);
    for (std::size_t k = 0; k < dofmap.pins.size(); ++k)
        merged[dofmap.raw_to_merged[dofmap.pins[k]]] = dofmap.pin_values[k];
    for (int j = 0; j < np; ++j) merged[sys.pressure_index[j]] = x[nu + j];
    sol.p.resize(dofmap.n_pressure_raw);
    for (int raw = 0; raw < dofmap.n_pressure_raw; ++raw)
        sol.p[raw] = merged[dofmap.raw_to_merged[raw]];
    return sol;
}

/// Integral of the discrete pressure over the mesh.
inline double pressure_integral(const Mesh& mesh, const DofMap& dofmap,
                                const Eigen::VectorXd& p) {
    double total = 0.0;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Triangle& tri = mesh.triangles[t];
        double mean = (p[dofmap.pressure_vertex_dof(tri.v[0])] +
                       p[dofmap.pressure_vertex_dof(tri.v[1])] +
                       p[dofmap.pressure_vertex_dof(tri.v[2])]) / 3.0;
        if (has_element_constants(dofmap.kind))
            mean += p[dofmap.pressure_element_dof(t)];
        total += mean * tri.area;
    }
    return total;
}

/// Shifts the total pressure to zero mean.  The shift is carried by the
/// vertex (linear) part; the split into linear and constant parts is not
/// unique and only the total is normalized.
inline Solution normalize_pressure(Solution sol, const Mesh& mesh,
                                   const DofMap& dofmap) {
    const double shift = pressure_integral(mesh, dofmap, sol.p) / mesh.total_area();
    for (int v = 0; v < mesh.num_vertices(); ++v)
        sol.p[dofmap.pressure_vertex_dof(v)] -= shift;
    return sol;
}

/// Assemble, eliminate boundary dofs, drop pins, solve.
inline Solution solve_stokes(const Mesh& mesh, const DofMap& dofmap, double nu,
                             const BodyForce& body_force,
                             const BoundaryData& boundary) {
    SaddleSystem sys = assemble(mesh, dofmap, dofmap.kind, nu, body_force);
    sys = apply_dirichlet(sys, dofmap, boundary);
    sys = drop_pinned_pressure(sys, dofmap);
    return solve(sys, dofmap);
}

}  // namespace stokeslc
