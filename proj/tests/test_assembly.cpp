#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "stokeslc/assembly.hpp"
#include "stokeslc/bench.hpp"
#include "stokeslc/mesh.hpp"

using namespace stokeslc;

namespace {

TriangleGeometry random_geometry(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (;;) {
        Point2 p1{u(rng), u(rng)}, p2{u(rng), u(rng)}, p3{u(rng), u(rng)};
        if (signed_area(p1, p2, p3) < 0.0) std::swap(p2, p3);
        if (signed_area(p1, p2, p3) > 0.2) return triangle_geometry(p1, p2, p3);
    }
}

}  // namespace

TEST(ElementViscous, ReferenceTriangleCornerEntry) {
    const auto g = triangle_geometry({0, 0}, {1, 0}, {0, 1});
    const auto k = element_viscous(g, 1.0);
    EXPECT_NEAR(k(0, 0), 1.0, 1e-14);
    EXPECT_NEAR(k(6, 6), 1.0, 1e-14);
}

TEST(ElementViscous, MatchesClosedFormOnRandomTriangles) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 25; ++trial) {
        const TriangleGeometry g = random_geometry(rng);
        const auto k = element_viscous(g, 1.0);
        for (int i = 0; i < 6; ++i) {
            for (int j = 0; j < 6; ++j) {
                const double exact = oracle::stiffness_entry(i, j, g);
                EXPECT_NEAR(k(i, j), exact, 1e-12 * (1.0 + std::abs(exact)));
                EXPECT_NEAR(k(6 + i, 6 + j), exact, 1e-12 * (1.0 + std::abs(exact)));
                EXPECT_DOUBLE_EQ(k(i, 6 + j), 0.0);
            }
        }
    }
}

TEST(ElementViscous, ConstantFieldInKernelAndSymmetry) {
    std::mt19937_64 rng(22);
    const TriangleGeometry g = random_geometry(rng);
    const auto k = element_viscous(g, 3.7);
    for (int i = 0; i < 12; ++i) {
        double row = 0.0;
        for (int j = 0; j < 12; ++j) {
            row += k(i, j);
            EXPECT_NEAR(k(i, j), k(j, i), 1e-13);
        }
        EXPECT_NEAR(row, 0.0, 1e-12);
    }
}

TEST(ElementViscous, ViscosityScalingAndTransformInvariance) {
    const auto g = triangle_geometry({0.2, 0.1}, {1.3, 0.4}, {0.5, 1.2});
    const auto k1 = element_viscous(g, 1.0);
    const auto k2 = element_viscous(g, 2.5);
    EXPECT_NEAR((k2 - 2.5 * k1).cwiseAbs().maxCoeff(), 0.0, 1e-13);

    const double c = 4.2;
    const auto gt = triangle_geometry({0.2 + c, 0.1 + c}, {1.3 + c, 0.4 + c},
                                      {0.5 + c, 1.2 + c});
    EXPECT_NEAR((element_viscous(gt, 1.0) - k1).cwiseAbs().maxCoeff(), 0.0, 1e-13);

    // Uniform scaling leaves the viscous matrix unchanged in 2D.
    const double s = 3.0;
    const auto gs = triangle_geometry({0.2 * s, 0.1 * s}, {1.3 * s, 0.4 * s},
                                      {0.5 * s, 1.2 * s});
    EXPECT_NEAR((element_viscous(gs, 1.0) - k1).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(ElementDivergence, MatchesClosedFormOnRandomTriangles) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 25; ++trial) {
        const TriangleGeometry g = random_geometry(rng);
        for (PressureSpaceKind kind : {PressureSpaceKind::TaylorHood,
                                       PressureSpaceKind::LC}) {
            const auto d = element_divergence(g, kind);
            const int np = local_pressure_size(kind);
            for (int i = 0; i < 6; ++i) {
                for (int j = 0; j < np; ++j) {
                    EXPECT_NEAR(d(i, j), oracle::divergence_entry(i, 0, j, g), 1e-13);
                    EXPECT_NEAR(d(6 + i, j), oracle::divergence_entry(i, 1, j, g),
                                1e-13);
                }
            }
        }
    }
}

TEST(ElementDivergence, ConstantPressureColumnPattern) {
    // Column of the element constant: b_j / 6 on the vertex velocities and
    // -4 b_k / 6 on the mid-side velocities.
    const auto g = triangle_geometry({0, 0}, {1, 0}, {0, 1});
    const auto d = element_divergence(g, PressureSpaceKind::LC);
    for (int j = 0; j < 3; ++j) {
        EXPECT_NEAR(d(j, 3), g.b[j].x / 6.0, 1e-14);
        EXPECT_NEAR(d(6 + j, 3), g.b[j].y / 6.0, 1e-14);
        EXPECT_NEAR(d(3 + j, 3), -4.0 * g.b[j].x / 6.0, 1e-14);
        EXPECT_NEAR(d(6 + 3 + j, 3), -4.0 * g.b[j].y / 6.0, 1e-14);
    }
}

TEST(ElementDivergence, ScalesLinearlyWithSize) {
    const auto g = triangle_geometry({0.2, 0.1}, {1.3, 0.4}, {0.5, 1.2});
    const double s = 2.5;
    const auto gs = triangle_geometry({0.2 * s, 0.1 * s}, {1.3 * s, 0.4 * s},
                                      {0.5 * s, 1.2 * s});
    const auto d = element_divergence(g, PressureSpaceKind::LC);
    const auto ds = element_divergence(gs, PressureSpaceKind::LC);
    EXPECT_NEAR((ds - s * d).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Assemble, ZeroBodyForceGivesZeroLoad) {
    const Mesh m = generate_structured(3, DiagonalPattern::Right);
    const DofMap d = build_dof_map(m, PressureSpaceKind::LC, false);
    const SaddleSystem sys = assemble(m, d, PressureSpaceKind::LC, 1.0);
    EXPECT_DOUBLE_EQ(sys.f.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_DOUBLE_EQ(sys.g.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Assemble, KindMismatchRejected) {
    const Mesh m = generate_structured(2, DiagonalPattern::Right);
    const DofMap d = build_dof_map(m, PressureSpaceKind::LC, false);
    EXPECT_THROW(assemble(m, d, PressureSpaceKind::TaylorHood, 1.0),
                 std::invalid_argument);
}

TEST(Assemble, QuadraticEnergyIsExact) {
    // u = (y^2, x^2): integral of |grad u|^2 over the unit square is 8/3.
    const Mesh m = generate_structured(4, DiagonalPattern::Right);
    const DofMap d = build_dof_map(m, PressureSpaceKind::TaylorHood, false);
    const SaddleSystem sys = assemble(m, d, PressureSpaceKind::TaylorHood, 1.0);
    Eigen::VectorXd u(d.n_velocity);
    for (int node = 0; node < m.num_nodes(); ++node) {
        const Point2 p = m.node_point(node);
        u[d.velocity_dof(node, 0)] = p.y * p.y;
        u[d.velocity_dof(node, 1)] = p.x * p.x;
    }
    EXPECT_NEAR(u.dot(sys.A * u), 8.0 / 3.0, 1e-12);
}

TEST(Assemble, GlobalConstantPressureOrthogonalToInteriorVelocities) {
    const Mesh m = generate_structured(4, DiagonalPattern::Right, true);
    const DofMap d = build_dof_map(m, PressureSpaceKind::LC, false);
    const SaddleSystem sys = assemble(m, d, PressureSpaceKind::LC, 1.0);

    Eigen::VectorXd ones_vertex = Eigen::VectorXd::Zero(d.n_pressure_merged);
    Eigen::VectorXd ones_const = Eigen::VectorXd::Zero(d.n_pressure_merged);
    for (int v = 0; v < m.num_vertices(); ++v)
        ones_vertex[d.raw_to_merged[d.pressure_vertex_dof(v)]] = 1.0;
    for (int t = 0; t < m.num_triangles(); ++t)
        ones_const[d.raw_to_merged[d.pressure_element_dof(t)]] = 1.0;

    const Eigen::VectorXd bv = sys.B * ones_vertex;
    const Eigen::VectorXd bc = sys.B * ones_const;
    for (int i = 0; i < d.n_velocity; ++i) {
        if (d.velocity_on_boundary[i]) continue;
        EXPECT_NEAR(bv[i], 0.0, 1e-13);
        EXPECT_NEAR(bc[i], 0.0, 1e-13);
    }
}

TEST(Assemble, TieMergeSumsColumns) {
    const Mesh m = generate_structured(4, DiagonalPattern::Right);
    const DofMap lc = build_dof_map(m, PressureSpaceKind::LC, false);
    const DofMap tied = build_dof_map(m, PressureSpaceKind::LCTied, false);
    ASSERT_EQ(tied.ties.size(), 2u);
    EXPECT_EQ(tied.n_pressure_merged, lc.n_pressure_merged - 2);

    const SaddleSystem sys_lc = assemble(m, lc, PressureSpaceKind::LC, 1.0);
    const SaddleSystem sys_tied = assemble(m, tied, PressureSpaceKind::LCTied, 1.0);
    EXPECT_EQ(sys_tied.B.cols(), tied.n_pressure_merged);

    const Eigen::MatrixXd b_lc = Eigen::MatrixXd(sys_lc.B);
    const Eigen::MatrixXd b_tied = Eigen::MatrixXd(sys_tied.B);
    for (const auto& [slave, master] : tied.ties) {
        const Eigen::VectorXd merged = b_tied.col(tied.raw_to_merged[slave]);
        const Eigen::VectorXd summed = b_lc.col(lc.raw_to_merged[slave]) +
                                       b_lc.col(lc.raw_to_merged[master]);
        EXPECT_NEAR((merged - summed).cwiseAbs().maxCoeff(), 0.0, 1e-13);
    }
}

TEST(ApplyDirichlet, HomogeneousKeepsRightHandSides) {
    const Mesh m = generate_structured(3, DiagonalPattern::Right);
    const DofMap d = build_dof_map(m, PressureSpaceKind::TaylorHood, false);
    const SaddleSystem sys = assemble(m, d, PressureSpaceKind::TaylorHood, 1.0);
    const SaddleSystem red = apply_dirichlet(sys, d, homogeneous_boundary(d));
    EXPECT_DOUBLE_EQ(red.f.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_DOUBLE_EQ(red.g.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_LT(red.n_velocity(), sys.n_velocity());
}

TEST(ApplyDirichlet, ReducedViscousBlockIsPositiveDefinite) {
    const Mesh m = generate_structured(4, DiagonalPattern::Right);
    const DofMap d = build_dof_map(m, PressureSpaceKind::TaylorHood, false);
    SaddleSystem sys = assemble(m, d, PressureSpaceKind::TaylorHood, 1.0);
    sys = apply_dirichlet(sys, d, homogeneous_boundary(d));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(sys.A));
    EXPECT_GT(es.eigenvalues()[0], 0.0);
}

TEST(ApplyDirichlet, MissingBoundaryValuesRejected) {
    const Mesh m = generate_structured(2, DiagonalPattern::Right);
    const DofMap d = build_dof_map(m, PressureSpaceKind::TaylorHood, false);
    const SaddleSystem sys = assemble(m, d, PressureSpaceKind::TaylorHood, 1.0);
    BoundaryData bad{Eigen::VectorXd::Zero(3)};
    EXPECT_THROW(apply_dirichlet(sys, d, bad), std::invalid_argument);
    BoundaryData nan_data{Eigen::VectorXd::Constant(
        d.n_velocity, std::numeric_limits<double>::quiet_NaN())};
    EXPECT_THROW(apply_dirichlet(sys, d, nan_data), std::invalid_argument);
}

TEST(ApplyDirichlet, DivergenceFreeDataIsCompatible) {
    // Sum of the continuity right-hand side over each constant pressure
    // direction equals the boundary flux, which vanishes for the enclosed
    // benchmark data.
    const Mesh m = generate_structured(4, DiagonalPattern::Right, true);
    const ExactSolution exact = griffiths_solution();
    for (PressureSpaceKind kind : {PressureSpaceKind::TaylorHood,
                                   PressureSpaceKind::LC}) {
        const DofMap d = build_dof_map(m, kind, false);
        SaddleSystem sys = assemble(m, d, kind, 1.0);
        sys = apply_dirichlet(sys, d, boundary_from_velocity(m, d, exact.velocity));
        double vertex_sum = 0.0, const_sum = 0.0;
        for (int v = 0; v < m.num_vertices(); ++v)
            vertex_sum += sys.g[d.raw_to_merged[d.pressure_vertex_dof(v)]];
        if (has_element_constants(kind))
            for (int t = 0; t < m.num_triangles(); ++t)
                const_sum += sys.g[d.raw_to_merged[d.pressure_element_dof(t)]];
        EXPECT_NEAR(vertex_sum, 0.0, 1e-12);
        EXPECT_NEAR(const_sum, 0.0, 1e-12);
    }
}
