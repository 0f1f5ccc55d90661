#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>

#include <json.hpp>

#include "stokeslc/bench.hpp"
#include "stokeslc/report.hpp"

using namespace stokeslc;

namespace {

Point2 random_point(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return {u(rng), u(rng)};
}

}  // namespace

TEST(Griffiths, PointValues) {
    const ExactSolution e = griffiths_solution();
    EXPECT_DOUBLE_EQ(e.velocity({0, 0}).x, 0.0);
    EXPECT_DOUBLE_EQ(e.velocity({0, 0}).y, 0.0);
    EXPECT_DOUBLE_EQ(e.pressure({0, 0}), 5.0);
    EXPECT_DOUBLE_EQ(e.velocity({1, 1}).x, -20.0);
}

TEST(Griffiths, DivergenceFreeAtRandomPoints) {
    const ExactSolution e = griffiths_solution();
    std::mt19937_64 rng(1);
    for (int k = 0; k < 100; ++k) {
        const auto g = e.velocity_gradient(random_point(rng));
        EXPECT_NEAR(g[0].x + g[1].y, 0.0, 1e-13);
    }
}

TEST(Griffiths, GradientsMatchFiniteDifferences) {
    const ExactSolution e = griffiths_solution();
    std::mt19937_64 rng(2);
    const double h = 1e-6;
    for (int k = 0; k < 20; ++k) {
        const Point2 q = random_point(rng);
        const auto g = e.velocity_gradient(q);
        const Vec2 dx = (1.0 / (2 * h)) * (e.velocity({q.x + h, q.y}) -
                                           e.velocity({q.x - h, q.y}));
        const Vec2 dy = (1.0 / (2 * h)) * (e.velocity({q.x, q.y + h}) -
                                           e.velocity({q.x, q.y - h}));
        EXPECT_NEAR(g[0].x, dx.x, 2e-6);
        EXPECT_NEAR(g[1].x, dx.y, 2e-6);
        EXPECT_NEAR(g[0].y, dy.x, 2e-6);
        EXPECT_NEAR(g[1].y, dy.y, 2e-6);
    }
}

TEST(Griffiths, ForceFreeAtUnitViscosity) {
    // -lap(v) + grad(p) = 0, checked by finite differences.
    const ExactSolution e = griffiths_solution(1.0);
    std::mt19937_64 rng(3);
    const double h = 1e-4;
    for (int k = 0; k < 100; ++k) {
        const Point2 q = random_point(rng);
        EXPECT_DOUBLE_EQ(e.body_force(q).x, 0.0);
        EXPECT_DOUBLE_EQ(e.body_force(q).y, 0.0);

        auto lap = [&](int comp) {
            auto v = [&](double x, double y) {
                const Vec2 w = e.velocity({x, y});
                return comp == 0 ? w.x : w.y;
            };
            return (v(q.x + h, q.y) + v(q.x - h, q.y) + v(q.x, q.y + h) +
                    v(q.x, q.y - h) - 4.0 * v(q.x, q.y)) / (h * h);
        };
        const double px =
            (e.pressure({q.x + h, q.y}) - e.pressure({q.x - h, q.y})) / (2 * h);
        const double py =
            (e.pressure({q.x, q.y + h}) - e.pressure({q.x, q.y - h})) / (2 * h);
        EXPECT_NEAR(-lap(0) + px, 0.0, 1e-4);
        EXPECT_NEAR(-lap(1) + py, 0.0, 1e-4);
    }
}

TEST(Griffiths, PressureHasZeroMean) {
    // Composite midpoint over a fine grid is enough to confirm the exact 0.
    const ExactSolution e = griffiths_solution();
    const int n = 200;
    double sum = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            sum += e.pressure({(i + 0.5) / n, (j + 0.5) / n});
    EXPECT_NEAR(sum / (n * n), 0.0, 1e-4);
}

TEST(PolyProblem, ConsistentData) {
    const ExactSolution e = poly_solution(1.0);
    EXPECT_DOUBLE_EQ(e.body_force({0.3, 0.7}).x, -1.0);
    EXPECT_DOUBLE_EQ(e.body_force({0.3, 0.7}).y, -1.0);
    std::mt19937_64 rng(4);
    for (int k = 0; k < 20; ++k) {
        const auto g = e.velocity_gradient(random_point(rng));
        EXPECT_DOUBLE_EQ(g[0].x + g[1].y, 0.0);
    }
}

TEST(ErrorNorms, VanishOnInterpolantOfRepresentableProblem) {
    const Mesh m = generate_structured(4, DiagonalPattern::Right, true);
    const DofMap d = build_dof_map(m, PressureSpaceKind::LC, true);
    const ExactSolution e = poly_solution();

    Solution interp;
    interp.u.resize(d.n_velocity);
    for (int node = 0; node < m.num_nodes(); ++node) {
        const Vec2 v = e.velocity(m.node_point(node));
        interp.u[d.velocity_dof(node, 0)] = v.x;
        interp.u[d.velocity_dof(node, 1)] = v.y;
    }
    interp.p = Eigen::VectorXd::Zero(d.n_pressure_raw);
    for (int v = 0; v < m.num_vertices(); ++v)
        interp.p[d.pressure_vertex_dof(v)] = e.pressure(m.vertices[v]);

    const ErrorReport r = error_norms(m, d, interp, e);
    EXPECT_LE(r.p_l2_modR, 1e-9);
    EXPECT_LE(r.v_h1, 1e-9);
    EXPECT_LE(r.v_h1_semi, 1e-9);
    EXPECT_LE(r.v_l2, 1e-9);
}

TEST(EstimateOrder, ReferenceTableArithmetic) {
    const auto p_orders = estimate_order({0.0975, 0.0233});
    EXPECT_NEAR(p_orders[0], 2.07, 0.01);
    const auto v_orders = estimate_order({0.00239, 0.00029});
    EXPECT_NEAR(v_orders[0], 3.04, 0.01);
    const auto flat = estimate_order({0.5, 0.5});
    EXPECT_DOUBLE_EQ(flat[0], 0.0);
    EXPECT_TRUE(std::isinf(estimate_order({1e-3, 0.0})[0]));
    EXPECT_THROW(estimate_order({0.1}), std::invalid_argument);
}

TEST(ConvergenceRun, RejectsNonDoublingGrids) {
    EXPECT_THROW(convergence_run({4, 6}, {PressureSpaceKind::TaylorHood},
                                 DiagonalPattern::Right, Problem::Poly),
                 std::invalid_argument);
    EXPECT_THROW(convergence_run({}, {PressureSpaceKind::TaylorHood},
                                 DiagonalPattern::Right, Problem::Poly),
                 std::invalid_argument);
}

TEST(ConvergenceRun, RefusesUnrepairedCornersForLC) {
    EXPECT_THROW(convergence_run({4}, {PressureSpaceKind::LC},
                                 DiagonalPattern::Right, Problem::Griffiths, 1.0,
                                 /*allow_corners=*/true),
                 UnsupportedGrid);
}

TEST(ConvergenceRun, TiedKindHandlesRawGrids) {
    const ConvergenceTable t =
        convergence_run({4}, {PressureSpaceKind::LCTied}, DiagonalPattern::Right,
                        Problem::Poly, 1.0, /*allow_corners=*/true);
    EXPECT_LE(t.rows[0].errors.v_h1, 1e-9);
}

TEST(ConvergenceRun, PolyProblemIsExactEverywhere) {
    const ConvergenceTable t = convergence_run(
        {4, 8}, {PressureSpaceKind::TaylorHood, PressureSpaceKind::LC},
        DiagonalPattern::Right, Problem::Poly);
    ASSERT_EQ(t.rows.size(), 4u);
    for (const RunResult& r : t.rows) {
        EXPECT_LE(r.errors.p_l2_modR, 1e-9);
        EXPECT_LE(r.errors.v_h1, 1e-9);
    }
}

TEST(ConvergenceRun, GriffithsOrdersRoughlyOptimalOnCoarsePair) {
    const ConvergenceTable t =
        convergence_run({4, 8}, {PressureSpaceKind::LC}, DiagonalPattern::Right,
                        Problem::Griffiths);
    const auto p = estimate_order(t.errors_of(PressureSpaceKind::LC,
                                              &ErrorReport::p_l2_modR));
    const auto h1 = estimate_order(t.errors_of(PressureSpaceKind::LC,
                                               &ErrorReport::v_h1));
    const auto l2 = estimate_order(t.errors_of(PressureSpaceKind::LC,
                                               &ErrorReport::v_l2));
    EXPECT_NEAR(p[0], 2.0, 0.5);
    EXPECT_NEAR(h1[0], 2.0, 0.35);
    EXPECT_NEAR(l2[0], 3.0, 0.35);
}

TEST(Reports, CsvSchemaAndOrderRows) {
    const ConvergenceTable t = convergence_run(
        {4, 8}, {PressureSpaceKind::TaylorHood, PressureSpaceKind::LC},
        DiagonalPattern::Right, Problem::Griffiths);
    const std::string csv = to_csv(t);
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "grid,element,p_l2_modR,v_h1,v_h1_semi,v_l2");
    int lines = 0, order_lines = 0, data_lines = 0;
    for (std::size_t pos = 0; (pos = csv.find('\n', pos)) != std::string::npos; ++pos)
        ++lines;
    std::stringstream ss(csv);
    std::string line;
    std::getline(ss, line);
    while (std::getline(ss, line)) {
        if (line.rfind("order,", 0) == 0)
            ++order_lines;
        else
            ++data_lines;
    }
    EXPECT_EQ(data_lines, 4);
    EXPECT_EQ(order_lines, 2);
    EXPECT_EQ(lines, 7);
}

TEST(Reports, JsonRoundTripsAndIsDeterministic) {
    const ConvergenceTable t =
        convergence_run({4, 8}, {PressureSpaceKind::LC}, DiagonalPattern::Right,
                        Problem::Griffiths);
    const Json j = to_json(t);
    EXPECT_EQ(j["problem"], "griffiths");
    EXPECT_EQ(j["runs"].size(), 2u);
    EXPECT_TRUE(j.contains("orders"));
    EXPECT_EQ(j["runs"][0]["grid"], 4);
    EXPECT_EQ(j["runs"][0]["element"], "lc");

    const ConvergenceTable t2 =
        convergence_run({4, 8}, {PressureSpaceKind::LC}, DiagonalPattern::Right,
                        Problem::Griffiths);
    EXPECT_EQ(to_json(t).dump(2), to_json(t2).dump(2));

    // Single grid: no orders section.
    const ConvergenceTable single =
        convergence_run({4}, {PressureSpaceKind::LC}, DiagonalPattern::Right,
                        Problem::Griffiths);
    EXPECT_FALSE(to_json(single).contains("orders"));
}

TEST(Reports, ParallelRunsMatchSerialByte) {
    setenv("STOKESLC_THREADS", "3", 1);
    const ConvergenceTable par = convergence_run(
        {4, 8}, {PressureSpaceKind::TaylorHood, PressureSpaceKind::LC},
        DiagonalPattern::Right, Problem::Griffiths);
    setenv("STOKESLC_THREADS", "1", 1);
    const ConvergenceTable ser = convergence_run(
        {4, 8}, {PressureSpaceKind::TaylorHood, PressureSpaceKind::LC},
        DiagonalPattern::Right, Problem::Griffiths);
    unsetenv("STOKESLC_THREADS");
    EXPECT_EQ(to_json(par).dump(), to_json(ser).dump());
}
