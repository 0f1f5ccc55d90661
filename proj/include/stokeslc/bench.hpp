#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "stokeslc/assembly.hpp"
#include "stokeslc/dof_map.hpp"
#include "stokeslc/mesh.hpp"
#include "stokeslc/solver.hpp"

namespace stokeslc {

/// Closed-form reference fields for a benchmark problem.
struct ExactSolution {
    std::string name;
    std::function<Vec2(Point2)> velocity;
    /// Gradients of the two velocity components.
    std::function<std::array<Vec2, 2>(Point2)> velocity_gradient;
    std::function<double(Point2)> pressure;
    std::function<Vec2(Point2)> body_force;
};

/// Enclosed-flow polynomial benchmark on the unit square:
///   v_x = -20 x y^3,  v_y = 5 y^4 - 5 x^4,  p = -60 x^2 y + 20 y^3 + 5.
/// Divergence free, zero-mean pressure, and force free at unit viscosity;
/// for other viscosities the matching body force is supplied.
inline ExactSolution griffiths_solution(double nu = 1.0) {
    ExactSolution e;
    e.name = "griffiths";
    e.velocity = [](Point2 q) {
        return Vec2{-20.0 * q.x * q.y * q.y * q.y,
                    5.0 * q.y * q.y * q.y * q.y - 5.0 * q.x * q.x * q.x * q.x};
    };
    e.velocity_gradient = [](Point2 q) {
        return std::array<Vec2, 2>{
            Vec2{-20.0 * q.y * q.y * q.y, -60.0 * q.x * q.y * q.y},
            Vec2{-20.0 * q.x * q.x * q.x, 20.0 * q.y * q.y * q.y}};
    };
    e.pressure = [](Point2 q) {
        return -60.0 * q.x * q.x * q.y + 20.0 * q.y * q.y * q.y + 5.0;
    };
    e.body_force = [nu](Point2 q) {
        const Vec2 lap{-120.0 * q.x * q.y, 60.0 * (q.y * q.y - q.x * q.x)};
        return (1.0 - nu) * lap;
    };
    return e;
}

/// Exactly representable problem: quadratic divergence-free velocity with a
/// linear zero-mean pressure; the discrete solution must reproduce it.
inline ExactSolution poly_solution(double nu = 1.0) {
    ExactSolution e;
    e.name = "poly";
    e.velocity = [](Point2 q) { return Vec2{q.y * q.y, q.x * q.x}; };
    e.velocity_gradient = [](Point2 q) {
        return std::array<Vec2, 2>{Vec2{0.0, 2.0 * q.y}, Vec2{2.0 * q.x, 0.0}};
    };
    e.pressure = [](Point2 q) { return q.x + q.y - 1.0; };
    e.body_force = [nu](Point2) { return Vec2{1.0 - 2.0 * nu, 1.0 - 2.0 * nu}; };
    return e;
}

enum class Problem { Griffiths, Poly };

inline ExactSolution make_exact(Problem p, double nu) {
    return p == Problem::Griffiths ? griffiths_solution(nu) : poly_solution(nu);
}

inline const char* to_string(Problem p) {
    return p == Problem::Griffiths ? "griffiths" : "poly";
}

struct ErrorReport {
    double p_l2_modR = 0.0;  // pressure L2 error modulo constants
    double v_h1 = 0.0;       // full H1 norm of the velocity error
    double v_h1_semi = 0.0;
    double v_l2 = 0.0;
};

/// Error norms of a solved field against the exact one, by fifth-degree
/// quadrature with the exact fields evaluated at the quadrature points.
/// The pressure error is measured modulo its own mean.
inline ErrorReport error_norms(const Mesh& mesh, const DofMap& dofmap,
                               const Solution& sol, const ExactSolution& exact) {
    const QuadratureRule& rule = quadrature(5);
    double ep = 0.0, ep2 = 0.0, semi2 = 0.0, l22 = 0.0;

    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const Triangle& tri = mesh.triangles[t];
        const TriangleGeometry g{tri.area, tri.b};
        std::array<int, 6> node{};
        for (int l = 0; l < 6; ++l) node[l] = detail::local_velocity_node(mesh, tri, l);

        for (const QuadraturePoint& q : rule.points) {
            const ShapeSet s = p2_basis(q.bary, g);
            Point2 x{0.0, 0.0};
            for (int j = 0; j < 3; ++j) x += q.bary[j] * mesh.vertices[tri.v[j]];

            Vec2 uh{0.0, 0.0};
            Vec2 gx{0.0, 0.0}, gy{0.0, 0.0};
            for (int l = 0; l < 6; ++l) {
                const double cx = sol.u[dofmap.velocity_dof(node[l], 0)];
                const double cy = sol.u[dofmap.velocity_dof(node[l], 1)];
                uh.x += cx * s.value[l];
                uh.y += cy * s.value[l];
                gx += cx * s.grad[l];
                gy += cy * s.grad[l];
            }
            double ph = 0.0;
            for (int j = 0; j < 3; ++j)
                ph += q.bary[j] * sol.p[dofmap.pressure_vertex_dof(tri.v[j])];
            if (has_element_constants(dofmap.kind))
                ph += sol.p[dofmap.pressure_element_dof(t)];

            const double w = q.weight * tri.area;
            const Vec2 du = exact.velocity(x) - uh;
            const auto dg = exact.velocity_gradient(x);
            const Vec2 dgx = dg[0] - gx;
            const Vec2 dgy = dg[1] - gy;
            const double dp = exact.pressure(x) - ph;

            ep += w * dp;
            ep2 += w * dp * dp;
            semi2 += w * (dot(dgx, dgx) + dot(dgy, dgy));
            l22 += w * dot(du, du);
        }
    }

    ErrorReport r;
    r.p_l2_modR = std::sqrt(std::max(ep2 - ep * ep / mesh.total_area(), 0.0));
    r.v_h1_semi = std::sqrt(semi2);
    r.v_l2 = std::sqrt(l22);
    r.v_h1 = std::sqrt(semi2 + l22);
    return r;
}

/// log2 ratios of successive errors under mesh halving; infinity marks an
/// exactly reproduced (zero-error) fine solution.
inline std::vector<double> estimate_order(const std::vector<double>& errors) {
    if (errors.size() < 2)
        throw std::invalid_argument("estimate_order: need at least two grids");
    std::vector<double> orders;
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        if (errors[i + 1] == 0.0)
            orders.push_back(std::numeric_limits<double>::infinity());
        else
            orders.push_back(std::log2(errors[i] / errors[i + 1]));
    }
    return orders;
}

struct RunResult {
    int grid = 0;
    PressureSpaceKind kind = PressureSpaceKind::TaylorHood;
    ErrorReport errors;
    SolveReport solve_report;
    int n_velocity = 0;
    int n_pressure = 0;
};

struct ConvergenceTable {
    Problem problem = Problem::Griffiths;
    DiagonalPattern pattern = DiagonalPattern::Right;
    double nu = 1.0;
    bool allow_corners = false;
    std::vector<int> grids;
    std::vector<PressureSpaceKind> kinds;
    std::vector<RunResult> rows;  // ordered kind-major, then grid ascending

    std::vector<double> errors_of(PressureSpaceKind kind,
                                  double ErrorReport::* norm) const {
        std::vector<double> e;
        for (const RunResult& r : rows)
            if (r.kind == kind) e.push_back(r.errors.*norm);
        return e;
    }
};

/// Builds the grid, solves, normalizes and measures one case.  Grids are
/// split into the corners by default; allow_corners keeps the raw pattern,
/// which the plain LC kind must refuse.
inline RunResult run_case(int grid, PressureSpaceKind kind, DiagonalPattern pattern,
                          Problem problem, double nu, bool allow_corners) {
    const Mesh mesh = generate_structured(grid, pattern, !allow_corners);
    if (allow_corners && kind == PressureSpaceKind::LC &&
        !corner_elements(mesh).empty())
        throw UnsupportedGrid(
            "run_case: elements with two boundary sides make the plain LC "
            "pressure space rank deficient (their element continuity "
            "constraints are linearly dependent); use the tied kind or a "
            "corner-split grid");

    const ExactSolution exact = make_exact(problem, nu);
    const DofMap dofmap = build_dof_map(mesh, kind, /*enclosed=*/true);
    const BoundaryData bd = boundary_from_velocity(mesh, dofmap, exact.velocity);
    Solution sol = solve_stokes(mesh, dofmap, nu, exact.body_force, bd);
    sol = normalize_pressure(std::move(sol), mesh, dofmap);

    RunResult r;
    r.grid = grid;
    r.kind = kind;
    r.errors = error_norms(mesh, dofmap, sol, exact);
    r.solve_report = sol.report;
    r.n_velocity = dofmap.n_velocity;
    r.n_pressure = dofmap.n_pressure_merged;
    return r;
}

inline int thread_budget() {
    if (const char* env = std::getenv("STOKESLC_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return 1;
}

/// Runs every (kind, grid) combination.  Grids must be strictly increasing
/// and successively doubling so the order estimates are meaningful.
inline ConvergenceTable convergence_run(const std::vector<int>& grids,
                                        const std::vector<PressureSpaceKind>& kinds,
                                        DiagonalPattern pattern, Problem problem,
                                        double nu = 1.0, bool allow_corners = false) {
    if (grids.empty() || kinds.empty())
        throw std::invalid_argument("convergence_run: nothing to run");
    for (std::size_t i = 0; i + 1 < grids.size(); ++i)
        if (grids[i + 1] != 2 * grids[i])
            throw std::invalid_argument("convergence_run: grids must double");

    ConvergenceTable table;
    table.problem = problem;
    table.pattern = pattern;
    table.nu = nu;
    table.allow_corners = allow_corners;
    table.grids = grids;
    table.kinds = kinds;
    table.rows.resize(kinds.size() * grids.size());

    std::vector<std::pair<std::size_t, std::pair<PressureSpaceKind, int>>> jobs;
    for (std::size_t k = 0; k < kinds.size(); ++k)
        for (std::size_t gi = 0; gi < grids.size(); ++gi)
            jobs.push_back({k * grids.size() + gi, {kinds[k], grids[gi]}});

    const int threads = std::min<int>(thread_budget(), static_cast<int>(jobs.size()));
    if (threads <= 1) {
        for (const auto& job : jobs)
            table.rows[job.first] = run_case(job.second.second, job.second.first,
                                             pattern, problem, nu, allow_corners);
        return table;
    }

    std::exception_ptr error;
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t j = next.fetch_add(1); j < jobs.size();
                 j = next.fetch_add(1)) {
                try {
                    table.rows[jobs[j].first] =
                        run_case(jobs[j].second.second, jobs[j].second.first,
                                 pattern, problem, nu, allow_corners);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return table;
}

}  // namespace stokeslc
