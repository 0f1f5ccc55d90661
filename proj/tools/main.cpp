// Command-line driver: enclosed-flow solves, convergence studies, patch and
// global stability analysis, and mesh inspection.  Reports are emitted as
// JSON or CSV; exit code 0 on success, 2 on bad arguments, 3 on refused
// (rank-deficient) configurations.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "stokeslc/bench.hpp"
#include "stokeslc/mesh.hpp"
#include "stokeslc/patch.hpp"
#include "stokeslc/report.hpp"
#include "stokeslc/solver.hpp"
#include "stokeslc/stability.hpp"

namespace {

using namespace stokeslc;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRefused = 3;

PressureSpaceKind parse_kind(const std::string& s) {
    if (s == "th") return PressureSpaceKind::TaylorHood;
    if (s == "lc") return PressureSpaceKind::LC;
    if (s == "lctied") return PressureSpaceKind::LCTied;
    throw std::invalid_argument("unknown element '" + s + "'");
}

DiagonalPattern parse_pattern(const std::string& s) {
    if (s == "right") return DiagonalPattern::Right;
    if (s == "left") return DiagonalPattern::Left;
    throw std::invalid_argument("unknown pattern '" + s + "'");
}

Problem parse_problem(const std::string& s) {
    if (s == "griffiths") return Problem::Griffiths;
    if (s == "poly") return Problem::Poly;
    throw std::invalid_argument("unknown problem '" + s + "'");
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream os(out_path);
    if (!os) throw std::runtime_error("cannot open output file " + out_path);
    os << text;
}

struct CommonOptions {
    int grid = 4;
    std::string pattern = "right";
    std::string element = "lc";
    std::string problem = "griffiths";
    double nu = 1.0;
    bool allow_corners = false;
    std::string out;
    std::string format = "json";
};

int cmd_solve(const CommonOptions& o) {
    const RunResult r = run_case(o.grid, parse_kind(o.element),
                                 parse_pattern(o.pattern), parse_problem(o.problem),
                                 o.nu, o.allow_corners);
    ConvergenceTable t;
    t.problem = parse_problem(o.problem);
    t.pattern = parse_pattern(o.pattern);
    t.nu = o.nu;
    t.allow_corners = o.allow_corners;
    t.grids = {o.grid};
    t.kinds = {parse_kind(o.element)};
    t.rows = {r};
    emit(o.format == "csv" ? to_csv(t) : to_json(t).dump(2), o.out);
    return kExitOk;
}

int cmd_convergence(const std::vector<int>& grids,
                    const std::vector<std::string>& elements,
                    const CommonOptions& o) {
    std::vector<PressureSpaceKind> kinds;
    for (const std::string& e : elements) kinds.push_back(parse_kind(e));
    const ConvergenceTable t =
        convergence_run(grids, kinds, parse_pattern(o.pattern),
                        parse_problem(o.problem), o.nu, o.allow_corners);
    emit(o.format == "csv" ? to_csv(t) : to_json(t).dump(2), o.out);
    return kExitOk;
}

PatchClass class_from_index(int k) {
    if (k == 1) return PatchClass::Type1;
    if (k == 2) return PatchClass::Type2;
    if (k == 3) return PatchClass::Type3;
    throw std::invalid_argument("patch class must be 1, 2 or 3");
}

int nullity_of(PatchClass c) {
    return c == PatchClass::Type1 ? 2 : c == PatchClass::Type2 ? 4 : 3;
}

struct PatchAnalysis {
    int samples = 0;
    bool nullity_ok = true;
    bool c_full_rank = true;
    double max_null_residual = 0.0;
    double max_constraint_residual = 0.0;
    double max_divergence_residual = 0.0;
    double min_beta = std::numeric_limits<double>::infinity();
    double max_beta = 0.0;
};

void analyze_one(const Mesh& mesh, const Patch& patch, std::mt19937_64& rng,
                 PatchAnalysis& acc, int pressure_draws = 3) {
    const Eigen::MatrixXd b = patch_system(mesh, patch);
    const Eigen::MatrixXd s = analytic_null_basis(patch);
    const double bnorm = b.cwiseAbs().rowwise().sum().maxCoeff();
    for (int c = 0; c < s.cols(); ++c)
        acc.max_null_residual = std::max(
            acc.max_null_residual, (b * s.col(c)).cwiseAbs().maxCoeff() / bnorm);
    acc.nullity_ok &= (null_space(b).cols() == nullity_of(patch.cls));
    acc.c_full_rank &= c_matrix(mesh, patch).full_rank;

    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < pressure_draws; ++k) {
        Eigen::VectorXd p(patch.num_pressure_dofs());
        for (int i = 0; i < p.size(); ++i) p[i] = u(rng);
        const ProjectionResiduals r = verify_projection_theorems(mesh, patch, p);
        acc.max_constraint_residual = std::max(acc.max_constraint_residual,
                                               r.constraint);
        acc.max_divergence_residual = std::max(acc.max_divergence_residual,
                                               r.divergence);
    }
    const double beta = patch_inf_sup(mesh, patch);
    acc.min_beta = std::min(acc.min_beta, beta);
    acc.max_beta = std::max(acc.max_beta, beta);
    ++acc.samples;
}

Json analysis_json(const PatchAnalysis& a, PatchClass cls, unsigned long seed) {
    return Json{{"class", to_string(cls)},
                {"samples", a.samples},
                {"seed", seed},
                {"expected_nullity", nullity_of(cls)},
                {"nullity_ok", a.nullity_ok},
                {"c_matrix_full_rank", a.c_full_rank},
                {"max_null_vector_residual", a.max_null_residual},
                {"max_constraint_residual", a.max_constraint_residual},
                {"max_divergence_residual", a.max_divergence_residual},
                {"min_beta", a.min_beta},
                {"max_beta", a.max_beta},
                {"verdict", a.nullity_ok && a.c_full_rank ? "stable" : "unstable"}};
}

int cmd_stability_patch(int cls_index, int random_count, unsigned long seed,
                        const std::string& mesh_path, const std::string& out) {
    std::mt19937_64 rng(seed);
    PatchAnalysis acc;
    PatchClass cls = PatchClass::Type2;

    if (!mesh_path.empty()) {
        const Mesh mesh = load_mesh_text(mesh_path);
        if (mesh.num_triangles() != 3)
            throw std::invalid_argument(
                "patch analysis expects a three-element mesh file");
        std::optional<Patch> found;
        std::vector<int> order;
        for (int t = 0; t < mesh.num_triangles(); ++t)
            if (mesh.triangles[t].boundary_edge_count <= 1) order.push_back(t);
        for (int t = 0; t < mesh.num_triangles(); ++t)
            if (mesh.triangles[t].boundary_edge_count == 2) order.push_back(t);
        for (int t : order) {
            Patch p;
            try {
                p = extract_patch(mesh, t);
            } catch (const PatchUnavailable&) {
                continue;
            }
            if (cls_index == 0 || p.cls == class_from_index(cls_index)) {
                found = p;
                break;
            }
        }
        if (!found)
            throw std::invalid_argument("no patch of the requested class in " +
                                        mesh_path);
        cls = found->cls;
        analyze_one(mesh, *found, rng, acc, std::max(random_count, 1));

        const Eigen::MatrixXd b = patch_system(mesh, *found);
        const ConstraintProduct cp = c_matrix(mesh, *found);
        Json j = analysis_json(acc, cls, seed);
        j["nullity"] = static_cast<int>(null_space(b).cols());
        Json c_rows = Json::array();
        for (int r = 0; r < cp.C.rows(); ++r) {
            Json row = Json::array();
            for (int c = 0; c < cp.C.cols(); ++c) row.push_back(cp.C(r, c));
            c_rows.push_back(row);
        }
        j["c_matrix"] = c_rows;
        j["c_determinant"] = cp.C.determinant();
        j["beta"] = acc.min_beta;
        std::printf("patch %s (from %s): verdict %s, nullity %d, "
                    "det C = %.6g, beta = %.4f\n",
                    to_string(cls), mesh_path.c_str(),
                    j["verdict"].get<std::string>().c_str(),
                    j["nullity"].get<int>(), j["c_determinant"].get<double>(),
                    acc.min_beta);
        if (!out.empty()) emit(j.dump(2), out);
        return acc.nullity_ok && acc.c_full_rank ? kExitOk : kExitRefused;
    } else {
        cls = class_from_index(cls_index == 0 ? 2 : cls_index);
        for (int k = 0; k < std::max(random_count, 1); ++k) {
            const SampledPatch sp = random_patch(cls, rng);
            analyze_one(sp.mesh, sp.patch, rng, acc);
        }
    }

    const Json j = analysis_json(acc, cls, seed);
    std::printf("patch %s: verdict %s, max theorem residual %.3e "
                "(constraints) / %.3e (divergence), beta in [%.4f, %.4f]\n",
                to_string(cls), j["verdict"].get<std::string>().c_str(),
                acc.max_constraint_residual, acc.max_divergence_residual,
                acc.min_beta, acc.max_beta);
    if (!out.empty()) emit(j.dump(2), out);
    return acc.nullity_ok && acc.c_full_rank ? kExitOk : kExitRefused;
}

int cmd_stability_global(const CommonOptions& o) {
    const Mesh mesh = generate_structured(o.grid, parse_pattern(o.pattern),
                                          !o.allow_corners);
    const InfSupReport rep = global_inf_sup(mesh, parse_kind(o.element));
    Json j = to_json(rep);
    j["grid"] = o.grid;
    j["element"] = o.element;
    j["pattern"] = o.pattern;
    j["allow_corners"] = o.allow_corners;
    std::printf("grid %d (%s, %s): beta_h = %.6f, pressure null space dim %d\n",
                o.grid, o.element.c_str(), o.pattern.c_str(), rep.beta,
                rep.pressure_null_dim);
    if (!o.out.empty()) emit(j.dump(2), o.out);
    return kExitOk;
}

int cmd_mesh_info(const CommonOptions& o, const std::string& mesh_path) {
    const Mesh mesh = mesh_path.empty()
                          ? generate_structured(o.grid, parse_pattern(o.pattern),
                                                !o.allow_corners)
                          : load_mesh_text(mesh_path);
    int boundary_edges = 0;
    for (const Edge& e : mesh.edges) boundary_edges += e.boundary ? 1 : 0;
    Json j{{"vertices", mesh.num_vertices()},
           {"triangles", mesh.num_triangles()},
           {"edges", mesh.num_edges()},
           {"boundary_edges", boundary_edges},
           {"total_area", mesh.total_area()},
           {"regularity_ratio", regularity_ratio(mesh)},
           {"corner_elements", corner_elements(mesh)}};
    emit(j.dump(2), o.out);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stokes flow toolkit for the quadratic-velocity element with "
                 "linear or linear-plus-constant pressure"};
    app.require_subcommand(1);

    CommonOptions o;
    std::vector<int> grids{4, 8, 16};
    std::vector<std::string> elements{"th", "lc"};
    std::string mesh_path;
    int cls_index = 0;
    int random_count = 100;
    unsigned long seed = 1;

    auto add_common = [&](CLI::App* cmd, bool with_grid = true) {
        if (with_grid) cmd->add_option("--grid", o.grid, "cells per side");
        cmd->add_option("--pattern", o.pattern, "diagonal pattern: right|left");
        cmd->add_flag("--allow-corners", o.allow_corners,
                      "keep the raw pattern even where it cuts off corners");
        cmd->add_option("--out", o.out, "write the report to this file");
    };

    CLI::App* solve = app.add_subcommand("solve", "solve one enclosed-flow case");
    add_common(solve);
    solve->add_option("--element", o.element, "th|lc|lctied");
    solve->add_option("--problem", o.problem, "griffiths|poly");
    solve->add_option("--nu", o.nu, "viscosity");
    solve->add_option("--format", o.format, "json|csv");

    CLI::App* conv = app.add_subcommand("convergence", "grid refinement study");
    add_common(conv, false);
    conv->add_option("--grids", grids, "comma separated, each double the last")
        ->delimiter(',');
    conv->add_option("--element", elements, "comma separated: th,lc,lctied")
        ->delimiter(',');
    conv->add_option("--problem", o.problem, "griffiths|poly");
    conv->add_option("--nu", o.nu, "viscosity");
    conv->add_option("--format", o.format, "json|csv");

    CLI::App* stability = app.add_subcommand("stability", "stability analysis");
    stability->require_subcommand(1);
    CLI::App* patch = stability->add_subcommand(
        "patch", "randomized macroelement verification");
    patch->add_option("--class", cls_index, "patch class 1|2|3");
    patch->add_option("--random", random_count, "number of random samples");
    patch->add_option("--seed", seed, "random seed");
    patch->add_option("--mesh", mesh_path, "three-element mesh file to analyze");
    patch->add_option("--out", o.out, "write the report to this file");

    CLI::App* global = stability->add_subcommand(
        "global", "inf-sup constant of a structured grid");
    add_common(global);
    global->add_option("--element", o.element, "th|lc|lctied");

    CLI::App* mesh_cmd = app.add_subcommand("mesh", "mesh utilities");
    mesh_cmd->require_subcommand(1);
    CLI::App* info = mesh_cmd->add_subcommand("info", "counts and shape measures");
    add_common(info);
    info->add_option("--mesh", mesh_path, "mesh file instead of a generated grid");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (solve->parsed()) return cmd_solve(o);
        if (conv->parsed()) return cmd_convergence(grids, elements, o);
        if (patch->parsed())
            return cmd_stability_patch(cls_index, random_count, seed, mesh_path,
                                       o.out);
        if (global->parsed()) return cmd_stability_global(o);
        if (info->parsed()) return cmd_mesh_info(o, mesh_path);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const UnsupportedGrid& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return kExitRefused;
    } catch (const SingularSystem& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return kExitRefused;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitUsage;
}
