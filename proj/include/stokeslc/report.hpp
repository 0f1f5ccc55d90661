#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "stokeslc/bench.hpp"
#include "stokeslc/stability.hpp"

namespace stokeslc {

using Json = nlohmann::ordered_json;

namespace detail {

inline std::string fmt_g(double v) {
    if (std::isinf(v)) return "exact";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline Json order_json(const std::vector<double>& orders) {
    Json arr = Json::array();
    for (double o : orders) {
        if (std::isinf(o))
            arr.push_back("exact");
        else
            arr.push_back(o);
    }
    return arr;
}

}  // namespace detail

inline Json to_json(const ErrorReport& e) {
    return Json{{"p_l2_modR", e.p_l2_modR},
                {"v_h1", e.v_h1},
                {"v_h1_semi", e.v_h1_semi},
                {"v_l2", e.v_l2}};
}

inline Json to_json(const RunResult& r) {
    return Json{{"grid", r.grid},
                {"element", to_string(r.kind)},
                {"errors", to_json(r.errors)},
                {"n_velocity", r.n_velocity},
                {"n_pressure", r.n_pressure},
                {"relative_residual", r.solve_report.relative_residual}};
}

inline Json to_json(const ConvergenceTable& table) {
    Json j;
    j["problem"] = to_string(table.problem);
    j["pattern"] = to_string(table.pattern);
    j["nu"] = table.nu;
    j["allow_corners"] = table.allow_corners;
    j["runs"] = Json::array();
    for (const RunResult& r : table.rows) j["runs"].push_back(to_json(r));

    if (table.grids.size() >= 2) {
        Json orders;
        for (PressureSpaceKind kind : table.kinds) {
            Json per_kind;
            per_kind["p_l2_modR"] =
                detail::order_json(estimate_order(table.errors_of(kind, &ErrorReport::p_l2_modR)));
            per_kind["v_h1"] =
                detail::order_json(estimate_order(table.errors_of(kind, &ErrorReport::v_h1)));
            per_kind["v_h1_semi"] =
                detail::order_json(estimate_order(table.errors_of(kind, &ErrorReport::v_h1_semi)));
            per_kind["v_l2"] =
                detail::order_json(estimate_order(table.errors_of(kind, &ErrorReport::v_l2)));
            orders[to_string(kind)] = per_kind;
        }
        j["orders"] = orders;
    }
    return j;
}

/// CSV rows `grid,element,p_l2_modR,v_h1,v_h1_semi,v_l2`, one order row per
/// element block (the finest pair of grids).
inline std::string to_csv(const ConvergenceTable& table) {
    std::string out = "grid,element,p_l2_modR,v_h1,v_h1_semi,v_l2\n";
    for (PressureSpaceKind kind : table.kinds) {
        for (const RunResult& r : table.rows) {
            if (r.kind != kind) continue;
            out += std::to_string(r.grid) + "," + to_string(kind) + "," +
                   detail::fmt_g(r.errors.p_l2_modR) + "," +
                   detail::fmt_g(r.errors.v_h1) + "," +
                   detail::fmt_g(r.errors.v_h1_semi) + "," +
                   detail::fmt_g(r.errors.v_l2) + "\n";
        }
        if (table.grids.size() >= 2) {
            auto last = [&](double ErrorReport::* norm) {
                return estimate_order(table.errors_of(kind, norm)).back();
            };
            out += std::string("order,") + to_string(kind) + "," +
                   detail::fmt_g(last(&ErrorReport::p_l2_modR)) + "," +
                   detail::fmt_g(last(&ErrorReport::v_h1)) + "," +
                   detail::fmt_g(last(&ErrorReport::v_h1_semi)) + "," +
                   detail::fmt_g(last(&ErrorReport::v_l2)) + "\n";
        }
    }
    return out;
}

inline Json to_json(const InfSupReport& r) {
    return Json{{"beta", r.beta},
                {"pressure_null_dim", r.pressure_null_dim},
                {"n_velocity", r.n_velocity},
                {"n_pressure", r.n_pressure}};
}

}  // namespace stokeslc
