#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "stokeslc/geometry.hpp"

namespace stokeslc {

/// Pressure approximation paired with the quadratic velocity:
///  - TaylorHood: continuous piecewise-linear pressure,
///  - LC: continuous linear plus one constant per element,
///  - LCTied: LC with the constant of every two-boundary-side element tied
///    to the constant of its interior neighbour.
enum class PressureSpaceKind { TaylorHood, LC, LCTied };

inline bool has_element_constants(PressureSpaceKind kind) {
    return kind != PressureSpaceKind::TaylorHood;
}

inline const char* to_string(PressureSpaceKind kind) {
    switch (kind) {
        case PressureSpaceKind::TaylorHood: return "th";
        case PressureSpaceKind::LC: return "lc";
        case PressureSpaceKind::LCTied: return "lctied";
    }
    return "?";
}

/// Values and physical gradients of the six quadratic basis functions at one
/// barycentric point.  Order: vertex functions 1..3, then the mid-side
/// function opposite vertex 1, 2, 3.
struct ShapeSet {
    std::array<double, 6> value{};
    std::array<Vec2, 6> grad{};
};

/// Quadratic (P2) basis on a triangle with geometry `g`.
/// Vertex function: L_i (2 L_i - 1); mid-side opposite vertex k: 4 L_i L_j.
inline ShapeSet p2_basis(const std::array<double, 3>& bary,
                         const TriangleGeometry& g) {
    const double sum = bary[0] + bary[1] + bary[2];
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::invalid_argument("p2_basis: barycentric coordinates must sum to 1");

    ShapeSet s;
    std::array<Vec2, 3> gl;  // grad L_j = b_j / (2|T|)
    for (int j = 0; j < 3; ++j) gl[j] = (1.0 / (2.0 * g.area)) * g.b[j];

    for (int j = 0; j < 3; ++j) {
        s.value[j] = bary[j] * (2.0 * bary[j] - 1.0);
        s.grad[j] = (4.0 * bary[j] - 1.0) * gl[j];
    }
    for (int k = 0; k < 3; ++k) {
        const int i = (k + 1) % 3;
        const int j = (k + 2) % 3;
        s.value[3 + k] = 4.0 * bary[i] * bary[j];
        s.grad[3 + k] = 4.0 * (bary[j] * gl[i] + bary[i] * gl[j]);
    }
    return s;
}

/// Local pressure basis values: (L1, L2, L3) for Taylor-Hood and
/// (L1, L2, L3, 1) for the LC kinds, the element constant last.
inline std::array<double, 4> pressure_basis(PressureSpaceKind kind,
                                            const std::array<double, 3>& bary) {
    std::array<double, 4> v{bary[0], bary[1], bary[2], 0.0};
    if (has_element_constants(kind)) v[3] = 1.0;
    return v;
}

/// Number of local pressure degrees of freedom per element.
inline int local_pressure_size(PressureSpaceKind kind) {
    return has_element_constants(kind) ? 4 : 3;
}

}  // namespace stokeslc
