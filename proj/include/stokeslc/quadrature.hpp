#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace stokeslc {

struct QuadraturePoint {
    std::array<double, 3> bary{};
    double weight = 0.0;  // fraction of the triangle area
};

/// Symmetric quadrature rule on the reference triangle in barycentric
/// coordinates.  Weights sum to 1 and are scaled by the element area on use.
struct QuadratureRule {
    int degree = 0;  // highest polynomial degree integrated exactly
    std::vector<QuadraturePoint> points;
};

/// Returns a rule exact for polynomials up to the requested degree.
/// Degrees 0..2 map to the three edge-midpoint rule, 3..5 to the
/// seven-point rule.  Anything above 5 is not provided.
inline QuadratureRule quadrature(int degree) {
    if (degree < 0 || degree > 5)
        throw std::invalid_argument("quadrature: unsupported degree " +
                                    std::to_string(degree));
    QuadratureRule rule;
    if (degree <= 2) {
        rule.degree = 2;
        rule.points = {
            {{0.5, 0.5, 0.0}, 1.0 / 3.0},
            {{0.0, 0.5, 0.5}, 1.0 / 3.0},
            {{0.5, 0.0, 0.5}, 1.0 / 3.0},
        };
        return rule;
    }
    rule.degree = 5;
    const double s15 = std::sqrt(15.0);
    const double a = (6.0 - s15) / 21.0;
    const double b = (6.0 + s15) / 21.0;
    const double wa = (155.0 - s15) / 1200.0;
    const double wb = (155.0 + s15) / 1200.0;
    rule.points = {
        {{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}, 9.0 / 40.0},
        {{a, a, 1.0 - 2.0 * a}, wa},
        {{a, 1.0 - 2.0 * a, a}, wa},
        {{1.0 - 2.0 * a, a, a}, wa},
        {{b, b, 1.0 - 2.0 * b}, wb},
        {{b, 1.0 - 2.0 * b, b}, wb},
        {{1.0 - 2.0 * b, b, b}, wb},
    };
    return rule;
}

}  // namespace stokeslc
