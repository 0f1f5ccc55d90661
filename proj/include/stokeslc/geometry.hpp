#pragma once

#include <array>
#include <cmath>
#include <string>

#include "stokeslc/errors.hpp"

namespace stokeslc {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
};

inline Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
inline Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
inline Vec2 operator*(double s, Vec2 a) { return a *= s; }
inline Vec2 operator*(Vec2 a, double s) { return a *= s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }

using Point2 = Vec2;

/// Area and edge-normal vectors of a triangle.
///
/// For counter-clockwise vertices p1, p2, p3 the vector b_j belongs to the
/// edge opposite vertex j:
///   b_1 = (y2 - y3, x3 - x2)  and cyclic.
/// The barycentric gradients are grad L_j = b_j / (2 * area).
struct TriangleGeometry {
    double area = 0.0;
    std::array<Vec2, 3> b{};
};

/// Signed area of the triangle (p1, p2, p3); positive for CCW order.
inline double signed_area(const Point2& p1, const Point2& p2, const Point2& p3) {
    return 0.5 * cross(p2 - p1, p3 - p1);
}

/// Computes area and b-vectors; throws DegenerateTriangle on collinear input.
/// Vertices must be in CCW order (area > 0).
inline TriangleGeometry triangle_geometry(const Point2& p1, const Point2& p2,
                                          const Point2& p3) {
    TriangleGeometry g;
    g.b[0] = {p2.y - p3.y, p3.x - p2.x};
    g.b[1] = {p3.y - p1.y, p1.x - p3.x};
    g.b[2] = {p1.y - p2.y, p2.x - p1.x};
    g.area = signed_area(p1, p2, p3);
    const double scale =
        std::max({norm(p2 - p1), norm(p3 - p2), norm(p1 - p3)});
    if (!(std::abs(g.area) > 1e-14 * scale * scale))
        throw DegenerateTriangle("triangle_geometry: collinear vertices");
    return g;
}

/// Shape ratio h / rho of one triangle: longest side over the diameter of
/// the inscribed circle.  Equilateral gives sqrt(3); large values flag
/// degenerating elements.
inline double shape_ratio(const Point2& p1, const Point2& p2, const Point2& p3) {
    const double e1 = norm(p2 - p3);
    const double e2 = norm(p3 - p1);
    const double e3 = norm(p1 - p2);
    const double h = std::max({e1, e2, e3});
    const double s = 0.5 * (e1 + e2 + e3);
    const double area = std::abs(signed_area(p1, p2, p3));
    const double inradius = area / s;
    return h / (2.0 * inradius);
}

}  // namespace stokeslc
