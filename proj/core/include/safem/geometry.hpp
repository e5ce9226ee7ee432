#pragma once

#include <array>
#include <cmath>

namespace safem {

/// Plain 2D point / vector.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2 operator-() const { return {-x, -y}; }

    constexpr double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    constexpr double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    constexpr double squared_norm() const { return x * x + y * y; }
};

constexpr Vec2 operator*(double s, const Vec2& v) { return {v.x * s, v.y * s}; }

using Point2 = Vec2;

/// Small dense 2x2 matrix, row major.
struct Mat2 {
    double a00 = 0.0, a01 = 0.0, a10 = 0.0, a11 = 0.0;

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr Mat2 outer(const Vec2& u, const Vec2& v) {
        return {u.x * v.x, u.x * v.y, u.y * v.x, u.y * v.y};
    }

    constexpr Mat2 operator+(const Mat2& o) const {
        return {a00 + o.a00, a01 + o.a01, a10 + o.a10, a11 + o.a11};
    }
    constexpr Mat2 operator-(const Mat2& o) const {
        return {a00 - o.a00, a01 - o.a01, a10 - o.a10, a11 - o.a11};
    }
    constexpr Mat2 operator*(double s) const { return {a00 * s, a01 * s, a10 * s, a11 * s}; }
    constexpr Vec2 operator*(const Vec2& v) const {
        return {a00 * v.x + a01 * v.y, a10 * v.x + a11 * v.y};
    }
    constexpr Mat2 operator*(const Mat2& o) const {
        return {a00 * o.a00 + a01 * o.a10, a00 * o.a01 + a01 * o.a11,
                a10 * o.a00 + a11 * o.a10, a10 * o.a01 + a11 * o.a11};
    }
    constexpr Mat2 transpose() const { return {a00, a10, a01, a11}; }
    constexpr double trace() const { return a00 + a11; }
};

constexpr Mat2 operator*(double s, const Mat2& m) { return m * s; }

/// Signed area of the triangle (a, b, c); positive when counterclockwise.
constexpr double signed_area(const Point2& a, const Point2& b, const Point2& c) {
    return 0.5 * ((b - a).cross(c - a));
}

/// Squared distance from p to the segment [a, b].
inline double segment_distance_sq(const Point2& p, const Point2& a, const Point2& b) {
    const Vec2 ab = b - a;
    const double len2 = ab.squared_norm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
    const Vec2 q = a + t * ab;
    return (p - q).squared_norm();
}

}  // namespace safem
