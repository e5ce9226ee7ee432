#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "safem/geometry.hpp"

namespace safem {

/// Quadrature rule on the reference triangle {x,y >= 0, x+y <= 1} or on [0,1].
/// Triangle weights sum to 1/2, edge weights to 1.
struct QuadRule {
    std::vector<Point2> points;   // (x, y) for triangles; (s, 0) for edges
    std::vector<double> weights;
    int degree = 0;

    std::size_t size() const { return points.size(); }
};

/// Symmetric/tensor rule on the reference triangle, exact for total degree <= degree.
/// All weights positive. Throws std::invalid_argument outside 1..19.
const QuadRule& tri_rule(int degree);

/// Gauss-Legendre on [0,1], exact for degree <= degree. Throws outside 1..19.
const QuadRule& edge_rule(int degree);

/// Barycentric coordinates of a reference point (lambda0 = 1-x-y, lambda1 = x, lambda2 = y).
inline std::array<double, 3> barycentric(const Point2& ref) {
    return {1.0 - ref.x - ref.y, ref.x, ref.y};
}

using ScalarField = std::function<double(const Point2&)>;

/// Integrates `f` over the physical triangle (v0,v1,v2) with tri_rule(19),
/// subdividing recursively (4-way midpoint split) toward `grade_center` when the
/// closure of a cell contains it. depth = 0 reduces to a single rule pass.
/// Any weight (such as a distance power) is expected to be folded into `f`;
/// the center only steers the grading. alpha is validated against (0,2).
double integrate_weighted(const ScalarField& f, const std::optional<Point2>& grade_center,
                          double alpha, const Point2& v0, const Point2& v1, const Point2& v2,
                          int depth);

}  // namespace safem
