#include <doctest.h>

#include <cmath>

#include "safem/quadrature.hpp"

using namespace safem;

namespace {

// Exact monomial integral over the reference triangle: int x^a y^b = a! b! / (a+b+2)!
double monomial_integral(int a, int b) {
    double v = 1.0;
    for (int k = 1; k <= a; ++k) v *= k;
    for (int k = 1; k <= b; ++k) v *= k;
    for (int k = 1; k <= a + b + 2; ++k) v /= k;
    return v;
}

double apply(const QuadRule& r, double (*f)(const Point2&)) {
    double s = 0.0;
    for (std::size_t q = 0; q < r.size(); ++q) s += r.weights[q] * f(r.points[q]);
    return s;
}

}  // namespace

TEST_CASE("triangle rules integrate their advertised monomials") {
    for (int deg = 1; deg <= 19; ++deg) {
        const QuadRule& r = tri_rule(deg);
        double wsum = 0.0;
        for (double w : r.weights) {
            CHECK(std::isfinite(w));
            wsum += w;
        }
        CHECK(wsum == doctest::Approx(0.5).epsilon(1e-14));
        for (int a = 0; a + 0 <= deg; ++a)
            for (int b = 0; a + b <= deg; ++b) {
                double s = 0.0;
                for (std::size_t q = 0; q < r.size(); ++q)
                    s += r.weights[q] * std::pow(r.points[q].x, a) * std::pow(r.points[q].y, b);
                CHECK(std::abs(s - monomial_integral(a, b)) < 1e-13);
            }
    }
}

TEST_CASE("degree-19 spot values") {
    const QuadRule& r = tri_rule(19);
    CHECK(apply(r, [](const Point2&) { return 1.0; }) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(apply(r, [](const Point2& p) { return p.x * p.y; }) ==
          doctest::Approx(1.0 / 24).epsilon(1e-13));
    CHECK(apply(r, [](const Point2& p) { return std::pow(p.x, 19); }) ==
          doctest::Approx(1.0 / 420).epsilon(1e-12));
}

TEST_CASE("edge rules are Gauss-Legendre on [0,1]") {
    CHECK(apply(edge_rule(1), [](const Point2&) { return 1.0; }) == doctest::Approx(1.0));
    CHECK(apply(edge_rule(3), [](const Point2& p) { return p.x * p.x; }) ==
          doctest::Approx(1.0 / 3).epsilon(1e-14));
    CHECK(apply(edge_rule(9), [](const Point2& p) { return std::pow(p.x, 9); }) ==
          doctest::Approx(0.1).epsilon(1e-14));
    for (int deg = 1; deg <= 19; ++deg) {
        const QuadRule& r = edge_rule(deg);
        for (int a = 0; a <= deg; ++a) {
            double s = 0.0;
            for (std::size_t q = 0; q < r.size(); ++q)
                s += r.weights[q] * std::pow(r.points[q].x, a);
            CHECK(std::abs(s - 1.0 / (a + 1)) < 1e-14);
        }
    }
}

TEST_CASE("rule degree bounds") {
    CHECK_THROWS(tri_rule(0));
    CHECK_THROWS(tri_rule(20));
    CHECK_THROWS(edge_rule(0));
    CHECK_THROWS(edge_rule(20));
}

TEST_CASE("graded integration of a distance weight") {
    // int over the triangle (0,0),(1,0),(1,1) of |x| dA; in closed form
    // (sqrt(2) + asinh(1)) / 6.
    const double exact = (std::sqrt(2.0) + std::log(1.0 + std::sqrt(2.0))) / 6.0;
    auto f = [](const Point2& p) { return std::hypot(p.x, p.y); };
    const Point2 a{0, 0}, b{1, 0}, c{1, 1};
    const double v6 = integrate_weighted(f, Point2{0, 0}, 1.0, a, b, c, 6);
    CHECK(v6 == doctest::Approx(exact).epsilon(1e-4));
    CHECK(std::abs(v6 - 0.3826116) < 1e-4);  // value quoted to 1e-4

    SUBCASE("depth zero equals the plain rule") {
        const double plain = integrate_weighted(f, std::nullopt, 1.0, a, b, c, 0);
        CHECK(integrate_weighted(f, Point2{0, 0}, 1.0, a, b, c, 0) == plain);
    }

    SUBCASE("no grading when the center is outside the element") {
        const double plain = integrate_weighted(f, std::nullopt, 1.0, a, b, c, 0);
        CHECK(integrate_weighted(f, Point2{-1, -1}, 1.0, a, b, c, 8) == plain);
    }
}

TEST_CASE("graded integration converges monotonically for d^alpha") {
    const Point2 a{0, 0}, b{1, 0}, c{0, 1};
    for (double alpha : {0.5, 1.0, 1.5}) {
        auto f = [alpha](const Point2& p) { return std::pow(std::hypot(p.x, p.y), alpha); };
        double prev_diff = -1.0;
        double prev = integrate_weighted(f, Point2{0, 0}, alpha, a, b, c, 0);
        for (int depth = 1; depth <= 8; ++depth) {
            const double cur = integrate_weighted(f, Point2{0, 0}, alpha, a, b, c, depth);
            const double diff = std::abs(cur - prev);
            if (prev_diff >= 0.0 && diff > 0.0) CHECK(diff <= 0.5 * prev_diff);
            if (diff > 0.0) prev_diff = diff;
            prev = cur;
        }
    }
}

TEST_CASE("graded integration validates its arguments") {
    auto one = [](const Point2&) { return 1.0; };
    const Point2 a{0, 0}, b{1, 0}, c{0, 1};
    CHECK(integrate_weighted(one, std::nullopt, 1.0, a, b, c, 0) == doctest::Approx(0.5));
    CHECK_THROWS(integrate_weighted(one, Point2{0, 0}, 2.5, a, b, c, 3));
    CHECK_THROWS(integrate_weighted(one, std::nullopt, 1.0, a, b, c, -1));
}
