#include "safem/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace safem {

namespace {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

QuadRule gauss_legendre_01(int degree) {
    const int n = (degree + 2) / 2;  // 2n-1 >= degree
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    QuadRule rule;
    rule.degree = degree;
    rule.points.reserve(n);
    rule.weights.reserve(n);
    for (int i = 0; i < n; ++i) {
        rule.points.push_back({0.5 * (x[i] + 1.0), 0.0});
        rule.weights.push_back(0.5 * w[i]);
    }
    return rule;
}

void push_orbit3(QuadRule& r, double a, double w) {
    // permutations of barycentric (1-2a, a, a); point = (lambda1, lambda2)
    const double b = 1.0 - 2.0 * a;
    r.points.push_back({a, a});
    r.points.push_back({b, a});
    r.points.push_back({a, b});
    r.weights.insert(r.weights.end(), 3, w);
}

// Compact positive-weight symmetric rules for low degrees; weights on the
// unit-area convention are halved to match the reference-triangle measure 1/2.
QuadRule symmetric_tri_rule(int degree) {
    QuadRule r;
    if (degree <= 1) {
        r.degree = 1;
        r.points.push_back({1.0 / 3.0, 1.0 / 3.0});
        r.weights.push_back(0.5);
    } else if (degree == 2) {
        r.degree = 2;
        push_orbit3(r, 1.0 / 6.0, 1.0 / 6.0);
    } else if (degree <= 4) {
        r.degree = 4;
        push_orbit3(r, 0.445948490915965, 0.5 * 0.223381589678011);
        push_orbit3(r, 0.091576213509771, 0.5 * 0.109951743655322);
    } else {
        r.degree = 5;
        r.points.push_back({1.0 / 3.0, 1.0 / 3.0});
        r.weights.push_back(0.5 * 0.225);
        push_orbit3(r, 0.470142064105115, 0.5 * 0.132394152788506);
        push_orbit3(r, 0.101286507323456, 0.5 * 0.125939180544827);
    }
    return r;
}

// Collapsed tensor Gauss rule: x = u, y = v(1-u), jacobian (1-u).
// Exact for total degree <= degree with n_u = ceil((degree+2)/2) points in u
// (the jacobian raises the u-degree by one) and n_v = ceil((degree+1)/2) in v.
QuadRule collapsed_tri_rule(int degree) {
    const int nu = (degree + 3) / 2;
    const int nv = (degree + 2) / 2;
    std::vector<double> xu, wu, xv, wv;
    gauss_legendre(nu, xu, wu);
    gauss_legendre(nv, xv, wv);
    QuadRule r;
    r.degree = degree;
    r.points.reserve(static_cast<std::size_t>(nu) * nv);
    r.weights.reserve(static_cast<std::size_t>(nu) * nv);
    for (int i = 0; i < nu; ++i) {
        const double u = 0.5 * (xu[i] + 1.0);
        const double cu = 0.25 * wu[i] * (1.0 - u);
        for (int j = 0; j < nv; ++j) {
            r.points.push_back({u, 0.5 * (xv[j] + 1.0) * (1.0 - u)});
            r.weights.push_back(cu * wv[j]);
        }
    }
    return r;
}

}  // namespace

const QuadRule& tri_rule(int degree) {
    if (degree < 1 || degree > 19) throw std::invalid_argument("tri_rule: degree must be in 1..19");
    static std::map<int, QuadRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(degree);
    if (it == cache.end()) {
        QuadRule r = degree <= 5 ? symmetric_tri_rule(degree) : collapsed_tri_rule(degree);
        it = cache.emplace(degree, std::move(r)).first;
    }
    return it->second;
}

const QuadRule& edge_rule(int degree) {
    if (degree < 1 || degree > 19) throw std::invalid_argument("edge_rule: degree must be in 1..19");
    static std::map<int, QuadRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(degree);
    if (it == cache.end()) it = cache.emplace(degree, gauss_legendre_01(degree)).first;
    return it->second;
}

namespace {

bool closure_contains(const Point2& p, const Point2& a, const Point2& b, const Point2& c) {
    const double det = (b - a).cross(c - a);
    if (det == 0.0) return false;
    const double l1 = (p - a).cross(c - a) / det;
    const double l2 = (b - a).cross(p - a) / det;
    const double tol = -1e-12;
    return l1 >= tol && l2 >= tol && 1.0 - l1 - l2 >= tol;
}

double rule_pass(const ScalarField& f, const Point2& a, const Point2& b, const Point2& c) {
    const QuadRule& rule = tri_rule(19);
    const double jac = std::abs((b - a).cross(c - a));  // 2*area
    double sum = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const Point2 x = a + rule.points[q].x * (b - a) + rule.points[q].y * (c - a);
        sum += rule.weights[q] * f(x);
    }
    return sum * jac;
}

double graded(const ScalarField& f, const Point2& center, const Point2& a, const Point2& b,
              const Point2& c, int depth) {
    if (depth == 0 || !closure_contains(center, a, b, c)) return rule_pass(f, a, b, c);
    const Point2 mab = 0.5 * (a + b), mbc = 0.5 * (b + c), mca = 0.5 * (c + a);
    const std::array<std::array<Point2, 3>, 4> kids = {{
        {a, mab, mca}, {mab, b, mbc}, {mca, mbc, c}, {mab, mbc, mca}}};
    double sum = 0.0;
    for (const auto& k : kids) {
        if (closure_contains(center, k[0], k[1], k[2]))
            sum += graded(f, center, k[0], k[1], k[2], depth - 1);
        else
            sum += rule_pass(f, k[0], k[1], k[2]);
    }
    return sum;
}

}  // namespace

double integrate_weighted(const ScalarField& f, const std::optional<Point2>& grade_center,
                          double alpha, const Point2& v0, const Point2& v1, const Point2& v2,
                          int depth) {
    if (grade_center && (alpha <= 0.0 || alpha >= 2.0))
        throw std::invalid_argument("integrate_weighted: alpha must be in (0,2)");
    if (depth < 0) throw std::invalid_argument("integrate_weighted: depth must be >= 0");
    if (!grade_center || depth == 0) return rule_pass(f, v0, v1, v2);
    return graded(f, *grade_center, v0, v1, v2, depth);
}

}  // namespace safem
