#include "safem/exact_solutions.hpp"

#include <cmath>
#include <stdexcept>

#include "safem/quadrature.hpp"

namespace safem {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Stokeslet stokeslet(const Point2& t, const Point2& x) {
    const Vec2 r = x - t;
    const double rho2 = r.squared_norm();
    if (rho2 < 1e-300) throw std::domain_error("stokeslet: evaluation at the singular point");
    const double rho = std::sqrt(rho2);
    Stokeslet s;
    s.velocity = (-1.0 / (4.0 * kPi)) * (std::log(rho) * Mat2::identity() -
                                         Mat2::outer(r, r) * (1.0 / rho2));
    s.pressure = (-1.0 / (2.0 * kPi * rho2)) * r;
    return s;
}

Mat2 stokeslet_velocity_gradient(const Point2& t, const Point2& x, const Vec2& s) {
    const Vec2 r = x - t;
    const double rho2 = r.squared_norm();
    if (rho2 < 1e-300) throw std::domain_error("stokeslet: evaluation at the singular point");
    const double rs = r.dot(s);
    const double c = -1.0 / (4.0 * kPi);
    Mat2 g;
    const double rr[2] = {r.x, r.y};
    const double ss[2] = {s.x, s.y};
    double* rows[2][2] = {{&g.a00, &g.a01}, {&g.a10, &g.a11}};
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) {
            const double delta = i == k ? 1.0 : 0.0;
            *rows[i][k] = c * (ss[i] * rr[k] / rho2 - delta * rs / rho2 - rr[i] * ss[k] / rho2 +
                               2.0 * rr[i] * rs * rr[k] / (rho2 * rho2));
        }
    return g;
}

namespace {

Vec2 clamp2(const Vec2& v, const Vec2& lo, const Vec2& hi) {
    return {std::min(hi.x, std::max(v.x, lo.x)), std::min(hi.y, std::max(v.y, lo.y))};
}

// Adjoint pair built from Stokeslets with unit weights: z = sum_t Tv_t (1,1),
// r = sum_t Tp_t . (1,1).
void attach_adjoint(ExactSolution& ex) {
    const std::vector<Point2> pts = ex.obs_points;
    const Vec2 ones{1.0, 1.0};
    ex.adjoint_velocity = [pts, ones](const Point2& x) {
        Vec2 z;
        for (const Point2& t : pts) z += stokeslet(t, x).velocity * ones;
        return z;
    };
    ex.adjoint_gradient = [pts, ones](const Point2& x) {
        Mat2 g;
        for (const Point2& t : pts) g = g + stokeslet_velocity_gradient(t, x, ones);
        return g;
    };
    ex.adjoint_pressure = [pts, ones](const Point2& x) {
        double r = 0.0;
        for (const Point2& t : pts) r += stokeslet(t, x).pressure.dot(ones);
        return r;
    };
    const auto zfun = ex.adjoint_velocity;
    const Vec2 lo = ex.lower, hi = ex.upper;
    const double lambda = ex.lambda;
    ex.control = [zfun, lo, hi, lambda](const Point2& x) {
        return clamp2((-1.0 / lambda) * zfun(x), lo, hi);
    };
}

ExactSolution example1(double lambda) {
    ExactSolution ex;
    ex.available = true;
    ex.lambda = lambda;
    ex.lower = {-0.5, -0.5};
    ex.upper = {-0.1, -0.1};
    ex.obs_points = {{0.5, 0.5}};

    ex.velocity = [](const Point2& p) {
        const double s2x = std::sin(2 * kPi * p.x), s2y = std::sin(2 * kPi * p.y);
        return Vec2{s2x * s2x * std::sin(4 * kPi * p.y), -std::sin(4 * kPi * p.x) * s2y * s2y};
    };
    ex.velocity_gradient = [](const Point2& p) {
        const double s2x = std::sin(2 * kPi * p.x), s2y = std::sin(2 * kPi * p.y);
        const double s4x = std::sin(4 * kPi * p.x), s4y = std::sin(4 * kPi * p.y);
        const double c4x = std::cos(4 * kPi * p.x), c4y = std::cos(4 * kPi * p.y);
        Mat2 g;
        g.a00 = 2 * kPi * s4x * s4y;
        g.a01 = 4 * kPi * s2x * s2x * c4y;
        g.a10 = -4 * kPi * c4x * s2y * s2y;
        g.a11 = -2 * kPi * s4x * s4y;
        return g;
    };
    ex.pressure = [](const Point2& p) { return std::sin(2 * kPi * p.x) * std::sin(2 * kPi * p.y); };

    auto laplacian = [](const Point2& p) {
        const double s2x = std::sin(2 * kPi * p.x), s2y = std::sin(2 * kPi * p.y);
        const double s4x = std::sin(4 * kPi * p.x), s4y = std::sin(4 * kPi * p.y);
        const double c4x = std::cos(4 * kPi * p.x), c4y = std::cos(4 * kPi * p.y);
        const double pi2 = kPi * kPi;
        return Vec2{8 * pi2 * c4x * s4y - 16 * pi2 * s2x * s2x * s4y,
                    16 * pi2 * s4x * s2y * s2y - 8 * pi2 * s4x * c4y};
    };
    auto grad_p = [](const Point2& p) {
        return Vec2{2 * kPi * std::cos(2 * kPi * p.x) * std::sin(2 * kPi * p.y),
                    2 * kPi * std::sin(2 * kPi * p.x) * std::cos(2 * kPi * p.y)};
    };

    attach_adjoint(ex);
    ex.desired_states = {ex.velocity(ex.obs_points[0]) - Vec2{1.0, 1.0}};
    const auto control = ex.control;
    ex.forcing = [laplacian, grad_p, control](const Point2& p) {
        return -laplacian(p) + grad_p(p) - control(p);
    };
    return ex;
}

ExactSolution example2(double lambda) {
    ExactSolution ex;
    ex.available = true;
    ex.lambda = lambda;
    ex.lower = {-0.85, -0.85};
    ex.upper = {-0.2, -0.2};
    ex.obs_points = {{0.25, 0.25}, {0.25, 0.75}, {0.75, 0.25}, {0.75, 0.75}};

    auto g0 = [](double s) { return s * s * (1 - s) * (1 - s); };
    auto g1 = [](double s) { return 2 * s * (1 - s) * (1 - 2 * s); };
    auto g2 = [](double s) { return 12 * s * s - 12 * s + 2; };
    auto g3 = [](double s) { return 24 * s - 12; };

    ex.velocity = [g0, g1](const Point2& p) {
        return Vec2{0.5 * g0(p.x) * g1(p.y), -0.5 * g1(p.x) * g0(p.y)};
    };
    ex.velocity_gradient = [g0, g1, g2](const Point2& p) {
        Mat2 g;
        g.a00 = 0.5 * g1(p.x) * g1(p.y);
        g.a01 = 0.5 * g0(p.x) * g2(p.y);
        g.a10 = -0.5 * g2(p.x) * g0(p.y);
        g.a11 = -0.5 * g1(p.x) * g1(p.y);
        return g;
    };

    const double em1 = std::exp(-1.0) - 1.0;
    const double e = std::exp(1.0);
    const double c0 = 12.5 * ((e - 3.0) / (e - 1.0)) * ((e - 3.0) / (e - 1.0));
    auto q0 = [em1](double s) { return s - 1.0 + (std::exp(-s) - 1.0) / em1; };
    auto q1 = [em1](double s) { return 1.0 - std::exp(-s) / em1; };
    ex.pressure = [q0, c0](const Point2& p) { return 50.0 * q0(p.x) * q0(p.y) - c0; };

    auto laplacian = [g0, g1, g2, g3](const Point2& p) {
        return Vec2{0.5 * (g2(p.x) * g1(p.y) + g0(p.x) * g3(p.y)),
                    -0.5 * (g3(p.x) * g0(p.y) + g1(p.x) * g2(p.y))};
    };
    auto grad_p = [q0, q1](const Point2& p) {
        return Vec2{50.0 * q1(p.x) * q0(p.y), 50.0 * q0(p.x) * q1(p.y)};
    };

    attach_adjoint(ex);
    ex.desired_states.clear();
    for (const Point2& t : ex.obs_points)
        ex.desired_states.push_back(ex.velocity(t) - Vec2{1.0, 1.0});
    const auto control = ex.control;
    ex.forcing = [laplacian, grad_p, control](const Point2& p) {
        return -laplacian(p) + grad_p(p) - control(p);
    };
    return ex;
}

ExactSolution example3(double lambda) {
    ExactSolution ex;
    ex.available = false;
    ex.lambda = lambda;
    ex.lower = {-0.3, -0.3};
    ex.upper = {0.4, 0.4};
    ex.obs_points = {{0.25, 0.25}, {0.25, 0.75}, {0.75, 0.75}};
    ex.desired_states = {{3.0, 3.0}, {-1.0, -1.0}, {3.0, 3.0}};
    return ex;
}

}  // namespace

ExactSolution exact_solution(int example_id, double lambda_override) {
    const double lambda = lambda_override > 0.0 ? lambda_override : 1.0;
    switch (example_id) {
        case 1: return example1(lambda);
        case 2: return example2(lambda);
        case 3: return example3(lambda);
        default: throw std::invalid_argument("exact_solution: unknown example id");
    }
}

namespace {

std::vector<std::array<double, 3>> bary_lattice(int order) {
    std::vector<std::array<double, 3>> pts;
    for (int i = 0; i <= order; ++i)
        for (int j = 0; j <= order - i; ++j)
            pts.push_back({double(i) / order, double(j) / order, double(order - i - j) / order});
    return pts;
}

}  // namespace

ErrorComponents error_norms(const Mesh& mesh, const DofMap& dofs, const FeFunction& y,
                            const FeFunction& p, const FeFunction& z, const FeFunction& r,
                            const FeFunction& u, const ExactSolution& exact,
                            const WeightRho& weight, int lattice_order, int grading_depth) {
    if (!exact.available) throw std::runtime_error("error_norms: exact solution not available");
    const QuadRule& rule = tri_rule(19);
    const auto lattice = bary_lattice(lattice_order);
    ErrorComponents out;

    double domain_area = 0.0;
    double p_diff_int = 0.0;                      // int (p_ex - p_T)
    double rho_int = 0.0, r_diff_rho_int = 0.0;   // int rho, int rho (r_ex - r_T)
    double u_sq = 0.0;

    const int nt = mesh.num_elements();
    std::vector<std::optional<Point2>> grade_center(nt);
    for (int t = 0; t < nt; ++t)
        for (const Point2& ob : exact.obs_points)
            if (mesh.contains(t, ob)) { grade_center[t] = ob; break; }

    for (int t = 0; t < nt; ++t) {
        const auto& e = mesh.element(t);
        const Point2 &a = mesh.vertex(e[0]), &b = mesh.vertex(e[1]), &c = mesh.vertex(e[2]);
        const double jac = (b - a).cross(c - a);
        domain_area += 0.5 * jac;

        for (const auto& l : lattice) {
            const Point2 x = a * l[0] + b * l[1] + c * l[2];
            const Vec2 ey = exact.velocity(x) - eval_vec_p2(mesh, dofs, y, t, l);
            out.y_inf = std::max(out.y_inf, ey.norm());
        }
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point2& rp = rule.points[q];
            const std::array<double, 3> l = {1.0 - rp.x - rp.y, rp.x, rp.y};
            const Point2 x = a + rp.x * (b - a) + rp.y * (c - a);
            const double w = rule.weights[q] * jac;
            p_diff_int += w * (exact.pressure(x) - eval_scalar_p1(mesh, dofs, p, t, l));
            u_sq += w * (exact.control(x) - eval_vec_p2(mesh, dofs, u, t, l)).squared_norm();
        }
        auto rho_fn = [&](const Point2& x) { return weight(x); };
        auto r_diff_rho = [&](const Point2& x) {
            const auto l = mesh.barycentric(t, x);
            return weight(x) * (exact.adjoint_pressure(x) - eval_scalar_p1(mesh, dofs, r, t, l));
        };
        rho_int += integrate_weighted(rho_fn, grade_center[t], weight.alpha, a, b, c, grading_depth);
        r_diff_rho_int +=
            integrate_weighted(r_diff_rho, grade_center[t], weight.alpha, a, b, c, grading_depth);
    }

    const double p_mean = p_diff_int / domain_area;
    const double r_mean_w = r_diff_rho_int / rho_int;

    double p_sq = 0.0, z_sq = 0.0, r_sq = 0.0;
    for (int t = 0; t < nt; ++t) {
        const auto& e = mesh.element(t);
        const Point2 &a = mesh.vertex(e[0]), &b = mesh.vertex(e[1]), &c = mesh.vertex(e[2]);
        const double jac = (b - a).cross(c - a);
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point2& rp = rule.points[q];
            const std::array<double, 3> l = {1.0 - rp.x - rp.y, rp.x, rp.y};
            const Point2 x = a + rp.x * (b - a) + rp.y * (c - a);
            const double diff =
                exact.pressure(x) - eval_scalar_p1(mesh, dofs, p, t, l) - p_mean;
            p_sq += rule.weights[q] * jac * diff * diff;
        }
        auto z_err = [&](const Point2& x) {
            const auto l = mesh.barycentric(t, x);
            const Mat2 d = exact.adjoint_gradient(x) - eval_grad_vec_p2(mesh, dofs, z, t, l);
            return weight(x) * (d.a00 * d.a00 + d.a01 * d.a01 + d.a10 * d.a10 + d.a11 * d.a11);
        };
        auto r_err = [&](const Point2& x) {
            const auto l = mesh.barycentric(t, x);
            const double diff =
                exact.adjoint_pressure(x) - eval_scalar_p1(mesh, dofs, r, t, l) - r_mean_w;
            return weight(x) * diff * diff;
        };
        z_sq += integrate_weighted(z_err, grade_center[t], weight.alpha, a, b, c, grading_depth);
        r_sq += integrate_weighted(r_err, grade_center[t], weight.alpha, a, b, c, grading_depth);
    }

    out.p_l2 = std::sqrt(p_sq);
    out.z_w = std::sqrt(z_sq);
    out.r_w = std::sqrt(r_sq);
    out.u_l2 = std::sqrt(u_sq);
    out.total = std::sqrt(out.y_inf * out.y_inf + out.p_l2 * out.p_l2 + out.z_w * out.z_w +
                          out.r_w * out.r_w + out.u_l2 * out.u_l2);
    return out;
}

double effectivity(double estimator, double error) {
    if (!(error > 0.0)) throw std::domain_error("effectivity: undefined for zero error");
    return estimator / error;
}

}  // namespace safem
