#include "safem/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "safem/quadrature.hpp"

namespace safem {

WeightRho::WeightRho(std::vector<Point2> pts, double a, const Mesh& mesh)
    : points(std::move(pts)), alpha(a) {
    if (alpha <= 0.0 || alpha >= 2.0) throw std::invalid_argument("WeightRho: alpha not in (0,2)");
    if (points.empty()) throw std::invalid_argument("WeightRho: no points");
    double d = std::numeric_limits<double>::max();
    for (const Point2& p : points) d = std::min(d, mesh.boundary_distance(p));
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            d = std::min(d, (points[i] - points[j]).norm());
    d_sep = d;
    if (!(d_sep > 0.0)) throw std::invalid_argument("WeightRho: points must be strictly interior");
}

double WeightRho::operator()(const Point2& x) const {
    if (points.size() == 1) return std::pow((x - points[0]).norm(), alpha);
    double dmin = std::numeric_limits<double>::max();
    for (const Point2& p : points) dmin = std::min(dmin, (x - p).norm());
    return dmin < 0.5 * d_sep ? std::pow(dmin, alpha) : 1.0;
}

namespace {

// Per-element pieces shared by all residual terms.
struct ElementData {
    Point2 a, b, c;
    double jac;   // 2*area
    double h;
    Vec2 lap_y;   // constant per element
    Vec2 grad_p;  // constant per element
};

ElementData element_data(const Mesh& mesh, const DofMap& dofs, const FeFunction& vel,
                         const FeFunction& pre, int t) {
    const auto& e = mesh.element(t);
    ElementData d;
    d.a = mesh.vertex(e[0]);
    d.b = mesh.vertex(e[1]);
    d.c = mesh.vertex(e[2]);
    d.jac = (d.b - d.a).cross(d.c - d.a);
    d.h = mesh.diameter(t);
    d.lap_y = laplacian_vec_p2(mesh, dofs, vel, t);
    d.grad_p = eval_grad_scalar_p1(mesh, dofs, pre, t);
    return d;
}

// Momentum residual (forcing + control + lap - grad p) at a barycentric point.
Vec2 momentum_residual(const Mesh& mesh, const DofMap& dofs, const StateEstimatorInput& in,
                       const ElementData& d, int t, const std::array<double, 3>& l,
                       const Point2& x) {
    Vec2 r = d.lap_y - d.grad_p;
    if (in.forcing) r += in.forcing(x);
    if (in.control) r += eval_vec_p2(mesh, dofs, *in.control, t, l);
    return r;
}

// Integrates |jump of grad(fe) . n|^2 over side s; the jump of a P2 gradient is
// affine along the side, integrated exactly by a degree-5 edge rule.
double jump_l2_sq(const Mesh& mesh, const DofMap& dofs, const FeFunction& fe, int s) {
    const Side& side = mesh.sides()[s];
    const QuadRule& rule = edge_rule(5);
    const Point2 a = mesh.vertex(side.v[0]), b = mesh.vertex(side.v[1]);
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const Point2 x = a + rule.points[q].x * (b - a);
        const Mat2 g0 = eval_grad_vec_p2(mesh, dofs, fe, side.elem[0],
                                         mesh.barycentric(side.elem[0], x));
        const Mat2 g1 = eval_grad_vec_p2(mesh, dofs, fe, side.elem[1],
                                         mesh.barycentric(side.elem[1], x));
        const Vec2 j = (g0 - g1) * side.normal;
        acc += rule.weights[q] * j.squared_norm();
    }
    return acc * side.length;
}

// Max of |jump of grad(fe) . n| over side s, exact at the endpoints.
double jump_linf(const Mesh& mesh, const DofMap& dofs, const FeFunction& fe, int s) {
    const Side& side = mesh.sides()[s];
    double best = 0.0;
    for (int end = 0; end < 2; ++end) {
        const Point2 x = mesh.vertex(side.v[end]);
        const Mat2 g0 = eval_grad_vec_p2(mesh, dofs, fe, side.elem[0],
                                         mesh.barycentric(side.elem[0], x));
        const Mat2 g1 = eval_grad_vec_p2(mesh, dofs, fe, side.elem[1],
                                         mesh.barycentric(side.elem[1], x));
        best = std::max(best, ((g0 - g1) * side.normal).norm());
    }
    return best;
}

std::vector<std::array<double, 3>> bary_lattice(int order) {
    std::vector<std::array<double, 3>> pts;
    for (int i = 0; i <= order; ++i)
        for (int j = 0; j <= order - i; ++j) {
            const int k = order - i - j;
            pts.push_back({double(i) / order, double(j) / order, double(k) / order});
        }
    return pts;
}

double root_sum_sq(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void check_state_input(const StateEstimatorInput& in) {
    if (!in.velocity || !in.pressure)
        throw std::invalid_argument("state estimator: velocity and pressure are required");
}

}  // namespace

LocalGlobal est_state_energy(const Mesh& mesh, const DofMap& dofs, const StateEstimatorInput& in) {
    check_state_input(in);
    const QuadRule& rule = tri_rule(19);
    LocalGlobal out;
    out.local.resize(mesh.num_elements());
    for (int t = 0; t < mesh.num_elements(); ++t) {
        const ElementData d = element_data(mesh, dofs, *in.velocity, *in.pressure, t);
        double res_sq = 0.0, div_sq = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point2& rp = rule.points[q];
            const std::array<double, 3> l = {1.0 - rp.x - rp.y, rp.x, rp.y};
            const Point2 x = d.a + rp.x * (d.b - d.a) + rp.y * (d.c - d.a);
            const double w = rule.weights[q] * d.jac;
            res_sq += w * momentum_residual(mesh, dofs, in, d, t, l, x).squared_norm();
            const Mat2 g = eval_grad_vec_p2(mesh, dofs, *in.velocity, t, l);
            div_sq += w * (g.a00 + g.a11) * (g.a00 + g.a11);
        }
        double jump_sq = 0.0;
        for (int k = 0; k < 3; ++k) {
            const int s = mesh.element_side(t, k);
            if (!mesh.sides()[s].on_boundary())
                jump_sq += jump_l2_sq(mesh, dofs, *in.velocity, s);
        }
        out.local[t] = std::sqrt(d.h * d.h * res_sq + 0.5 * d.h * jump_sq + div_sq);
    }
    out.global = root_sum_sq(out.local);
    return out;
}

LocalGlobal est_state_max(const Mesh& mesh, const DofMap& dofs, const StateEstimatorInput& in,
                          int lattice_order) {
    check_state_input(in);
    const auto lattice = bary_lattice(lattice_order);
    LocalGlobal out;
    out.local.resize(mesh.num_elements());
    out.global = 0.0;
    for (int t = 0; t < mesh.num_elements(); ++t) {
        const ElementData d = element_data(mesh, dofs, *in.velocity, *in.pressure, t);
        double res_inf = 0.0;
        for (const auto& l : lattice) {
            const Point2 x = d.a * l[0] + d.b * l[1] + d.c * l[2];
            res_inf = std::max(res_inf, momentum_residual(mesh, dofs, in, d, t, l, x).norm());
        }
        // div of a P2 field is affine: extrema at the vertices
        double div_inf = 0.0;
        const std::array<std::array<double, 3>, 3> verts = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
        for (const auto& l : verts) {
            const Mat2 g = eval_grad_vec_p2(mesh, dofs, *in.velocity, t, l);
            div_inf = std::max(div_inf, std::abs(g.a00 + g.a11));
        }
        double jmp_inf = 0.0;
        for (int k = 0; k < 3; ++k) {
            const int s = mesh.element_side(t, k);
            if (!mesh.sides()[s].on_boundary())
                jmp_inf = std::max(jmp_inf, jump_linf(mesh, dofs, *in.velocity, s));
        }
        out.local[t] = d.h * d.h * res_inf + 0.5 * d.h * jmp_inf + d.h * div_inf;
        out.global = std::max(out.global, out.local[t]);
    }
    return out;
}

LocalGlobal est_adjoint(const Mesh& mesh, const DofMap& dofs, const FeFunction& z,
                        const FeFunction& r, const std::vector<PointLoad>& loads,
                        const WeightRho& weight, int grading_depth) {
    if (loads.empty()) throw std::invalid_argument("est_adjoint: no point loads");
    const MeshMetrics metrics = [&] {
        std::vector<Point2> pts;
        pts.reserve(loads.size());
        for (const auto& pl : loads) pts.push_back(pl.point);
        return mesh.metrics(pts);
    }();
    LocalGlobal out;
    out.local.resize(mesh.num_elements());
    for (int t = 0; t < mesh.num_elements(); ++t) {
        const ElementData d = element_data(mesh, dofs, z, r, t);
        const double da = std::pow(metrics.d[t], weight.alpha);

        // momentum residual lap z + grad r is constant per element
        const double res_sq = (d.lap_y + d.grad_p).squared_norm() * 0.5 * d.jac;

        // rho-weighted divergence, graded toward a contained observation point
        std::optional<Point2> center;
        for (const auto& pl : loads)
            if (mesh.contains(t, pl.point)) { center = pl.point; break; }
        auto div_rho = [&](const Point2& x) {
            const Mat2 g = eval_grad_vec_p2(mesh, dofs, z, t, mesh.barycentric(t, x));
            const double dv = g.a00 + g.a11;
            return weight(x) * dv * dv;
        };
        const double div_sq =
            integrate_weighted(div_rho, center, weight.alpha, d.a, d.b, d.c, grading_depth);

        double jump_sq = 0.0;
        for (int k = 0; k < 3; ++k) {
            const int s = mesh.element_side(t, k);
            if (!mesh.sides()[s].on_boundary()) jump_sq += jump_l2_sq(mesh, dofs, z, s);
        }

        double point_sq = 0.0;
        for (const auto& pl : loads)
            if (mesh.contains(t, pl.point))
                point_sq += std::pow(d.h, weight.alpha) * pl.data.squared_norm();

        out.local[t] = std::sqrt(d.h * d.h * da * res_sq + div_sq +
                                 d.h * da * jump_sq + point_sq);
    }
    out.global = root_sum_sq(out.local);
    return out;
}

LocalGlobal est_control(const Mesh& mesh, const DofMap& dofs, const FeFunction& u,
                        const FeFunction& z, double lambda, const Vec2& lower, const Vec2& upper) {
    const QuadRule& rule = tri_rule(19);
    LocalGlobal out;
    out.local.resize(mesh.num_elements());
    auto clamp = [](double v, double lo, double hi) { return std::min(hi, std::max(v, lo)); };
    for (int t = 0; t < mesh.num_elements(); ++t) {
        const auto& e = mesh.element(t);
        const Point2 &a = mesh.vertex(e[0]), &b = mesh.vertex(e[1]), &c = mesh.vertex(e[2]);
        const double jac = (b - a).cross(c - a);
        double acc = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point2& rp = rule.points[q];
            const std::array<double, 3> l = {1.0 - rp.x - rp.y, rp.x, rp.y};
            const Vec2 uv = eval_vec_p2(mesh, dofs, u, t, l);
            const Vec2 zv = eval_vec_p2(mesh, dofs, z, t, l);
            const Vec2 proj{clamp(-zv.x / lambda, lower.x, upper.x),
                            clamp(-zv.y / lambda, lower.y, upper.y)};
            acc += rule.weights[q] * jac * (uv - proj).squared_norm();
        }
        out.local[t] = std::sqrt(acc);
    }
    out.global = root_sum_sq(out.local);
    return out;
}

double est_oscillation(const Mesh& mesh, const VectorField& g, const std::vector<int>& elems,
                       OscMode mode, int lattice_order) {
    const QuadRule& rule = tri_rule(19);
    double acc = 0.0;
    for (int t : elems) {
        const auto& e = mesh.element(t);
        const Point2 &a = mesh.vertex(e[0]), &b = mesh.vertex(e[1]), &c = mesh.vertex(e[2]);
        const double jac = (b - a).cross(c - a);
        const double h = mesh.diameter(t);
        const auto px = l2_project_p1([&](const Point2& x) { return g(x).x; }, mesh, t);
        const auto py = l2_project_p1([&](const Point2& x) { return g(x).y; }, mesh, t);
        if (mode == OscMode::l2) {
            double loc = 0.0;
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const Point2& rp = rule.points[q];
                const std::array<double, 3> l = {1.0 - rp.x - rp.y, rp.x, rp.y};
                const Point2 x = a * l[0] + b * l[1] + c * l[2];
                const Vec2 pi{px[0] * l[0] + px[1] * l[1] + px[2] * l[2],
                              py[0] * l[0] + py[1] * l[1] + py[2] * l[2]};
                loc += rule.weights[q] * jac * (g(x) - pi).squared_norm();
            }
            acc += h * h * h * h * loc;  // (h^2 ||.||)^2
        } else {
            double loc = 0.0;
            for (const auto& l : bary_lattice(lattice_order)) {
                const Point2 x = a * l[0] + b * l[1] + c * l[2];
                const Vec2 pi{px[0] * l[0] + px[1] * l[1] + px[2] * l[2],
                              py[0] * l[0] + py[1] * l[1] + py[2] * l[2]};
                loc = std::max(loc, (g(x) - pi).norm());
            }
            acc = std::max(acc, h * h * loc);
        }
    }
    return mode == OscMode::l2 ? std::sqrt(acc) : acc;
}

double EstimatorBreakdown::local_ocp(int t) const { return std::sqrt(local_ocp_sq[t]); }

EstimatorBreakdown combine(LocalGlobal state_energy, LocalGlobal state_max, LocalGlobal adjoint,
                           LocalGlobal control) {
    const std::size_t n = state_energy.local.size();
    if (state_max.local.size() != n || adjoint.local.size() != n || control.local.size() != n)
        throw std::invalid_argument("combine: estimator parts come from different meshes");
    EstimatorBreakdown b;
    b.state_energy = std::move(state_energy);
    b.state_max = std::move(state_max);
    b.adjoint = std::move(adjoint);
    b.control = std::move(control);
    b.local_ocp_sq.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double e1 = b.state_energy.local[t], e2 = b.state_max.local[t];
        const double e3 = b.adjoint.local[t], e4 = b.control.local[t];
        b.local_ocp_sq[t] = e1 * e1 + e2 * e2 + e3 * e3 + e4 * e4;
    }
    b.ocp = std::sqrt(b.state_max.global * b.state_max.global + b.adjoint.global * b.adjoint.global +
                      b.control.global * b.control.global +
                      b.state_energy.global * b.state_energy.global);
    return b;
}

void write_indicator_csv(std::ostream& out, const EstimatorBreakdown& b) {
    out << "elem,Est_energy,Est_max,Est_ad,Est_ct,Est_ocp\n";
    out << std::setprecision(17);
    for (std::size_t t = 0; t < b.local_ocp_sq.size(); ++t)
        out << t << ',' << b.state_energy.local[t] << ',' << b.state_max.local[t] << ','
            << b.adjoint.local[t] << ',' << b.control.local[t] << ',' << std::sqrt(b.local_ocp_sq[t])
            << '\n';
}

}  // namespace safem
