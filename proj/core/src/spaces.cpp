#include "safem/spaces.hpp"

#include <Eigen/Dense>

#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "safem/quadrature.hpp"

namespace safem {

DofMap build_dofs(const Mesh& mesh) {
    DofMap dm;
    const int nv = mesh.num_vertices();
    const int ns = static_cast<int>(mesh.sides().size());
    dm.n_p1 = nv;
    dm.n_p2 = nv + ns;
    dm.p2_coords.resize(dm.n_p2);
    for (int v = 0; v < nv; ++v) dm.p2_coords[v] = mesh.vertex(v);
    for (int s = 0; s < ns; ++s) {
        const Side& side = mesh.sides()[s];
        dm.p2_coords[nv + s] = 0.5 * (mesh.vertex(side.v[0]) + mesh.vertex(side.v[1]));
    }
    dm.elem_p2.resize(mesh.num_elements());
    dm.elem_p1.resize(mesh.num_elements());
    for (int t = 0; t < mesh.num_elements(); ++t) {
        const auto& e = mesh.element(t);
        dm.elem_p1[t] = e;
        dm.elem_p2[t] = {e[0], e[1], e[2], nv + mesh.element_side(t, 0),
                         nv + mesh.element_side(t, 1), nv + mesh.element_side(t, 2)};
    }
    dm.p2_on_boundary.assign(dm.n_p2, 0);
    dm.p1_on_boundary.assign(dm.n_p1, 0);
    for (int v = 0; v < nv; ++v)
        if (mesh.vertex_on_boundary(v)) {
            dm.p1_on_boundary[v] = 1;
            dm.p2_on_boundary[v] = 1;
        }
    for (int s : mesh.boundary_sides()) dm.p2_on_boundary[nv + s] = 1;
    return dm;
}

BasisEval eval_basis(const Mesh& mesh, int elem, const std::array<double, 3>& bary) {
    const auto& e = mesh.element(elem);
    const Point2 &a = mesh.vertex(e[0]), &b = mesh.vertex(e[1]), &c = mesh.vertex(e[2]);
    const double det = (b - a).cross(c - a);
    // physical gradients of the barycentric coordinates
    const std::array<Vec2, 3> gl = {Vec2{(b.y - c.y) / det, (c.x - b.x) / det},
                                    Vec2{(c.y - a.y) / det, (a.x - c.x) / det},
                                    Vec2{(a.y - b.y) / det, (b.x - a.x) / det}};
    BasisEval out;
    for (int i = 0; i < 3; ++i) {
        const double l = bary[i];
        out.p1[i] = l;
        out.p1_grad[i] = gl[i];
        out.p2[i] = l * (2.0 * l - 1.0);
        out.p2_grad[i] = (4.0 * l - 1.0) * gl[i];
    }
    for (int k = 0; k < 3; ++k) {
        const int i = (k + 1) % 3, j = (k + 2) % 3;
        out.p2[3 + k] = 4.0 * bary[i] * bary[j];
        out.p2_grad[3 + k] = 4.0 * (bary[i] * gl[j] + bary[j] * gl[i]);
    }
    return out;
}

std::array<Mat2, 6> p2_hessians(const Mesh& mesh, int elem) {
    const auto& e = mesh.element(elem);
    const Point2 &a = mesh.vertex(e[0]), &b = mesh.vertex(e[1]), &c = mesh.vertex(e[2]);
    const double det = (b - a).cross(c - a);
    const std::array<Vec2, 3> gl = {Vec2{(b.y - c.y) / det, (c.x - b.x) / det},
                                    Vec2{(c.y - a.y) / det, (a.x - c.x) / det},
                                    Vec2{(a.y - b.y) / det, (b.x - a.x) / det}};
    std::array<Mat2, 6> h;
    for (int i = 0; i < 3; ++i) h[i] = 4.0 * Mat2::outer(gl[i], gl[i]);
    for (int k = 0; k < 3; ++k) {
        const int i = (k + 1) % 3, j = (k + 2) % 3;
        h[3 + k] = 4.0 * (Mat2::outer(gl[i], gl[j]) + Mat2::outer(gl[j], gl[i]));
    }
    return h;
}

Vec2 eval_vec_p2(const Mesh& mesh, const DofMap& dofs, const FeFunction& f, int elem,
                 const std::array<double, 3>& bary) {
    const BasisEval be = eval_basis(mesh, elem, bary);
    Vec2 v;
    for (int i = 0; i < 6; ++i) {
        const int g = dofs.elem_p2[elem][i];
        v.x += f.coeffs[2 * g] * be.p2[i];
        v.y += f.coeffs[2 * g + 1] * be.p2[i];
    }
    return v;
}

Mat2 eval_grad_vec_p2(const Mesh& mesh, const DofMap& dofs, const FeFunction& f, int elem,
                      const std::array<double, 3>& bary) {
    const BasisEval be = eval_basis(mesh, elem, bary);
    Mat2 g;
    for (int i = 0; i < 6; ++i) {
        const int n = dofs.elem_p2[elem][i];
        g.a00 += f.coeffs[2 * n] * be.p2_grad[i].x;
        g.a01 += f.coeffs[2 * n] * be.p2_grad[i].y;
        g.a10 += f.coeffs[2 * n + 1] * be.p2_grad[i].x;
        g.a11 += f.coeffs[2 * n + 1] * be.p2_grad[i].y;
    }
    return g;
}

double eval_scalar_p1(const Mesh& mesh, const DofMap& dofs, const FeFunction& f, int elem,
                      const std::array<double, 3>& bary) {
    (void)mesh;
    double v = 0.0;
    for (int i = 0; i < 3; ++i) v += f.coeffs[dofs.elem_p1[elem][i]] * bary[i];
    return v;
}

Vec2 eval_grad_scalar_p1(const Mesh& mesh, const DofMap& dofs, const FeFunction& f, int elem) {
    const BasisEval be = eval_basis(mesh, elem, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    Vec2 g;
    for (int i = 0; i < 3; ++i) g += f.coeffs[dofs.elem_p1[elem][i]] * be.p1_grad[i];
    return g;
}

Vec2 laplacian_vec_p2(const Mesh& mesh, const DofMap& dofs, const FeFunction& f, int elem) {
    const auto h = p2_hessians(mesh, elem);
    Vec2 lap;
    for (int i = 0; i < 6; ++i) {
        const int n = dofs.elem_p2[elem][i];
        lap.x += f.coeffs[2 * n] * h[i].trace();
        lap.y += f.coeffs[2 * n + 1] * h[i].trace();
    }
    return lap;
}

FeFunction interpolate(const VectorField& g, const DofMap& dofs) {
    FeFunction f;
    f.tag = SpaceTag::vector_p2;
    f.coeffs.resize(2 * dofs.n_p2);
    for (int n = 0; n < dofs.n_p2; ++n) {
        const Vec2 v = g(dofs.p2_coords[n]);
        f.coeffs[2 * n] = v.x;
        f.coeffs[2 * n + 1] = v.y;
    }
    return f;
}

FeFunction interpolate(const ScalarField& g, const DofMap& dofs, const Mesh& mesh) {
    FeFunction f;
    f.tag = SpaceTag::scalar_p1;
    f.coeffs.resize(dofs.n_p1);
    for (int v = 0; v < dofs.n_p1; ++v) f.coeffs[v] = g(mesh.vertex(v));
    return f;
}

std::array<double, 3> l2_project_p1(const ScalarField& f, const Mesh& mesh, int elem) {
    const QuadRule& rule = tri_rule(19);
    const auto& e = mesh.element(elem);
    const Point2 &a = mesh.vertex(e[0]), &b = mesh.vertex(e[1]), &c = mesh.vertex(e[2]);
    const double jac = (b - a).cross(c - a);
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const Point2& rp = rule.points[q];
        const std::array<double, 3> l = {1.0 - rp.x - rp.y, rp.x, rp.y};
        const Point2 x = a + rp.x * (b - a) + rp.y * (c - a);
        const double w = rule.weights[q] * jac;
        const double fv = f(x);
        for (int i = 0; i < 3; ++i) {
            rhs(i) += w * fv * l[i];
            for (int j = 0; j < 3; ++j) m(i, j) += w * l[i] * l[j];
        }
    }
    const Eigen::Vector3d sol = m.ldlt().solve(rhs);
    if (!sol.allFinite()) throw std::runtime_error("l2_project_p1: singular local mass matrix");
    return {sol(0), sol(1), sol(2)};
}

void write_fe_csv(std::ostream& out, const DofMap& dofs, const FeFunction& f) {
    out << std::setprecision(17);
    if (f.tag == SpaceTag::vector_p2) {
        out << "node,x,y,vx,vy\n";
        for (int n = 0; n < dofs.n_p2; ++n)
            out << n << ',' << dofs.p2_coords[n].x << ',' << dofs.p2_coords[n].y << ','
                << f.coeffs[2 * n] << ',' << f.coeffs[2 * n + 1] << '\n';
    } else {
        out << "node,x,y,v\n";
        for (int n = 0; n < dofs.n_p1; ++n)
            out << n << ',' << dofs.p2_coords[n].x << ',' << dofs.p2_coords[n].y << ','
                << f.coeffs[n] << '\n';
    }
}

}  // namespace safem
