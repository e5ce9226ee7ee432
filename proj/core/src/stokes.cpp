#include "safem/stokes.hpp"

#include <Eigen/SparseLU>

#include <stdexcept>

#include "safem/quadrature.hpp"

namespace safem {

namespace {

struct ElementQuad {
    const QuadRule& rule = tri_rule(19);
    std::vector<BasisEval> basis;   // per quadrature point
    std::vector<double> jxw;
    std::vector<Point2> xq;

    ElementQuad(const Mesh& mesh, int t) {
        const auto& e = mesh.element(t);
        const Point2 &a = mesh.vertex(e[0]), &b = mesh.vertex(e[1]), &c = mesh.vertex(e[2]);
        const double jac = (b - a).cross(c - a);
        basis.reserve(rule.size());
        jxw.reserve(rule.size());
        xq.reserve(rule.size());
        for (std::size_t q = 0; q < rule.size(); ++q) {
            const Point2& rp = rule.points[q];
            basis.push_back(eval_basis(mesh, t, {1.0 - rp.x - rp.y, rp.x, rp.y}));
            jxw.push_back(rule.weights[q] * jac);
            xq.push_back(a + rp.x * (b - a) + rp.y * (c - a));
        }
    }
};

}  // namespace

SaddleSystem assemble(const Mesh& mesh, const DofMap& dofs) {
    SaddleSystem sys;
    sys.n_p2 = dofs.n_p2;
    sys.n_p1 = dofs.n_p1;
    const int nv = 2 * dofs.n_p2;
    std::vector<Eigen::Triplet<double>> ta, tb;
    sys.m = Eigen::VectorXd::Zero(dofs.n_p1);

    for (int t = 0; t < mesh.num_elements(); ++t) {
        const ElementQuad eq(mesh, t);
        double k_loc[6][6] = {};
        double b_loc[3][6][2] = {};
        double m_loc[3] = {};
        for (std::size_t q = 0; q < eq.basis.size(); ++q) {
            const BasisEval& be = eq.basis[q];
            const double w = eq.jxw[q];
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j)
                    k_loc[i][j] += w * be.p2_grad[i].dot(be.p2_grad[j]);
            for (int k = 0; k < 3; ++k) {
                m_loc[k] += w * be.p1[k];
                for (int j = 0; j < 6; ++j) {
                    b_loc[k][j][0] -= w * be.p1[k] * be.p2_grad[j].x;
                    b_loc[k][j][1] -= w * be.p1[k] * be.p2_grad[j].y;
                }
            }
        }
        const auto& g2 = dofs.elem_p2[t];
        const auto& g1 = dofs.elem_p1[t];
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                for (int c = 0; c < 2; ++c)
                    ta.emplace_back(2 * g2[i] + c, 2 * g2[j] + c, k_loc[i][j]);
        for (int k = 0; k < 3; ++k) {
            sys.m(g1[k]) += m_loc[k];
            for (int j = 0; j < 6; ++j)
                for (int c = 0; c < 2; ++c)
                    tb.emplace_back(g1[k], 2 * g2[j] + c, b_loc[k][j][c]);
        }
    }
    sys.A.resize(nv, nv);
    sys.A.setFromTriplets(ta.begin(), ta.end());
    sys.B.resize(dofs.n_p1, nv);
    sys.B.setFromTriplets(tb.begin(), tb.end());
    sys.rhs_velocity = Eigen::VectorXd::Zero(nv);
    sys.rhs_divergence = Eigen::VectorXd::Zero(dofs.n_p1);
    sys.constrained.assign(nv, 0);
    sys.constrained_value.assign(nv, 0.0);
    return sys;
}

Eigen::SparseMatrix<double> assemble_mass(const Mesh& mesh, const DofMap& dofs) {
    std::vector<Eigen::Triplet<double>> tm;
    for (int t = 0; t < mesh.num_elements(); ++t) {
        const ElementQuad eq(mesh, t);
        double loc[6][6] = {};
        for (std::size_t q = 0; q < eq.basis.size(); ++q)
            for (int i = 0; i < 6; ++i)
                for (int j = 0; j < 6; ++j)
                    loc[i][j] += eq.jxw[q] * eq.basis[q].p2[i] * eq.basis[q].p2[j];
        const auto& g2 = dofs.elem_p2[t];
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                for (int c = 0; c < 2; ++c)
                    tm.emplace_back(2 * g2[i] + c, 2 * g2[j] + c, loc[i][j]);
    }
    Eigen::SparseMatrix<double> m(2 * dofs.n_p2, 2 * dofs.n_p2);
    m.setFromTriplets(tm.begin(), tm.end());
    return m;
}

Eigen::VectorXd assemble_load(const LoadSpec& load, const Mesh& mesh, const DofMap& dofs) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * dofs.n_p2);
    if (load.smooth) {
        for (int t = 0; t < mesh.num_elements(); ++t) {
            const ElementQuad eq(mesh, t);
            const auto& g2 = dofs.elem_p2[t];
            for (std::size_t q = 0; q < eq.basis.size(); ++q) {
                const Vec2 f = load.smooth(eq.xq[q]);
                for (int i = 0; i < 6; ++i) {
                    rhs(2 * g2[i]) += eq.jxw[q] * f.x * eq.basis[q].p2[i];
                    rhs(2 * g2[i] + 1) += eq.jxw[q] * f.y * eq.basis[q].p2[i];
                }
            }
        }
    }
    for (const auto& [point, force] : load.diracs) {
        const int t = mesh.locate(point);
        const BasisEval be = eval_basis(mesh, t, mesh.barycentric(t, point));
        const auto& g2 = dofs.elem_p2[t];
        for (int i = 0; i < 6; ++i) {
            rhs(2 * g2[i]) += force.x * be.p2[i];
            rhs(2 * g2[i] + 1) += force.y * be.p2[i];
        }
    }
    return rhs;
}

void apply_dirichlet(SaddleSystem& sys, const DofMap& dofs, const VectorField& g) {
    for (int n = 0; n < dofs.n_p2; ++n) {
        if (!dofs.p2_on_boundary[n]) continue;
        const Vec2 v = g ? g(dofs.p2_coords[n]) : Vec2{};
        sys.constrained[2 * n] = 1;
        sys.constrained[2 * n + 1] = 1;
        sys.constrained_value[2 * n] = v.x;
        sys.constrained_value[2 * n + 1] = v.y;
    }
}

namespace {

StokesSolution solve_impl(const SaddleSystem& sys, bool negate_pressure) {
    const int nv = 2 * sys.n_p2;
    const int nq = sys.n_p1;
    const int n = nv + nq + 1;  // + pressure mean multiplier

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(sys.A.nonZeros() + 2 * sys.B.nonZeros() + 2 * nq + nv);
    Eigen::VectorXd rhs(n);
    rhs.head(nv) = sys.rhs_velocity;
    rhs.segment(nv, nq) = sys.rhs_divergence;
    rhs(n - 1) = 0.0;

    auto add = [&](int r, int c, double v) {
        const bool rc = r < nv && sys.constrained[r];
        const bool cc = c < nv && sys.constrained[c];
        if (rc) return;  // row replaced by identity below
        if (cc) {
            rhs(r) -= v * sys.constrained_value[c];
            return;
        }
        trip.emplace_back(r, c, v);
    };
    for (int k = 0; k < sys.A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A, k); it; ++it)
            add(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (int k = 0; k < sys.B.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.B, k); it; ++it) {
            add(nv + static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());  // B
            add(static_cast<int>(it.col()), nv + static_cast<int>(it.row()), it.value());  // B^T
        }
    for (int k = 0; k < nq; ++k) {
        add(nv + k, n - 1, sys.m(k));      // divergence rows: + m mu
        add(n - 1, nv + k, sys.m(k));      // mean row: m^T p = 0
    }
    for (int i = 0; i < nv; ++i)
        if (sys.constrained[i]) {
            trip.emplace_back(i, i, 1.0);
            rhs(i) = sys.constrained_value[i];
        }

    Eigen::SparseMatrix<double> K(n, n);
    K.setFromTriplets(trip.begin(), trip.end());
    K.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(K);
    lu.factorize(K);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("solve_saddle: singular factorization (bad mesh or boundary data)");
    const Eigen::VectorXd x = lu.solve(rhs);

    const double res = (K * x - rhs).norm() / std::max(1.0, rhs.norm());
    if (!(res <= 1e-10))
        throw std::runtime_error("solve_saddle: residual " + std::to_string(res) +
                                 " exceeds tolerance");

    StokesSolution sol;
    sol.residual = res;
    sol.velocity.tag = SpaceTag::vector_p2;
    sol.velocity.coeffs.assign(x.data(), x.data() + nv);
    sol.pressure.tag = SpaceTag::scalar_p1;
    sol.pressure.coeffs.resize(nq);
    const double sign = negate_pressure ? -1.0 : 1.0;
    for (int k = 0; k < nq; ++k) sol.pressure.coeffs[k] = sign * x(nv + k);
    return sol;
}

}  // namespace

StokesSolution solve_saddle(const SaddleSystem& sys) { return solve_impl(sys, false); }

StokesSolution solve_adjoint_saddle(const SaddleSystem& sys) { return solve_impl(sys, true); }

}  // namespace safem
