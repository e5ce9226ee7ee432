#include "safem/ocp.hpp"

#include <Eigen/SparseLU>

#include <cmath>

namespace safem {

void OcpProblem::validate() const {
    if (!(lower.x < upper.x && lower.y < upper.y))
        throw std::invalid_argument("OcpProblem: bounds must satisfy a < b componentwise");
    if (!(lambda > 0.0)) throw std::invalid_argument("OcpProblem: lambda must be positive");
    if (!(alpha > 0.0 && alpha < 2.0))
        throw std::invalid_argument("OcpProblem: alpha must lie in (0,2)");
    if (obs_points.size() != desired_states.size())
        throw std::invalid_argument("OcpProblem: one desired state per observation point");
}

Vec2 project_admissible(const Vec2& v, const Vec2& lo, const Vec2& hi) {
    return {std::min(hi.x, std::max(v.x, lo.x)), std::min(hi.y, std::max(v.y, lo.y))};
}

KktOperators build_kkt_operators(const Mesh& mesh, const DofMap& dofs, const OcpProblem& prob) {
    KktOperators ops;
    ops.saddle = assemble(mesh, dofs);
    apply_dirichlet(ops.saddle, dofs, prob.state_bc);
    ops.mass = assemble_mass(mesh, dofs);
    LoadSpec load;
    load.smooth = prob.forcing;
    ops.load_f = prob.forcing ? assemble_load(load, mesh, dofs)
                              : Eigen::VectorXd::Zero(2 * dofs.n_p2);
    for (const Point2& t : prob.obs_points) {
        const int elem = mesh.locate(t);
        const BasisEval be = eval_basis(mesh, elem, mesh.barycentric(elem, t));
        ops.obs_elem_nodes.push_back(dofs.elem_p2[elem]);
        ops.obs_basis.push_back(be.p2);
    }
    ops.bc_state.assign(2 * dofs.n_p2, 0.0);
    ops.bc_adjoint.assign(2 * dofs.n_p2, 0.0);
    for (int n = 0; n < dofs.n_p2; ++n) {
        if (!dofs.p2_on_boundary[n]) continue;
        const Vec2 gy = prob.state_bc ? prob.state_bc(dofs.p2_coords[n]) : Vec2{};
        const Vec2 gz = prob.adjoint_bc ? prob.adjoint_bc(dofs.p2_coords[n]) : Vec2{};
        ops.bc_state[2 * n] = gy.x;
        ops.bc_state[2 * n + 1] = gy.y;
        ops.bc_adjoint[2 * n] = gz.x;
        ops.bc_adjoint[2 * n + 1] = gz.y;
    }
    return ops;
}

void assemble_kkt(const KktOperators& ops, const DofMap& dofs, const OcpProblem& prob,
                  const std::vector<char>& active_lower, const std::vector<char>& active_upper,
                  Eigen::SparseMatrix<double>& K, Eigen::VectorXd& rhs) {
    const int nv = 2 * dofs.n_p2;
    const int nq = dofs.n_p1;
    const int oy = 0, op = nv, oz = nv + nq, orr = 2 * nv + nq, ou = 2 * nv + 2 * nq;
    const int omu_p = 3 * nv + 2 * nq, omu_r = omu_p + 1;
    const int n = 3 * nv + 2 * nq + 2;

    const auto& A = ops.saddle.A;
    const auto& B = ops.saddle.B;
    const auto& constrained = ops.saddle.constrained;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(3 * A.nonZeros() + 4 * B.nonZeros() + 4 * nq + 3 * nv);
    rhs = Eigen::VectorXd::Zero(n);

    // state momentum: A Y + B^T P - M U = F_f   (boundary rows: Y_i = g_y)
    // adjoint momentum: A Z - B^T R - sum_t E_t^T E_t Y = -sum_t E_t^T y_t
    for (int k = 0; k < A.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
            const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
            if (!constrained[i]) {
                trip.emplace_back(oy + i, oy + j, it.value());
                trip.emplace_back(oz + i, oz + j, it.value());
            }
        }
    for (int k = 0; k < B.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(B, k); it; ++it) {
            const int q = static_cast<int>(it.row()), j = static_cast<int>(it.col());
            trip.emplace_back(op + q, oy + j, it.value());   // state divergence: B Y
            trip.emplace_back(orr + q, oz + j, it.value());  // adjoint divergence: B Z
            if (!constrained[j]) {
                trip.emplace_back(oy + j, op + q, it.value());    // +B^T P in state rows
                trip.emplace_back(oz + j, orr + q, -it.value());  // -B^T R in adjoint rows
            }
        }
    for (int k = 0; k < ops.mass.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(ops.mass, k); it; ++it) {
            const int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
            if (!constrained[i]) trip.emplace_back(oy + i, ou + j, -it.value());  // -M U
        }
    // point evaluation coupling and adjoint data
    for (std::size_t pt = 0; pt < ops.obs_basis.size(); ++pt) {
        const auto& nodes = ops.obs_elem_nodes[pt];
        const auto& phi = ops.obs_basis[pt];
        const Vec2 yt = prob.desired_states[pt];
        for (int i = 0; i < 6; ++i)
            for (int c = 0; c < 2; ++c) {
                const int row = 2 * nodes[i] + c;
                if (constrained[row]) continue;
                rhs(oz + row) -= phi[i] * (c == 0 ? yt.x : yt.y);
                for (int j = 0; j < 6; ++j)
                    trip.emplace_back(oz + row, oy + 2 * nodes[j] + c, -phi[i] * phi[j]);
            }
    }
    // divergence mean multipliers and pressure mean rows
    for (int q = 0; q < nq; ++q) {
        const double mq = ops.saddle.m(q);
        trip.emplace_back(op + q, omu_p, mq);
        trip.emplace_back(orr + q, omu_r, mq);
        trip.emplace_back(omu_p, op + q, mq);
        trip.emplace_back(omu_r, orr + q, mq);
    }
    // Dirichlet rows for Y and Z
    for (int i = 0; i < nv; ++i)
        if (constrained[i]) {
            trip.emplace_back(oy + i, oy + i, 1.0);
            trip.emplace_back(oz + i, oz + i, 1.0);
            rhs(oy + i) = ops.bc_state[i];
            rhs(oz + i) = ops.bc_adjoint[i];
        }
    // control rows
    for (int i = 0; i < nv; ++i) {
        const double bound = (i % 2 == 0) ? (active_lower[i] ? prob.lower.x : prob.upper.x)
                                          : (active_lower[i] ? prob.lower.y : prob.upper.y);
        if (active_lower[i] || active_upper[i]) {
            trip.emplace_back(ou + i, ou + i, 1.0);
            rhs(ou + i) = bound;
        } else {
            trip.emplace_back(ou + i, ou + i, prob.lambda);
            trip.emplace_back(ou + i, oz + i, 1.0);
        }
    }
    // state momentum load
    for (int i = 0; i < nv; ++i)
        if (!constrained[i]) rhs(oy + i) += ops.load_f(i);

    K.resize(n, n);
    K.setFromTriplets(trip.begin(), trip.end());
    K.makeCompressed();
}

namespace {

// -z_i / lambda classified against the componentwise bounds.
void classify(const Eigen::VectorXd& z, const OcpProblem& prob, std::vector<char>& lower,
              std::vector<char>& upper) {
    const int nv = static_cast<int>(z.size());
    lower.assign(nv, 0);
    upper.assign(nv, 0);
    for (int i = 0; i < nv; ++i) {
        const double lo = (i % 2 == 0) ? prob.lower.x : prob.lower.y;
        const double hi = (i % 2 == 0) ? prob.upper.x : prob.upper.y;
        const double v = -z(i) / prob.lambda;
        if (v < lo) lower[i] = 1;
        else if (v > hi) upper[i] = 1;
    }
}

}  // namespace

DiscreteSolution pdas_solve(const Mesh& mesh, const DofMap& dofs, const OcpProblem& prob,
                            int max_iterations) {
    prob.validate();
    const KktOperators ops = build_kkt_operators(mesh, dofs, prob);
    const int nv = 2 * dofs.n_p2;
    const int nq = dofs.n_p1;
    const int oy = 0, op = nv, oz = nv + nq, orr = 2 * nv + nq, ou = 2 * nv + 2 * nq;

    Eigen::VectorXd z = Eigen::VectorXd::Zero(nv);
    std::vector<char> lower, upper, prev_lower, prev_upper;
    bool have_prev = false;

    Eigen::SparseMatrix<double> K;
    Eigen::VectorXd rhs, x;
    DiscreteSolution sol;

    int iterations = 0;
    while (true) {
        classify(z, prob, lower, upper);
        if (have_prev && lower == prev_lower && upper == prev_upper) break;
        if (iterations >= max_iterations) {
            sol.pdas_iterations = iterations;
            throw PdasNonConvergence(std::move(sol));
        }
        assemble_kkt(ops, dofs, prob, lower, upper, K, rhs);
        Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
        lu.analyzePattern(K);
        lu.factorize(K);
        if (lu.info() != Eigen::Success)
            throw std::runtime_error("pdas_solve: singular KKT factorization");
        x = lu.solve(rhs);
        ++iterations;

        z = x.segment(oz, nv);
        prev_lower = lower;
        prev_upper = upper;
        have_prev = true;

        sol.y.tag = sol.z.tag = sol.u.tag = SpaceTag::vector_p2;
        sol.p.tag = sol.r.tag = SpaceTag::scalar_p1;
        sol.y.coeffs.assign(x.data() + oy, x.data() + oy + nv);
        sol.p.coeffs.assign(x.data() + op, x.data() + op + nq);
        sol.z.coeffs.assign(x.data() + oz, x.data() + oz + nv);
        sol.r.coeffs.assign(x.data() + orr, x.data() + orr + nq);
        sol.u.coeffs.assign(x.data() + ou, x.data() + ou + nv);
        sol.kkt_residual = (K * x - rhs).norm() / std::max(1.0, rhs.norm());
    }

    sol.active_lower = prev_lower;
    sol.active_upper = prev_upper;
    sol.pdas_iterations = iterations;
    return sol;
}

Vec2 point_eval(const Mesh& mesh, const DofMap& dofs, const FeFunction& f, const Point2& t) {
    const int elem = mesh.locate(t);
    return eval_vec_p2(mesh, dofs, f, elem, mesh.barycentric(elem, t));
}

}  // namespace safem
