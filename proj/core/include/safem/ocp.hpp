#pragma once

#include <Eigen/Sparse>

#include <optional>
#include <stdexcept>
#include <vector>

#include "safem/stokes.hpp"

namespace safem {

/// Pointwise tracking control problem data. The desired velocity is tracked at
/// the interior points of `obs_points`; the control is box constrained to
/// [lower, upper] componentwise.
struct OcpProblem {
    std::vector<Point2> obs_points;
    std::vector<Vec2> desired_states;
    double lambda = 1.0;
    Vec2 lower, upper;
    double alpha = 1.0;       // weight exponent in (0, 2)
    VectorField forcing;      // extra momentum forcing, may be null
    VectorField state_bc;     // null means homogeneous
    VectorField adjoint_bc;   // null means homogeneous

    void validate() const;
};

/// Componentwise clamp of v to [lo, hi].
Vec2 project_admissible(const Vec2& v, const Vec2& lo, const Vec2& hi);

/// Converged quintuple plus active-set bookkeeping. Flags are per velocity dof
/// (2 per P2 node, interleaved).
struct DiscreteSolution {
    FeFunction y, p, z, r, u;
    std::vector<char> active_lower, active_upper;
    int pdas_iterations = 0;
    double kkt_residual = 0.0;
};

struct PdasNonConvergence : std::runtime_error {
    DiscreteSolution last;
    explicit PdasNonConvergence(DiscreteSolution sol)
        : std::runtime_error("pdas_solve: active sets did not settle within the iteration cap"),
          last(std::move(sol)) {}
};

/// Cached per-mesh operators shared across active-set iterations.
struct KktOperators {
    SaddleSystem saddle;                      // A, B, m with state Dirichlet data
    Eigen::SparseMatrix<double> mass;         // vector P2 mass
    Eigen::VectorXd load_f;                   // momentum load from `forcing`
    std::vector<std::array<int, 6>> obs_elem_nodes;  // P2 nodes of the containing element
    std::vector<std::array<double, 6>> obs_basis;    // P2 values at each point
    std::vector<double> bc_state, bc_adjoint;        // nodal Dirichlet values (velocity dofs)
};

KktOperators build_kkt_operators(const Mesh& mesh, const DofMap& dofs, const OcpProblem& prob);

/// Assembles the monolithic KKT matrix for the given active sets. Unknown
/// ordering: [Y P Z R U mu_p mu_r].
void assemble_kkt(const KktOperators& ops, const DofMap& dofs, const OcpProblem& prob,
                  const std::vector<char>& active_lower, const std::vector<char>& active_upper,
                  Eigen::SparseMatrix<double>& K, Eigen::VectorXd& rhs);

/// Primal-dual active set iteration: classify dofs from the current adjoint
/// values, solve the coupled system, stop on exact active-set repetition.
/// Throws PdasNonConvergence past `max_iterations`.
DiscreteSolution pdas_solve(const Mesh& mesh, const DofMap& dofs, const OcpProblem& prob,
                            int max_iterations = 50);

/// Evaluates a vector P2 function at an arbitrary point (locate + basis).
Vec2 point_eval(const Mesh& mesh, const DofMap& dofs, const FeFunction& f, const Point2& t);

}  // namespace safem
