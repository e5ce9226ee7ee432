#pragma once

#include <Eigen/Sparse>

#include <optional>
#include <vector>

#include "safem/spaces.hpp"

namespace safem {

/// Velocity stiffness block A (vector P2), divergence block B (rows are P1
/// pressure dofs, b(v,q) = -int q div v), and the pressure mean weights m.
/// Dirichlet data is kept symbolically until solve time.
struct SaddleSystem {
    Eigen::SparseMatrix<double> A;   // (2 n_p2) x (2 n_p2)
    Eigen::SparseMatrix<double> B;   // n_p1 x (2 n_p2)
    Eigen::VectorXd m;               // n_p1, entries int psi_k, summing to |Omega|
    Eigen::VectorXd rhs_velocity;    // length 2 n_p2
    Eigen::VectorXd rhs_divergence;  // length n_p1
    std::vector<char> constrained;   // per velocity dof
    std::vector<double> constrained_value;
    int n_p2 = 0;
    int n_p1 = 0;
};

/// Momentum right-hand side: a smooth part and a list of point forces.
struct LoadSpec {
    VectorField smooth;  // may be null
    std::vector<std::pair<Point2, Vec2>> diracs;
};

SaddleSystem assemble(const Mesh& mesh, const DofMap& dofs);

/// Vector P2 mass matrix (for the control coupling and L2 inner products).
Eigen::SparseMatrix<double> assemble_mass(const Mesh& mesh, const DofMap& dofs);

/// Velocity load vector: smooth part by the degree-19 rule, each point force F
/// scattered as F . (P2 basis at the point) on the containing element.
Eigen::VectorXd assemble_load(const LoadSpec& load, const Mesh& mesh, const DofMap& dofs);

/// Pins boundary P2 dofs to the nodal values of g (zero when g is null).
void apply_dirichlet(SaddleSystem& sys, const DofMap& dofs, const VectorField& g);

struct StokesSolution {
    FeFunction velocity;
    FeFunction pressure;  // mean zero
    double residual = 0.0;
};

/// Direct sparse solve of the constrained saddle problem with the pressure
/// mean enforced through a scalar multiplier. Throws std::runtime_error on a
/// singular factorization or a residual above 1e-10 (relative).
StokesSolution solve_saddle(const SaddleSystem& sys);

/// Solves a(w,z) - b(w,r) = load, b(z,s) = 0: same blocks, the returned
/// pressure-like variable is negated.
StokesSolution solve_adjoint_saddle(const SaddleSystem& sys);

}  // namespace safem
