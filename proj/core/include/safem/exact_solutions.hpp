#pragma once

#include <functional>
#include <optional>

#include "safem/estimators.hpp"
#include "safem/spaces.hpp"

namespace safem {

/// 2D Stokes fundamental-solution pair at observation point t: the velocity
/// tensor Tv and pressure vector Tp with
///   Tv(x) = -(1/4pi) (log|x-t| I - r r^T / |r|^2),   Tp(x) = -r / (2pi |r|^2).
/// The pair (Tv e_i, Tp . e_i) solves -lap z - grad r = e_i delta_t, the sign
/// convention of the adjoint momentum operator. Throws on x == t.
struct Stokeslet {
    Mat2 velocity;
    Vec2 pressure;
};
Stokeslet stokeslet(const Point2& t, const Point2& x);

/// Gradient of the Stokeslet velocity combination Tv(x) . s (rows are the
/// component gradients).
Mat2 stokeslet_velocity_gradient(const Point2& t, const Point2& x, const Vec2& s);

using MatrixField = std::function<Mat2(const Point2&)>;

/// Closed-form benchmark solution: callbacks for the optimal quintuple and the
/// derived momentum forcing. Pressures are compared modulo constants.
struct ExactSolution {
    bool available = false;
    VectorField velocity;           // y
    MatrixField velocity_gradient;  // rows: grad y_1, grad y_2
    ScalarField pressure;           // p
    VectorField adjoint_velocity;   // z (Stokeslet combination)
    MatrixField adjoint_gradient;
    ScalarField adjoint_pressure;   // r, adjoint sign convention
    VectorField control;            // u = clamp(-z/lambda)
    VectorField forcing;            // f = -lap y + grad p - u
    std::vector<Point2> obs_points;
    std::vector<Vec2> desired_states;
    Vec2 lower, upper;
    double lambda = 1.0;
};

/// Benchmark data for example_id in {1, 2}; example 3 returns available=false
/// with its points, desired states and bounds filled in.
ExactSolution exact_solution(int example_id, double lambda_override = -1.0);

struct ErrorComponents {
    double y_inf = 0.0;   // |e_y|_Linf
    double p_l2 = 0.0;    // |e_p|_L2 (means removed)
    double z_w = 0.0;     // |grad e_z|_L2(rho)
    double r_w = 0.0;     // |e_r|_L2(rho)/R (weighted means removed)
    double u_l2 = 0.0;    // |e_u|_L2
    double total = 0.0;   // root of the sum of squares
};

/// Composite error of a discrete quintuple against the exact solution. The
/// weighted integrals are graded toward each observation point (the exact
/// adjoint fields are singular there).
ErrorComponents error_norms(const Mesh& mesh, const DofMap& dofs, const FeFunction& y,
                            const FeFunction& p, const FeFunction& z, const FeFunction& r,
                            const FeFunction& u, const ExactSolution& exact,
                            const WeightRho& weight, int lattice_order = 5,
                            int grading_depth = 30);

/// Estimator / true error; throws std::domain_error when the error vanishes.
double effectivity(double estimator, double error);

}  // namespace safem
