#pragma once

#include <optional>
#include <vector>

#include "safem/spaces.hpp"

namespace safem {

/// Distance-power weight around the observation points. With a single point
/// rho(x) = |x - t|^alpha everywhere; with several points rho equals
/// |x - t|^alpha inside the radius d_D/2 ball of the nearest point and 1
/// elsewhere (a jump, implemented exactly as defined).
struct WeightRho {
    std::vector<Point2> points;
    double alpha = 1.0;
    double d_sep = 0.0;  // min of boundary distance and pairwise distances

    WeightRho() = default;
    WeightRho(std::vector<Point2> pts, double a, const Mesh& mesh);

    double operator()(const Point2& x) const;
};

struct LocalGlobal {
    std::vector<double> local;
    double global = 0.0;
};

/// Shared input for the two state-equation indicators: momentum residual
/// load + u_T + lap(y_T) - grad(p_T), gradient jumps, and div y_T. The control
/// addend is optional (absent for the plain Stokes study).
struct StateEstimatorInput {
    const FeFunction* velocity = nullptr;
    const FeFunction* pressure = nullptr;
    VectorField forcing;                  // may be null
    const FeFunction* control = nullptr;  // optional P2 addend to the forcing
};

/// Energy-norm indicators: sqrt(h^2 |res|_T^2 + (h/2) |jump|_dT^2 + |div|_T^2),
/// global value is the root sum of squares.
LocalGlobal est_state_energy(const Mesh& mesh, const DofMap& dofs, const StateEstimatorInput& in);

/// Max-norm indicators: h^2 |res|_inf + (h/2) |jump|_inf + h |div|_inf, global
/// value is the max. Non-polynomial residual parts are sampled on a barycentric
/// lattice (approximate); jump and divergence extrema are exact.
LocalGlobal est_state_max(const Mesh& mesh, const DofMap& dofs, const StateEstimatorInput& in,
                          int lattice_order = 5);

/// One Dirac load of the adjoint problem: point t and data vector.
struct PointLoad {
    Point2 point;
    Vec2 data;
};

/// Weighted adjoint indicators:
///   h^2 D^a |lap z + grad r|_T^2 + |div z|_{rho,T}^2
///   + h D^a |jump grad z|_dT^2 + sum_t h^a |data_t|^2 [t in T].
/// The rho-weighted divergence integral is graded toward any contained point.
LocalGlobal est_adjoint(const Mesh& mesh, const DofMap& dofs, const FeFunction& z,
                        const FeFunction& r, const std::vector<PointLoad>& loads,
                        const WeightRho& weight, int grading_depth = 6);

/// Control indicators |u_T - clamp(-z_T / lambda)|_{L2(T)} with the pointwise
/// componentwise clamp to [a, b].
LocalGlobal est_control(const Mesh& mesh, const DofMap& dofs, const FeFunction& u,
                        const FeFunction& z, double lambda, const Vec2& lower, const Vec2& upper);

enum class OscMode { l2, linf };

/// Data oscillation h^2 |g - P1-projection(g)| over the given elements:
/// root-sum-of-squares in L2 mode, max in Linf mode.
double est_oscillation(const Mesh& mesh, const VectorField& g, const std::vector<int>& elems,
                       OscMode mode, int lattice_order = 5);

/// All four contributions with locals, globals, and the combined quantities.
struct EstimatorBreakdown {
    LocalGlobal state_energy;  // E_st
    LocalGlobal state_max;     // script E_st (global max)
    LocalGlobal adjoint;       // script E_ad
    LocalGlobal control;       // script E_ct
    std::vector<double> local_ocp_sq;  // per-element combined indicator, squared
    double ocp = 0.0;

    double local_ocp(int t) const;
};

/// Combines the four parts; throws std::invalid_argument on mismatched sizes.
EstimatorBreakdown combine(LocalGlobal state_energy, LocalGlobal state_max, LocalGlobal adjoint,
                           LocalGlobal control);

/// CSV dump "elem,Est_energy,Est_max,Est_ad,Est_ct,Est_ocp".
void write_indicator_csv(std::ostream& out, const EstimatorBreakdown& b);

}  // namespace safem
