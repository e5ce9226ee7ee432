#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

#include "safem/mesh.hpp"
#include "safem/quadrature.hpp"

namespace safem {

using VectorField = std::function<Vec2(const Point2&)>;

/// Taylor-Hood degree-of-freedom tables: continuous P2 nodes (vertices plus
/// edge midpoints) and continuous P1 nodes (vertices). Vector fields use
/// interleaved components: dof(node g, comp c) = 2g + c.
struct DofMap {
    int n_p2 = 0;
    int n_p1 = 0;
    std::vector<Point2> p2_coords;
    // local order: [v0, v1, v2, edge opp v0, edge opp v1, edge opp v2]
    std::vector<std::array<int, 6>> elem_p2;
    std::vector<std::array<int, 3>> elem_p1;
    std::vector<char> p2_on_boundary;
    std::vector<char> p1_on_boundary;
};

DofMap build_dofs(const Mesh& mesh);

enum class SpaceTag { vector_p2, scalar_p1 };

/// Coefficient vector over a DofMap. Vector P2 functions store 2*n_p2
/// interleaved values, scalar P1 functions n_p1 values.
struct FeFunction {
    SpaceTag tag = SpaceTag::scalar_p1;
    std::vector<double> coeffs;

    static FeFunction zeros(SpaceTag t, const DofMap& dofs) {
        FeFunction f;
        f.tag = t;
        f.coeffs.assign(t == SpaceTag::vector_p2 ? 2 * dofs.n_p2 : dofs.n_p1, 0.0);
        return f;
    }
};

/// P2/P1 Lagrange basis values and physical gradients at a barycentric point.
struct BasisEval {
    std::array<double, 6> p2;
    std::array<Vec2, 6> p2_grad;
    std::array<double, 3> p1;
    std::array<Vec2, 3> p1_grad;
};

BasisEval eval_basis(const Mesh& mesh, int elem, const std::array<double, 3>& bary);

/// Per-basis constant Hessians of the P2 shape functions on a given element.
std::array<Mat2, 6> p2_hessians(const Mesh& mesh, int elem);

/// Element-local evaluation helpers.
Vec2 eval_vec_p2(const Mesh& mesh, const DofMap& dofs, const FeFunction& f, int elem,
                 const std::array<double, 3>& bary);
Mat2 eval_grad_vec_p2(const Mesh& mesh, const DofMap& dofs, const FeFunction& f, int elem,
                      const std::array<double, 3>& bary);  // rows: component gradients
double eval_scalar_p1(const Mesh& mesh, const DofMap& dofs, const FeFunction& f, int elem,
                      const std::array<double, 3>& bary);
Vec2 eval_grad_scalar_p1(const Mesh& mesh, const DofMap& dofs, const FeFunction& f, int elem);
/// Laplacian of each component of a vector P2 function (constant per element).
Vec2 laplacian_vec_p2(const Mesh& mesh, const DofMap& dofs, const FeFunction& f, int elem);

/// Nodal Lagrange interpolation of a smooth field.
FeFunction interpolate(const VectorField& g, const DofMap& dofs);
FeFunction interpolate(const ScalarField& g, const DofMap& dofs, const Mesh& mesh);

/// Local L2 projection of f onto P1 over one element; returns the values at
/// the element's three vertices.
std::array<double, 3> l2_project_p1(const ScalarField& f, const Mesh& mesh, int elem);

/// CSV dump ("node,x,y,value..." per component) for plotting.
void write_fe_csv(std::ostream& out, const DofMap& dofs, const FeFunction& f);

}  // namespace safem
