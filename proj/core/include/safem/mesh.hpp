#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "safem/geometry.hpp"

namespace safem {

/// One mesh edge. Interior sides have two adjacent elements, boundary sides one
/// (elem[1] < 0). Vertex indices are stored with v[0] < v[1]; the unit normal
/// points from elem[0] into elem[1] (outward for boundary sides).
struct Side {
    std::array<int, 2> v{-1, -1};
    std::array<int, 2> elem{-1, -1};
    Vec2 normal;
    double length = 0.0;
    bool on_boundary() const { return elem[1] < 0; }
};

/// Element sets around an element: side neighbors (n_t) and vertex neighbors
/// (n_t_star), both including the element itself.
struct Patch {
    std::vector<int> n_t;
    std::vector<int> n_t_star;
};

/// Per-element geometric quantities used by the error indicators.
struct MeshMetrics {
    std::vector<double> h;    // longest edge length
    std::vector<double> d;    // min over observation points of the farthest-vertex distance
    double ell = 0.0;         // |log(1 / min_T h_T)|
};

/// Immutable conforming triangulation. Local edge k of an element is the edge
/// opposite local vertex k. bisect() returns a refined copy; all queries are
/// safe to share across threads.
class Mesh {
  public:
    Mesh() = default;
    /// Builds all derived tables. Elements must be counterclockwise with
    /// strictly positive area; throws std::invalid_argument otherwise.
    Mesh(std::vector<Point2> vertices, std::vector<std::array<int, 3>> elements,
         std::vector<int> generation = {}, std::vector<int> parent = {});

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_elements() const { return static_cast<int>(elements_.size()); }
    const std::vector<Point2>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& elements() const { return elements_; }
    const std::vector<Side>& sides() const { return sides_; }
    const std::vector<int>& boundary_sides() const { return boundary_side_ids_; }
    const std::vector<int>& generation() const { return generation_; }
    const std::vector<int>& parent() const { return parent_; }

    const Point2& vertex(int v) const { return vertices_[v]; }
    const std::array<int, 3>& element(int t) const { return elements_[t]; }
    /// Side index of local edge k (opposite local vertex k) of element t.
    int element_side(int t, int k) const { return elem_sides_[t][k]; }
    /// Local index of the longest edge of element t (ties broken toward the
    /// smallest sorted vertex-index pair).
    int longest_edge(int t) const { return longest_local_[t]; }
    bool vertex_on_boundary(int v) const { return vertex_boundary_[v] != 0; }

    double area(int t) const;
    double diameter(int t) const;
    Point2 edge_midpoint(int t, int k) const;

    /// Barycentric coordinates of p with respect to element t.
    std::array<double, 3> barycentric(int t, const Point2& p) const;
    /// True if p lies in the closed triangle t (tolerance -1e-12 on barycentrics).
    bool contains(int t, const Point2& p) const;

    /// Lowest-index element whose closure contains p. Throws std::runtime_error
    /// when p is outside the mesh.
    int locate(const Point2& p) const;

    Patch patch(int t) const;

    /// Longest-edge bisection of the marked elements with conformity closure.
    /// Existing vertices are preserved verbatim. Throws on an empty or invalid
    /// marked set, or if a propagation path exceeds the depth cap (100).
    Mesh bisect(const std::vector<int>& marked) const;

    /// h_T, D_T (omitted when obs is empty) and ell for this mesh.
    MeshMetrics metrics(const std::vector<Point2>& obs) const;

    /// Distance from p to the mesh boundary (minimum over boundary sides).
    double boundary_distance(const Point2& p) const;

    /// Checks conformity: shared sides, positive CCW areas, no vertex in the
    /// interior of any edge. Intended for tests and debugging.
    bool conforming(std::string* why = nullptr) const;

    /// True when every element's vertex patch contains at most one of the
    /// given points.
    bool patch_separates_points(const std::vector<Point2>& pts) const;

    void write_text(std::ostream& out) const;
    static Mesh read_text(std::istream& in);
    /// Legacy ASCII unstructured-grid export (POINTS/CELLS) for visualization.
    void write_vtk(std::ostream& out) const;

  private:
    std::vector<Point2> vertices_;
    std::vector<std::array<int, 3>> elements_;
    std::vector<int> generation_;
    std::vector<int> parent_;
    std::vector<Side> sides_;
    std::vector<std::array<int, 3>> elem_sides_;
    std::vector<int> boundary_side_ids_;
    std::vector<int> longest_local_;
    std::vector<char> vertex_boundary_;

    void build_topology();
};

/// Benchmark domain selector for initial_mesh().
enum class Domain { unit_square, l_shape };

/// Initial triangulation for a benchmark domain: the unit square starts from a
/// 2-triangle diagonal split, the L-shape from a 6-triangle fan around
/// (0.5, 0.5); both are followed by a fixed number of uniform bisection sweeps.
Mesh initial_mesh(Domain domain);

/// Marks every element (one uniform sweep = one bisect-all pass).
Mesh uniform_refine(const Mesh& mesh, int sweeps = 1);

}  // namespace safem
