#include "safem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace safem {

namespace {

std::pair<int, int> canonical(int a, int b) { return a < b ? std::make_pair(a, b) : std::make_pair(b, a); }

}  // namespace

Mesh::Mesh(std::vector<Point2> vertices, std::vector<std::array<int, 3>> elements,
           std::vector<int> generation, std::vector<int> parent)
    : vertices_(std::move(vertices)),
      elements_(std::move(elements)),
      generation_(std::move(generation)),
      parent_(std::move(parent)) {
    if (generation_.empty()) generation_.assign(elements_.size(), 0);
    if (parent_.empty()) {
        parent_.resize(elements_.size());
        for (std::size_t t = 0; t < elements_.size(); ++t) parent_[t] = static_cast<int>(t);
    }
    for (std::size_t t = 0; t < elements_.size(); ++t) {
        const auto& e = elements_[t];
        for (int k = 0; k < 3; ++k)
            if (e[k] < 0 || e[k] >= num_vertices())
                throw std::invalid_argument("Mesh: vertex index out of range");
        if (signed_area(vertices_[e[0]], vertices_[e[1]], vertices_[e[2]]) <= 0.0)
            throw std::invalid_argument("Mesh: element " + std::to_string(t) +
                                        " is degenerate or clockwise");
    }
    build_topology();
}

void Mesh::build_topology() {
    const int nt = num_elements();
    elem_sides_.assign(nt, {-1, -1, -1});
    longest_local_.assign(nt, 0);
    sides_.clear();
    boundary_side_ids_.clear();
    vertex_boundary_.assign(vertices_.size(), 0);

    std::map<std::pair<int, int>, int> side_of;
    for (int t = 0; t < nt; ++t) {
        const auto& e = elements_[t];
        for (int k = 0; k < 3; ++k) {
            const int a = e[(k + 1) % 3], b = e[(k + 2) % 3];
            const auto key = canonical(a, b);
            auto it = side_of.find(key);
            if (it == side_of.end()) {
                Side s;
                s.v = {key.first, key.second};
                s.elem = {t, -1};
                const Vec2 d = vertices_[key.second] - vertices_[key.first];
                s.length = d.norm();
                s.normal = Vec2{d.y, -d.x} / s.length;  // orientation fixed below
                side_of.emplace(key, static_cast<int>(sides_.size()));
                elem_sides_[t][k] = static_cast<int>(sides_.size());
                sides_.push_back(s);
            } else {
                Side& s = sides_[it->second];
                if (s.elem[1] >= 0)
                    throw std::invalid_argument("Mesh: edge shared by more than two elements");
                s.elem[1] = t;
                elem_sides_[t][k] = it->second;
            }
        }
    }
    for (std::size_t i = 0; i < sides_.size(); ++i) {
        Side& s = sides_[i];
        // point the normal away from elem[0]
        const auto& e = elements_[s.elem[0]];
        const Point2 centroid = (vertices_[e[0]] + vertices_[e[1]] + vertices_[e[2]]) / 3.0;
        const Point2 mid = 0.5 * (vertices_[s.v[0]] + vertices_[s.v[1]]);
        if (s.normal.dot(mid - centroid) < 0.0) s.normal = -s.normal;
        if (s.on_boundary()) {
            boundary_side_ids_.push_back(static_cast<int>(i));
            vertex_boundary_[s.v[0]] = 1;
            vertex_boundary_[s.v[1]] = 1;
        }
    }
    for (int t = 0; t < nt; ++t) {
        int best = 0;
        double best_len = -1.0;
        std::pair<int, int> best_key{0, 0};
        for (int k = 0; k < 3; ++k) {
            const Side& s = sides_[elem_sides_[t][k]];
            const auto key = canonical(s.v[0], s.v[1]);
            if (s.length > best_len + 1e-14 * (1.0 + best_len) ||
                (std::abs(s.length - best_len) <= 1e-14 * (1.0 + best_len) && key < best_key)) {
                best = k;
                best_len = s.length;
                best_key = key;
            }
        }
        longest_local_[t] = best;
    }
}

double Mesh::area(int t) const {
    const auto& e = elements_[t];
    return signed_area(vertices_[e[0]], vertices_[e[1]], vertices_[e[2]]);
}

double Mesh::diameter(int t) const { return sides_[elem_sides_[t][longest_local_[t]]].length; }

Point2 Mesh::edge_midpoint(int t, int k) const {
    const auto& e = elements_[t];
    return 0.5 * (vertices_[e[(k + 1) % 3]] + vertices_[e[(k + 2) % 3]]);
}

std::array<double, 3> Mesh::barycentric(int t, const Point2& p) const {
    const auto& e = elements_[t];
    const Point2 &a = vertices_[e[0]], &b = vertices_[e[1]], &c = vertices_[e[2]];
    const double det = (b - a).cross(c - a);
    const double l1 = (p - a).cross(c - a) / det;
    const double l2 = (b - a).cross(p - a) / det;
    return {1.0 - l1 - l2, l1, l2};
}

bool Mesh::contains(int t, const Point2& p) const {
    const auto l = barycentric(t, p);
    constexpr double tol = -1e-12;
    return l[0] >= tol && l[1] >= tol && l[2] >= tol;
}

int Mesh::locate(const Point2& p) const {
    for (int t = 0; t < num_elements(); ++t)
        if (contains(t, p)) return t;
    std::ostringstream os;
    os << "Mesh::locate: point (" << p.x << ", " << p.y << ") is outside the mesh";
    throw std::runtime_error(os.str());
}

Patch Mesh::patch(int t) const {
    if (t < 0 || t >= num_elements()) throw std::invalid_argument("Mesh::patch: bad element index");
    Patch p;
    p.n_t.push_back(t);
    for (int k = 0; k < 3; ++k) {
        const Side& s = sides_[elem_sides_[t][k]];
        const int other = s.elem[0] == t ? s.elem[1] : s.elem[0];
        if (other >= 0) p.n_t.push_back(other);
    }
    std::sort(p.n_t.begin(), p.n_t.end());

    const auto& e = elements_[t];
    for (int u = 0; u < num_elements(); ++u) {
        const auto& f = elements_[u];
        bool shares = false;
        for (int i = 0; i < 3 && !shares; ++i)
            for (int j = 0; j < 3; ++j)
                if (f[i] == e[j]) { shares = true; break; }
        if (shares) p.n_t_star.push_back(u);
    }
    return p;
}

namespace {

// Working state for longest-edge bisection with conformity closure.
struct WorkMesh {
    std::vector<Point2> verts;
    struct Tri {
        std::array<int, 3> v;
        int gen;
        int ancestor;  // element index in the input mesh
        bool alive;
    };
    std::vector<Tri> tris;
    std::map<std::pair<int, int>, std::array<int, 2>> edge_elems;  // up to two adjacent alive tris
    std::map<std::pair<int, int>, int> midpoint_of;

    void add_edge(int a, int b, int t) {
        auto [it, inserted] = edge_elems.try_emplace(canonical(a, b), std::array<int, 2>{-1, -1});
        auto& slots = it->second;
        if (slots[0] < 0) slots[0] = t;
        else if (slots[1] < 0) slots[1] = t;
        else throw std::runtime_error("bisect: nonconforming intermediate state");
    }
    void remove_edge(int a, int b, int t) {
        auto it = edge_elems.find(canonical(a, b));
        if (it == edge_elems.end()) return;
        auto& slots = it->second;
        if (slots[0] == t) slots[0] = slots[1], slots[1] = -1;
        else if (slots[1] == t) slots[1] = -1;
        if (slots[0] < 0) edge_elems.erase(it);
    }
    int neighbor_across(int a, int b, int t) const {
        auto it = edge_elems.find(canonical(a, b));
        if (it == edge_elems.end()) return -1;
        const auto& slots = it->second;
        if (slots[0] == t) return slots[1];
        if (slots[1] == t) return slots[0];
        return -1;
    }

    // Local index of the longest edge (opposite vertex k). Ties go to the
    // smallest sorted vertex-index pair so refinement is reproducible.
    int longest_local(int t) const {
        const auto& v = tris[t].v;
        int best = 0;
        double best_len = -1.0;
        std::pair<int, int> best_key{0, 0};
        for (int k = 0; k < 3; ++k) {
            const int a = v[(k + 1) % 3], b = v[(k + 2) % 3];
            const double len = (verts[a] - verts[b]).norm();
            const auto key = canonical(a, b);
            if (len > best_len + 1e-14 * (1.0 + best_len) ||
                (std::abs(len - best_len) <= 1e-14 * (1.0 + best_len) && key < best_key)) {
                best = k;
                best_len = len;
                best_key = key;
            }
        }
        return best;
    }

    int midpoint(int a, int b) {
        const auto key = canonical(a, b);
        auto it = midpoint_of.find(key);
        if (it != midpoint_of.end()) return it->second;
        const int m = static_cast<int>(verts.size());
        verts.push_back(0.5 * (verts[a] + verts[b]));
        midpoint_of.emplace(key, m);
        return m;
    }

    // Splits tri t across its edge (a, b) through midpoint m. The new triangles
    // keep the parent's counterclockwise orientation.
    void split(int t, int a, int b, int m) {
        const auto v = tris[t].v;
        int k = -1;
        for (int i = 0; i < 3; ++i)
            if (v[i] != a && v[i] != b) k = i;
        const int opp = v[k];
        const int va = v[(k + 1) % 3], vb = v[(k + 2) % 3];  // (va, vb) == (a, b) as oriented in t
        tris[t].alive = false;
        remove_edge(va, vb, t);
        remove_edge(vb, opp, t);
        remove_edge(opp, va, t);
        const int c0 = static_cast<int>(tris.size());
        tris.push_back({{opp, va, m}, tris[t].gen + 1, tris[t].ancestor, true});
        const int c1 = static_cast<int>(tris.size());
        tris.push_back({{opp, m, vb}, tris[t].gen + 1, tris[t].ancestor, true});
        add_edge(opp, va, c0); add_edge(va, m, c0); add_edge(m, opp, c0);
        add_edge(opp, m, c1); add_edge(m, vb, c1); add_edge(vb, opp, c1);
    }

    // Bisects t at its longest edge, first refining along the longest-edge
    // propagation path until the edge is shared compatibly.
    void bisect_element(int t) {
        std::vector<int> path{t};
        while (!path.empty()) {
            if (path.size() > 100)
                throw std::runtime_error("bisect: refinement propagation exceeded depth 100");
            const int cur = path.back();
            if (!tris[cur].alive) { path.pop_back(); continue; }
            const int k = longest_local(cur);
            const auto& v = tris[cur].v;
            const int a = v[(k + 1) % 3], b = v[(k + 2) % 3];
            const int nb = neighbor_across(a, b, cur);
            if (nb >= 0) {
                const int nk = longest_local(nb);
                const int na = tris[nb].v[(nk + 1) % 3], nbv = tris[nb].v[(nk + 2) % 3];
                if (canonical(na, nbv) != canonical(a, b)) {
                    path.push_back(nb);
                    continue;
                }
            }
            const int m = midpoint(a, b);
            split(cur, a, b, m);
            if (nb >= 0) split(nb, a, b, m);
            path.pop_back();
        }
    }
};

}  // namespace

Mesh Mesh::bisect(const std::vector<int>& marked) const {
    if (marked.empty()) throw std::invalid_argument("Mesh::bisect: marked set is empty");
    for (int t : marked)
        if (t < 0 || t >= num_elements())
            throw std::invalid_argument("Mesh::bisect: marked index out of range");

    WorkMesh wm;
    wm.verts = vertices_;
    wm.tris.reserve(elements_.size() * 2);
    for (int t = 0; t < num_elements(); ++t) {
        wm.tris.push_back({elements_[t], generation_[t], t, true});
        const auto& v = elements_[t];
        wm.add_edge(v[0], v[1], t);
        wm.add_edge(v[1], v[2], t);
        wm.add_edge(v[2], v[0], t);
    }

    std::vector<int> order(marked);
    std::sort(order.begin(), order.end());
    order.erase(std::unique(order.begin(), order.end()), order.end());
    for (int t : order)
        if (wm.tris[t].alive) wm.bisect_element(t);

    std::vector<std::array<int, 3>> elems;
    std::vector<int> gens, parents;
    for (const auto& tri : wm.tris) {
        if (!tri.alive) continue;
        elems.push_back(tri.v);
        gens.push_back(tri.gen);
        parents.push_back(tri.ancestor);
    }
    return Mesh(std::move(wm.verts), std::move(elems), std::move(gens), std::move(parents));
}

MeshMetrics Mesh::metrics(const std::vector<Point2>& obs) const {
    MeshMetrics m;
    const int nt = num_elements();
    m.h.resize(nt);
    double hmin = std::numeric_limits<double>::max();
    for (int t = 0; t < nt; ++t) {
        m.h[t] = diameter(t);
        hmin = std::min(hmin, m.h[t]);
    }
    m.ell = std::abs(std::log(1.0 / hmin));
    if (!obs.empty()) {
        m.d.resize(nt);
        for (int t = 0; t < nt; ++t) {
            // the farthest point of a triangle from t is one of its vertices
            double best = std::numeric_limits<double>::max();
            for (const Point2& p : obs) {
                double far = 0.0;
                for (int k = 0; k < 3; ++k)
                    far = std::max(far, (vertices_[elements_[t][k]] - p).norm());
                best = std::min(best, far);
            }
            m.d[t] = best;
        }
    }
    return m;
}

double Mesh::boundary_distance(const Point2& p) const {
    double best = std::numeric_limits<double>::max();
    for (int s : boundary_side_ids_) {
        const Side& side = sides_[s];
        best = std::min(best, segment_distance_sq(p, vertices_[side.v[0]], vertices_[side.v[1]]));
    }
    return std::sqrt(best);
}

bool Mesh::conforming(std::string* why) const {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    for (int t = 0; t < num_elements(); ++t)
        if (area(t) <= 0.0) return fail("element " + std::to_string(t) + " has nonpositive area");
    for (const Side& s : sides_)
        if (s.elem[0] < 0) return fail("side without adjacent element");
    // hanging vertices: no vertex may lie strictly inside an edge
    for (const Side& s : sides_) {
        const Point2 &a = vertices_[s.v[0]], &b = vertices_[s.v[1]];
        for (int v = 0; v < num_vertices(); ++v) {
            if (v == s.v[0] || v == s.v[1]) continue;
            const Point2& p = vertices_[v];
            if (std::min(a.x, b.x) - 1e-12 > p.x || p.x > std::max(a.x, b.x) + 1e-12) continue;
            if (std::min(a.y, b.y) - 1e-12 > p.y || p.y > std::max(a.y, b.y) + 1e-12) continue;
            if (segment_distance_sq(p, a, b) < 1e-24)
                return fail("vertex " + std::to_string(v) + " hangs on an edge");
        }
    }
    return true;
}

bool Mesh::patch_separates_points(const std::vector<Point2>& pts) const {
    if (pts.size() < 2) return true;
    // patch of T contains point p iff some element containing p touches T
    std::vector<std::vector<int>> holders(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (int t = 0; t < num_elements(); ++t)
            if (contains(t, pts[i])) holders[i].push_back(t);
    for (int t = 0; t < num_elements(); ++t) {
        const auto& e = elements_[t];
        int found = 0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            bool touches = false;
            for (int u : holders[i]) {
                const auto& f = elements_[u];
                for (int a = 0; a < 3 && !touches; ++a)
                    for (int b = 0; b < 3; ++b)
                        if (f[a] == e[b]) { touches = true; break; }
                if (touches) break;
            }
            if (touches && ++found > 1) return false;
        }
    }
    return true;
}

void Mesh::write_text(std::ostream& out) const {
    out << num_vertices() << ' ' << num_elements() << '\n';
    out << std::setprecision(17);
    for (const Point2& p : vertices_) out << p.x << ' ' << p.y << '\n';
    for (const auto& e : elements_) out << e[0] << ' ' << e[1] << ' ' << e[2] << '\n';
}

Mesh Mesh::read_text(std::istream& in) {
    int nv = 0, nt = 0;
    if (!(in >> nv >> nt) || nv < 3 || nt < 1)
        throw std::runtime_error("Mesh::read_text: bad header");
    std::vector<Point2> verts(nv);
    for (auto& p : verts)
        if (!(in >> p.x >> p.y)) throw std::runtime_error("Mesh::read_text: bad vertex line");
    std::vector<std::array<int, 3>> elems(nt);
    for (auto& e : elems)
        if (!(in >> e[0] >> e[1] >> e[2]))
            throw std::runtime_error("Mesh::read_text: bad element line");
    return Mesh(std::move(verts), std::move(elems));
}

void Mesh::write_vtk(std::ostream& out) const {
    out << "# vtk DataFile Version 3.0\ntriangulation\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << num_vertices() << " double\n";
    out << std::setprecision(17);
    for (const Point2& p : vertices_) out << p.x << ' ' << p.y << " 0\n";
    out << "CELLS " << num_elements() << ' ' << 4 * num_elements() << '\n';
    for (const auto& e : elements_) out << "3 " << e[0] << ' ' << e[1] << ' ' << e[2] << '\n';
    out << "CELL_TYPES " << num_elements() << '\n';
    for (int t = 0; t < num_elements(); ++t) out << "5\n";
}

Mesh uniform_refine(const Mesh& mesh, int sweeps) {
    Mesh out = mesh;
    for (int s = 0; s < sweeps; ++s) {
        std::vector<int> all(out.num_elements());
        for (int t = 0; t < out.num_elements(); ++t) all[t] = t;
        out = out.bisect(all);
    }
    return out;
}

Mesh initial_mesh(Domain domain) {
    if (domain == Domain::unit_square) {
        std::vector<Point2> v = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        std::vector<std::array<int, 3>> e = {{0, 1, 2}, {0, 2, 3}};
        return uniform_refine(Mesh(std::move(v), std::move(e)), 4);
    }
    if (domain == Domain::l_shape) {
        // (0,1)^2 without [0.5,1)x(0,0.5]; fan around the re-entrant corner
        std::vector<Point2> v = {{0.5, 0.5}, {1, 0.5}, {1, 1}, {0.5, 1},
                                 {0, 1},     {0, 0.5}, {0, 0}, {0.5, 0}};
        std::vector<std::array<int, 3>> e = {{0, 1, 2}, {0, 2, 3}, {0, 3, 4},
                                             {0, 4, 5}, {0, 5, 6}, {0, 6, 7}};
        return uniform_refine(Mesh(std::move(v), std::move(e)), 2);
    }
    throw std::invalid_argument("initial_mesh: unknown domain selector");
}

}  // namespace safem
