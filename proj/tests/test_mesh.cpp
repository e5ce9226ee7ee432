#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "safem/mesh.hpp"

using namespace safem;

namespace {

Mesh single_triangle() {
    return Mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}});
}

Mesh diagonal_square() {
    return Mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}});
}

double total_area(const Mesh& m) {
    double a = 0.0;
    for (int t = 0; t < m.num_elements(); ++t) a += m.area(t);
    return a;
}

double shape_ratio(const Mesh& m, int t) {
    const auto& e = m.element(t);
    const Point2 &a = m.vertex(e[0]), &b = m.vertex(e[1]), &c = m.vertex(e[2]);
    const double per = (b - a).norm() + (c - b).norm() + (a - c).norm();
    const double inradius = 2.0 * m.area(t) / per;
    return m.diameter(t) / inradius;
}

}  // namespace

TEST_CASE("initial meshes") {
    SUBCASE("unit square counts and validity") {
        const Mesh m = initial_mesh(Domain::unit_square);
        CHECK(m.num_vertices() == 25);
        CHECK(m.num_elements() == 32);
        CHECK(total_area(m) == doctest::Approx(1.0).epsilon(1e-14));
        std::string why;
        CHECK_MESSAGE(m.conforming(&why), why);
    }
    SUBCASE("l-shape fan and refined mesh") {
        const Mesh m = initial_mesh(Domain::l_shape);
        CHECK(total_area(m) == doctest::Approx(0.75).epsilon(1e-14));
        std::string why;
        CHECK_MESSAGE(m.conforming(&why), why);
        CHECK(m.num_elements() == 24);  // 6 fan triangles, two uniform sweeps
    }
}

TEST_CASE("bisect basics") {
    SUBCASE("single triangle") {
        const Mesh m = single_triangle();
        const Mesh r = m.bisect({0});
        CHECK(r.num_elements() == 2);
        CHECK(r.num_vertices() == 4);
        // longest edge is the hypotenuse; the new vertex is its midpoint
        const Point2 nv = r.vertex(3);
        CHECK(nv.x == doctest::Approx(0.5));
        CHECK(nv.y == doctest::Approx(0.5));
        // parent vertices unchanged
        for (int v = 0; v < 3; ++v) {
            CHECK(r.vertex(v).x == m.vertex(v).x);
            CHECK(r.vertex(v).y == m.vertex(v).y);
        }
        CHECK(r.area(0) + r.area(1) == doctest::Approx(m.area(0)).epsilon(1e-14));
    }
    SUBCASE("closure forces the neighbor") {
        const Mesh m = diagonal_square();
        const Mesh r = m.bisect({0});
        CHECK(r.num_elements() == 4);  // shared diagonal is the longest edge of both
        CHECK(r.num_vertices() == 5);
        std::string why;
        CHECK_MESSAGE(r.conforming(&why), why);
    }
    SUBCASE("two bisect-all sweeps quadruple a compatible mesh") {
        Mesh m = initial_mesh(Domain::unit_square);
        const int nt0 = m.num_elements();
        m = uniform_refine(m, 2);
        CHECK(m.num_elements() == 4 * nt0);
    }
    SUBCASE("bad input") {
        const Mesh m = single_triangle();
        CHECK_THROWS(m.bisect({}));
        CHECK_THROWS(m.bisect({7}));
    }
}

TEST_CASE("genealogy and generations") {
    const Mesh m = diagonal_square();
    const Mesh r = m.bisect({0});
    for (int t = 0; t < r.num_elements(); ++t) {
        CHECK(r.generation()[t] == 1);
        CHECK((r.parent()[t] == 0 || r.parent()[t] == 1));
    }
}

TEST_CASE("locate") {
    const Mesh m = diagonal_square();
    CHECK(m.locate({0.9, 0.1}) == 0);  // below the diagonal
    CHECK(m.locate({0.1, 0.9}) == 1);
    CHECK(m.locate({0.5, 0.5}) == 0);  // on the diagonal: lowest index wins
    CHECK_THROWS(m.locate({2.0, 2.0}));
}

TEST_CASE("patches") {
    const Mesh m = uniform_refine(diagonal_square(), 2);  // 8 elements
    bool saw_interior = false, saw_corner = false;
    for (int t = 0; t < m.num_elements(); ++t) {
        const Patch p = m.patch(t);
        int boundary_sides = 0;
        for (int k = 0; k < 3; ++k)
            if (m.sides()[m.element_side(t, k)].on_boundary()) ++boundary_sides;
        if (boundary_sides == 0) {
            CHECK(p.n_t.size() == 4);
            saw_interior = true;
        }
        if (boundary_sides == 2) {
            CHECK(p.n_t.size() == 2);
            saw_corner = true;
        }
        // n_t is a subset of n_t_star and contains t
        for (int u : p.n_t)
            CHECK(std::find(p.n_t_star.begin(), p.n_t_star.end(), u) != p.n_t_star.end());
        CHECK(std::find(p.n_t.begin(), p.n_t.end(), t) != p.n_t.end());
    }
    CHECK(saw_interior);
    CHECK(saw_corner);
}

TEST_CASE("metrics") {
    SUBCASE("farthest-vertex distance") {
        const Mesh m = single_triangle();
        CHECK(m.metrics({{0, 0}}).d[0] == doctest::Approx(1.0));
        CHECK(m.metrics({{2, 0}}).d[0] == doctest::Approx(std::sqrt(5.0)));
        // several points: the nearest one wins
        CHECK(m.metrics({{2, 0}, {0, 0}}).d[0] == doctest::Approx(1.0));
    }
    SUBCASE("quoted value for min h = 1/8") {
        Mesh m = diagonal_square();
        while (true) {
            double hmin = 1e300;
            for (int t = 0; t < m.num_elements(); ++t) hmin = std::min(hmin, m.diameter(t));
            if (hmin <= 0.125 + 1e-12) {
                CHECK(hmin == doctest::Approx(0.125));
                break;
            }
            m = uniform_refine(m);
        }
        CHECK(m.metrics({}).ell == doctest::Approx(std::log(8.0)).epsilon(1e-10));
    }
    SUBCASE("d omitted without observation points") {
        CHECK(single_triangle().metrics({}).d.empty());
    }
}

TEST_CASE("random refinement keeps meshes conforming") {
    std::mt19937 rng(20240811u);
    Mesh m = initial_mesh(Domain::unit_square);
    const double area0 = total_area(m);
    for (int round = 0; round < 50; ++round) {
        std::uniform_int_distribution<int> count(1, std::max(1, m.num_elements() / 4));
        std::uniform_int_distribution<int> pick(0, m.num_elements() - 1);
        std::vector<int> marked;
        const int n = count(rng);
        for (int i = 0; i < n; ++i) marked.push_back(pick(rng));
        const Mesh next = m.bisect(marked);
        for (int t = 0; t < next.num_elements(); ++t) CHECK(next.area(t) > 0.0);
        m = next;
    }
    std::string why;
    CHECK_MESSAGE(m.conforming(&why), why);
    CHECK(total_area(m) == doctest::Approx(area0).epsilon(1e-13));
}

TEST_CASE("shape regularity under point refinement on the L-shape") {
    Mesh m = initial_mesh(Domain::l_shape);
    const Point2 corner{0.5, 0.5};
    for (int round = 0; round < 20; ++round) {
        std::vector<int> marked;
        for (int t = 0; t < m.num_elements(); ++t)
            if (m.contains(t, corner)) marked.push_back(t);
        m = m.bisect(marked);
    }
    double worst = 0.0;
    for (int t = 0; t < m.num_elements(); ++t) worst = std::max(worst, shape_ratio(m, t));
    CHECK(worst <= 50.0);
}

TEST_CASE("patch separation of observation points") {
    Mesh m = initial_mesh(Domain::unit_square);
    const std::vector<Point2> pts = {{0.25, 0.25}, {0.25, 0.75}, {0.75, 0.25}, {0.75, 0.75}};
    int sweeps = 0;
    while (!m.patch_separates_points(pts)) {
        m = uniform_refine(m);
        ++sweeps;
        REQUIRE(sweeps < 8);
    }
    CHECK(m.patch_separates_points(pts));
    // single point is always separated
    CHECK(initial_mesh(Domain::unit_square).patch_separates_points({{0.5, 0.5}}));
}

TEST_CASE("text round trip and vtk export") {
    const Mesh m = uniform_refine(diagonal_square(), 1);
    std::stringstream ss;
    m.write_text(ss);
    const Mesh back = Mesh::read_text(ss);
    REQUIRE(back.num_vertices() == m.num_vertices());
    REQUIRE(back.num_elements() == m.num_elements());
    for (int v = 0; v < m.num_vertices(); ++v) {
        CHECK(back.vertex(v).x == m.vertex(v).x);
        CHECK(back.vertex(v).y == m.vertex(v).y);
    }
    std::stringstream vtk;
    m.write_vtk(vtk);
    CHECK(vtk.str().find("POINTS") != std::string::npos);
    CHECK(vtk.str().find("CELLS") != std::string::npos);
}

TEST_CASE("boundary distance") {
    const Mesh m = initial_mesh(Domain::unit_square);
    CHECK(m.boundary_distance({0.5, 0.5}) == doctest::Approx(0.5));
    CHECK(m.boundary_distance({0.25, 0.5}) == doctest::Approx(0.25));
    const Mesh l = initial_mesh(Domain::l_shape);
    CHECK(l.boundary_distance({0.25, 0.25}) == doctest::Approx(0.25));
    CHECK(l.boundary_distance({0.25, 0.75}) == doctest::Approx(0.25));
}

TEST_CASE("degenerate construction is rejected") {
    CHECK_THROWS(Mesh({{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}}));   // collinear
    CHECK_THROWS(Mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 2, 1}}));   // clockwise
}
