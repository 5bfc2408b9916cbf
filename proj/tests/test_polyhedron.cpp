#include <doctest.h>

#include <random>

#include "gnex/lp.hpp"
#include "gnex/mpqp.hpp"
#include "gnex/polyhedron.hpp"

using namespace gnex;

namespace {

Polyhedron unit_box(int n) {
    return Polyhedron::box(Vector::Constant(n, -1.0), Vector::Constant(n, 1.0));
}

}  // namespace

TEST_CASE("polyhedron: chebyshev of the unit box") {
    ChebyshevResult r = chebyshev(unit_box(2));
    CHECK(r.radius == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.center.norm() <= 1e-8);
}

TEST_CASE("polyhedron: chebyshev detects emptiness") {
    Matrix C(2, 1);
    C << 1, -1;
    Vector d(2);
    d << 0, -1;  // z <= 0 and z >= 1
    CHECK(chebyshev(Polyhedron(C, d)).radius < 0);
    CHECK_FALSE(is_full_dimensional(Polyhedron(C, d)));
}

TEST_CASE("polyhedron: single point is not full-dimensional") {
    Matrix C(2, 1);
    C << 1, -1;
    Vector d = Vector::Zero(2);  // z = 0
    CHECK_FALSE(is_full_dimensional(Polyhedron(C, d)));
    CHECK(is_full_dimensional(unit_box(1)));
}

TEST_CASE("polyhedron: chebyshev invariant under duplication and scaling") {
    Matrix C(3, 2);
    C << 1, 1, -1, 0, 0, -1;
    Vector d(3);
    d << 2, 0, 0;
    const double r0 = chebyshev(Polyhedron(C, d)).radius;

    Matrix C2(6, 2);
    C2 << C, 5.0 * C;  // rescaled duplicates; normalization restores them
    Vector d2(6);
    d2 << d, 5.0 * d;
    CHECK(chebyshev(Polyhedron(C2, d2)).radius ==
          doctest::Approx(r0).epsilon(1e-9));
}

TEST_CASE("polyhedron: remove_redundant drops dominated rows") {
    Matrix C(2, 1);
    C << 1, 1;
    Vector d(2);
    d << 1, 2;  // z <= 1 dominates z <= 2
    Polyhedron r = remove_redundant(Polyhedron(C, d));
    REQUIRE(r.rows() == 1);
    CHECK(r.d()[0] == doctest::Approx(1.0));
}

TEST_CASE("polyhedron: remove_redundant on a duplicated box") {
    Polyhedron b = unit_box(2);
    Matrix C(8, 2);
    C << b.C(), b.C();
    Vector d(8);
    d << b.d(), b.d();
    Polyhedron r = remove_redundant(Polyhedron(C, d));
    CHECK(r.rows() == 4);
    CHECK(poly_equal(r, b));
}

TEST_CASE("polyhedron: remove_redundant preserves the set") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss;
    Matrix C(12, 2);
    Vector d(12);
    for (int i = 0; i < 12; ++i) {
        C.row(i) << gauss(rng), gauss(rng);
        d[i] = 1.0 + std::abs(gauss(rng));
    }
    Polyhedron P(C, d);
    Polyhedron R = remove_redundant(P);
    CHECK(R.rows() <= P.rows());
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (int s = 0; s < 100; ++s) {
        Vector z(2);
        z << u(rng), u(rng);
        CHECK(contains(P, z, 1e-9) == contains(R, z, 1e-9));
    }
}

TEST_CASE("polyhedron: intersect stacks rows") {
    Matrix C1(1, 1), C2(1, 1);
    C1 << 1;
    C2 << -1;
    Polyhedron I = intersect(Polyhedron(C1, Vector::Ones(1)),
                             Polyhedron(C2, Vector::Zero(1)));
    CHECK(I.rows() == 2);
    CHECK(contains(I, Vector::Constant(1, 0.5), 0));
    CHECK_FALSE(contains(I, Vector::Constant(1, 1.5), 0));
    CHECK_FALSE(contains(I, Vector::Constant(1, -0.5), 0));
}

TEST_CASE("polyhedron: contains") {
    Polyhedron b = unit_box(2);
    CHECK(contains(b, Vector::Zero(2), 0.0));
    CHECK_FALSE(contains(b, (Vector(2) << 2, 0).finished(), 0.0));
    CHECK(contains(b, (Vector(2) << 1.0 + 1e-10, 0).finished(), 1e-9));
}

TEST_CASE("polyhedron: eliminate an equated variable") {
    // 0 <= y <= 1, x = y  -> projection on x is [0, 1]
    Matrix C(4, 2);  // vars (x, y)
    C << 0, 1, 0, -1, 1, -1, -1, 1;
    Vector d(4);
    d << 1, 0, 0, 0;
    Polyhedron proj = eliminate(Polyhedron(C, d), {1});
    CHECK(proj.dim() == 1);
    CHECK(contains(proj, Vector::Constant(1, 0.5), 1e-9));
    CHECK_FALSE(contains(proj, Vector::Constant(1, 1.1), 1e-9));
    CHECK_FALSE(contains(proj, Vector::Constant(1, -0.1), 1e-9));
}

TEST_CASE("polyhedron: eliminate independent box variables") {
    Polyhedron b3 = unit_box(3);
    Polyhedron proj = eliminate(b3, {2});
    CHECK(proj.dim() == 2);
    CHECK(poly_equal(proj, unit_box(2)));
}

TEST_CASE("polyhedron: projection soundness on random systems") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> gauss;
    Matrix C(10, 3);
    Vector d(10);
    for (int i = 0; i < 10; ++i) {
        C.row(i) << gauss(rng), gauss(rng), gauss(rng);
        d[i] = 1.0 + std::abs(gauss(rng));
    }
    Polyhedron P(C, d);
    Polyhedron proj = eliminate(P, {2});
    // feasible points project into the projection
    for (int s = 0; s < 50; ++s) {
        Vector z = sample_polytope(P, rng);
        CHECK(contains(proj, z.head(2), 1e-7));
    }
    // interior projection points lift back to a feasible point
    for (int s = 0; s < 50; ++s) {
        Vector w = sample_polytope(proj, rng);
        Matrix Az = C.rightCols(1);
        Vector bz = d - C.leftCols(2) * w;
        CHECK(lp_feasible(Az, bz + Vector::Constant(bz.size(), 1e-7)));
    }
}

TEST_CASE("polyhedron: support and subset") {
    Polyhedron b = unit_box(2);
    CHECK(support(b, (Vector(2) << 1, 0).finished()) ==
          doctest::Approx(1.0).epsilon(1e-9));
    Polyhedron half = Polyhedron((Matrix(1, 2) << 1, 0).finished(),
                                 Vector::Constant(1, 0.5));
    CHECK(poly_subset(intersect(b, half), b));
    CHECK_FALSE(poly_subset(b, intersect(b, half)));
}

TEST_CASE("polyhedron: bounding box") {
    Matrix C(3, 2);
    C << 1, 1, -1, 0, 0, -1;  // triangle x,y >= 0, x + y <= 2
    Vector d(3);
    d << 2, 0, 0;
    Vector lb, ub;
    bounding_box(Polyhedron(C, d), lb, ub);
    CHECK(lb[0] == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(ub[0] == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(lb[1] == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(ub[1] == doctest::Approx(2.0).epsilon(1e-8));
}
