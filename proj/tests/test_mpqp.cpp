#include <doctest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "gnex/mpqp.hpp"
#include "gnex/qp.hpp"

using namespace gnex;

namespace {

Matrix rowvec(std::initializer_list<double> v) {
    Matrix M(1, static_cast<Eigen::Index>(v.size()));
    int i = 0;
    for (double x : v) M(0, i++) = x;
    return M;
}

// Agent 2 of the duopoly as a standalone parametric QP with
// theta = (x_1, p_c, p_1).
MpqpProblem duopoly_agent2() {
    MpqpProblem mp;
    mp.Q = Matrix::Constant(1, 1, 2.0);
    mp.c_bar = Vector::Zero(1);
    mp.F_bar = rowvec({1, 0, 0});
    mp.A = (Matrix(3, 1) << -1, 0, -1).finished();
    mp.b = Vector::Zero(3);
    mp.B_bar = (Matrix(3, 3) << 1, 1, 0, 1, 0, 0, 0, 0, 0).finished();
    mp.theta_box = Polyhedron::box((Vector(3) << 0, -10, -10).finished(),
                                   (Vector(3) << 10, 10, 10).finished());
    return mp;
}

}  // namespace

// Agent 1 of the duopoly with theta = (x_2, p_c, p_1).
static MpqpProblem duopoly_agent1() {
    MpqpProblem mp;
    mp.Q = Matrix::Constant(1, 1, 1.0);
    mp.c_bar = Vector::Zero(1);
    mp.F_bar = (Matrix(1, 3) << -1, 0, 1).finished();
    mp.A = (Matrix(3, 1) << -1, -1, 0).finished();
    mp.b = Vector::Zero(3);
    mp.B_bar = (Matrix(3, 3) << 1, 1, 0, 0, 0, 0, 1, 0, 0).finished();
    mp.theta_box = Polyhedron::box((Vector(3) << 0, -10, -10).finished(),
                                   (Vector(3) << 10, 10, 10).finished());
    return mp;
}

TEST_CASE("mpqp: empty active set gives the unconstrained law") {
    MpqpProblem mp = duopoly_agent1();
    auto cr = active_set_region(mp, {});
    REQUIRE(cr.has_value());
    // x_1 = x_2 - p_1 wherever no constraint binds
    CHECK((cr->primal.G - rowvec({1, 0, -1})).lpNorm<Eigen::Infinity>() <=
          1e-9);
    CHECK(std::abs(cr->primal.g[0]) <= 1e-9);
    CHECK(cr->dual.G.isZero(1e-12));
}

TEST_CASE("mpqp: lower-dimensional region is rejected") {
    // The second agent's unconstrained law satisfies its own sign bound only
    // on a slice of the parameter box.
    MpqpProblem mp = duopoly_agent2();
    CHECK_FALSE(active_set_region(mp, {}).has_value());
}

TEST_CASE("mpqp: shared-row active set of the duopoly's second agent") {
    MpqpProblem mp = duopoly_agent2();
    auto cr = active_set_region(mp, {0});
    REQUIRE(cr.has_value());
    // -x_1 - x_2 <= p_c active: x_2 = -x_1 - p_c
    CHECK((cr->primal.G - rowvec({-1, -1, 0})).lpNorm<Eigen::Infinity>() <=
          1e-9);
    CHECK(std::abs(cr->primal.g[0]) <= 1e-9);
    // region requires x_1 <= -p_c (multiplier sign) among others
    Vector inside(3);
    inside << 0.5, -2.0, 0.0;
    CHECK(contains(cr->region, inside, 1e-9));
    Vector outside(3);
    outside << 3.0, 2.0, 0.0;
    CHECK_FALSE(contains(cr->region, outside, 1e-9));
}

TEST_CASE("mpqp: duopoly agent maps have the known laws") {
    GNEProblem gp = duopoly_fixture();
    auto maps = best_responses(gp);
    REQUIRE(maps.size() == 2);
    // theta = (x_other, p_c, p_1) for both agents
    CHECK(maps[0].regions.size() == 3);
    CHECK(has_law(maps[0], rowvec({1, 0, -1}), Vector::Zero(1)));   // x_2 - p_1
    CHECK(has_law(maps[0], rowvec({0, 0, 0}), Vector::Zero(1)));    // 0
    CHECK(has_law(maps[0], rowvec({-1, -1, 0}), Vector::Zero(1)));  // -x_2 - p_c

    CHECK(maps[1].regions.size() == 2);
    CHECK(has_law(maps[1], rowvec({0, 0, 0}), Vector::Zero(1)));    // 0
    CHECK(has_law(maps[1], rowvec({-1, -1, 0}), Vector::Zero(1)));  // -x_1 - p_c
}

TEST_CASE("mpqp: unconstrained problem yields a single region") {
    MpqpProblem mp;
    mp.Q = (Matrix(2, 2) << 3, 1, 1, 2).finished();
    mp.c_bar = (Vector(2) << 1, -1).finished();
    mp.F_bar = (Matrix(2, 1) << 2, 0).finished();
    mp.A = Matrix(0, 2);
    mp.b = Vector(0);
    mp.B_bar = Matrix(0, 1);
    mp.theta_box = Polyhedron::box(Vector::Constant(1, -5.0),
                                   Vector::Constant(1, 5.0));
    BestResponseMap map = solve_mpqp(mp);
    REQUIRE(map.regions.size() == 1);
    Matrix Gexp = -mp.Q.inverse() * mp.F_bar;
    Vector gexp = -mp.Q.inverse() * mp.c_bar;
    CHECK((map.regions[0].primal.G - Gexp).lpNorm<Eigen::Infinity>() <= 1e-9);
    CHECK((map.regions[0].primal.g - gexp).lpNorm<Eigen::Infinity>() <= 1e-9);
}

TEST_CASE("mpqp: laws agree with the direct QP oracle") {
    MpqpProblem mp = duopoly_agent2();
    BestResponseMap map = solve_mpqp(mp);
    std::mt19937_64 rng(23);
    int tested = 0;
    for (int s = 0; s < 200; ++s) {
        Vector th = sample_polytope(mp.theta_box, rng);
        QpProblem qp{mp.Q, mp.c_bar + mp.F_bar * th, mp.A,
                     mp.b + mp.B_bar * th};
        QpSolution qs = solve_qp(qp);
        if (qs.status != QpStatus::Optimal) continue;
        bool located = false;
        for (const auto& cr : map.regions) {
            if (!contains(cr.region, th, 1e-9)) continue;
            located = true;
            CHECK((cr.primal(th) - qs.x).lpNorm<Eigen::Infinity>() <= 1e-7);
            // active multipliers agree too
            CHECK((cr.dual(th) - qs.lambda).lpNorm<Eigen::Infinity>() <= 1e-6);
            break;
        }
        CHECK(located);
        ++tested;
    }
    CHECK(tested >= 150);
}

TEST_CASE("mpqp: stored active set matches tight rows at the center") {
    MpqpProblem mp = duopoly_agent2();
    BestResponseMap map = solve_mpqp(mp);
    for (const auto& cr : map.regions) {
        ChebyshevResult ch = chebyshev(cr.region);
        REQUIRE(ch.radius > 0);
        Vector x = cr.primal(ch.center);
        Vector slack = mp.b + mp.B_bar * ch.center - mp.A * x;
        for (int r = 0; r < mp.n_rows(); ++r) {
            const bool tagged =
                std::find(cr.active_set.begin(), cr.active_set.end(), r) !=
                cr.active_set.end();
            CHECK(tagged == (std::abs(slack[r]) <= 1e-7));
        }
    }
}
