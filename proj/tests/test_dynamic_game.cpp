#include <doctest.h>

#include <random>

#include "gnex/dynamic_game.hpp"

using namespace gnex;

namespace {

// Stacked input at step k from the agent-grouped decision vector.
Vector input_at(const DynamicGameSpec& spec, const Vector& z, int k) {
    const int N = spec.n_agents();
    Vector u(spec.m_total());
    int mo = 0, zo = 0;
    for (int i = 0; i < N; ++i) {
        const int mi = static_cast<int>(spec.B[i].cols());
        u.segment(mo, mi) = z.segment(zo + k * mi, mi);
        mo += mi;
        zo += mi * spec.K;
    }
    return u;
}

// Direct sum of the generic stage costs along the predicted trajectory;
// independent re-derivation of what condense() encodes.
Vector horizon_costs(const DynamicGameSpec& spec, const Vector& z,
                     const Vector& p) {
    const int n = spec.n();
    const int N = spec.n_agents();
    const int m = spec.m_total();
    Vector x(n);
    for (int j = 0; j < n; ++j) x[j] = p[spec.state_param_idx[j]];
    Vector u_prev = Vector::Zero(m);
    if (spec.rate_cost)
        for (int j = 0; j < m; ++j) u_prev[j] = p[spec.prev_input_param_idx[j]];
    const Matrix W_d = spec.W_d.size() ? spec.W_d : Matrix::Zero(n, spec.n_p);

    Vector cost = Vector::Zero(N);
    for (int k = 0; k < spec.K; ++k) {
        Vector u = input_at(spec, z, k);
        Vector v = spec.rate_cost ? Vector(u - u_prev) : u;
        for (int i = 0; i < N; ++i) {
            const auto& ac = spec.agents[i];
            const Matrix Fx = ac.Fx.size() ? ac.Fx : Matrix::Zero(n, spec.n_p);
            const Matrix Fu = ac.Fu.size() ? ac.Fu : Matrix::Zero(m, spec.n_p);
            const Vector lx = ac.lx.size() ? ac.lx : Vector::Zero(n);
            const Vector lu = ac.lu.size() ? ac.lu : Vector::Zero(m);
            cost[i] += x.dot(ac.Qx * x) + (Fx * p + lx).dot(x) +
                       v.dot(ac.R * v) + (Fu * p + lu).dot(u);
        }
        Vector xn = spec.A_dyn * x + W_d * p;
        int mo = 0;
        for (int i = 0; i < N; ++i) {
            const int mi = static_cast<int>(spec.B[i].cols());
            xn += spec.B[i] * u.segment(mo, mi);
            mo += mi;
        }
        x = xn;
        u_prev = u;
    }
    return cost;
}

double condensed_cost(const GNEProblem& gp, int i, const Vector& z,
                      const Vector& p) {
    return 0.5 * z.dot(gp.Q[i] * z) + (gp.c[i] + gp.F[i] * p).dot(z);
}

// Battery purchase/usage cost written straight from the benchmark's stage
// formula, bypassing the generic spec fields.
Vector battery_costs(const BatteryParams& bp, const Vector& z,
                     const Vector& p, int K) {
    const int N = static_cast<int>(bp.agents.size());
    Vector x(N), cost = Vector::Zero(N);
    for (int i = 0; i < N; ++i) x[i] = p[i];
    for (int k = 0; k < K; ++k) {
        Vector l(N);
        for (int i = 0; i < N; ++i)
            l[i] = z[i * K + k] + bp.agents[i].d;
        for (int i = 0; i < N; ++i) {
            const auto& ag = bp.agents[i];
            const double gamma2 = p[N + i];
            cost[i] += (ag.gamma1 * l.sum() + gamma2) * l[i] +
                       ag.gamma3 * (x[i] - ag.x_ref) * (x[i] - ag.x_ref);
            x[i] = ag.A * x[i] + ag.B * z[i * K + k];
        }
    }
    return cost;
}

}  // namespace

TEST_CASE("dynamic game: two-mass layout and stable discretization") {
    DynamicGameSpec spec = two_mass_game();
    CHECK(spec.n_p == 8);
    CHECK(spec.p_labels ==
          std::vector<std::string>{"y1", "v1", "y2", "v2", "u1_prev",
                                   "u2_prev", "r1", "r2"});
    CHECK(spec.rate_cost);
    // damped masses: the sampled free dynamics must be a contraction
    CHECK(spec.A_dyn.eigenvalues().cwiseAbs().maxCoeff() < 1.0);
    GNEProblem gp = condense(spec);
    CHECK(gp.n_x() == 20);
    CHECK(gp.n_rows() == 3);  // ordering constraint on 3 prediction steps
}

TEST_CASE("dynamic game: condensed cost matches summed stage costs") {
    std::mt19937_64 rng(71);
    std::normal_distribution<double> gauss;
    for (const bool battery : {false, true}) {
        DynamicGameSpec spec = battery ? battery_game() : two_mass_game();
        GNEProblem gp = condense(spec);
        const int nz = gp.n_x();
        Vector z0 = Vector::Zero(nz);
        for (int trial = 0; trial < 20; ++trial) {
            Vector z = Vector::NullaryExpr(
                nz, [&](Eigen::Index) { return gauss(rng); });
            Vector p = Vector::NullaryExpr(
                spec.n_p, [&](Eigen::Index) { return gauss(rng); });
            Vector ref = horizon_costs(spec, z, p) - horizon_costs(spec, z0, p);
            for (int i = 0; i < gp.N; ++i) {
                const double got =
                    condensed_cost(gp, i, z, p) - condensed_cost(gp, i, z0, p);
                CHECK(got == doctest::Approx(ref[i])
                                 .epsilon(1e-8 * (1.0 + std::abs(ref[i]))));
            }
        }
    }
}

TEST_CASE("dynamic game: battery cost condenses the literal stage formula") {
    BatteryParams bp;
    DynamicGameSpec spec = battery_game(bp);
    GNEProblem gp = condense(spec);
    std::mt19937_64 rng(73);
    std::normal_distribution<double> gauss;
    Vector z0 = Vector::Zero(gp.n_x());
    for (int trial = 0; trial < 20; ++trial) {
        Vector z = Vector::NullaryExpr(gp.n_x(),
                                       [&](Eigen::Index) { return gauss(rng); });
        Vector p = Vector::NullaryExpr(spec.n_p,
                                       [&](Eigen::Index) { return gauss(rng); });
        Vector ref = battery_costs(bp, z, p, bp.K) - battery_costs(bp, z0, p, bp.K);
        for (int i = 0; i < gp.N; ++i) {
            const double got =
                condensed_cost(gp, i, z, p) - condensed_cost(gp, i, z0, p);
            CHECK(got == doctest::Approx(ref[i])
                             .epsilon(1e-8 * (1.0 + std::abs(ref[i]))));
        }
    }
}

TEST_CASE("dynamic game: battery energy price couples the agents' inputs") {
    BatteryParams bp;
    const int K = bp.K;
    DynamicGameSpec spec = battery_game(bp);
    GNEProblem gp = condense(spec);
    // finite-difference the literal stage cost in (u_{1,0}, u_{2,0})
    Vector p = Vector::Zero(spec.n_p);
    auto f = [&](double a, double b) {
        Vector z = Vector::Zero(gp.n_x());
        z[0] = a;
        z[K] = b;
        return battery_costs(bp, z, p, K)[0];
    };
    const double h = 1e-4;
    const double cross =
        (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4 * h * h);
    CHECK(cross == doctest::Approx(bp.agents[0].gamma1).epsilon(1e-5));
    // and the condensed Hessian carries the same coupling
    CHECK(gp.Q[0](0, K) == doctest::Approx(bp.agents[0].gamma1).epsilon(1e-9));
}

TEST_CASE("dynamic game: battery coupling rows cap the aggregate load") {
    BatteryParams bp;
    DynamicGameSpec spec = battery_game(bp);
    GNEProblem gp = condense(spec);
    const int K = bp.K;
    int coupled = 0;
    for (int r = 0; r < gp.n_rows(); ++r) {
        const bool a1 = gp.A.row(r).head(K).cwiseAbs().maxCoeff() > 1e-12;
        const bool a2 = gp.A.row(r).tail(K).cwiseAbs().maxCoeff() > 1e-12;
        if (a1 && a2) {
            ++coupled;
            // the upper-cap row reads the limit from the last parameter
            if (gp.A.row(r).sum() > 0)
                CHECK(gp.S(r, 2 * gp.N) == doctest::Approx(1.0));
        }
    }
    CHECK(coupled == 2 * K);
}

TEST_CASE("dynamic game: constraint rows reproduce the state constraints") {
    DynamicGameSpec spec = two_mass_game();
    GNEProblem gp = condense(spec);
    std::mt19937_64 rng(79);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 50; ++trial) {
        Vector z = Vector::NullaryExpr(gp.n_x(),
                                       [&](Eigen::Index) { return gauss(rng); });
        Vector p = Vector::NullaryExpr(spec.n_p,
                                       [&](Eigen::Index) { return gauss(rng); });
        // roll the dynamics forward and evaluate y1 - y2 + dy at steps 1..3
        Vector x(4);
        for (int j = 0; j < 4; ++j) x[j] = p[spec.state_param_idx[j]];
        for (int k = 1; k <= 3; ++k) {
            Vector u = input_at(spec, z, k - 1);
            x = spec.A_dyn * x + spec.B[0] * u.head(1) + spec.B[1] * u.tail(1);
            const double direct = spec.coupled_state.C.row(0).dot(x) -
                                  spec.coupled_state.c[0];
            const int row = k - 1;  // condensed rows follow the same order
            const double condensed =
                gp.A.row(row).dot(z) - gp.b[row] - gp.S.row(row).dot(p);
            CHECK(direct == doctest::Approx(condensed).epsilon(1e-9));
            CHECK((direct > 0) == (condensed > 0));
        }
    }
}

TEST_CASE("dynamic game: single-step horizon with pure input cost") {
    DynamicGameSpec spec;
    spec.A_dyn = Matrix::Constant(1, 1, 0.5);
    spec.B = {Matrix::Constant(1, 1, 1.0)};
    spec.K = 1;
    spec.n_p = 2;  // (state, reference) with the reference unused
    DynamicGameSpec::AgentCost ac;
    ac.Qx = Matrix::Zero(1, 1);
    ac.R = Matrix::Constant(1, 1, 0.7);
    spec.agents = {ac};
    spec.state_param_idx = {0};
    spec.p_box = Polyhedron::box(Vector::Constant(2, -1.0),
                                 Vector::Constant(2, 1.0));
    spec.u_min = Vector::Constant(1, -10.0);
    spec.u_max = Vector::Constant(1, 10.0);
    GNEProblem gp = condense(spec);
    CHECK(gp.n_x() == 1);
    CHECK(gp.Q[0](0, 0) == doctest::Approx(1.4));  // 0.5 z'Qz = 0.7 u^2
    CHECK(gp.F[0].cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(gp.c[0].cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("dynamic game: closed-loop rollout follows the dynamics") {
    // scalar regulation game with one agent; the explicit law is a single
    // unconstrained region
    DynamicGameSpec spec;
    spec.A_dyn = Matrix::Constant(1, 1, 0.9);
    spec.B = {Matrix::Constant(1, 1, 1.0)};
    spec.K = 2;
    spec.n_p = 1;
    DynamicGameSpec::AgentCost ac;
    ac.Qx = Matrix::Constant(1, 1, 1.0);
    ac.R = Matrix::Constant(1, 1, 0.1);
    spec.agents = {ac};
    spec.state_param_idx = {0};
    spec.p_box = Polyhedron::box(Vector::Constant(1, -10.0),
                                 Vector::Constant(1, 10.0));
    spec.u_min = Vector::Constant(1, -50.0);
    spec.u_max = Vector::Constant(1, 50.0);

    GNEProblem gp = condense(spec);
    ExplicitGNESolution sol = solve_gnep(gp);
    REQUIRE(!sol.regions.empty());

    Vector x0 = Vector::Constant(1, 4.0);
    Trajectory empty = simulate_closed_loop(spec, sol, x0, Vector(),
                                            Vector::Zero(1), 0);
    CHECK(empty.states.rows() == 1);
    CHECK(empty.states(0, 0) == doctest::Approx(4.0));
    CHECK(empty.inputs.rows() == 0);

    Trajectory traj = simulate_closed_loop(spec, sol, x0, Vector(),
                                           Vector::Zero(1), 10);
    REQUIRE(traj.states.rows() == 11);
    for (int t = 0; t < 10; ++t)
        CHECK(traj.states(t + 1, 0) ==
              doctest::Approx(0.9 * traj.states(t, 0) + traj.inputs(t, 0))
                  .epsilon(1e-12));
    // regulation: the state contracts toward the origin
    CHECK(std::abs(traj.states(10, 0)) < 0.1 * std::abs(x0[0]));
}
