#pragma once

#include "gnex/evaluator.hpp"
#include "gnex/gne.hpp"

namespace gnex {

// Finite-horizon linear-quadratic dynamic game. Stage costs are quadratic in
// the global state and the stacked input (or input increment, when
// rate_cost), with parameter-linear terms; constraints are polyhedral. The
// whole problem condenses into a GNEProblem over stacked input sequences.
struct DynamicGameSpec {
    Matrix A_dyn;             // n x n
    std::vector<Matrix> B;    // per agent, n x m_i
    Matrix W_d;               // n x n_p disturbance map (may be 0 x 0)
    int K = 1;                // prediction horizon

    struct AgentCost {
        Matrix Qx;  // n x n
        Matrix R;   // m x m, over the stacked input (or its increment)
        Matrix Fx;  // n x n_p
        Matrix Fu;  // m x n_p
        Vector lx;  // n
        Vector lu;  // m
    };
    std::vector<AgentCost> agents;
    bool rate_cost = false;  // R weights du_k = u_k - u_{k-1}

    struct LinearConstraint {
        Matrix C;
        Vector c;
        Matrix S;
        int rows() const { return static_cast<int>(C.rows()); }
    };
    std::vector<LinearConstraint> local_input;  // per agent, on u_{i,k}
    LinearConstraint coupled_input;             // on u_k, k = 0..K-1
    LinearConstraint coupled_state;             // on x_k, k = 1..steps
    int state_constraint_steps = -1;            // -1: K

    int n_p = 0;
    std::vector<int> state_param_idx;       // where x(t) sits in p
    std::vector<int> prev_input_param_idx;  // where u(t-1) sits in p (rate_cost)
    std::vector<std::string> p_labels;
    Polyhedron p_box;
    Vector u_min, u_max;  // per-input bounds, define the decision box

    int n() const { return static_cast<int>(A_dyn.rows()); }
    int n_agents() const { return static_cast<int>(B.size()); }
    int m_total() const;
    void validate() const;
};

GNEProblem condense(const DynamicGameSpec& spec);

struct BatteryAgentParams {
    double gamma1, gamma3, u_max, l_max, A, B, d, x_ref;
};

struct BatteryParams {
    std::vector<BatteryAgentParams> agents = {
        {0.03, 0.04, 10.0, 10.0, 0.960, 0.71, 1.67, 15.0},
        {0.05, 0.04, 10.0, 10.0, 0.985, 0.76, 1.27, 15.0},
    };
    int K = 5;
    double soc_min = 0.0, soc_max = 30.0;
    double gamma2_min = -1.0, gamma2_max = 1.0;
    double L_max_min = 0.0, L_max_max = 20.0;
};

// Battery charging game: agents buy grid power l = u + d under a shared
// aggregate load cap; p = (x_1..x_N, gamma2_1..gamma2_N, L_max).
DynamicGameSpec battery_game(const BatteryParams& params = {});

// Settings for the battery benchmark: the per-combination families keep
// their lifted (p, y2) sets instead of computing explicit p-projections,
// whose elimination cost is prohibitive at this size.
GneOptions battery_options();

struct TwoMassParams {
    double M1 = 3.0, M2 = 1.0, K_spring = 0.5;
    double beta1 = 1.5, beta2 = 1.0;
    double Ts = 0.2, dy = 0.5;
    int horizon = 10;
    int constraint_steps = 3;
    Matrix Q1 = (Matrix(2, 2) << 1, -1, -1, 1).finished();
    Matrix R1 = (Matrix(2, 2) << 1, 1, 1, 1).finished();
    Matrix Q2 = (Matrix(2, 2) << 0, 0, 0, 1).finished();
    Matrix R2 = (Matrix(2, 2) << 0, 0, 0, 0.1).finished();
    double p_bound = 100.0;
    // The forces are unconstrained; this only bounds the exploration box of
    // the per-agent parametric solves and is kept far outside the reachable
    // range so the box rows drop out as redundant.
    double u_bound = 1e5;
};

// Two masses joined by a spring, one MPC agent per mass, shared ordering
// constraint y2 >= y1 + dy; p = (x(t), u(t-1), r1, r2).
DynamicGameSpec two_mass_game(const TwoMassParams& params = {});

// Enumeration and projection settings under which the two-mass benchmark
// reproduces its reference region counts: single-row shared activity,
// one-sided equilibria carried by the second agent, lifted-only families.
GneOptions two_mass_options();

struct Trajectory {
    Matrix states;        // (steps+1) x n
    Matrix inputs;        // steps x m
    Matrix stage_costs;   // steps x N (constant-in-p offsets dropped)
    std::vector<int> region_index;
    Vector constraint_margin;  // min slack of the condensed constraints
    std::vector<std::string> state_names, input_names;
};

// Receding-horizon rollout of an explicit solution built from
// condense(spec). p_fixed supplies the parameter entries that are neither
// the state nor the previous input (references, prices, limits).
Trajectory simulate_closed_loop(const DynamicGameSpec& spec,
                                const ExplicitGNESolution& sol,
                                const Vector& x0, const Vector& u_prev0,
                                const Vector& p_fixed, int steps,
                                const EvaluationPolicy& policy = {});

}  // namespace gnex
