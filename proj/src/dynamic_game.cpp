#include "gnex/dynamic_game.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstdio>
#include <limits>

namespace gnex {

int DynamicGameSpec::m_total() const {
    int m = 0;
    for (const auto& Bi : B) m += static_cast<int>(Bi.cols());
    return m;
}

void DynamicGameSpec::validate() const {
    if (A_dyn.rows() != A_dyn.cols())
        throw DimensionError("dynamic game: A must be square");
    if (B.empty()) throw DimensionError("dynamic game: no agents");
    for (const auto& Bi : B)
        if (Bi.rows() != A_dyn.rows())
            throw DimensionError("dynamic game: B row count mismatch");
    if (agents.size() != B.size())
        throw DimensionError("dynamic game: one cost per agent required");
    if (K < 1) throw GnexError("dynamic game: horizon must be >= 1");
    const int m = m_total();
    for (const auto& ac : agents) {
        if (ac.Qx.rows() != A_dyn.rows() || ac.Qx.cols() != A_dyn.rows() ||
            ac.R.rows() != m || ac.R.cols() != m)
            throw DimensionError("dynamic game: cost dimension mismatch");
    }
    if (static_cast<int>(state_param_idx.size()) != A_dyn.rows())
        throw DimensionError("dynamic game: state_param_idx must index every state");
    if (rate_cost && static_cast<int>(prev_input_param_idx.size()) != m)
        throw DimensionError(
            "dynamic game: prev_input_param_idx must index every input");
    if (!local_input.empty() &&
        static_cast<int>(local_input.size()) != n_agents())
        throw DimensionError("dynamic game: one local input constraint per agent");
    if (p_box.dim() != n_p)
        throw DimensionError("dynamic game: p_box dimension mismatch");
    if (u_min.size() != m || u_max.size() != m)
        throw DimensionError("dynamic game: input bounds must cover every input");
}

namespace {

Matrix zero_or(const Matrix& M, int rows, int cols) {
    if (M.size() == 0) return Matrix::Zero(rows, cols);
    if (M.rows() != rows || M.cols() != cols)
        throw DimensionError("dynamic game: unexpected matrix shape");
    return M;
}

}  // namespace

GNEProblem condense(const DynamicGameSpec& spec) {
    spec.validate();
    const int n = spec.n();
    const int N = spec.n_agents();
    const int m = spec.m_total();
    const int K = spec.K;
    const int np = spec.n_p;
    const int nz = m * K;

    std::vector<int> m_i(N), m_off(N), z_off(N);
    {
        int mo = 0, zo = 0;
        for (int i = 0; i < N; ++i) {
            m_i[i] = static_cast<int>(spec.B[i].cols());
            m_off[i] = mo;
            z_off[i] = zo;
            mo += m_i[i];
            zo += m_i[i] * K;
        }
    }

    Matrix B_all(n, m);
    for (int i = 0; i < N; ++i) B_all.middleCols(m_off[i], m_i[i]) = spec.B[i];

    Matrix W_x = Matrix::Zero(n, np);
    for (int j = 0; j < n; ++j) W_x(j, spec.state_param_idx[j]) = 1.0;
    const Matrix W_d = zero_or(spec.W_d, n, np);

    Matrix P_prev = Matrix::Zero(m, np);
    if (spec.rate_cost)
        for (int j = 0; j < m; ++j) P_prev(j, spec.prev_input_param_idx[j]) = 1.0;

    // T[k]: stacked input at step k as a function of the stacked decision z,
    // whose layout groups all of agent i's inputs (step-major) together.
    std::vector<Matrix> T(K, Matrix::Zero(m, nz));
    for (int k = 0; k < K; ++k)
        for (int i = 0; i < N; ++i)
            T[k].block(m_off[i], z_off[i] + k * m_i[i], m_i[i], m_i[i])
                .setIdentity();

    // x_k = Gamma[k] z + Phi[k] p
    std::vector<Matrix> Gamma(K + 1), Phi(K + 1);
    Gamma[0] = Matrix::Zero(n, nz);
    Phi[0] = W_x;
    for (int k = 0; k < K; ++k) {
        Gamma[k + 1] = spec.A_dyn * Gamma[k] + B_all * T[k];
        Phi[k + 1] = spec.A_dyn * Phi[k] + W_d;
    }

    GNEProblem gp;
    gp.N = N;
    gp.block_sizes.resize(N);
    for (int i = 0; i < N; ++i) gp.block_sizes[i] = m_i[i] * K;
    gp.Q.resize(N);
    gp.c.resize(N);
    gp.F.resize(N);

    for (int i = 0; i < N; ++i) {
        const auto& ac = spec.agents[i];
        const Matrix Fx = zero_or(ac.Fx, n, np);
        const Matrix Fu = zero_or(ac.Fu, m, np);
        const Vector lx = ac.lx.size() ? ac.lx : Vector::Zero(n);
        const Vector lu = ac.lu.size() ? ac.lu : Vector::Zero(m);

        Matrix H = Matrix::Zero(nz, nz);
        Matrix L = Matrix::Zero(nz, np);
        Vector f = Vector::Zero(nz);
        for (int k = 0; k < K; ++k) {
            H += Gamma[k].transpose() * ac.Qx * Gamma[k];
            L += 2.0 * Gamma[k].transpose() * ac.Qx * Phi[k] +
                 Gamma[k].transpose() * Fx;
            f += Gamma[k].transpose() * lx;

            Matrix D = T[k];
            if (spec.rate_cost && k > 0) D -= T[k - 1];
            H += D.transpose() * ac.R * D;
            if (spec.rate_cost && k == 0)
                L -= 2.0 * D.transpose() * ac.R * P_prev;

            L += T[k].transpose() * Fu;
            f += T[k].transpose() * lu;
        }
        gp.Q[i] = H + H.transpose();  // cost = 0.5 z'Q z + ...
        gp.c[i] = f;
        gp.F[i] = L;
    }

    // Constraint rows: per-agent local input (agent-, then step-major),
    // coupled input per step, coupled state per step.
    int n_rows = 0;
    for (int i = 0; i < N && !spec.local_input.empty(); ++i)
        n_rows += spec.local_input[i].rows() * K;
    n_rows += spec.coupled_input.rows() * K;
    const int Kc = spec.state_constraint_steps < 0
                       ? K
                       : std::min(spec.state_constraint_steps, K);
    n_rows += spec.coupled_state.rows() * Kc;

    gp.A = Matrix::Zero(n_rows, nz);
    gp.b = Vector::Zero(n_rows);
    gp.S = Matrix::Zero(n_rows, np);
    int r = 0;
    if (!spec.local_input.empty()) {
        for (int i = 0; i < N; ++i) {
            const auto& lc = spec.local_input[i];
            const int nr = lc.rows();
            if (nr == 0) continue;
            if (lc.C.cols() != m_i[i])
                throw DimensionError("dynamic game: local constraint width");
            const Matrix Sc = zero_or(lc.S, nr, np);
            for (int k = 0; k < K; ++k) {
                gp.A.block(r, z_off[i] + k * m_i[i], nr, m_i[i]) = lc.C;
                gp.b.segment(r, nr) = lc.c;
                gp.S.middleRows(r, nr) = Sc;
                r += nr;
            }
        }
    }
    if (spec.coupled_input.rows() > 0) {
        const auto& cc = spec.coupled_input;
        const Matrix Sc = zero_or(cc.S, cc.rows(), np);
        for (int k = 0; k < K; ++k) {
            gp.A.middleRows(r, cc.rows()) = cc.C * T[k];
            gp.b.segment(r, cc.rows()) = cc.c;
            gp.S.middleRows(r, cc.rows()) = Sc;
            r += cc.rows();
        }
    }
    if (spec.coupled_state.rows() > 0) {
        const auto& cs = spec.coupled_state;
        if (cs.C.cols() != n)
            throw DimensionError("dynamic game: state constraint width");
        const Matrix Sc = zero_or(cs.S, cs.rows(), np);
        for (int k = 1; k <= Kc; ++k) {
            gp.A.middleRows(r, cs.rows()) = cs.C * Gamma[k];
            gp.b.segment(r, cs.rows()) = cs.c;
            gp.S.middleRows(r, cs.rows()) = Sc - cs.C * Phi[k];
            r += cs.rows();
        }
    }

    gp.p_box = spec.p_box;
    gp.x_min = Vector::Zero(nz);
    gp.x_max = Vector::Zero(nz);
    for (int i = 0; i < N; ++i)
        for (int k = 0; k < K; ++k) {
            gp.x_min.segment(z_off[i] + k * m_i[i], m_i[i]) =
                spec.u_min.segment(m_off[i], m_i[i]);
            gp.x_max.segment(z_off[i] + k * m_i[i], m_i[i]) =
                spec.u_max.segment(m_off[i], m_i[i]);
        }
    gp.validate();
    return gp;
}

DynamicGameSpec battery_game(const BatteryParams& params) {
    const int N = static_cast<int>(params.agents.size());
    if (N < 1) throw GnexError("battery_game: no agents");
    const int np = 2 * N + 1;

    DynamicGameSpec spec;
    spec.A_dyn = Matrix::Zero(N, N);
    spec.W_d = Matrix::Zero(N, np);
    spec.K = params.K;
    spec.n_p = np;
    double d_sum = 0.0;
    for (const auto& ag : params.agents) d_sum += ag.d;

    Vector ones = Vector::Ones(N);
    for (int i = 0; i < N; ++i) {
        const auto& ag = params.agents[i];
        if (ag.A < 0.0 || ag.A > 1.0 || ag.B < 0.0 || ag.B > 1.0)
            std::fprintf(stderr,
                         "battery_game: warning: agent %d retention/charge "
                         "coefficients outside [0,1]\n",
                         i + 1);
        spec.A_dyn(i, i) = ag.A;
        Matrix Bi = Matrix::Zero(N, 1);
        Bi(i, 0) = ag.B;
        spec.B.push_back(Bi);

        DynamicGameSpec::AgentCost ac;
        ac.Qx = Matrix::Zero(N, N);
        ac.Qx(i, i) = ag.gamma3;
        ac.lx = Vector::Zero(N);
        ac.lx[i] = -2.0 * ag.gamma3 * ag.x_ref;
        ac.Fx = Matrix::Zero(N, np);
        // purchase cost (gamma1 * total load + gamma2_i) * load_i with
        // load = u + d, expanded in u; p-only offsets dropped
        Vector ei = Vector::Zero(N);
        ei[i] = 1.0;
        ac.R = 0.5 * ag.gamma1 *
               (ei * ones.transpose() + ones * ei.transpose());
        ac.lu = ag.gamma1 * (d_sum * ei + ag.d * ones);
        ac.Fu = Matrix::Zero(N, np);
        ac.Fu(i, N + i) = 1.0;
        spec.agents.push_back(ac);

        // 0 <= load_i <= l_max and |u_i| <= u_max
        DynamicGameSpec::LinearConstraint lc;
        lc.C = (Matrix(4, 1) << 1, -1, 1, -1).finished();
        lc.c = (Vector(4) << ag.u_max, ag.u_max, ag.l_max - ag.d, ag.d)
                   .finished();
        lc.S = Matrix::Zero(4, np);
        spec.local_input.push_back(lc);
    }

    // 0 <= total load <= L_max, with L_max the last parameter
    spec.coupled_input.C = Matrix(2, N);
    spec.coupled_input.C.row(0) = ones.transpose();
    spec.coupled_input.C.row(1) = -ones.transpose();
    spec.coupled_input.c = (Vector(2) << -d_sum, d_sum).finished();
    spec.coupled_input.S = Matrix::Zero(2, np);
    spec.coupled_input.S(0, 2 * N) = 1.0;
    spec.state_constraint_steps = 0;

    spec.state_param_idx.resize(N);
    std::vector<std::string> labels(np);
    Vector plo(np), phi(np);
    for (int i = 0; i < N; ++i) {
        spec.state_param_idx[i] = i;
        labels[i] = "soc" + std::to_string(i + 1);
        labels[N + i] = "price" + std::to_string(i + 1);
        plo[i] = params.soc_min;
        phi[i] = params.soc_max;
        plo[N + i] = params.gamma2_min;
        phi[N + i] = params.gamma2_max;
    }
    labels[2 * N] = "cap";
    plo[2 * N] = params.L_max_min;
    phi[2 * N] = params.L_max_max;
    spec.p_labels = labels;
    spec.p_box = Polyhedron::box(plo, phi, labels);

    spec.u_min = Vector(N);
    spec.u_max = Vector(N);
    for (int i = 0; i < N; ++i) {
        const auto& ag = params.agents[i];
        spec.u_min[i] = std::max(-ag.u_max, -ag.d);
        spec.u_max[i] = std::min(ag.u_max, ag.l_max - ag.d);
    }
    return spec;
}

DynamicGameSpec two_mass_game(const TwoMassParams& params) {
    const int np = 8;
    DynamicGameSpec spec;
    spec.n_p = np;
    spec.K = params.horizon;
    spec.rate_cost = true;

    // state (y1, v1, y2, v2): spring couples the masses, inputs push them
    Matrix Ac = Matrix::Zero(4, 4);
    Ac(0, 1) = 1.0;
    Ac(1, 0) = -params.K_spring / params.M1;
    Ac(1, 1) = -params.beta1 / params.M1;
    Ac(1, 2) = params.K_spring / params.M1;
    Ac(2, 3) = 1.0;
    Ac(3, 0) = params.K_spring / params.M2;
    Ac(3, 2) = -params.K_spring / params.M2;
    Ac(3, 3) = -params.beta2 / params.M2;
    Matrix Bc = Matrix::Zero(4, 2);
    Bc(1, 0) = 1.0 / params.M1;
    Bc(3, 1) = -1.0 / params.M2;

    Matrix E = Matrix::Zero(6, 6);
    E.topLeftCorner(4, 4) = Ac;
    E.topRightCorner(4, 2) = Bc;
    Matrix Ed = (E * params.Ts).exp();
    spec.A_dyn = Ed.topLeftCorner(4, 4);
    Matrix Bd = Ed.topRightCorner(4, 2);
    spec.B = {Bd.col(0), Bd.col(1)};
    spec.W_d = Matrix::Zero(4, np);

    Matrix Cy = Matrix::Zero(2, 4);  // output positions
    Cy(0, 0) = 1.0;
    Cy(1, 2) = 1.0;
    Matrix Mr = Matrix::Zero(2, np);  // references live at p(6), p(7)
    Mr(0, 6) = 1.0;
    Mr(1, 7) = 1.0;

    for (int i = 0; i < 2; ++i) {
        const Matrix& Qi = i == 0 ? params.Q1 : params.Q2;
        const Matrix& Ri = i == 0 ? params.R1 : params.R2;
        DynamicGameSpec::AgentCost ac;
        ac.Qx = Cy.transpose() * Qi * Cy;
        ac.Fx = -2.0 * Cy.transpose() * Qi * Mr;
        ac.lx = Vector::Zero(4);
        ac.R = Ri;
        ac.Fu = Matrix::Zero(2, np);
        ac.lu = Vector::Zero(2);
        spec.agents.push_back(ac);
    }

    // keep the masses ordered: y1 - y2 <= -dy over the first few steps
    spec.coupled_state.C = (Matrix(1, 4) << 1, 0, -1, 0).finished();
    spec.coupled_state.c = (Vector(1) << -params.dy).finished();
    spec.coupled_state.S = Matrix::Zero(1, np);
    spec.state_constraint_steps = params.constraint_steps;

    spec.state_param_idx = {0, 1, 2, 3};
    spec.prev_input_param_idx = {4, 5};
    spec.p_labels = {"y1", "v1", "y2", "v2", "u1_prev", "u2_prev", "r1", "r2"};
    spec.p_box = Polyhedron::box(Vector::Constant(np, -params.p_bound),
                                 Vector::Constant(np, params.p_bound),
                                 spec.p_labels);
    spec.u_min = Vector::Constant(2, -params.u_bound);
    spec.u_max = Vector::Constant(2, params.u_bound);
    return spec;
}

GneOptions battery_options() {
    GneOptions opts;
    opts.fm_max_dim = -1;
    return opts;
}

GneOptions two_mass_options() {
    GneOptions opts;
    opts.max_shared_active = 1;
    opts.one_sided_agent = 1;
    opts.fm_max_dim = -1;
    return opts;
}

Trajectory simulate_closed_loop(const DynamicGameSpec& spec,
                                const ExplicitGNESolution& sol,
                                const Vector& x0, const Vector& u_prev0,
                                const Vector& p_fixed, int steps,
                                const EvaluationPolicy& policy) {
    spec.validate();
    const int n = spec.n();
    const int N = spec.n_agents();
    const int m = spec.m_total();
    const int np = spec.n_p;
    if (x0.size() != n || p_fixed.size() != np)
        throw DimensionError("simulate: dimension mismatch");
    Vector u_prev = u_prev0.size() ? u_prev0 : Vector::Zero(m);
    if (u_prev.size() != m)
        throw DimensionError("simulate: previous input dimension mismatch");

    const GNEProblem gp = condense(spec);
    const Matrix W_d = zero_or(spec.W_d, n, np);

    std::vector<int> m_i(N), m_off(N), z_off(N);
    {
        int mo = 0, zo = 0;
        for (int i = 0; i < N; ++i) {
            m_i[i] = static_cast<int>(spec.B[i].cols());
            m_off[i] = mo;
            z_off[i] = zo;
            mo += m_i[i];
            zo += m_i[i] * spec.K;
        }
    }

    Trajectory traj;
    traj.states = Matrix::Zero(steps + 1, n);
    traj.inputs = Matrix::Zero(steps, m);
    traj.stage_costs = Matrix::Zero(steps, N);
    traj.region_index.resize(steps);
    traj.constraint_margin = Vector::Zero(steps);
    for (int j = 0; j < n; ++j)
        traj.state_names.push_back("x" + std::to_string(j + 1));
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < m_i[i]; ++j)
            traj.input_names.push_back("u" + std::to_string(i + 1) +
                                       (m_i[i] > 1 ? "_" + std::to_string(j + 1)
                                                   : ""));

    Vector x = x0;
    for (int t = 0; t < steps; ++t) {
        traj.states.row(t) = x.transpose();
        Vector p = p_fixed;
        for (int j = 0; j < n; ++j) p[spec.state_param_idx[j]] = x[j];
        if (spec.rate_cost)
            for (int j = 0; j < m; ++j) p[spec.prev_input_param_idx[j]] = u_prev[j];

        EvaluateResult res = evaluate(sol, p, policy);
        traj.region_index[t] = res.region_index;
        traj.constraint_margin[t] =
            gp.n_rows() == 0
                ? std::numeric_limits<double>::infinity()
                : (gp.b + gp.S * p - gp.A * res.x).minCoeff();

        Vector u0(m);
        for (int i = 0; i < N; ++i)
            u0.segment(m_off[i], m_i[i]) = res.x.segment(z_off[i], m_i[i]);
        traj.inputs.row(t) = u0.transpose();

        const Vector v = spec.rate_cost ? Vector(u0 - u_prev) : u0;
        for (int i = 0; i < N; ++i) {
            const auto& ac = spec.agents[i];
            const Matrix Fx = zero_or(ac.Fx, n, np);
            const Matrix Fu = zero_or(ac.Fu, m, np);
            const Vector lx = ac.lx.size() ? ac.lx : Vector::Zero(n);
            const Vector lu = ac.lu.size() ? ac.lu : Vector::Zero(m);
            traj.stage_costs(t, i) = x.dot(ac.Qx * x) + (Fx * p + lx).dot(x) +
                                     v.dot(ac.R * v) + (Fu * p + lu).dot(u0);
        }

        Vector x_next = spec.A_dyn * x;
        for (int i = 0; i < N; ++i)
            x_next += spec.B[i] * u0.segment(m_off[i], m_i[i]);
        x_next += W_d * p;
        x = x_next;
        u_prev = u0;
    }
    traj.states.row(steps) = x.transpose();
    return traj;
}

}  // namespace gnex
