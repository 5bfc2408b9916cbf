#include "gnex/gne.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <thread>

#include "gnex/lp.hpp"

namespace gnex {

namespace {
constexpr double kCoefTol = 1e-12;

std::vector<std::string> x_labels(int n_x) {
    std::vector<std::string> l(n_x);
    for (int i = 0; i < n_x; ++i) l[i] = "x" + std::to_string(i);
    return l;
}
}  // namespace

int GNEProblem::n_x() const {
    int n = 0;
    for (int s : block_sizes) n += s;
    return n;
}

int GNEProblem::block_offset(int agent) const {
    int off = 0;
    for (int i = 0; i < agent; ++i) off += block_sizes[i];
    return off;
}

Matrix GNEProblem::Q_ii(int agent) const {
    const int off = block_offset(agent);
    const int ni = block_sizes[agent];
    return Q[agent].block(off, off, ni, ni);
}

Polyhedron GNEProblem::x_box() const {
    return Polyhedron::box(x_min, x_max, x_labels(n_x()));
}

void GNEProblem::validate() const {
    if (N <= 0 || static_cast<int>(block_sizes.size()) != N)
        throw GnexError("GNEProblem: bad agent/block structure");
    const int nx = n_x();
    const int np = n_p();
    if (static_cast<int>(Q.size()) != N || static_cast<int>(c.size()) != N ||
        static_cast<int>(F.size()) != N)
        throw GnexError("GNEProblem: Q/c/F must have one entry per agent");
    for (int i = 0; i < N; ++i) {
        if (Q[i].rows() != nx || Q[i].cols() != nx)
            throw DimensionError("GNEProblem: Q size mismatch, agent " +
                                 std::to_string(i));
        if (c[i].size() != nx || F[i].rows() != nx || F[i].cols() != np)
            throw DimensionError("GNEProblem: c/F size mismatch, agent " +
                                 std::to_string(i));
        Matrix Qii = Q_ii(i);
        if ((Qii - Qii.transpose()).lpNorm<Eigen::Infinity>() > 1e-10)
            throw GnexError("GNEProblem: Q_ii not symmetric, agent " +
                            std::to_string(i));
        Eigen::LLT<Matrix> llt(Qii);
        if (llt.info() != Eigen::Success)
            throw GnexError("GNEProblem: Q_ii not positive definite, agent " +
                            std::to_string(i));
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (Q[i] + Q[i].transpose()));
        if (es.eigenvalues().minCoeff() < -1e-9)
            std::cerr << "gnex: note: full cost matrix of agent " << i
                      << " is indefinite (only the diagonal block must be PD)\n";
    }
    if (A.rows() != b.size() || A.rows() != S.rows())
        throw DimensionError("GNEProblem: A/b/S row mismatch");
    if (A.rows() > 0 && (A.cols() != nx || S.cols() != np))
        throw DimensionError("GNEProblem: A/S column mismatch");
    if (x_min.size() != nx || x_max.size() != nx)
        throw DimensionError("GNEProblem: x bounds size mismatch");
}

std::vector<BestResponseMap> best_responses(const GNEProblem& gp,
                                            const GneOptions& opts) {
    gp.validate();
    const int nx = gp.n_x();
    const int np = gp.n_p();
    const int nA = gp.n_rows();

    std::vector<BestResponseMap> maps(gp.N);
    for (int i = 0; i < gp.N; ++i) {
        const int off = gp.block_offset(i);
        const int ni = gp.block_sizes[i];
        const int nother = nx - ni;

        std::vector<int> other_cols;
        for (int j = 0; j < nx; ++j)
            if (j < off || j >= off + ni) other_cols.push_back(j);

        MpqpProblem mp;
        mp.Q = gp.Q_ii(i);
        mp.c_bar = gp.c[i].segment(off, ni);
        mp.F_bar.resize(ni, nother + np);
        for (int j = 0; j < nother; ++j)
            mp.F_bar.col(j) = gp.Q[i].block(off, other_cols[j], ni, 1);
        mp.F_bar.rightCols(np) = gp.F[i].middleRows(off, ni);

        mp.A = gp.A.middleCols(off, ni);
        mp.b = gp.b;
        mp.B_bar.resize(nA, nother + np);
        for (int j = 0; j < nother; ++j)
            mp.B_bar.col(j) = -gp.A.col(other_cols[j]);
        mp.B_bar.rightCols(np) = gp.S;

        // theta box = x_box restricted to the other agents' blocks, times p_box
        std::vector<std::string> labels;
        for (int j : other_cols) labels.push_back("x" + std::to_string(j));
        for (const auto& l : gp.p_box.var_labels()) labels.push_back(l);
        const int mpb = gp.p_box.rows();
        Matrix Cb = Matrix::Zero(2 * nother + mpb, nother + np);
        Vector db(2 * nother + mpb);
        for (int j = 0; j < nother; ++j) {
            Cb(2 * j, j) = 1.0;
            db[2 * j] = gp.x_max[other_cols[j]];
            Cb(2 * j + 1, j) = -1.0;
            db[2 * j + 1] = -gp.x_min[other_cols[j]];
        }
        Cb.block(2 * nother, nother, mpb, np) = gp.p_box.C();
        db.tail(mpb) = gp.p_box.d();
        mp.theta_box = Polyhedron(std::move(Cb), std::move(db), labels);

        maps[i] = solve_mpqp(mp, opts.mpqp);
        maps[i].agent_id = i;
    }
    return maps;
}

std::vector<CouplingGroup> coupling_groups(const GNEProblem& gp) {
    std::vector<CouplingGroup> groups;
    for (int r = 0; r < gp.n_rows(); ++r) {
        IndexSet agents;
        for (int i = 0; i < gp.N; ++i) {
            const int off = gp.block_offset(i);
            if (gp.A.row(r).segment(off, gp.block_sizes[i])
                    .lpNorm<Eigen::Infinity>() > kCoefTol)
                agents.push_back(i);
        }
        if (agents.size() >= 2)
            groups.push_back({r, agents, agents.front()});
    }
    return groups;
}

bool combination_valid(const Combination& comb,
                       const std::vector<BestResponseMap>& maps,
                       const GNEProblem& gp, const GneOptions& opts) {
    int n_shared_active = 0;
    for (const auto& g : coupling_groups(gp)) {
        int n_active = 0;
        int active_agent = -1;
        for (int i : g.agents) {
            const auto& aset = maps[i].regions[comb.region_indices[i]].active_set;
            if (std::find(aset.begin(), aset.end(), g.row) != aset.end()) {
                ++n_active;
                active_agent = i;
            }
        }
        if (n_active > 0) ++n_shared_active;
        if (n_active == 0 || n_active == static_cast<int>(g.agents.size()))
            continue;
        if (n_active == 1 && active_agent == opts.one_sided_agent) continue;
        return false;
    }
    if (opts.max_shared_active >= 0 &&
        n_shared_active > opts.max_shared_active)
        return false;
    return true;
}

std::vector<Combination> enumerate_combinations(
    const std::vector<BestResponseMap>& maps, const GNEProblem& gp,
    const GneOptions& opts) {
    std::vector<Combination> out;
    if (maps.empty()) throw GnexError("enumerate_combinations: no maps");
    Combination comb;
    comb.region_indices.assign(maps.size(), 0);
    while (true) {
        if (combination_valid(comb, maps, gp, opts)) out.push_back(comb);
        // lexicographic increment
        int i = static_cast<int>(maps.size()) - 1;
        for (; i >= 0; --i) {
            if (++comb.region_indices[i] <
                static_cast<int>(maps[i].regions.size()))
                break;
            comb.region_indices[i] = 0;
        }
        if (i < 0) break;
    }
    return out;
}

CombinationSystem assemble_linear_system(const Combination& comb,
                                         const std::vector<BestResponseMap>& maps,
                                         const GNEProblem& gp) {
    const int nx = gp.n_x();
    const int np = gp.n_p();
    CombinationSystem sys;
    sys.Mx = Matrix::Zero(nx, nx);
    sys.Mp = Matrix::Zero(nx, np);
    sys.M1 = Vector::Zero(nx);

    int total_rows = 0;
    for (int i = 0; i < gp.N; ++i)
        total_rows += maps[i].regions[comb.region_indices[i]].region.rows();
    sys.Cx = Matrix::Zero(total_rows, nx);
    sys.Cp = Matrix::Zero(total_rows, np);
    sys.e = Vector::Zero(total_rows);

    int row = 0;
    for (int i = 0; i < gp.N; ++i) {
        const int off = gp.block_offset(i);
        const int ni = gp.block_sizes[i];
        const auto& cr = maps[i].regions[comb.region_indices[i]];
        std::vector<int> other_cols;
        for (int j = 0; j < nx; ++j)
            if (j < off || j >= off + ni) other_cols.push_back(j);
        const int nother = static_cast<int>(other_cols.size());

        // x_i - H x_{-i} = G p + h
        sys.Mx.block(off, off, ni, ni).setIdentity();
        for (int j = 0; j < nother; ++j)
            sys.Mx.block(off, other_cols[j], ni, 1) = -cr.primal.G.col(j);
        sys.Mp.middleRows(off, ni) = cr.primal.G.rightCols(np);
        sys.M1.segment(off, ni) = cr.primal.g;

        // region rows over theta = (x_{-i}, p) scattered into (x, p)
        const int mr = cr.region.rows();
        for (int j = 0; j < nother; ++j)
            sys.Cx.block(row, other_cols[j], mr, 1) = cr.region.C().col(j);
        sys.Cp.middleRows(row, mr) = cr.region.C().rightCols(np);
        sys.e.segment(row, mr) = cr.region.d();
        row += mr;
    }
    return sys;
}

std::optional<EquilibriumRegion> solve_unique(const CombinationSystem& sys,
                                              const Combination& comb,
                                              const GNEProblem& gp,
                                              const GneOptions& opts) {
    Eigen::PartialPivLU<Matrix> lu(sys.Mx);
    Matrix G = lu.solve(sys.Mp);
    Vector g = lu.solve(sys.M1);

    Matrix Cr = sys.Cx * G + sys.Cp;
    Vector dr = sys.e - sys.Cx * g;
    Polyhedron region = intersect(
        Polyhedron(std::move(Cr), std::move(dr), gp.p_box.var_labels()), gp.p_box);
    if (!is_full_dimensional(region, opts.full_dim_eps)) return std::nullopt;
    region = remove_redundant(region);

    EquilibriumRegion er;
    er.kind = EquilibriumRegion::Kind::Unique;
    er.combination = comb;
    er.law = AffineFunction(std::move(G), std::move(g));
    er.region = std::move(region);
    er.has_region = true;
    er.Mx = sys.Mx;
    er.Mp = sys.Mp;
    er.M1 = sys.M1;
    return er;
}

std::optional<EquilibriumRegion> solve_degenerate(const CombinationSystem& sys,
                                                  const Combination& comb,
                                                  const GNEProblem& gp,
                                                  const GneOptions& opts) {
    const int nx = gp.n_x();
    const int np = gp.n_p();

    Eigen::JacobiSVD<Matrix> svd(sys.Mx, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Matrix U = svd.matrixU(), V = svd.matrixV();
    Vector sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv[0] : 0.0;
    const double tol = opts.rank_rel_tol * std::max(smax, 1.0);
    int r = 0;
    while (r < sv.size() && sv[r] > tol) ++r;
    if (r == nx)
        throw GnexError("solve_degenerate: system is full rank");

    // Sign convention for reproducibility: flip each column of V so that its
    // largest-magnitude entry (ties -> last index) is positive; flip the
    // paired U column for the range part, and each U null-space column by the
    // same rule on its own entries.
    for (int j = 0; j < nx; ++j) {
        int idx = 0;
        for (int i = 1; i < nx; ++i)
            if (std::abs(V(i, j)) >= std::abs(V(idx, j)) - 1e-15) idx = i;
        if (V(idx, j) < 0) {
            V.col(j) = -V.col(j);
            if (j < r) U.col(j) = -U.col(j);
        }
    }
    for (int j = r; j < nx; ++j) {
        int idx = 0;
        for (int i = 1; i < nx; ++i)
            if (std::abs(U(i, j)) >= std::abs(U(idx, j)) - 1e-15) idx = i;
        if (U(idx, j) < 0) U.col(j) = -U.col(j);
    }

    EquilibriumRegion er;
    er.kind = EquilibriumRegion::Kind::Infinite;
    er.combination = comb;
    er.U1 = U.leftCols(r);
    er.U2 = U.rightCols(nx - r);
    er.V1 = V.leftCols(r);
    er.V2 = V.rightCols(nx - r);
    er.sigma1 = sv.head(r);
    er.Mx = sys.Mx;
    er.Mp = sys.Mp;
    er.M1 = sys.M1;
    er.y2_dim = nx - r;

    // Solvability over the whole region requires U2'Mp = 0 and U2'M1 = 0.
    if ((er.U2.transpose() * sys.Mp).lpNorm<Eigen::Infinity>() > tol ||
        (er.U2.transpose() * sys.M1).lpNorm<Eigen::Infinity>() > tol)
        return std::nullopt;

    // particular solution x = Ep p + e0, family x = Ep p + e0 + V2 y2
    Matrix E = er.V1 * er.sigma1.cwiseInverse().asDiagonal() * er.U1.transpose();
    Matrix Ep = E * sys.Mp;
    Vector e0 = E * sys.M1;
    er.law = AffineFunction(Ep, e0);

    // lifted polyhedron over (p, y2)
    const int ny = er.y2_dim;
    Matrix Cl(sys.Cx.rows() + gp.p_box.rows(), np + ny);
    Vector dl(Cl.rows());
    Cl.block(0, 0, sys.Cx.rows(), np) = sys.Cx * Ep + sys.Cp;
    Cl.block(0, np, sys.Cx.rows(), ny) = sys.Cx * er.V2;
    dl.head(sys.Cx.rows()) = sys.e - sys.Cx * e0;
    Cl.block(sys.Cx.rows(), 0, gp.p_box.rows(), np) = gp.p_box.C();
    Cl.block(sys.Cx.rows(), np, gp.p_box.rows(), ny).setZero();
    dl.tail(gp.p_box.rows()) = gp.p_box.d();

    std::vector<std::string> labels = gp.p_box.var_labels();
    for (int j = 0; j < ny; ++j) labels.push_back("y2_" + std::to_string(j));
    Polyhedron lifted(std::move(Cl), std::move(dl), std::move(labels));
    if (!is_full_dimensional(lifted, opts.full_dim_eps)) return std::nullopt;
    er.lifted = remove_redundant(lifted);

    if (ny <= opts.fm_max_dim) {
        IndexSet drop(ny);
        for (int j = 0; j < ny; ++j) drop[j] = np + j;
        try {
            Polyhedron proj = eliminate(er.lifted, drop, opts.fm_row_cap);
            er.region = Polyhedron(proj.C(), proj.d(), gp.p_box.var_labels());
            er.has_region = true;
        } catch (const GnexError&) {
            er.has_region = false;  // lifted-only representation
        }
    }
    return er;
}

namespace {

// Selection mpQP over the lifted (p, y2) polyhedron: decision y2, parameter p.
MpqpProblem selection_mpqp(const EquilibriumRegion& er, const GNEProblem& gp,
                           const Matrix& Qy, const Vector& cy, const Matrix& Fy) {
    const int np = gp.n_p();
    const int ny = er.y2_dim;
    MpqpProblem mp;
    mp.Q = Qy;
    mp.c_bar = cy;
    mp.F_bar = Fy;
    mp.A = er.lifted.C().rightCols(ny);
    mp.b = er.lifted.d();
    mp.B_bar = -er.lifted.C().leftCols(np);
    mp.theta_box = gp.p_box;
    return mp;
}

std::vector<std::pair<Polyhedron, AffineFunction>> map_subregions(
    const EquilibriumRegion& er, const BestResponseMap& sel) {
    std::vector<std::pair<Polyhedron, AffineFunction>> out;
    for (const auto& r : sel.regions) {
        Matrix G = er.law.G + er.V2 * r.primal.G;
        Vector g = er.law.g + er.V2 * r.primal.g;
        out.emplace_back(r.region, AffineFunction(std::move(G), std::move(g)));
    }
    return out;
}

MpqpOptions selection_opts(const GneOptions& opts) {
    MpqpOptions o = opts.mpqp;
    // p outside CR_k makes the selection QP infeasible; those samples are
    // skipped by the coverage check, which would make it vacuous here.
    o.check_coverage = false;
    return o;
}

}  // namespace

std::vector<std::pair<Polyhedron, AffineFunction>> select_min_norm(
    const EquilibriumRegion& er, const GNEProblem& gp, const GneOptions& opts) {
    if (er.kind != EquilibriumRegion::Kind::Infinite)
        throw GnexError("select_min_norm: region has a unique equilibrium");
    const int ny = er.y2_dim;
    MpqpProblem mp = selection_mpqp(er, gp, 2.0 * Matrix::Identity(ny, ny),
                                    Vector::Zero(ny),
                                    Matrix::Zero(ny, gp.n_p()));
    BestResponseMap sel = solve_mpqp(mp, selection_opts(opts));
    return map_subregions(er, sel);
}

std::vector<std::pair<Polyhedron, AffineFunction>> select_welfare(
    const EquilibriumRegion& er, const GNEProblem& gp, const GneOptions& opts) {
    if (er.kind != EquilibriumRegion::Kind::Infinite)
        throw GnexError("select_welfare: region has a unique equilibrium");
    const int nx = gp.n_x();
    const int np = gp.n_p();
    Matrix Qs = Matrix::Zero(nx, nx);
    Vector cs = Vector::Zero(nx);
    Matrix Fs = Matrix::Zero(nx, np);
    if (opts.welfare.user_supplied) {
        Qs = opts.welfare.Qf;
        cs = opts.welfare.cf;
        Fs = opts.welfare.Ff;
    } else {
        for (int i = 0; i < gp.N; ++i) {
            Qs += gp.Q[i];
            cs += gp.c[i];
            Fs += gp.F[i];
        }
    }
    Matrix Qy = er.V2.transpose() * Qs * er.V2;
    Qy = 0.5 * (Qy + Qy.transpose());
    Eigen::LLT<Matrix> llt(Qy);
    if (llt.info() != Eigen::Success)
        throw GnexError(
            "select_welfare: reduced welfare Hessian is not positive "
            "definite; use min-norm selection or a convex welfare spec");
    Vector cy = er.V2.transpose() * (Qs * er.law.g + cs);
    Matrix Fy = er.V2.transpose() * (Qs * er.law.G + Fs);
    MpqpProblem mp = selection_mpqp(er, gp, Qy, cy, Fy);
    BestResponseMap sel = solve_mpqp(mp, selection_opts(opts));
    return map_subregions(er, sel);
}

std::pair<std::optional<std::pair<Polyhedron, AffineFunction>>,
          std::vector<std::pair<Polyhedron, AffineFunction>>>
select_vgne(const EquilibriumRegion& er, const GNEProblem& gp,
            const std::vector<CouplingGroup>& groups,
            const std::vector<BestResponseMap>& maps, const GneOptions& opts) {
    if (er.kind != EquilibriumRegion::Kind::Infinite)
        throw GnexError("select_vgne: region has a unique equilibrium");
    const int nx = gp.n_x();
    const int np = gp.n_p();
    const int ny = er.y2_dim;

    // Consensus residual rows: lambda_{c,i} - lambda_{c,i1} as affine
    // functions of (p, y2) through x = Ep p + e0 + V2 y2.
    std::vector<Vector> res_y, res_p;
    std::vector<double> res_0;
    for (const auto& g : groups) {
        // row must be active in the combination for its agents (validity
        // makes this all-or-none); otherwise there is no multiplier law
        const auto& aset0 =
            maps[g.agents[0]].regions[er.combination.region_indices[g.agents[0]]]
                .active_set;
        if (std::find(aset0.begin(), aset0.end(), g.row) == aset0.end())
            continue;

        auto lambda_affine = [&](int agent, Vector& gy, Vector& gpv, double& g0) {
            const auto& cr =
                maps[agent].regions[er.combination.region_indices[agent]];
            const int off = gp.block_offset(agent);
            const int ni = gp.block_sizes[agent];
            std::vector<int> other_cols;
            for (int j = 0; j < nx; ++j)
                if (j < off || j >= off + ni) other_cols.push_back(j);
            const int nother = static_cast<int>(other_cols.size());
            Vector Lx = cr.dual.G.row(g.row).head(nother);
            Vector Lp = cr.dual.G.row(g.row).tail(np);
            double L1 = cr.dual.g[g.row];
            // x_{-i} = P (Ep p + e0 + V2 y2)
            gy = Vector::Zero(ny);
            gpv = Lp;
            g0 = L1;
            for (int j = 0; j < nother; ++j) {
                gy += Lx[j] * er.V2.row(other_cols[j]).transpose();
                gpv += Lx[j] * er.law.G.row(other_cols[j]).transpose();
                g0 += Lx[j] * er.law.g[other_cols[j]];
            }
        };

        Vector gy1, gp1;
        double g01;
        lambda_affine(g.reference_agent, gy1, gp1, g01);
        for (int i : g.agents) {
            if (i == g.reference_agent) continue;
            Vector gyi, gpi;
            double g0i;
            lambda_affine(i, gyi, gpi, g0i);
            res_y.push_back(gyi - gy1);
            res_p.push_back(gpi - gp1);
            res_0.push_back(g0i - g01);
        }
    }

    const int nr = static_cast<int>(res_y.size());
    Matrix Ry = Matrix::Zero(nr, ny), Rp = Matrix::Zero(nr, np);
    Vector r0 = Vector::Zero(nr);
    for (int i = 0; i < nr; ++i) {
        Ry.row(i) = res_y[i].transpose();
        Rp.row(i) = res_p[i].transpose();
        r0[i] = res_0[i];
    }

    Matrix Qv = 2.0 * Ry.transpose() * Ry;
    Vector cv = 2.0 * Ry.transpose() * r0;
    Matrix Fv = 2.0 * Ry.transpose() * Rp;
    // Floor near-zero eigenvalues so the selection mpQP stays strictly
    // convex; the floor acts as a minimum-norm tie-break on directions the
    // consensus residual does not see and leaves its minimizers optimal.
    Eigen::SelfAdjointEigenSolver<Matrix> es(Qv);
    const double mu = std::max(1e-6 * std::max(es.eigenvalues().maxCoeff(), 0.0),
                               1e-8);
    Vector ev = es.eigenvalues().cwiseMax(mu);
    Qv = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    Qv = 0.5 * (Qv + Qv.transpose());

    MpqpProblem mp = selection_mpqp(er, gp, Qv, cv, Fv);
    BestResponseMap sel = solve_mpqp(mp, selection_opts(opts));

    std::optional<std::pair<Polyhedron, AffineFunction>> vregion;
    std::vector<std::pair<Polyhedron, AffineFunction>> residual;
    std::mt19937_64 rng(9001);
    for (const auto& r : sel.regions) {
        Matrix G = er.law.G + er.V2 * r.primal.G;
        Vector g = er.law.g + er.V2 * r.primal.g;
        AffineFunction xlaw(G, g);

        bool is_v = r.active_set.empty();
        if (is_v) {
            auto consensus_zero = [&](const Vector& p) {
                Vector y2 = r.primal(p);
                return (Ry * y2 + Rp * p + r0).squaredNorm() <=
                       opts.vgne_zero_tol;
            };
            is_v = consensus_zero(chebyshev(r.region).center);
            try {
                for (int s = 0; is_v && s < 10; ++s)
                    is_v = consensus_zero(sample_polytope(r.region, rng));
            } catch (const GnexError&) {
                // thin region: the center test alone decides
            }
        }
        if (is_v && !vregion)
            vregion = std::make_pair(r.region, std::move(xlaw));
        else
            residual.emplace_back(r.region, std::move(xlaw));
    }
    return {vregion, residual};
}

int SolveDiagnostics::total_count(Selection sel) const {
    switch (sel) {
        case Selection::None: return unique_count + infinite_count;
        case Selection::MinNorm: return unique_count + minnorm_count;
        case Selection::Welfare: return unique_count + welfare_count;
        case Selection::Vgne:
            return unique_count + infinite_count + vgne_count;
    }
    return 0;
}

std::string problem_fingerprint(const GNEProblem& gp) {
    uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const void* data, size_t len) {
        const auto* b = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < len; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    };
    auto mix_mat = [&](const Matrix& M) {
        int r = static_cast<int>(M.rows()), c = static_cast<int>(M.cols());
        mix(&r, sizeof r);
        mix(&c, sizeof c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) {
                double v = M(i, j);
                mix(&v, sizeof v);
            }
    };
    mix(&gp.N, sizeof gp.N);
    for (int s : gp.block_sizes) mix(&s, sizeof s);
    for (const auto& M : gp.Q) mix_mat(M);
    for (const auto& v : gp.c) mix_mat(v);
    for (const auto& M : gp.F) mix_mat(M);
    mix_mat(gp.A);
    mix_mat(gp.b);
    mix_mat(gp.S);
    mix_mat(gp.p_box.C());
    mix_mat(gp.p_box.d());
    mix_mat(gp.x_min);
    mix_mat(gp.x_max);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

int resolve_threads(const GneOptions& opts) {
    if (opts.threads > 0) return opts.threads;
    if (const char* env = std::getenv("GNEX_THREADS")) {
        int t = std::atoi(env);
        if (t > 0) return t;
    }
    return 1;
}

}  // namespace

ExplicitGNESolution solve_gnep(const GNEProblem& gp, Selection selection,
                               const GneOptions& opts) {
    gp.validate();
    ExplicitGNESolution sol;
    sol.selection = selection;
    sol.p_box = gp.p_box;
    sol.problem_hash = problem_fingerprint(gp);

    std::vector<BestResponseMap> maps = best_responses(gp, opts);
    std::vector<CouplingGroup> groups = coupling_groups(gp);

    long raw = 1;
    for (const auto& m : maps) raw *= static_cast<long>(m.regions.size());
    std::vector<Combination> combos = enumerate_combinations(maps, gp, opts);
    sol.diagnostics.combinations_total = raw;
    sol.diagnostics.combinations_invalid = raw - static_cast<long>(combos.size());

    struct ComboResult {
        std::optional<EquilibriumRegion> er;
        bool inconsistent = false;
        bool empty = false;
        std::string error;
    };
    std::vector<ComboResult> results(combos.size());

    auto process = [&](size_t k) {
        ComboResult& out = results[k];
        try {
            CombinationSystem sys = assemble_linear_system(combos[k], maps, gp);
            Eigen::JacobiSVD<Matrix> svd(sys.Mx, Eigen::ComputeFullU);
            const Vector& sv = svd.singularValues();
            const double tol =
                opts.rank_rel_tol * std::max(sv.size() ? sv[0] : 0.0, 1.0);
            int rank = 0;
            while (rank < sv.size() && sv[rank] > tol) ++rank;

            std::optional<EquilibriumRegion> er;
            if (rank == gp.n_x())
                er = solve_unique(sys, combos[k], gp, opts);
            else
                er = solve_degenerate(sys, combos[k], gp, opts);
            if (!er) {
                Matrix U2 = svd.matrixU().rightCols(gp.n_x() - rank);
                if (rank < gp.n_x() &&
                    ((U2.transpose() * sys.Mp).lpNorm<Eigen::Infinity>() > tol ||
                     (U2.transpose() * sys.M1).lpNorm<Eigen::Infinity>() > tol))
                    out.inconsistent = true;
                else
                    out.empty = true;
                return;
            }
            if (er->kind == EquilibriumRegion::Kind::Infinite) {
                switch (selection) {
                    case Selection::None:
                        break;
                    case Selection::MinNorm:
                        er->subregions = select_min_norm(*er, gp, opts);
                        break;
                    case Selection::Welfare:
                        er->subregions = select_welfare(*er, gp, opts);
                        break;
                    case Selection::Vgne: {
                        auto [v, rest] = select_vgne(*er, gp, groups, maps, opts);
                        if (v) er->subregions.push_back(std::move(*v));
                        er->residual_subregions = std::move(rest);
                        break;
                    }
                }
            }
            out.er = std::move(er);
        } catch (const std::exception& ex) {
            out.error = ex.what();
        }
    };

    const int threads = resolve_threads(opts);
    if (threads <= 1 || combos.size() <= 1) {
        for (size_t k = 0; k < combos.size(); ++k) process(k);
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&]() {
                for (size_t k = next.fetch_add(1); k < combos.size();
                     k = next.fetch_add(1))
                    process(k);
            });
        for (auto& th : pool) th.join();
    }

    size_t failures = 0;
    for (size_t k = 0; k < combos.size(); ++k) {
        auto& r = results[k];
        if (!r.error.empty()) {
            ++failures;
            sol.diagnostics.failures.push_back(
                "combination " + std::to_string(k) + ": " + r.error);
            continue;
        }
        if (r.inconsistent) {
            ++sol.diagnostics.combinations_inconsistent;
            continue;
        }
        if (r.empty || !r.er) {
            ++sol.diagnostics.combinations_empty;
            continue;
        }
        EquilibriumRegion& er = *r.er;
        if (er.kind == EquilibriumRegion::Kind::Unique) {
            ++sol.diagnostics.unique_count;
        } else {
            ++sol.diagnostics.infinite_count;
            if (selection == Selection::MinNorm)
                sol.diagnostics.minnorm_count +=
                    static_cast<int>(er.subregions.size());
            else if (selection == Selection::Welfare)
                sol.diagnostics.welfare_count +=
                    static_cast<int>(er.subregions.size());
            else if (selection == Selection::Vgne)
                sol.diagnostics.vgne_count +=
                    static_cast<int>(er.subregions.size());
        }
        sol.regions.push_back(std::move(er));
    }
    if (!combos.empty() && failures == combos.size())
        throw GnexError("solve_gnep: every combination failed; first: " +
                        sol.diagnostics.failures.front());
    return sol;
}

}  // namespace gnex
