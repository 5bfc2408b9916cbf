#include "gnex/mpqp.hpp"

#include <cmath>

#include "gnex/lp.hpp"

namespace gnex {

namespace {
constexpr double kRowTol = 1e-12;
}

std::optional<CriticalRegionAgent> active_set_region(const MpqpProblem& p,
                                                     const IndexSet& aset,
                                                     const MpqpOptions& opts) {
    const int n = p.n();
    const int nth = p.n_theta();
    const int nA = p.n_rows();
    const int k = static_cast<int>(aset.size());
    if (k > n) return std::nullopt;

    Matrix Aa(k, n), Ba(k, nth);
    Vector ba(k);
    for (int i = 0; i < k; ++i) {
        Aa.row(i) = p.A.row(aset[i]);
        Ba.row(i) = p.B_bar.row(aset[i]);
        ba[i] = p.b[aset[i]];
    }
    // LICQ
    if (k > 0) {
        Eigen::ColPivHouseholderQR<Matrix> qr(Aa.transpose());
        qr.setThreshold(1e-9);
        if (qr.rank() < k) return std::nullopt;
    }

    Eigen::LLT<Matrix> llt(p.Q);
    if (llt.info() != Eigen::Success)
        throw NumericalError("active_set_region: Q not positive definite");

    Matrix QiF = llt.solve(p.F_bar);   // Q^{-1} F_bar
    Vector Qic = llt.solve(p.c_bar);   // Q^{-1} c_bar

    Matrix lam_G(k, nth);
    Vector lam_g(k);
    if (k > 0) {
        Matrix QiAt = llt.solve(Aa.transpose());
        Matrix S = Aa * QiAt;  // PD under LICQ
        Eigen::LLT<Matrix> sllt(S);
        if (sllt.info() != Eigen::Success) return std::nullopt;
        lam_G = -sllt.solve(Ba + Aa * QiF);
        lam_g = -sllt.solve(ba + Aa * Qic);
    }
    Matrix x_G = -QiF;
    Vector x_g = -Qic;
    if (k > 0) {
        Matrix QiAt = llt.solve(Aa.transpose());
        x_G -= QiAt * lam_G;
        x_g -= QiAt * lam_g;
    }

    // Region over theta: dual feasibility on active rows, primal feasibility
    // on the rest, intersected with theta_box.
    std::vector<int> inactive;
    for (int i = 0; i < nA; ++i)
        if (std::find(aset.begin(), aset.end(), i) == aset.end())
            inactive.push_back(i);
    const int mr = k + static_cast<int>(inactive.size());
    Matrix Cr(mr, nth);
    Vector dr(mr);
    for (int i = 0; i < k; ++i) {
        Cr.row(i) = -lam_G.row(i);
        dr[i] = lam_g[i];
    }
    for (size_t j = 0; j < inactive.size(); ++j) {
        int r = inactive[j];
        Cr.row(k + j) = p.A.row(r) * x_G - p.B_bar.row(r);
        dr[k + j] = p.b[r] - p.A.row(r).dot(x_g);
    }
    Polyhedron region = intersect(Polyhedron(Cr, dr, p.theta_box.var_labels()),
                                  p.theta_box);
    if (!is_full_dimensional(region, opts.full_dim_eps)) return std::nullopt;
    if (opts.reduce_regions) region = remove_redundant(region);

    CriticalRegionAgent cr;
    cr.active_set = aset;
    cr.primal = AffineFunction(x_G, x_g);
    Matrix dual_G = Matrix::Zero(nA, nth);
    Vector dual_g = Vector::Zero(nA);
    for (int i = 0; i < k; ++i) {
        dual_G.row(aset[i]) = lam_G.row(i);
        dual_g[aset[i]] = lam_g[i];
    }
    cr.dual = AffineFunction(dual_G, dual_g);
    cr.region = std::move(region);
    return cr;
}

namespace {

// Constraints of the pruning LP for a candidate active set: all rows
// feasible, active rows tight, theta in theta_box. Infeasibility of this
// system rules out every superset as well.
bool candidate_feasible(const MpqpProblem& p, const IndexSet& aset) {
    const int n = p.n();
    const int nth = p.n_theta();
    const int nA = p.n_rows();
    const int mbox = p.theta_box.rows();
    Matrix A_ub(nA + mbox, n + nth);
    Vector b_ub(nA + mbox);
    A_ub.block(0, 0, nA, n) = p.A;
    A_ub.block(0, n, nA, nth) = -p.B_bar;
    b_ub.head(nA) = p.b;
    A_ub.block(nA, 0, mbox, n).setZero();
    A_ub.block(nA, n, mbox, nth) = p.theta_box.C();
    b_ub.tail(mbox) = p.theta_box.d();

    Matrix A_eq(aset.size(), n + nth);
    Vector b_eq(aset.size());
    for (size_t i = 0; i < aset.size(); ++i) {
        A_eq.block(i, 0, 1, n) = p.A.row(aset[i]);
        A_eq.block(i, n, 1, nth) = -p.B_bar.row(aset[i]);
        b_eq[i] = p.b[aset[i]];
    }
    return lp_feasible(A_ub, b_ub, A_eq, b_eq);
}

void enumerate_dfs(const MpqpProblem& p, const MpqpOptions& opts,
                   const std::vector<int>& candidates, IndexSet& aset,
                   int next_pos, long& visited,
                   std::vector<CriticalRegionAgent>& out) {
    if (++visited > opts.candidate_budget)
        throw GnexError("solve_mpqp: active-set candidate budget exceeded");
    if (!aset.empty() && !candidate_feasible(p, aset)) return;

    if (auto cr = active_set_region(p, aset, opts)) out.push_back(std::move(*cr));

    if (static_cast<int>(aset.size()) >= p.n()) return;
    for (size_t pos = next_pos; pos < candidates.size(); ++pos) {
        aset.push_back(candidates[pos]);
        enumerate_dfs(p, opts, candidates, aset, static_cast<int>(pos) + 1,
                      visited, out);
        aset.pop_back();
    }
}

}  // namespace

Vector sample_polytope(const Polyhedron& P, std::mt19937_64& rng, int max_tries) {
    Vector lb, ub;
    bounding_box(P, lb, ub);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < max_tries; ++t) {
        Vector z(P.dim());
        for (int j = 0; j < P.dim(); ++j) z[j] = lb[j] + u(rng) * (ub[j] - lb[j]);
        if (contains(P, z, 1e-9)) return z;
    }
    throw GnexError("sample_polytope: rejection sampling failed");
}

BestResponseMap solve_mpqp(const MpqpProblem& p, const MpqpOptions& opts) {
    if (!is_full_dimensional(p.theta_box, opts.full_dim_eps))
        throw GnexError("solve_mpqp: theta_box not full-dimensional");

    std::vector<int> candidates;
    for (int i = 0; i < p.n_rows(); ++i)
        if (p.A.row(i).norm() > kRowTol) candidates.push_back(i);

    BestResponseMap map;
    map.theta_box = p.theta_box;
    IndexSet aset;
    long visited = 0;
    enumerate_dfs(p, opts, candidates, aset, 0, visited, map.regions);

    // Drop duplicates (identical law and identical region).
    std::vector<CriticalRegionAgent> unique;
    for (auto& r : map.regions) {
        bool dup = false;
        for (const auto& u : unique) {
            if ((r.primal.G - u.primal.G).lpNorm<Eigen::Infinity>() < 1e-9 &&
                (r.primal.g - u.primal.g).lpNorm<Eigen::Infinity>() < 1e-9 &&
                poly_equal(r.region, u.region, 1e-7)) {
                dup = true;
                break;
            }
        }
        if (!dup) unique.push_back(std::move(r));
    }
    map.regions = std::move(unique);

    if (opts.check_coverage) {
        std::mt19937_64 rng(opts.seed);
        std::vector<Vector> uncovered;
        for (int s = 0; s < opts.coverage_samples; ++s) {
            Vector th = sample_polytope(p.theta_box, rng);
            QpProblem qp{p.Q, p.c_bar + p.F_bar * th, p.A, p.b + p.B_bar * th};
            QpSolution qs = solve_qp(qp);
            if (qs.status != QpStatus::Optimal) continue;
            bool hit = false;
            for (const auto& r : map.regions)
                if (contains(r.region, th, 1e-7)) { hit = true; break; }
            if (!hit) uncovered.push_back(th);
        }
        if (!uncovered.empty()) {
            std::string msg = "solve_mpqp: coverage check failed at " +
                              std::to_string(uncovered.size()) + " samples; first: [";
            for (int j = 0; j < uncovered[0].size(); ++j) {
                if (j) msg += ", ";
                msg += std::to_string(uncovered[0][j]);
            }
            msg += "]";
            throw GnexError(msg);
        }
    }
    return map;
}

}  // namespace gnex
