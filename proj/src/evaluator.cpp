#include "gnex/evaluator.hpp"

#include <cmath>
#include <limits>

#include "gnex/qp.hpp"

namespace gnex {

namespace {

// y2-slice of the lifted polyhedron at fixed p.
void lifted_slice(const EquilibriumRegion& er, int np, const Vector& p,
                  Matrix& Ay, Vector& by) {
    Ay = er.lifted.C().rightCols(er.y2_dim);
    by = er.lifted.d() - er.lifted.C().leftCols(np) * p;
}

bool region_contains_p(const EquilibriumRegion& er, int np, const Vector& p,
                       double tol) {
    if (er.has_region) return contains(er.region, p, tol);
    Matrix Ay;
    Vector by;
    lifted_slice(er, np, p, Ay, by);
    Polyhedron slice(Ay, by);
    return chebyshev(slice).radius >= -tol;
}

}  // namespace

std::vector<int> locate(const ExplicitGNESolution& sol, const Vector& p,
                        double tol) {
    if (!contains(sol.p_box, p, tol))
        throw GnexError("locate: parameter outside p_box");
    const int np = sol.p_box.dim();
    std::vector<int> hits;
    for (size_t k = 0; k < sol.regions.size(); ++k)
        if (region_contains_p(sol.regions[k], np, p, tol))
            hits.push_back(static_cast<int>(k));
    return hits;
}

EvaluateResult evaluate(const ExplicitGNESolution& sol, const Vector& p,
                        const EvaluationPolicy& policy) {
    const int np = sol.p_box.dim();
    std::vector<int> hits = locate(sol, p, policy.tol_membership);
    if (hits.empty()) {
        // nearest region by constraint violation, for the diagnostic
        double best = std::numeric_limits<double>::infinity();
        int best_k = -1;
        for (size_t k = 0; k < sol.regions.size(); ++k) {
            const auto& er = sol.regions[k];
            if (!er.has_region) continue;
            double viol = (er.region.C() * p - er.region.d()).maxCoeff();
            if (viol < best) {
                best = viol;
                best_k = static_cast<int>(k);
            }
        }
        throw GnexError("evaluate: no region contains p (nearest: region " +
                        std::to_string(best_k) + ", violation " +
                        std::to_string(best) + ")");
    }

    const bool use_stored =
        policy.infinite_resolution ==
        EvaluationPolicy::InfiniteResolution::StoredSubregions;

    for (int k : hits) {
        const auto& er = sol.regions[k];
        if (er.kind == EquilibriumRegion::Kind::Unique) {
            EvaluateResult res;
            res.x = er.law(p);
            res.region_index = k;
            return res;
        }
        if (use_stored && !er.subregions.empty()) {
            for (size_t s = 0; s < er.subregions.size(); ++s) {
                if (contains(er.subregions[s].first, p, policy.tol_membership)) {
                    EvaluateResult res;
                    res.x = er.subregions[s].second(p);
                    res.region_index = k;
                    res.subregion_index = static_cast<int>(s);
                    return res;
                }
            }
        }
    }
    // online resolution: min ||y2||^2 over the lifted slice
    for (int k : hits) {
        const auto& er = sol.regions[k];
        if (er.kind != EquilibriumRegion::Kind::Infinite) continue;
        Matrix Ay;
        Vector by;
        lifted_slice(er, np, p, Ay, by);
        QpProblem qp{2.0 * Matrix::Identity(er.y2_dim, er.y2_dim),
                     Vector::Zero(er.y2_dim), Ay, by};
        QpSolution qs = solve_qp(qp);
        if (qs.status != QpStatus::Optimal) continue;
        EvaluateResult res;
        res.x = er.law(p) + er.V2 * qs.x;
        res.region_index = k;
        res.y2 = qs.x;
        return res;
    }
    throw GnexError("evaluate: located regions admit no evaluable law at p");
}

double equilibrium_residual(const GNEProblem& gp, const Vector& p,
                            const Vector& x) {
    const int nx = gp.n_x();
    if (x.size() != nx || p.size() != gp.n_p())
        throw DimensionError("equilibrium_residual: dimension mismatch");
    double worst = 0.0;
    for (int i = 0; i < gp.N; ++i) {
        const int off = gp.block_offset(i);
        const int ni = gp.block_sizes[i];
        std::vector<int> other_cols;
        for (int j = 0; j < nx; ++j)
            if (j < off || j >= off + ni) other_cols.push_back(j);

        Vector c_lin = gp.c[i].segment(off, ni) +
                       gp.F[i].middleRows(off, ni) * p;
        Vector b_i = gp.b + gp.S * p;
        for (int j : other_cols) {
            c_lin += gp.Q[i].block(off, j, ni, 1) * x[j];
            b_i -= gp.A.col(j) * x[j];
        }
        QpProblem qp{gp.Q_ii(i), c_lin, gp.A.middleCols(off, ni), b_i};
        QpSolution qs = solve_qp(qp);
        if (qs.status != QpStatus::Optimal)
            return std::numeric_limits<double>::infinity();
        worst = std::max(worst,
                         (x.segment(off, ni) - qs.x).lpNorm<Eigen::Infinity>());
    }
    return worst;
}

}  // namespace gnex
