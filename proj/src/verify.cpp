#include "gnex/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "gnex/lp.hpp"
#include "gnex/qp.hpp"

namespace gnex {

bool VerifyReport::all_passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

namespace {

struct Checker {
    VerifyReport& report;

    void add(const std::string& name, bool passed, const std::string& detail) {
        report.checks.push_back({name, passed, detail});
    }
};

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

// Representative equilibrium points of one region: (p, x) pairs drawn from
// the unique law, the stored subregion laws, or the lifted set.
std::vector<std::pair<Vector, Vector>> sample_region_points(
    const EquilibriumRegion& er, int np, int count, std::mt19937_64& rng) {
    std::vector<std::pair<Vector, Vector>> pts;
    try {
        if (er.kind == EquilibriumRegion::Kind::Unique) {
            for (int s = 0; s < count; ++s) {
                Vector p = sample_polytope(er.region, rng);
                pts.emplace_back(p, er.law(p));
            }
            return pts;
        }
        if (!er.subregions.empty()) {
            const int per =
                std::max(1, count / static_cast<int>(er.subregions.size()));
            for (const auto& [poly, law] : er.subregions) {
                if (!is_full_dimensional(poly)) continue;
                for (int s = 0; s < per; ++s) {
                    Vector p = sample_polytope(poly, rng);
                    pts.emplace_back(p, law(p));
                }
            }
            return pts;
        }
        for (int s = 0; s < count; ++s) {
            Vector z = sample_polytope(er.lifted, rng);
            Vector p = z.head(np);
            Vector y2 = z.tail(er.y2_dim);
            pts.emplace_back(p, Vector(er.law(p) + er.V2 * y2));
        }
    } catch (const GnexError&) {
        // sampling failure (degenerate region) leaves fewer points
    }
    return pts;
}

}  // namespace

VerifyReport verify_solution(const GNEProblem& gp,
                             const ExplicitGNESolution& sol,
                             const VerifyOptions& opts) {
    VerifyReport report;
    Checker ck{report};
    std::mt19937_64 rng(opts.seed);
    const int np = gp.n_p();

    // hash match between problem and solution
    ck.add("problem_hash", problem_fingerprint(gp) == sol.problem_hash,
           "solution built from this problem");

    // (a) per-agent explicit best responses against the QP oracle
    std::vector<BestResponseMap> maps;
    try {
        maps = best_responses(gp, opts.gne);
        double worst = 0.0;
        long tested = 0;
        for (int i = 0; i < gp.N; ++i) {
            const auto& map = maps[i];
            const MpqpProblem sub = [&] {
                // rebuild the agent subproblem data for the oracle
                const int off = gp.block_offset(i);
                const int ni = gp.block_sizes[i];
                const int nx = gp.n_x();
                MpqpProblem mp;
                mp.Q = gp.Q_ii(i);
                mp.c_bar = gp.c[i].segment(off, ni);
                Matrix Fb(ni, nx - ni + np);
                Matrix Bb(gp.n_rows(), nx - ni + np);
                int col = 0;
                for (int j = 0; j < nx; ++j) {
                    if (j >= off && j < off + ni) continue;
                    Fb.col(col) = gp.Q[i].block(off, j, ni, 1);
                    Bb.col(col) = -gp.A.col(j);
                    ++col;
                }
                Fb.rightCols(np) = gp.F[i].middleRows(off, ni);
                Bb.rightCols(np) = gp.S;
                mp.F_bar = Fb;
                mp.A = gp.A.middleCols(off, ni);
                mp.b = gp.b;
                mp.B_bar = Bb;
                mp.theta_box = map.theta_box;
                return mp;
            }();
            for (int s = 0; s < opts.oracle_samples; ++s) {
                Vector th = sample_polytope(map.theta_box, rng);
                QpProblem qp{sub.Q, sub.c_bar + sub.F_bar * th, sub.A,
                             sub.b + sub.B_bar * th};
                QpSolution qs = solve_qp(qp);
                if (qs.status != QpStatus::Optimal) continue;
                for (const auto& cr : map.regions) {
                    if (!contains(cr.region, th, 1e-9)) continue;
                    worst = std::max(
                        worst,
                        (cr.primal(th) - qs.x).lpNorm<Eigen::Infinity>());
                    ++tested;
                    break;
                }
            }
        }
        ck.add("best_response_oracle", worst <= opts.oracle_tol,
               "max law/oracle gap " + fmt(worst) + " over " +
                   std::to_string(tested) + " samples");
    } catch (const GnexError& e) {
        ck.add("best_response_oracle", false, e.what());
    }

    // (b) equilibrium residual per region
    {
        double worst = 0.0;
        long tested = 0;
        for (const auto& er : sol.regions) {
            auto pts =
                sample_region_points(er, np, opts.residual_samples, rng);
            for (const auto& [p, x] : pts) {
                worst = std::max(worst, equilibrium_residual(gp, p, x));
                ++tested;
            }
        }
        ck.add("equilibrium_residual", worst <= opts.residual_tol,
               "max residual " + fmt(worst) + " over " +
                   std::to_string(tested) + " samples");
    }

    // (c) min-norm dominance of the stored split
    if (sol.selection == Selection::MinNorm) {
        double worst = -1.0;
        long tested = 0;
        bool ok = true;
        for (const auto& er : sol.regions) {
            if (er.kind != EquilibriumRegion::Kind::Infinite) continue;
            for (const auto& [poly, law] : er.subregions) {
                if (!is_full_dimensional(poly)) continue;
                Vector p = sample_polytope(poly, rng);
                const double y2_star =
                    (er.V2.transpose() * (law(p) - er.law(p))).norm();
                // feasible y2 at this p: lifted rows with p substituted
                Matrix Ay = er.lifted.C().rightCols(er.y2_dim);
                Vector by = er.lifted.d() - er.lifted.C().leftCols(np) * p;
                Polyhedron slice(Ay, by);
                try {
                    for (int s = 0; s < opts.dominance_samples; ++s) {
                        Vector y2 = sample_polytope(slice, rng);
                        if (y2.norm() < y2_star - 1e-7) ok = false;
                        worst = std::max(worst, y2_star - y2.norm());
                        ++tested;
                    }
                } catch (const GnexError&) {
                }
            }
        }
        ck.add("min_norm_dominance", ok,
               std::to_string(tested) + " sampled alternatives");
    }

    // (d) coupling-multiplier consensus on v-GNE subregions
    if (sol.selection == Selection::Vgne && !maps.empty()) {
        const auto groups = coupling_groups(gp);
        double worst = 0.0;
        long tested = 0;
        const int nx = gp.n_x();
        for (const auto& er : sol.regions) {
            if (er.kind != EquilibriumRegion::Kind::Infinite) continue;
            for (const auto& [poly, law] : er.subregions) {
                if (!is_full_dimensional(poly)) continue;
                for (int s = 0; s < 10; ++s) {
                    Vector p = sample_polytope(poly, rng);
                    Vector x = law(p);
                    std::vector<Vector> lambda(gp.N);
                    for (int i = 0; i < gp.N; ++i) {
                        const int off = gp.block_offset(i);
                        const int ni = gp.block_sizes[i];
                        Vector th(nx - ni + np);
                        int col = 0;
                        for (int j = 0; j < nx; ++j)
                            if (j < off || j >= off + ni) th[col++] = x[j];
                        th.tail(np) = p;
                        const auto& cr =
                            maps[i].regions[er.combination.region_indices[i]];
                        lambda[i] = cr.dual(th);
                    }
                    for (const auto& g : groups)
                        for (int i : g.agents)
                            worst = std::max(
                                worst, std::abs(lambda[i][g.row] -
                                                lambda[g.reference_agent][g.row]));
                    ++tested;
                }
            }
        }
        ck.add("vgne_consensus", worst <= opts.consensus_tol,
               "max multiplier spread " + fmt(worst) + " over " +
                   std::to_string(tested) + " samples");
    }

    // (e) SVD reconstruction and solvability conditions
    {
        double worst = 0.0;
        for (const auto& er : sol.regions) {
            if (er.kind != EquilibriumRegion::Kind::Infinite) continue;
            const double scale = std::max(1.0, er.Mx.norm());
            worst = std::max(
                worst,
                (er.U1 * er.sigma1.asDiagonal() * er.V1.transpose() - er.Mx)
                        .norm() /
                    scale);
            if (er.U2.cols() > 0) {
                worst = std::max(worst,
                                 (er.U2.transpose() * er.Mp).norm() / scale);
                worst = std::max(worst,
                                 (er.U2.transpose() * er.M1).norm() / scale);
            }
            worst = std::max(worst, (er.V2.transpose() * er.V2 -
                                     Matrix::Identity(er.y2_dim, er.y2_dim))
                                        .norm());
        }
        ck.add("svd_reconstruction", worst <= opts.svd_rel_tol,
               "max relative defect " + fmt(worst));
    }

    // coverage round trip: parameters drawn from a stored region must be
    // found again by point location, and the originating region must be
    // among the hits. (A shared-constraint game need not admit an
    // equilibrium everywhere the constraints are feasible, so blanket
    // coverage of the parameter box is not required.)
    {
        int misses = 0;
        long tested = 0;
        const int per = std::max(
            1, opts.coverage_samples /
                   std::max(1, static_cast<int>(sol.regions.size())));
        for (size_t k = 0; k < sol.regions.size(); ++k) {
            const auto& er = sol.regions[k];
            for (int s = 0; s < per; ++s) {
                Vector p;
                try {
                    if (er.has_region) {
                        p = sample_polytope(er.region, rng);
                    } else {
                        p = sample_polytope(er.lifted, rng).head(np);
                    }
                } catch (const GnexError&) {
                    break;
                }
                std::vector<int> hits = locate(sol, p, 1e-7);
                if (std::find(hits.begin(), hits.end(),
                              static_cast<int>(k)) == hits.end())
                    ++misses;
                ++tested;
            }
        }
        ck.add("coverage", misses == 0,
               std::to_string(misses) + " round-trip misses over " +
                   std::to_string(tested) + " region samples");
    }

    // (f) discarded active-set combinations really are infeasible
    if (opts.check_invalid_combinations && !maps.empty()) {
        int violations = 0;
        long checked = 0;
        std::vector<int> idx(gp.N, 0);
        const int nx = gp.n_x();
        bool done = false;
        while (!done) {
            Combination comb{idx};
            if (!combination_valid(comb, maps, gp, opts.gne)) {
                CombinationSystem sys = assemble_linear_system(comb, maps, gp);
                // feasibility in (x, p): equalities Mx x - Mp p = M1,
                // inequalities Cx x + Cp p <= e, p in p_box
                Matrix Aeq(sys.Mx.rows(), nx + np);
                Aeq << sys.Mx, -sys.Mp;
                Matrix Aub(sys.Cx.rows() + sol.p_box.rows(), nx + np);
                Aub.topRows(sys.Cx.rows()) << sys.Cx, sys.Cp;
                Aub.bottomRows(sol.p_box.rows())
                    << Matrix::Zero(sol.p_box.rows(), nx), sol.p_box.C();
                Vector bub(sys.e.size() + sol.p_box.rows());
                bub << sys.e, sol.p_box.d();
                // shrink by a slack so boundary-only contact still counts
                // as infeasible
                bub.head(sys.e.size()).array() -= 1e-6;
                if (lp_feasible(Aub, bub, Aeq, sys.M1)) ++violations;
                ++checked;
            }
            for (int i = gp.N - 1;; --i) {
                if (i < 0) {
                    done = true;
                    break;
                }
                if (++idx[i] < static_cast<int>(maps[i].regions.size())) break;
                idx[i] = 0;
            }
        }
        ck.add("invalid_combinations_infeasible", violations == 0,
               std::to_string(violations) + " of " + std::to_string(checked) +
                   " invalid combinations admit a feasible point");
    }

    return report;
}

}  // namespace gnex
