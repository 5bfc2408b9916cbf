#pragma once

#include <optional>

#include "gnex/mpqp.hpp"
#include "gnex/polyhedron.hpp"
#include "gnex/types.hpp"

namespace gnex {

// N-agent game with quadratic costs 0.5 x'Q_i x + (c_i + F_i p)'x and shared
// linear constraints A x <= b + S p, solved for an explicit equilibrium law
// over the parameter polytope p_box within the decision box [x_min, x_max].
struct GNEProblem {
    int N = 0;
    std::vector<int> block_sizes;   // n_i, sum = n_x
    std::vector<Matrix> Q;          // n_x x n_x each
    std::vector<Vector> c;          // n_x each
    std::vector<Matrix> F;          // n_x x n_p each
    Matrix A;                       // n_A x n_x
    Vector b;                       // n_A
    Matrix S;                       // n_A x n_p
    Polyhedron p_box;
    Vector x_min, x_max;

    int n_x() const;
    int n_p() const { return static_cast<int>(p_box.dim()); }
    int n_rows() const { return static_cast<int>(A.rows()); }
    int block_offset(int agent) const;
    Matrix Q_ii(int agent) const;
    Polyhedron x_box() const;
    void validate() const;
};

struct Combination {
    std::vector<int> region_indices;  // j_i per agent
};

struct CouplingGroup {
    int row = 0;
    IndexSet agents;         // agents with nonzero columns in this row
    int reference_agent = 0; // smallest index in agents
};

// Stacked per-combination system M_x x = M_p p + M_1 plus the stacked
// region inequalities C_x x + C_p p <= e over (x, p).
struct CombinationSystem {
    Matrix Mx, Mp;
    Vector M1;
    Matrix Cx, Cp;
    Vector e;
};

struct EquilibriumRegion {
    enum class Kind { Unique, Infinite };
    Kind kind = Kind::Unique;
    Combination combination;

    // Unique: x*(p); Infinite: the particular solution p -> V1 S1^-1 U1'(Mp p + M1).
    AffineFunction law;
    bool has_region = false;
    Polyhedron region;  // over p (projection for Infinite, when computed)

    // Infinite-only data
    Matrix U1, U2, V1, V2;
    Vector sigma1;
    Matrix Mx, Mp;
    Vector M1;
    Polyhedron lifted;  // over (p, y2)
    int y2_dim = 0;

    // Selection output: (p-polyhedron, p -> x law). For v-GNE selection the
    // evaluable set holds only the consensus subregion; the rest goes to
    // residual_subregions.
    std::vector<std::pair<Polyhedron, AffineFunction>> subregions;
    std::vector<std::pair<Polyhedron, AffineFunction>> residual_subregions;
};

enum class Selection { None, MinNorm, Welfare, Vgne };

struct WelfareSpec {
    bool user_supplied = false;
    Matrix Qf;
    Vector cf;
    Matrix Ff;
};

struct SolveDiagnostics {
    long combinations_total = 0;
    long combinations_invalid = 0;
    long combinations_inconsistent = 0;  // SVD consistency conditions violated
    long combinations_empty = 0;         // region not full-dimensional
    int unique_count = 0;
    int infinite_count = 0;
    int vgne_count = 0;
    int minnorm_count = 0;
    int welfare_count = 0;
    std::vector<std::string> failures;

    int total_count(Selection sel) const;
};

struct ExplicitGNESolution {
    std::vector<EquilibriumRegion> regions;
    Selection selection = Selection::None;
    std::string problem_hash;
    SolveDiagnostics diagnostics;
    Polyhedron p_box;
};

struct GneOptions {
    MpqpOptions mpqp;
    double rank_rel_tol = 1e-9;
    double full_dim_eps = 1e-6;
    int fm_max_dim = 8;
    int fm_row_cap = 5000;
    double vgne_zero_tol = 1e-6;
    int threads = 0;  // 0: GNEX_THREADS env var, else 1
    WelfareSpec welfare;
    // Enumeration policy. max_shared_active caps how many shared rows may be
    // active simultaneously (-1: unlimited). one_sided_agent, when >= 0, also
    // admits combinations whose active shared rows are enforced by that agent
    // alone (the other agents' multipliers vanish); such combinations produce
    // full-rank boundary equilibria that the uniform-activity rule skips.
    int max_shared_active = -1;
    int one_sided_agent = -1;
};

std::vector<BestResponseMap> best_responses(const GNEProblem& gp,
                                            const GneOptions& opts = {});

std::vector<CouplingGroup> coupling_groups(const GNEProblem& gp);

// All valid combinations in lexicographic order. A shared constraint row must
// be active for all involved agents or for none; with one_sided_agent set,
// rows active for exactly that agent are admitted as well, and
// max_shared_active bounds the number of active shared rows.
std::vector<Combination> enumerate_combinations(
    const std::vector<BestResponseMap>& maps, const GNEProblem& gp,
    const GneOptions& opts = {});

bool combination_valid(const Combination& comb,
                       const std::vector<BestResponseMap>& maps,
                       const GNEProblem& gp, const GneOptions& opts = {});

CombinationSystem assemble_linear_system(const Combination& comb,
                                         const std::vector<BestResponseMap>& maps,
                                         const GNEProblem& gp);

std::optional<EquilibriumRegion> solve_unique(const CombinationSystem& sys,
                                              const Combination& comb,
                                              const GNEProblem& gp,
                                              const GneOptions& opts = {});

std::optional<EquilibriumRegion> solve_degenerate(const CombinationSystem& sys,
                                                  const Combination& comb,
                                                  const GNEProblem& gp,
                                                  const GneOptions& opts = {});

std::vector<std::pair<Polyhedron, AffineFunction>> select_min_norm(
    const EquilibriumRegion& er, const GNEProblem& gp,
    const GneOptions& opts = {});

std::vector<std::pair<Polyhedron, AffineFunction>> select_welfare(
    const EquilibriumRegion& er, const GNEProblem& gp,
    const GneOptions& opts = {});

// Returns (consensus subregion if one exists, residual subregions).
std::pair<std::optional<std::pair<Polyhedron, AffineFunction>>,
          std::vector<std::pair<Polyhedron, AffineFunction>>>
select_vgne(const EquilibriumRegion& er, const GNEProblem& gp,
            const std::vector<CouplingGroup>& groups,
            const std::vector<BestResponseMap>& maps,
            const GneOptions& opts = {});

ExplicitGNESolution solve_gnep(const GNEProblem& gp,
                               Selection selection = Selection::None,
                               const GneOptions& opts = {});

std::string problem_fingerprint(const GNEProblem& gp);

}  // namespace gnex
