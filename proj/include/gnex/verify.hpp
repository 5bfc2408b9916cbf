#pragma once

#include "gnex/evaluator.hpp"
#include "gnex/gne.hpp"

namespace gnex {

struct VerifyOptions {
    int oracle_samples = 200;     // best-response law vs QP oracle, per agent
    int residual_samples = 50;    // equilibrium residual, per region
    int dominance_samples = 100;  // min-norm dominance, per subregion
    int coverage_samples = 100;
    double residual_tol = 1e-6;
    double oracle_tol = 1e-7;
    double consensus_tol = 1e-6;
    double svd_rel_tol = 1e-9;
    bool check_invalid_combinations = false;  // feasible only for small games
    unsigned seed = 20240717;
    GneOptions gne;
};

struct VerifyReport {
    struct Check {
        std::string name;
        bool passed = true;
        std::string detail;
    };
    std::vector<Check> checks;
    bool all_passed() const;
};

// Independent re-derivation checks of an explicit solution against its
// problem: law-vs-oracle agreement, equilibrium residuals, selection
// optimality, multiplier consensus, SVD reconstruction, coverage, and
// (optionally) infeasibility of the discarded active-set combinations.
VerifyReport verify_solution(const GNEProblem& gp,
                             const ExplicitGNESolution& sol,
                             const VerifyOptions& opts = {});

}  // namespace gnex
