#pragma once

#include "gnex/gne.hpp"

namespace gnex {

struct EvaluationPolicy {
    enum class InfiniteResolution { MinNormY2, StoredSubregions };
    // Stored subregions are used when present; the online minimum-norm y2
    // QP is the fallback.
    InfiniteResolution infinite_resolution = InfiniteResolution::StoredSubregions;
    double tol_membership = 1e-9;
};

// All region indices whose p-description contains p, in solver order.
// Infinite regions without an explicit projection are tested through the
// lifted set's y2-slice.
std::vector<int> locate(const ExplicitGNESolution& sol, const Vector& p,
                        double tol = 1e-9);

struct EvaluateResult {
    Vector x;
    int region_index = -1;
    int subregion_index = -1;  // -1: unique law or online y2 resolution
    Vector y2;                 // resolved free part, when applicable
};

EvaluateResult evaluate(const ExplicitGNESolution& sol, const Vector& p,
                        const EvaluationPolicy& policy = {});

// max_i || x_i - argmin of agent i's QP at (x_{-i}, p) ||_inf; +inf when an
// agent's subproblem is infeasible at (x_{-i}, p).
double equilibrium_residual(const GNEProblem& gp, const Vector& p,
                            const Vector& x);

}  // namespace gnex
