#pragma once

#include "gnex/types.hpp"

namespace gnex {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Vector x;
    double objective = 0.0;
};

// Minimize c'x subject to A_ub x <= b_ub and A_eq x = b_eq, x free.
// Dense two-phase simplex; deterministic pivoting (lowest-index tie breaks,
// Bland's rule after an iteration threshold to rule out cycling).
LpResult solve_lp(const Vector& c, const Matrix& A_ub, const Vector& b_ub,
                  const Matrix& A_eq = Matrix(), const Vector& b_eq = Vector());

// Phase-1 feasibility of {x : A_ub x <= b_ub, A_eq x = b_eq}.
bool lp_feasible(const Matrix& A_ub, const Vector& b_ub,
                 const Matrix& A_eq = Matrix(), const Vector& b_eq = Vector());

}  // namespace gnex
