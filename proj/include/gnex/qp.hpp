#pragma once

#include "gnex/types.hpp"

namespace gnex {

// min 0.5 x'Qx + c'x  s.t.  A x <= b, with Q symmetric positive definite.
struct QpProblem {
    Matrix Q;
    Vector c;
    Matrix A;
    Vector b;
};

enum class QpStatus { Optimal, Infeasible, NumericalFailure };

struct QpSolution {
    QpStatus status = QpStatus::NumericalFailure;
    Vector x;
    Vector lambda;      // full length, zero on inactive rows
    IndexSet active_set;
    double objective = 0.0;
    std::string diagnostics;
};

// Primal active-set method; deterministic (fixed tie-breaking rules),
// phase-1 LP for the initial feasible point.
QpSolution solve_qp(const QpProblem& p);

}  // namespace gnex
