#include "gnex/lp.hpp"

#include <cmath>
#include <limits>

namespace gnex {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kFeasTol = 1e-7;

// Dense tableau simplex over the standard form
//   min  cs' y   s.t.  T y = rhs,  y >= 0
// with starting basis given in `basis` (one basic column per row).
// Entering rule: most negative reduced cost, lowest index on ties;
// switches to Bland's rule after `bland_after` iterations.
// Returns: 0 optimal, 1 unbounded.
int simplex_core(Matrix& T, Vector& rhs, const Vector& cs,
                 std::vector<int>& basis, double& objective) {
    const int m = static_cast<int>(T.rows());
    const int ncols = static_cast<int>(T.cols());

    // Maintain reduced costs implicitly via the basis inverse-free tableau:
    // we keep T in "dictionary" form, i.e. basic columns are unit vectors.
    // Assumes caller already pivoted the tableau to that form.
    Vector cb(m);
    auto refresh_cb = [&]() {
        for (int i = 0; i < m; ++i) cb[i] = cs[basis[i]];
    };
    refresh_cb();

    const long bland_after = 50L * (m + ncols);
    long iter = 0;
    const long max_iter = 2000L * (m + ncols) + 10000;

    while (true) {
        if (++iter > max_iter)
            throw NumericalError("simplex: iteration limit exceeded");
        const bool bland = iter > bland_after;

        // reduced costs r_j = c_j - cb' T_j
        int enter = -1;
        double best = -kPivotTol;
        for (int j = 0; j < ncols; ++j) {
            double r = cs[j] - cb.dot(T.col(j));
            if (r < -kPivotTol) {
                if (bland) { enter = j; break; }
                if (r < best) { best = r; enter = j; }
            }
        }
        if (enter < 0) break;  // optimal

        // ratio test; ties broken by smallest basic variable index
        int leave = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
            double a = T(i, enter);
            if (a > kPivotTol) {
                double ratio = rhs[i] / a;
                if (ratio < best_ratio - 1e-12 ||
                    (ratio < best_ratio + 1e-12 &&
                     (leave < 0 || basis[i] < basis[leave]))) {
                    best_ratio = ratio;
                    leave = i;
                }
            }
        }
        if (leave < 0) return 1;  // unbounded

        // pivot on (leave, enter)
        double piv = T(leave, enter);
        T.row(leave) /= piv;
        rhs[leave] /= piv;
        for (int i = 0; i < m; ++i) {
            if (i == leave) continue;
            double f = T(i, enter);
            if (std::abs(f) > 0.0) {
                T.row(i) -= f * T.row(leave);
                rhs[i] -= f * rhs[leave];
            }
        }
        basis[leave] = enter;
        cb[leave] = cs[enter];
    }

    objective = 0.0;
    for (int i = 0; i < m; ++i) objective += cs[basis[i]] * rhs[i];
    return 0;
}

}  // namespace

LpResult solve_lp(const Vector& c, const Matrix& A_ub, const Vector& b_ub,
                  const Matrix& A_eq, const Vector& b_eq) {
    const int n = static_cast<int>(c.size());
    const int m_ub = static_cast<int>(A_ub.rows());
    const int m_eq = static_cast<int>(A_eq.rows());
    const int m = m_ub + m_eq;

    if (m_ub > 0 && A_ub.cols() != n)
        throw DimensionError("solve_lp: A_ub column mismatch");
    if (m_eq > 0 && A_eq.cols() != n)
        throw DimensionError("solve_lp: A_eq column mismatch");
    if (b_ub.size() != m_ub || b_eq.size() != m_eq)
        throw DimensionError("solve_lp: rhs size mismatch");

    LpResult res;
    if (m == 0) {
        // no constraints: optimal at 0 iff c == 0, else unbounded
        if (c.lpNorm<Eigen::Infinity>() > kPivotTol) {
            res.status = LpStatus::Unbounded;
            return res;
        }
        res.status = LpStatus::Optimal;
        res.x = Vector::Zero(n);
        res.objective = 0.0;
        return res;
    }

    // Columns: u (n), v (n) with x = u - v, slacks (m_ub), artificials (m).
    const int n_struct = 2 * n + m_ub;
    const int ncols = n_struct + m;
    Matrix T = Matrix::Zero(m, ncols);
    Vector rhs(m);
    for (int i = 0; i < m_ub; ++i) {
        T.block(i, 0, 1, n) = A_ub.row(i);
        T.block(i, n, 1, n) = -A_ub.row(i);
        T(i, 2 * n + i) = 1.0;  // slack
        rhs[i] = b_ub[i];
    }
    for (int i = 0; i < m_eq; ++i) {
        T.block(m_ub + i, 0, 1, n) = A_eq.row(i);
        T.block(m_ub + i, n, 1, n) = -A_eq.row(i);
        rhs[m_ub + i] = b_eq[i];
    }
    // nonnegative rhs
    for (int i = 0; i < m; ++i) {
        if (rhs[i] < 0) {
            T.row(i) *= -1.0;
            rhs[i] = -rhs[i];
        }
    }
    // artificial basis
    std::vector<int> basis(m);
    for (int i = 0; i < m; ++i) {
        T(i, n_struct + i) = 1.0;
        basis[i] = n_struct + i;
    }

    // Phase 1
    Vector c1 = Vector::Zero(ncols);
    for (int j = n_struct; j < ncols; ++j) c1[j] = 1.0;
    double obj1 = 0.0;
    if (simplex_core(T, rhs, c1, basis, obj1) != 0)
        throw NumericalError("solve_lp: phase-1 unbounded");
    if (obj1 > kFeasTol) {
        res.status = LpStatus::Infeasible;
        return res;
    }

    // Drive any remaining artificials out of the basis.
    for (int i = 0; i < m; ++i) {
        if (basis[i] < n_struct) continue;
        int enter = -1;
        for (int j = 0; j < n_struct; ++j) {
            if (std::abs(T(i, j)) > kPivotTol) { enter = j; break; }
        }
        if (enter < 0) {
            // redundant row; leave the artificial basic at zero
            continue;
        }
        double piv = T(i, enter);
        T.row(i) /= piv;
        rhs[i] /= piv;
        for (int k = 0; k < m; ++k) {
            if (k == i) continue;
            double f = T(k, enter);
            if (std::abs(f) > 0.0) {
                T.row(k) -= f * T.row(i);
                rhs[k] -= f * rhs[i];
            }
        }
        basis[i] = enter;
    }
    // Forbid artificials from re-entering.
    for (int j = n_struct; j < ncols; ++j) T.col(j).setZero();

    // Phase 2
    Vector c2 = Vector::Zero(ncols);
    c2.head(n) = c;
    c2.segment(n, n) = -c;
    double obj2 = 0.0;
    if (simplex_core(T, rhs, c2, basis, obj2) != 0) {
        res.status = LpStatus::Unbounded;
        return res;
    }

    Vector y = Vector::Zero(ncols);
    for (int i = 0; i < m; ++i) y[basis[i]] = rhs[i];
    res.status = LpStatus::Optimal;
    res.x = y.head(n) - y.segment(n, n);
    res.objective = obj2;
    return res;
}

bool lp_feasible(const Matrix& A_ub, const Vector& b_ub, const Matrix& A_eq,
                 const Vector& b_eq) {
    int n = 0;
    if (A_ub.rows() > 0) n = static_cast<int>(A_ub.cols());
    if (A_eq.rows() > 0) n = static_cast<int>(A_eq.cols());
    LpResult r = solve_lp(Vector::Zero(n), A_ub, b_ub, A_eq, b_eq);
    return r.status == LpStatus::Optimal;
}

}  // namespace gnex
