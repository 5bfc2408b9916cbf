#include "gnex/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gnex/lp.hpp"

namespace gnex {

namespace {

constexpr double kTol = 1e-9;

// Solve the equality-constrained KKT system
//   [Q  Aw'] [x]   [-c ]
//   [Aw  0 ] [l] = [ bw]
bool solve_eqp(const Matrix& Q, const Vector& c, const Matrix& Aw,
               const Vector& bw, Vector& x, Vector& lam) {
    const int n = static_cast<int>(Q.rows());
    const int k = static_cast<int>(Aw.rows());
    Matrix K = Matrix::Zero(n + k, n + k);
    K.topLeftCorner(n, n) = Q;
    if (k > 0) {
        K.topRightCorner(n, k) = Aw.transpose();
        K.bottomLeftCorner(k, n) = Aw;
    }
    Vector rhs(n + k);
    rhs.head(n) = -c;
    rhs.tail(k) = bw;
    Eigen::FullPivLU<Matrix> lu(K);
    if (lu.rank() < n + k) return false;
    Vector sol = lu.solve(rhs);
    x = sol.head(n);
    lam = sol.tail(k);
    return true;
}

}  // namespace

QpSolution solve_qp(const QpProblem& p) {
    const int n = static_cast<int>(p.Q.rows());
    const int m = static_cast<int>(p.A.rows());
    QpSolution sol;

    if (p.Q.cols() != n || p.c.size() != n)
        throw DimensionError("solve_qp: Q/c dimension mismatch");
    if ((p.Q - p.Q.transpose()).lpNorm<Eigen::Infinity>() > 1e-10)
        throw NumericalError("solve_qp: Q not symmetric");
    if (m > 0 && (p.A.cols() != n || p.b.size() != m))
        throw DimensionError("solve_qp: A/b dimension mismatch");

    Eigen::LLT<Matrix> llt(p.Q);
    if (llt.info() != Eigen::Success)
        throw NumericalError("solve_qp: Q not positive definite");

    auto objective = [&](const Vector& x) {
        return 0.5 * x.dot(p.Q * x) + p.c.dot(x);
    };

    if (m == 0) {
        sol.status = QpStatus::Optimal;
        sol.x = llt.solve(-p.c);
        sol.lambda = Vector::Zero(0);
        sol.objective = objective(sol.x);
        return sol;
    }

    // Unconstrained minimizer feasible: done.
    Vector xu = llt.solve(-p.c);
    if (((p.A * xu - p.b).array() <= kTol).all()) {
        sol.status = QpStatus::Optimal;
        sol.x = xu;
        sol.lambda = Vector::Zero(m);
        sol.objective = objective(sol.x);
        return sol;
    }

    // Feasible start via phase-1 LP.
    LpResult feas = solve_lp(Vector::Zero(n), p.A, p.b);
    if (feas.status != LpStatus::Optimal) {
        sol.status = QpStatus::Infeasible;
        sol.diagnostics = "phase-1 LP infeasible";
        return sol;
    }
    Vector x = feas.x;

    std::vector<int> W;  // working set, kept sorted
    const long max_iter = 200 + 50L * (m + n);
    const long bland_after = 100 + 10L * (m + n);

    for (long iter = 0;; ++iter) {
        if (iter > max_iter) {
            sol.status = QpStatus::NumericalFailure;
            sol.diagnostics = "active-set iteration limit";
            sol.x = x;
            return sol;
        }
        const int k = static_cast<int>(W.size());
        Matrix Aw(k, n);
        Vector bw(k);
        for (int i = 0; i < k; ++i) {
            Aw.row(i) = p.A.row(W[i]);
            bw[i] = p.b[W[i]];
        }
        Vector xeq, lam;
        if (!solve_eqp(p.Q, p.c, Aw, bw, xeq, lam)) {
            sol.status = QpStatus::NumericalFailure;
            sol.diagnostics = "singular KKT system in working set";
            sol.x = x;
            return sol;
        }
        Vector d = xeq - x;
        if (d.lpNorm<Eigen::Infinity>() <= kTol) {
            // stationary on W; check multipliers
            int drop = -1;
            if (iter > bland_after) {
                for (int i = 0; i < k; ++i)
                    if (lam[i] < -kTol) { drop = i; break; }
            } else {
                double most_neg = -kTol;
                for (int i = 0; i < k; ++i)
                    if (lam[i] < most_neg) { most_neg = lam[i]; drop = i; }
            }
            if (drop < 0) {
                sol.status = QpStatus::Optimal;
                sol.x = xeq;
                sol.lambda = Vector::Zero(m);
                for (int i = 0; i < k; ++i) sol.lambda[W[i]] = std::max(lam[i], 0.0);
                sol.active_set = W;
                sol.objective = objective(xeq);
                return sol;
            }
            W.erase(W.begin() + drop);
            continue;
        }
        // Ratio test against constraints outside W.
        double alpha = 1.0;
        int block = -1;
        for (int i = 0; i < m; ++i) {
            if (std::binary_search(W.begin(), W.end(), i)) continue;
            double ad = p.A.row(i).dot(d);
            if (ad > kTol) {
                double resid = p.b[i] - p.A.row(i).dot(x);
                double ratio = std::max(resid, 0.0) / ad;
                if (ratio < alpha - 1e-12) {
                    alpha = ratio;
                    block = i;
                }
            }
        }
        x += alpha * d;
        if (block >= 0) {
            W.insert(std::upper_bound(W.begin(), W.end(), block), block);
        }
    }
}

}  // namespace gnex
