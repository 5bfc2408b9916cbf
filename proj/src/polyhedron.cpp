#include "gnex/polyhedron.hpp"

#include <algorithm>
#include <cmath>

#include "gnex/lp.hpp"

namespace gnex {

namespace {
constexpr double kZeroRowTol = 1e-12;
}

Polyhedron::Polyhedron(Matrix C, Vector d, std::vector<std::string> var_labels) {
    if (C.rows() != d.size())
        throw DimensionError("Polyhedron: C/d row mismatch");
    const int n = static_cast<int>(C.cols());
    if (var_labels.empty()) {
        var_labels.resize(n);
        for (int j = 0; j < n; ++j) var_labels[j] = "z" + std::to_string(j);
    } else if (static_cast<int>(var_labels.size()) != n) {
        throw DimensionError("Polyhedron: label count mismatch");
    }
    labels_ = std::move(var_labels);

    std::vector<int> keep;
    for (int i = 0; i < C.rows(); ++i) {
        double nrm = C.row(i).norm();
        if (nrm <= kZeroRowTol) {
            if (d[i] < -kZeroRowTol) keep.push_back(i);  // emptiness witness
            continue;  // trivially true
        }
        C.row(i) /= nrm;
        d[i] /= nrm;
        keep.push_back(i);
    }
    C_.resize(keep.size(), n);
    d_.resize(keep.size());
    for (size_t r = 0; r < keep.size(); ++r) {
        C_.row(r) = C.row(keep[r]);
        d_[r] = d[keep[r]];
    }
}

Polyhedron Polyhedron::from_normalized(Matrix C, Vector d,
                                       std::vector<std::string> var_labels) {
    if (C.rows() != d.size())
        throw DimensionError("Polyhedron: C/d row mismatch");
    const int n = static_cast<int>(C.cols());
    if (var_labels.empty()) {
        var_labels.resize(n);
        for (int j = 0; j < n; ++j) var_labels[j] = "z" + std::to_string(j);
    } else if (static_cast<int>(var_labels.size()) != n) {
        throw DimensionError("Polyhedron: label count mismatch");
    }
    Polyhedron P;
    P.C_ = std::move(C);
    P.d_ = std::move(d);
    P.labels_ = std::move(var_labels);
    return P;
}

Polyhedron Polyhedron::box(const Vector& lb, const Vector& ub,
                           std::vector<std::string> var_labels) {
    const int n = static_cast<int>(lb.size());
    if (ub.size() != n) throw DimensionError("Polyhedron::box: lb/ub mismatch");
    Matrix C(2 * n, n);
    Vector d(2 * n);
    C.setZero();
    for (int j = 0; j < n; ++j) {
        C(2 * j, j) = 1.0;
        d[2 * j] = ub[j];
        C(2 * j + 1, j) = -1.0;
        d[2 * j + 1] = -lb[j];
    }
    return Polyhedron(std::move(C), std::move(d), std::move(var_labels));
}

ChebyshevResult chebyshev(const Polyhedron& P) {
    ChebyshevResult res;
    const int n = P.dim();
    res.center = Vector::Zero(n);
    const int m = P.rows();
    if (m == 0) {
        res.radius = kChebyshevUnbounded;
        return res;
    }
    // Any zero row kept at construction certifies emptiness.
    for (int i = 0; i < m; ++i) {
        if (P.C().row(i).norm() <= kZeroRowTol) {
            res.radius = P.d()[i];  // negative by construction
            return res;
        }
    }
    // max r  s.t.  C z + r <= d  (rows have unit norm)
    Matrix A(m, n + 1);
    A.leftCols(n) = P.C();
    A.col(n).setOnes();
    Vector c = Vector::Zero(n + 1);
    c[n] = -1.0;
    LpResult lp = solve_lp(c, A, P.d());
    if (lp.status == LpStatus::Unbounded) {
        // clamp the radius and recover a center with the clamp in place
        Matrix A2(m + 1, n + 1);
        A2.topRows(m) = A;
        A2.row(m).setZero();
        A2(m, n) = 1.0;
        Vector d2(m + 1);
        d2.head(m) = P.d();
        d2[m] = kChebyshevUnbounded;
        lp = solve_lp(c, A2, d2);
        if (lp.status != LpStatus::Optimal)
            throw NumericalError("chebyshev: clamped LP failed");
        res.center = lp.x.head(n);
        res.radius = kChebyshevUnbounded;
        return res;
    }
    if (lp.status != LpStatus::Optimal)
        throw NumericalError("chebyshev: LP solver failed");
    res.center = lp.x.head(n);
    res.radius = lp.x[n];
    return res;
}

bool is_full_dimensional(const Polyhedron& P, double eps) {
    if (eps <= 0) throw GnexError("is_full_dimensional: eps must be > 0");
    return chebyshev(P).radius > eps;
}

Polyhedron remove_redundant(const Polyhedron& P) {
    const int m = P.rows();
    const int n = P.dim();
    if (chebyshev(P).radius < 0)
        throw GnexError("remove_redundant: polyhedron is empty");
    std::vector<bool> removed(m, false);
    for (int i = 0; i < m; ++i) {
        // maximize row i over the others, with a relaxation bound to stay
        // bounded: C_i z <= d_i + 1
        std::vector<int> rows;
        for (int k = 0; k < m; ++k)
            if (k != i && !removed[k]) rows.push_back(k);
        Matrix A(rows.size() + 1, n);
        Vector b(rows.size() + 1);
        for (size_t r = 0; r < rows.size(); ++r) {
            A.row(r) = P.C().row(rows[r]);
            b[r] = P.d()[rows[r]];
        }
        A.row(rows.size()) = P.C().row(i);
        b[rows.size()] = P.d()[i] + 1.0;
        LpResult lp = solve_lp(Vector(-P.C().row(i).transpose()), A, b);
        if (lp.status != LpStatus::Optimal)
            throw NumericalError("remove_redundant: LP failed");
        if (-lp.objective <= P.d()[i] + 1e-9) removed[i] = true;
    }
    std::vector<int> keep;
    for (int i = 0; i < m; ++i)
        if (!removed[i]) keep.push_back(i);
    Matrix C(keep.size(), n);
    Vector d(keep.size());
    for (size_t r = 0; r < keep.size(); ++r) {
        C.row(r) = P.C().row(keep[r]);
        d[r] = P.d()[keep[r]];
    }
    return Polyhedron(std::move(C), std::move(d), P.var_labels());
}

Polyhedron intersect(const Polyhedron& P1, const Polyhedron& P2) {
    if (P1.dim() != P2.dim())
        throw DimensionError("intersect: dimension mismatch");
    Matrix C(P1.rows() + P2.rows(), P1.dim());
    Vector d(P1.rows() + P2.rows());
    C.topRows(P1.rows()) = P1.C();
    C.bottomRows(P2.rows()) = P2.C();
    d.head(P1.rows()) = P1.d();
    d.tail(P2.rows()) = P2.d();
    return Polyhedron(std::move(C), std::move(d), P1.var_labels());
}

bool contains(const Polyhedron& P, const Vector& z, double tol) {
    if (z.size() != P.dim()) throw DimensionError("contains: dimension mismatch");
    if (P.rows() == 0) return true;
    return ((P.C() * z - P.d()).array() <= tol).all();
}

Polyhedron eliminate(const Polyhedron& P, const IndexSet& drop_vars, int row_cap) {
    const int n = P.dim();
    std::vector<bool> drop(n, false);
    for (int v : drop_vars) {
        if (v < 0 || v >= n) throw DimensionError("eliminate: bad variable index");
        drop[v] = true;
    }
    Matrix C = P.C();
    Vector d = P.d();

    // Eliminate one variable at a time (descending index keeps earlier
    // indices stable while columns are removed at the end).
    std::vector<int> order(drop_vars.begin(), drop_vars.end());
    std::sort(order.begin(), order.end());
    for (int v : order) {
        std::vector<int> pos, neg, zero;
        for (int i = 0; i < C.rows(); ++i) {
            double a = C(i, v);
            if (a > kZeroRowTol) pos.push_back(i);
            else if (a < -kZeroRowTol) neg.push_back(i);
            else zero.push_back(i);
        }
        const long new_rows = static_cast<long>(zero.size()) +
                              static_cast<long>(pos.size()) * neg.size();
        if (new_rows > row_cap)
            throw GnexError("eliminate: Fourier-Motzkin row cap exceeded; "
                            "use the lifted polyhedron instead");
        Matrix Cn(new_rows, n);
        Vector dn(new_rows);
        long r = 0;
        for (int i : zero) {
            Cn.row(r) = C.row(i);
            dn[r++] = d[i];
        }
        for (int ip : pos) {
            for (int in : neg) {
                double ap = C(ip, v), an = -C(in, v);
                Cn.row(r) = an * C.row(ip) + ap * C.row(in);
                dn[r] = an * d[ip] + ap * d[in];
                Cn(r, v) = 0.0;
                ++r;
            }
        }
        // prune per variable to keep FM growth in check
        Polyhedron tmp(Cn, dn, P.var_labels());
        if (chebyshev(tmp).radius >= 0 && tmp.rows() > 0)
            tmp = remove_redundant(tmp);
        C = tmp.C();
        d = tmp.d();
    }

    // project out the dropped columns
    std::vector<int> keep_cols;
    std::vector<std::string> labels;
    for (int j = 0; j < n; ++j) {
        if (!drop[j]) {
            keep_cols.push_back(j);
            labels.push_back(P.var_labels()[j]);
        }
    }
    Matrix Cp(C.rows(), keep_cols.size());
    for (size_t j = 0; j < keep_cols.size(); ++j) Cp.col(j) = C.col(keep_cols[j]);
    return Polyhedron(std::move(Cp), Vector(d), std::move(labels));
}

double support(const Polyhedron& P, const Vector& a) {
    LpResult lp = solve_lp(-a, P.C(), P.d());
    if (lp.status == LpStatus::Unbounded)
        return std::numeric_limits<double>::infinity();
    if (lp.status != LpStatus::Optimal)
        throw GnexError("support: polyhedron is empty");
    return -lp.objective;
}

bool poly_subset(const Polyhedron& P, const Polyhedron& Q, double tol) {
    if (P.dim() != Q.dim()) throw DimensionError("poly_subset: dimension mismatch");
    for (int i = 0; i < Q.rows(); ++i) {
        double s = support(P, Q.C().row(i).transpose());
        if (s > Q.d()[i] + tol) return false;
    }
    return true;
}

bool poly_equal(const Polyhedron& P, const Polyhedron& Q, double tol) {
    return poly_subset(P, Q, tol) && poly_subset(Q, P, tol);
}

void bounding_box(const Polyhedron& P, Vector& lb, Vector& ub) {
    const int n = P.dim();
    lb.resize(n);
    ub.resize(n);
    for (int j = 0; j < n; ++j) {
        Vector e = Vector::Zero(n);
        e[j] = 1.0;
        ub[j] = support(P, e);
        lb[j] = -support(P, -e);
    }
}

}  // namespace gnex
