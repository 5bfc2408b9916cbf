#pragma once

#include "gnex/types.hpp"

namespace gnex {

// Dense inequality description {z : C z <= d}. Rows are normalized to unit
// Euclidean norm at construction; zero rows with negative rhs are kept as an
// emptiness certificate, trivially true zero rows are dropped.
class Polyhedron {
public:
    Polyhedron() = default;
    Polyhedron(Matrix C, Vector d, std::vector<std::string> var_labels = {});

    static Polyhedron box(const Vector& lb, const Vector& ub,
                          std::vector<std::string> var_labels = {});

    // Trusts that rows are already normalized; used when reloading
    // serialized polyhedra so a load/save cycle is byte-identical.
    static Polyhedron from_normalized(Matrix C, Vector d,
                                      std::vector<std::string> var_labels = {});

    const Matrix& C() const { return C_; }
    const Vector& d() const { return d_; }
    const std::vector<std::string>& var_labels() const { return labels_; }
    int dim() const { return static_cast<int>(C_.cols()); }
    int rows() const { return static_cast<int>(C_.rows()); }

private:
    Matrix C_;
    Vector d_;
    std::vector<std::string> labels_;
};

struct ChebyshevResult {
    Vector center;
    double radius = -1.0;
};

// Sentinel returned when the inscribed-ball radius is unbounded.
constexpr double kChebyshevUnbounded = 1e6;

ChebyshevResult chebyshev(const Polyhedron& P);
bool is_full_dimensional(const Polyhedron& P, double eps = 1e-6);

// Minimal representation of the same set; survivor row order preserved.
Polyhedron remove_redundant(const Polyhedron& P);

Polyhedron intersect(const Polyhedron& P1, const Polyhedron& P2);

bool contains(const Polyhedron& P, const Vector& z, double tol);

// Fourier-Motzkin projection onto the variables not listed in drop_vars,
// with redundancy removal after each eliminated variable.
Polyhedron eliminate(const Polyhedron& P, const IndexSet& drop_vars,
                     int row_cap = 5000);

// max a'z over P; throws if P is empty, returns kChebyshevUnbounded-scaled
// +inf surrogate if unbounded.
double support(const Polyhedron& P, const Vector& a);

// P subset of Q (within tol), checked by maximizing each row of Q over P.
bool poly_subset(const Polyhedron& P, const Polyhedron& Q, double tol = 1e-7);
bool poly_equal(const Polyhedron& P, const Polyhedron& Q, double tol = 1e-7);

// Axis-aligned bounding box via 2n support LPs.
void bounding_box(const Polyhedron& P, Vector& lb, Vector& ub);

}  // namespace gnex
