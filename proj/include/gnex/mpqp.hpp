#pragma once

#include <optional>
#include <random>

#include "gnex/polyhedron.hpp"
#include "gnex/qp.hpp"
#include "gnex/types.hpp"

namespace gnex {

// One agent's parametric QP
//   min_x 0.5 x'Qx + (c_bar + F_bar th)'x   s.t.  A x <= b + B_bar th
// over a parameter polytope theta_box.
struct MpqpProblem {
    Matrix Q;        // n_i x n_i, positive definite
    Vector c_bar;    // n_i
    Matrix F_bar;    // n_i x n_th
    Matrix A;        // n_A x n_i (zero rows are parameter-only constraints)
    Vector b;        // n_A
    Matrix B_bar;    // n_A x n_th
    Polyhedron theta_box;

    int n() const { return static_cast<int>(Q.rows()); }
    int n_theta() const { return static_cast<int>(F_bar.cols()); }
    int n_rows() const { return static_cast<int>(A.rows()); }
};

struct CriticalRegionAgent {
    IndexSet active_set;
    AffineFunction primal;  // th -> x
    AffineFunction dual;    // th -> lambda (full n_A vector, zero on inactive)
    Polyhedron region;      // over th
};

struct BestResponseMap {
    int agent_id = 0;
    std::vector<CriticalRegionAgent> regions;
    Polyhedron theta_box;
};

struct MpqpOptions {
    double full_dim_eps = 1e-6;
    long candidate_budget = 1 << 18;
    int coverage_samples = 500;
    bool check_coverage = true;
    bool reduce_regions = true;  // redundancy-remove each region
    unsigned seed = 12345;
};

// Parametric KKT solve for one fixed active set. Returns nothing when the
// active rows violate LICQ or the region is not full-dimensional.
std::optional<CriticalRegionAgent> active_set_region(const MpqpProblem& p,
                                                     const IndexSet& aset,
                                                     const MpqpOptions& opts = {});

// Enumerates active sets (depth-first with infeasibility pruning, capped by
// candidate_budget) and assembles the PWA best-response map.
BestResponseMap solve_mpqp(const MpqpProblem& p, const MpqpOptions& opts = {});

// Uniform sample from a polytope via bounding-box rejection. Deterministic
// for a given engine state.
Vector sample_polytope(const Polyhedron& P, std::mt19937_64& rng,
                       int max_tries = 10000);

}  // namespace gnex
