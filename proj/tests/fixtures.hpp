#pragma once

#include "gnex/gne.hpp"

namespace gnex {

// Two-agent duopoly with one shared capacity row; the canonical small
// fixture (same data as `gnex make running-example`).
inline GNEProblem duopoly_fixture() {
    GNEProblem gp;
    gp.N = 2;
    gp.block_sizes = {1, 1};
    gp.Q = {(Matrix(2, 2) << 1, -1, -1, 0).finished(),
            (Matrix(2, 2) << 0, 1, 1, 2).finished()};
    gp.c = {Vector::Zero(2), Vector::Zero(2)};
    gp.F = {(Matrix(2, 2) << 0, 1, 0, 0).finished(), Matrix::Zero(2, 2)};
    gp.A = (Matrix(3, 2) << -1, -1, -1, 0, 0, -1).finished();
    gp.b = Vector::Zero(3);
    gp.S = (Matrix(3, 2) << 1, 0, 0, 0, 0, 0).finished();
    gp.p_box = Polyhedron::box(Vector::Constant(2, -10.0),
                               Vector::Constant(2, 10.0), {"p_c", "p_1"});
    gp.x_min = Vector::Zero(2);
    gp.x_max = Vector::Constant(2, 10.0);
    return gp;
}

// True iff some region's primal law equals G z + g within tol.
inline bool has_law(const BestResponseMap& map, const Matrix& G,
                    const Vector& g, double tol = 1e-8) {
    for (const auto& cr : map.regions) {
        if ((cr.primal.G - G).lpNorm<Eigen::Infinity>() <= tol &&
            (cr.primal.g - g).lpNorm<Eigen::Infinity>() <= tol)
            return true;
    }
    return false;
}

}  // namespace gnex
