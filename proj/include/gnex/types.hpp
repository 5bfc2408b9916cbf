#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace gnex {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IndexSet = std::vector<int>;

class GnexError : public std::runtime_error {
public:
    explicit GnexError(const std::string& msg) : std::runtime_error(msg) {}
};

class DimensionError : public GnexError {
public:
    explicit DimensionError(const std::string& msg) : GnexError(msg) {}
};

class NumericalError : public GnexError {
public:
    explicit NumericalError(const std::string& msg) : GnexError(msg) {}
};

// Affine map z -> G z + g.
struct AffineFunction {
    Matrix G;
    Vector g;

    AffineFunction() = default;
    AffineFunction(Matrix G_, Vector g_) : G(std::move(G_)), g(std::move(g_)) {
        if (G.rows() != g.size())
            throw DimensionError("AffineFunction: G rows != g size");
    }

    Vector operator()(const Vector& z) const { return G * z + g; }
    Eigen::Index in_dim() const { return G.cols(); }
    Eigen::Index out_dim() const { return G.rows(); }
};

}  // namespace gnex
