#pragma once

#include <span>
#include <vector>

#include "kswave/model.hpp"

namespace kswave {

/// Closure used for the zero-flux end at x = L (Case 1 only).
enum class NeumannClosure {
    FirstOrder,   ///< v_{M+1} = v_M, the reproduction default
    SecondOrder,  ///< ghost node v_{M+2} = v_M, for convergence studies
};

/// Chemical concentration v and its derivative on the grid nodes.
struct ChemicalField {
    std::vector<double> v;
    std::vector<double> vx;
};

/// Factorized discrete operator for v_xx - nu v + mu u = 0.
///
/// The matrix does not depend on u, so the Thomas forward sweep is done
/// once; each solve is a single O(M) pass.
class ChemicalSolver {
public:
    ChemicalSolver(const Grid& grid, double nu, double mu, BoundaryCase bc,
                   NeumannClosure closure = NeumannClosure::FirstOrder);

    [[nodiscard]] ChemicalField solve(std::span<const double> u) const;
    void solve_into(std::span<const double> u, ChemicalField& out) const;

    [[nodiscard]] const Grid& grid() const { return grid_; }
    [[nodiscard]] BoundaryCase boundary() const { return bc_; }
    [[nodiscard]] NeumannClosure closure() const { return closure_; }

private:
    Grid grid_;
    double mu_;
    BoundaryCase bc_;
    NeumannClosure closure_;
    std::size_t first_ = 1;  // first unknown node
    std::size_t last_ = 0;   // last unknown node (inclusive)
    double off_ = 1.0;       // off-diagonal entry (scaled by h^2)
    std::vector<double> sub_;
    std::vector<double> inv_pivot_;
    std::vector<double> upper_;  // modified super-diagonal c'_k
};

/// One-shot convenience wrapper around ChemicalSolver.
[[nodiscard]] ChemicalField solve_chemical(std::span<const double> u, const Grid& grid,
                                           double nu, double mu, BoundaryCase bc,
                                           NeumannClosure closure = NeumannClosure::FirstOrder);

/// Whole-line Green's representation of v, with u taken as zero off the grid.
///
/// The kernel integrals are evaluated exactly against the piecewise-linear
/// interpolant of u, via the shifted recursions
///   I-(x_i) = int_{-L}^{x_i} e^{-sqrt(nu)(x_i-y)} u(y) dy,
///   I+(x_i) = int_{x_i}^{L} e^{-sqrt(nu)(y-x_i)} u(y) dy,
/// which never exponentiate a positive argument.
struct GreensField {
    std::vector<double> psi;
    std::vector<double> psi_x;
};

[[nodiscard]] GreensField greens_field(std::span<const double> u, const Grid& grid, double nu,
                                       double mu);
[[nodiscard]] std::vector<double> greens_psi(std::span<const double> u, const Grid& grid,
                                             double nu, double mu);
[[nodiscard]] std::vector<double> greens_psi_x(std::span<const double> u, const Grid& grid,
                                               double nu, double mu);

}  // namespace kswave
