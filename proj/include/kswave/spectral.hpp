#pragma once

#include <optional>
#include <span>
#include <vector>

#include "kswave/model.hpp"

namespace kswave {

/// Number of eigenvalues strictly below `shift` of the symmetric tridiagonal
/// matrix with diagonal `diag` and constant off-diagonal `off` (Sturm count).
[[nodiscard]] std::size_t sturm_count(std::span<const double> diag, double off, double shift);

/// Largest eigenvalue by Sturm bisection, refined until the bracket stops
/// shrinking. `width` receives the final bracket width.
[[nodiscard]] double largest_eigenvalue(std::span<const double> diag, double off,
                                        double* width = nullptr);

struct EigenResult {
    double lambda = 0.0;
    double L = 0.0;
    double h = 0.0;
    bool converged = false;  ///< bracket width <= 1e-10
    /// Principal eigenfunction phi on all grid nodes (zero at +-L), sup-norm 1.
    std::optional<std::vector<double>> eigenfunction;
};

/// Principal Dirichlet eigenvalue of phi'' + c phi' + r phi on (-L, L).
///
/// Uses phi = e^{-cx/2} psi to get psi'' + (r - c^2/4) psi = lambda psi, then
/// the 3-point Laplacian, which gives a symmetric tridiagonal matrix.
[[nodiscard]] EigenResult principal_eigenvalue(const GrowthProfile& profile, double c, double L,
                                               double h, bool with_eigenfunction = false);

/// Same, for r given on the grid nodes (size M+1).
[[nodiscard]] EigenResult principal_eigenvalue(std::span<const double> r_nodes, const Grid& grid,
                                               double c, bool with_eigenfunction = false);

struct LambdaSweepEntry {
    double L = 0.0;
    double h = 0.0;
    double lambda = 0.0;
};

struct LambdaInfinity {
    double estimate = 0.0;
    double lower_bound = 0.0;  ///< last lambda_L (the sequence is nondecreasing)
    double upper_bound = 0.0;  ///< r* - c^2/4
    int certified_sign = 0;    ///< +1 / -1 when the bounds fix the sign, else 0
    bool converged = false;
    std::vector<LambdaSweepEntry> sweep;
};

struct LambdaInfinityOptions {
    double tol = 1e-4;
    double h = 0.01;
    int max_doublings = 8;
};

/// lambda_infinity as the limit of lambda_L over L = L0, 2 L0, 4 L0, ... with
/// L0 = support radius + 10 and fixed h, so the grids are nested. Throws
/// NumericalError when the sequence is not nondecreasing to 1e-9.
[[nodiscard]] LambdaInfinity lambda_infinity(const GrowthProfile& profile, double c,
                                             const LambdaInfinityOptions& opts = {});

}  // namespace kswave
