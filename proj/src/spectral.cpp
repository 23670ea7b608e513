#include "kswave/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kswave/error.hpp"

namespace kswave {

std::size_t sturm_count(std::span<const double> diag, double off, double shift)
{
    const double off2 = off * off;
    const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    std::size_t count = 0;
    double q = 1.0;
    for (std::size_t k = 0; k < diag.size(); ++k) {
        q = diag[k] - shift - (k > 0 ? off2 / q : 0.0);
        if (q == 0.0) q = -tiny;
        if (q < 0.0) ++count;
    }
    return count;
}

double largest_eigenvalue(std::span<const double> diag, double off, double* width)
{
    if (diag.empty()) throw ValidationError("empty matrix");
    const auto [dmin, dmax] = std::minmax_element(diag.begin(), diag.end());
    const double radius = diag.size() > 1 ? 2.0 * std::abs(off) : 0.0;
    double lo = *dmin - radius;
    double hi = *dmax + radius;
    const std::size_t n = diag.size();
    for (int iter = 0; iter < 300; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (sturm_count(diag, off, mid) == n) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if (width) *width = hi - lo;
    return 0.5 * (lo + hi);
}

EigenResult principal_eigenvalue(std::span<const double> r_nodes, const Grid& grid, double c,
                                 bool with_eigenfunction)
{
    if (r_nodes.size() != grid.size()) throw ValidationError("r length does not match the grid");
    const std::size_t m = grid.intervals();
    const double h = grid.step();
    const double inv_h2 = 1.0 / (h * h);
    const double advect = 0.25 * c * c;

    std::vector<double> diag(m - 1);
    for (std::size_t i = 1; i < m; ++i) diag[i - 1] = -2.0 * inv_h2 + r_nodes[i] - advect;

    EigenResult res;
    res.L = grid.half_length();
    res.h = h;
    double width = 0.0;
    res.lambda = largest_eigenvalue(diag, inv_h2, &width);
    res.converged = width <= 1e-10;
    if (!res.converged) {
        throw NumericalError("Sturm bisection did not reach 1e-10");
    }

    if (with_eigenfunction) {
        // Inverse iteration on (sigma I - T), an M-matrix for sigma above the
        // spectrum, so every iterate from a positive start stays positive.
        const std::size_t n = diag.size();
        const double sigma = res.lambda + std::max(1e-8, 1e-9 * std::abs(res.lambda));
        std::vector<double> psi(n, 1.0);
        std::vector<double> upper(n), rhs(n);
        for (int it = 0; it < 4; ++it) {
            double prev_upper = 0.0;
            double prev_rhs = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double pivot = (sigma - diag[k]) + (k > 0 ? inv_h2 * prev_upper : 0.0);
                upper[k] = -inv_h2 / pivot;
                rhs[k] = (psi[k] + (k > 0 ? inv_h2 * prev_rhs : 0.0)) / pivot;
                prev_upper = upper[k];
                prev_rhs = rhs[k];
            }
            for (std::size_t k = n; k-- > 0;) {
                psi[k] = rhs[k] - (k + 1 < n ? upper[k] * psi[k + 1] : 0.0);
            }
            const double norm = *std::max_element(psi.begin(), psi.end());
            for (double& p : psi) p /= norm;
        }
        // phi = e^{-cx/2} psi, normalized in log space to avoid overflow.
        std::vector<double> logs(n);
        double top = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
            if (!(psi[k] > 0.0)) throw NumericalError("principal eigenfunction changed sign");
            logs[k] = std::log(psi[k]) - 0.5 * c * grid.x(k + 1);
            top = std::max(top, logs[k]);
        }
        std::vector<double> phi(grid.size(), 0.0);
        for (std::size_t k = 0; k < n; ++k) phi[k + 1] = std::exp(logs[k] - top);
        res.eigenfunction = std::move(phi);
    }
    return res;
}

EigenResult principal_eigenvalue(const GrowthProfile& profile, double c, double L, double h,
                                 bool with_eigenfunction)
{
    const Grid grid(L, h);
    return principal_eigenvalue(sample(profile, grid), grid, c, with_eigenfunction);
}

LambdaInfinity lambda_infinity(const GrowthProfile& profile, double c,
                               const LambdaInfinityOptions& opts)
{
    if (!(opts.tol > 0.0) || !(opts.h > 0.0)) throw ValidationError("tol and h must be positive");
    LambdaInfinity out;
    out.upper_bound = profile.r_star() - 0.25 * c * c;

    // Start on a multiple of h so that every doubled grid contains the last.
    const double start = std::ceil((profile.support_radius() + 10.0) / opts.h - 1e-9) * opts.h;
    double L = start;
    for (int k = 0; k <= opts.max_doublings; ++k, L *= 2.0) {
        const EigenResult r = principal_eigenvalue(profile, c, L, opts.h);
        if (!out.sweep.empty() && r.lambda < out.sweep.back().lambda - 1e-9) {
            throw NumericalError("lambda_L decreased with L; discretization too coarse");
        }
        out.sweep.push_back({L, opts.h, r.lambda});
        if (out.sweep.size() >= 2 &&
            std::abs(r.lambda - out.sweep[out.sweep.size() - 2].lambda) < opts.tol) {
            out.converged = true;
            break;
        }
    }
    out.estimate = out.sweep.back().lambda;
    out.lower_bound = out.estimate;
    if (out.lower_bound > 0.0) {
        out.certified_sign = 1;
    } else if (out.upper_bound < 0.0) {
        out.certified_sign = -1;
    }
    return out;
}

}  // namespace kswave
