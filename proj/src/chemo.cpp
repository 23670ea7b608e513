#include "kswave/chemo.hpp"

#include <cmath>

#include "kswave/error.hpp"

namespace kswave {

ChemicalSolver::ChemicalSolver(const Grid& grid, double nu, double mu, BoundaryCase bc,
                               NeumannClosure closure)
    : grid_(grid), mu_(mu), bc_(bc), closure_(closure)
{
    if (!(nu > 0.0)) throw ValidationError("nu must be positive");
    const std::size_t m = grid_.intervals();
    const double h = grid_.step();
    const bool ghost = bc_ == BoundaryCase::Case1 && closure_ == NeumannClosure::SecondOrder;
    first_ = 1;
    last_ = ghost ? m : m - 1;
    const std::size_t n = last_ - first_ + 1;

    // Rows scaled by -h^2: (2 + nu h^2) v_i - v_{i-1} - v_{i+1} = mu h^2 u_i.
    const double diag = 2.0 + nu * h * h;
    off_ = -1.0;
    std::vector<double> d(n, diag);
    std::vector<double> sub(n, off_);
    std::vector<double> sup(n, off_);
    if (bc_ == BoundaryCase::Case1) {
        if (ghost) {
            sub[n - 1] = 2.0 * off_;  // v_{M+1} mirrored onto v_{M-1}
        } else {
            d[n - 1] = diag + off_;  // v_M = v_{M-1} folded into the last row
        }
    }

    inv_pivot_.assign(n, 0.0);
    upper_.assign(n, 0.0);
    sub_ = std::move(sub);
    double prev_upper = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double pivot = d[k] - (k > 0 ? sub_[k] * prev_upper : 0.0);
        if (pivot == 0.0 || !std::isfinite(pivot)) {
            throw NumericalError("zero pivot in chemical solve");
        }
        inv_pivot_[k] = 1.0 / pivot;
        upper_[k] = (k + 1 < n ? sup[k] : 0.0) * inv_pivot_[k];
        prev_upper = upper_[k];
    }
}

void ChemicalSolver::solve_into(std::span<const double> u, ChemicalField& out) const
{
    const std::size_t size = grid_.size();
    if (u.size() != size) throw ValidationError("u length does not match the grid");
    const std::size_t m = grid_.intervals();
    const double h = grid_.step();
    const double scale = mu_ * h * h;
    const std::size_t n = last_ - first_ + 1;

    out.v.assign(size, 0.0);
    out.vx.assign(size, 0.0);
    auto& v = out.v;

    // Forward sweep writes d' into v[first_ + k].
    double prev = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double rhs = scale * u[first_ + k];
        prev = (rhs - (k > 0 ? sub_[k] * prev : 0.0)) * inv_pivot_[k];
        v[first_ + k] = prev;
    }
    for (std::size_t k = n - 1; k-- > 0;) {
        v[first_ + k] -= upper_[k] * v[first_ + k + 1];
    }

    v[0] = 0.0;
    if (bc_ == BoundaryCase::Case2) {
        v[m] = 0.0;
    } else if (closure_ == NeumannClosure::FirstOrder) {
        v[m] = v[m - 1];
    }

    auto& vx = out.vx;
    const double inv2h = 0.5 / h;
    for (std::size_t i = 1; i < m; ++i) vx[i] = (v[i + 1] - v[i - 1]) * inv2h;
    vx[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) * inv2h;
    if (bc_ == BoundaryCase::Case2) {
        vx[m] = (3.0 * v[m] - 4.0 * v[m - 1] + v[m - 2]) * inv2h;
    } else if (closure_ == NeumannClosure::FirstOrder) {
        vx[m] = (v[m] - v[m - 1]) / h;
    } else {
        vx[m] = 0.0;
    }
}

ChemicalField ChemicalSolver::solve(std::span<const double> u) const
{
    ChemicalField out;
    solve_into(u, out);
    return out;
}

ChemicalField solve_chemical(std::span<const double> u, const Grid& grid, double nu, double mu,
                             BoundaryCase bc, NeumannClosure closure)
{
    return ChemicalSolver(grid, nu, mu, bc, closure).solve(u);
}

// ---------------------------------------------------------------------------

namespace {

// Moments of e^{-a t} on [0,1] against the linear hat weights:
//   alpha = int t e^{-a t} dt,  beta = int (1-t) e^{-a t} dt.
void hat_moments(double a, double& alpha, double& beta)
{
    if (a < 0.5) {
        double term = 1.0;  // (-a)^n / n!
        double first = 0.0;
        double zeroth = 0.0;
        for (int n = 0; n < 30; ++n) {
            first += term / (n + 2);
            zeroth += term / (n + 1);
            term *= -a / (n + 1);
        }
        alpha = first;
        beta = zeroth - first;
        return;
    }
    const double e = std::exp(-a);
    alpha = (1.0 - e * (1.0 + a)) / (a * a);
    beta = (1.0 - e) / a - alpha;
}

}  // namespace

GreensField greens_field(std::span<const double> u, const Grid& grid, double nu, double mu)
{
    if (u.size() != grid.size()) throw ValidationError("u length does not match the grid");
    if (!(nu > 0.0)) throw ValidationError("nu must be positive");
    const std::size_t size = grid.size();
    const double h = grid.step();
    const double k = std::sqrt(nu);
    const double decay = std::exp(-k * h);
    double alpha = 0.0;
    double beta = 0.0;
    hat_moments(k * h, alpha, beta);

    std::vector<double> left(size, 0.0);
    std::vector<double> right(size, 0.0);
    for (std::size_t i = 1; i < size; ++i) {
        left[i] = decay * left[i - 1] + h * (alpha * u[i - 1] + beta * u[i]);
    }
    for (std::size_t i = size - 1; i-- > 0;) {
        right[i] = decay * right[i + 1] + h * (alpha * u[i + 1] + beta * u[i]);
    }

    GreensField out;
    out.psi.resize(size);
    out.psi_x.resize(size);
    const double psi_scale = mu / (2.0 * k);
    for (std::size_t i = 0; i < size; ++i) {
        out.psi[i] = psi_scale * (left[i] + right[i]);
        out.psi_x[i] = 0.5 * mu * (right[i] - left[i]);
    }
    return out;
}

std::vector<double> greens_psi(std::span<const double> u, const Grid& grid, double nu, double mu)
{
    return greens_field(u, grid, nu, mu).psi;
}

std::vector<double> greens_psi_x(std::span<const double> u, const Grid& grid, double nu,
                                 double mu)
{
    return greens_field(u, grid, nu, mu).psi_x;
}

}  // namespace kswave
