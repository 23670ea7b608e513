#include "kswave/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "kswave/error.hpp"

namespace kswave {

namespace {

double branch_residual(double B, double B1, double B2, double r, double psi, double psi_x,
                       const SimParams& p)
{
    return B2 + (p.c - p.chi * psi_x) * B1 +
           (r - p.chi * p.nu * psi - p.effective_damping() * B) * B;
}

void require_bounded(const SimParams& params)
{
    params.validate();
    if (!params.globally_bounded()) throw ValidationError("envelopes need b > chi*mu");
}

std::vector<double> sample_shape(const UpperShape& shape, const Grid& grid)
{
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = shape(grid.x(i));
    return out;
}

// Cubic Hermite interpolation on [x0, x1].
double hermite(double x0, double x1, double f0, double f1, double d0, double d1, double x)
{
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * f1 +
           (t3 - t2) * h * d1;
}

}  // namespace

double UpperShape::operator()(double x) const
{
    if (x < x_left) return level * std::exp(theta_left * (x - x_left));
    if (x_right && x > *x_right) return level * std::exp(-theta_right * (x - *x_right));
    return level;
}

std::string to_string(EnvelopeKind kind)
{
    switch (kind) {
    case EnvelopeKind::UpperCase1: return "upper_case1";
    case EnvelopeKind::UpperCase2: return "upper_case2";
    case EnvelopeKind::LowerCase1: return "lower_case1";
    case EnvelopeKind::LowerCase2Numeric: return "lower_case2_numeric";
    }
    return "unknown";
}

std::string to_string(CertStatus status)
{
    switch (status) {
    case CertStatus::Certified: return "certified";
    case CertStatus::Failed: return "failed";
    case CertStatus::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

Envelope build_upper_envelope_case1(const SimParams& params, const GrowthProfile& profile,
                                    const Grid& grid, std::optional<double> r1)
{
    require_bounded(params);
    if (classify_profile(profile) != ProfileClass::Case1) {
        throw ValidationError("upper envelope U1+ needs a Case-1 profile");
    }
    const double rl = profile.left_limit();
    const double level_r = r1.value_or(0.5 * rl);
    if (!(level_r > rl && level_r < 0.0)) throw ValidationError("r1 must lie in (r(-inf), 0)");
    const auto x1 = profile.left_sublevel_edge(level_r);
    if (!x1 || !std::isfinite(*x1)) throw ValidationError("no finite x1 for r1");

    UpperShape shape;
    shape.level = profile.r_star() / params.effective_damping();
    shape.x_left = *x1;
    shape.theta_left = theta_root(params.c, level_r, RootOrientation::Forward);

    Envelope env;
    env.kind = EnvelopeKind::UpperCase1;
    env.grid = grid;
    env.values = sample_shape(shape, grid);
    env.shape = shape;
    env.constants = {{"level", shape.level}, {"r1", level_r}, {"x1", *x1},
                     {"theta1", shape.theta_left}};
    return env;
}

Envelope build_upper_envelope_case2(const SimParams& params, const GrowthProfile& profile,
                                    const Grid& grid, std::optional<double> rbar)
{
    require_bounded(params);
    if (classify_profile(profile) != ProfileClass::Case2) {
        throw ValidationError("upper envelope U2+ needs a Case-2 profile");
    }
    const double top = std::max(profile.left_limit(), profile.right_limit());
    const double rb = rbar.value_or(0.5 * top);
    if (!(rb > top && rb < 0.0)) throw ValidationError("rbar must lie in (max r(+-inf), 0)");
    const auto xbar = profile.left_sublevel_edge(rb);
    const auto xtil = profile.right_sublevel_edge(rb);
    if (!xbar || !xtil || !std::isfinite(*xbar) || !std::isfinite(*xtil) || !(*xbar < *xtil)) {
        throw ValidationError("rbar does not separate the favourable region");
    }

    UpperShape shape;
    shape.level = profile.r_star() / params.effective_damping();
    shape.x_left = *xbar;
    shape.theta_left = theta_root(params.c, rb, RootOrientation::Forward);
    shape.x_right = *xtil;
    shape.theta_right = theta_root(params.c, rb, RootOrientation::Backward);

    Envelope env;
    env.kind = EnvelopeKind::UpperCase2;
    env.grid = grid;
    env.values = sample_shape(shape, grid);
    env.shape = shape;
    env.constants = {{"level", shape.level},         {"rbar", rb},
                     {"xbar", *xbar},                {"xtilde", *xtil},
                     {"theta_bar", shape.theta_left}, {"theta_tilde", shape.theta_right}};
    return env;
}

// ---------------------------------------------------------------------------

ResidualField residual_A(std::span<const double> u_freeze, std::span<const double> U,
                         const Grid& grid, const SimParams& params, const GrowthProfile& profile)
{
    if (u_freeze.size() != grid.size() || U.size() != grid.size()) {
        throw ValidationError("residual_A: vector length does not match the grid");
    }
    const GreensField g = greens_field(u_freeze, grid, params.nu, params.mu);
    const double h = grid.step();
    const std::size_t m = grid.intervals();
    ResidualField out;
    out.values.assign(grid.size(), 0.0);
    out.mask.assign(grid.size(), false);
    for (std::size_t i = 1; i < m; ++i) {
        const double d2 = (U[i + 1] - 2.0 * U[i] + U[i - 1]) / (h * h);
        const double d1 = (U[i + 1] - U[i - 1]) / (2.0 * h);
        out.values[i] = branch_residual(U[i], d1, d2, profile(grid.x(i)), g.psi[i], g.psi_x[i], params);
        out.mask[i] = true;
    }
    return out;
}

ResidualField residual_A(std::span<const double> u_freeze, const Envelope& upper,
                         const SimParams& params, const GrowthProfile& profile)
{
    if (!upper.shape) throw ValidationError("residual_A needs an upper envelope");
    const Grid& grid = upper.grid;
    if (u_freeze.size() != grid.size()) throw ValidationError("u_freeze length does not match the grid");
    const UpperShape& s = *upper.shape;
    const GreensField g = greens_field(u_freeze, grid, params.nu, params.mu);
    const double kink_tol = 1e-9 * grid.step();

    ResidualField out;
    out.values.assign(grid.size(), 0.0);
    out.mask.assign(grid.size(), true);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.x(i);
        const double B = s(x);
        double B1 = 0.0;
        double B2 = 0.0;
        if (std::abs(x - s.x_left) <= kink_tol || (s.x_right && std::abs(x - *s.x_right) <= kink_tol)) {
            out.mask[i] = false;
        }
        if (x < s.x_left) {
            B1 = s.theta_left * B;
            B2 = s.theta_left * B1;
        } else if (s.x_right && x > *s.x_right) {
            B1 = -s.theta_right * B;
            B2 = s.theta_right * s.theta_right * B;
        }
        out.values[i] = branch_residual(B, B1, B2, profile(x), g.psi[i], g.psi_x[i], params);
    }
    return out;
}

std::vector<std::vector<double>> envelope_samples(std::span<const double> bound, const Grid& grid,
                                                  std::size_t count, std::uint64_t seed)
{
    if (bound.size() != grid.size()) throw ValidationError("bound length does not match the grid");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double L = grid.half_length();
    std::vector<std::vector<double>> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        std::vector<double> u(bound.begin(), bound.end());
        if (k == 1) {
            std::fill(u.begin(), u.end(), 0.0);
        } else if (k >= 2) {
            switch (k % 3) {
            case 0: {
                const double s = unit(rng);
                for (double& x : u) x *= s;
                break;
            }
            case 1: {
                const double centre = -L + 2.0 * L * unit(rng);
                const double width = 0.5 + std::max(0.5, 0.5 * L) * unit(rng);
                const double height = unit(rng);
                for (std::size_t i = 0; i < u.size(); ++i) {
                    const double z = (grid.x(i) - centre) / width;
                    u[i] *= height * std::max(0.0, 1.0 - z * z);
                }
                break;
            }
            default: {
                // Rough modulation: random knots every unit length.
                const auto knots = static_cast<std::size_t>(std::ceil(2.0 * L)) + 1;
                std::vector<double> g(knots);
                for (double& x : g) x = unit(rng);
                for (std::size_t i = 0; i < u.size(); ++i) {
                    const double pos = std::clamp(grid.x(i) + L, 0.0, static_cast<double>(knots - 1));
                    const auto j = std::min(static_cast<std::size_t>(pos), knots - 2);
                    const double w = pos - static_cast<double>(j);
                    u[i] *= (1.0 - w) * g[j] + w * g[j + 1];
                }
                break;
            }
            }
        }
        out.push_back(std::move(u));
    }
    return out;
}

CertificationReport certify_supersolution(const Envelope& upper, const SimParams& params,
                                          const GrowthProfile& profile, std::size_t n_samples,
                                          std::uint64_t seed, double tolerance)
{
    if (!upper.shape) throw ValidationError("certification needs an upper envelope");
    require_bounded(params);
    const Grid& grid = upper.grid;
    const UpperShape& s = *upper.shape;
    const std::string lemma = to_string(upper.kind);

    CertificationReport rep;
    rep.tolerance = tolerance;
    rep.samples = n_samples;
    CertRow constant{lemma, "constant", -INFINITY, 0, 0.0, 0};
    CertRow left{lemma, "left_exponential", -INFINITY, 0, 0.0, 0};
    CertRow right{lemma, "right_exponential", -INFINITY, 0, 0.0, 0};

    auto note = [](CertRow& row, double value, std::size_t k, double x) {
        ++row.nodes_checked;
        if (value > row.worst_residual) {
            row.worst_residual = value;
            row.worst_sample = k;
            row.worst_x = x;
        }
    };

    const auto samples = envelope_samples(upper.values, grid, n_samples, seed);
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const GreensField g = greens_field(samples[k], grid, params.nu, params.mu);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double x = grid.x(i);
            const double r = profile(x);
            note(constant, branch_residual(s.level, 0.0, 0.0, r, g.psi[i], g.psi_x[i], params), k, x);
            if (x < s.x_left) {
                const double B = s.level * std::exp(s.theta_left * (x - s.x_left));
                const double B1 = s.theta_left * B;
                note(left, branch_residual(B, B1, s.theta_left * B1, r, g.psi[i], g.psi_x[i], params),
                     k, x);
            }
            if (s.x_right && x > *s.x_right) {
                const double B = s.level * std::exp(-s.theta_right * (x - *s.x_right));
                const double B1 = -s.theta_right * B;
                note(right,
                     branch_residual(B, B1, s.theta_right * s.theta_right * B, r, g.psi[i],
                                     g.psi_x[i], params),
                     k, x);
            }
        }
    }
    rep.rows.push_back(constant);
    if (left.nodes_checked) rep.rows.push_back(left);
    if (right.nodes_checked) rep.rows.push_back(right);

    const CertRow* worst = nullptr;
    for (const auto& row : rep.rows) {
        if (row.worst_residual > tolerance && (!worst || row.worst_residual > worst->worst_residual)) {
            worst = &row;
        }
    }
    const bool hypothesis = params.b >= 1.5 * params.chi * params.mu;
    if (!hypothesis) {
        rep.status = CertStatus::Inconclusive;
        rep.message = "b < 1.5 chi mu: no sign is claimed";
    } else if (worst) {
        rep.status = CertStatus::Failed;
        std::ostringstream msg;
        msg << worst->region << " residual " << worst->worst_residual << " at sample "
            << worst->worst_sample << ", x=" << worst->worst_x;
        rep.message = msg.str();
    }
    return rep;
}

GreenBoundReport certify_green_bounds(const SimParams& params, double r_star, const Grid& grid,
                                      std::size_t n_samples, std::uint64_t seed, double slack)
{
    require_bounded(params);
    const double level = r_star / params.effective_damping();
    GreenBoundReport rep;
    rep.samples = n_samples;
    rep.psi_bound = params.mu * level / params.nu;
    rep.psi_x_bound = params.mu * level / (2.0 * std::sqrt(params.nu));
    rep.worst_psi_slack = INFINITY;
    rep.worst_psi_x_slack = INFINITY;
    const std::vector<double> bound(grid.size(), level);
    for (const auto& u : envelope_samples(bound, grid, n_samples, seed)) {
        const GreensField g = greens_field(u, grid, params.nu, params.mu);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            rep.worst_psi_slack = std::min(rep.worst_psi_slack, rep.psi_bound - g.psi[i]);
            rep.worst_psi_x_slack = std::min(rep.worst_psi_x_slack, rep.psi_x_bound - std::abs(g.psi_x[i]));
        }
    }
    rep.passed = rep.worst_psi_slack >= -slack && rep.worst_psi_x_slack >= -slack;
    return rep;
}

// ---------------------------------------------------------------------------
// Ignition wave

double ignition_speed_bound(const SimParams& params, double r_star)
{
    const double d = params.effective_damping();
    return 2.0 * std::sqrt(r_star * (params.b - 2.0 * params.chi * params.mu) / d);
}

double ignition_right_level(const SimParams& params, double r_star, double epsilon)
{
    const double d = params.effective_damping();
    return ((r_star - epsilon) * d - params.chi * params.mu * r_star) / (d * d);
}

namespace {

struct PhasePoint {
    double psi;
    double p;
};

// Backward-in-x phase flow with s = -x: psi_s = -p, p_s = -c p + f(psi).
struct Shooter {
    double a;   // f'(0)
    double d;   // b - chi mu
    double c;
    double eps;

    [[nodiscard]] double f(double psi) const { return psi >= 0.0 ? psi * (a - d * psi) : 0.0; }

    [[nodiscard]] PhasePoint rhs(PhasePoint y) const
    {
        // The polynomial branch is used on both sides of zero so the stages of
        // the step that crosses psi = 0 stay smooth.
        return {-y.p, -c * y.p + y.psi * (a - d * y.psi)};
    }

    [[nodiscard]] PhasePoint rk4(PhasePoint y, double hs) const
    {
        const PhasePoint k1 = rhs(y);
        const PhasePoint k2 = rhs({y.psi + 0.5 * hs * k1.psi, y.p + 0.5 * hs * k1.p});
        const PhasePoint k3 = rhs({y.psi + 0.5 * hs * k2.psi, y.p + 0.5 * hs * k2.p});
        const PhasePoint k4 = rhs({y.psi + hs * k3.psi, y.p + hs * k3.p});
        return {y.psi + hs / 6.0 * (k1.psi + 2 * k2.psi + 2 * k3.psi + k4.psi),
                y.p + hs / 6.0 * (k1.p + 2 * k2.p + 2 * k3.p + k4.p)};
    }
};

struct ShotResult {
    bool reached = false;
    double p0 = 0.0;       // slope at psi = 0
    double length = 0.0;   // s at the crossing
    std::vector<PhasePoint> path;  // at s = k*hs, k = 0..K (before the crossing)
};

ShotResult shoot(const Shooter& sh, double plateau, const IgnitionOptions& opts, bool keep_path)
{
    const double lam = 0.5 * (sh.c - std::sqrt(sh.c * sh.c + 4.0 * sh.a));
    PhasePoint y{plateau - opts.offset, -lam * opts.offset};
    ShotResult res;
    const double hs = opts.step;
    const auto max_steps = static_cast<std::size_t>(std::ceil(opts.max_length / hs));
    if (keep_path) res.path.push_back(y);
    for (std::size_t k = 0; k < max_steps; ++k) {
        const PhasePoint next = sh.rk4(y, hs);
        if (next.psi <= 0.0) {
            // Land on psi = 0 with a Newton iteration on the partial step.
            double ds = hs * y.psi / (y.psi - next.psi);
            PhasePoint hit = sh.rk4(y, ds);
            for (int it = 0; it < 4 && hit.p > 0.0; ++it) {
                ds += hit.psi / hit.p;
                hit = sh.rk4(y, ds);
            }
            res.reached = hit.p > 0.0;
            res.p0 = hit.p;
            res.length = static_cast<double>(k) * hs + ds;
            return res;
        }
        if (next.p <= 0.0) return res;  // turned back before reaching zero
        y = next;
        if (keep_path) res.path.push_back(y);
    }
    return res;
}

}  // namespace

double IgnitionWave::operator()(double x) const
{
    if (psi.empty()) return 0.0;
    const double x_end = -radius + step * static_cast<double>(psi.size() - 1);
    if (x <= -radius) {
        const double p0 = dpsi[0] * std::exp(speed * radius);  // slope at 0 from the left tail
        return (p0 / speed) * (std::exp(speed * x) - 1.0);
    }
    if (x >= x_end) {
        // Linearized approach to the plateau.
        const double lam = 0.5 * (speed - std::sqrt(speed * speed + 4.0 * growth));
        const double gap = right_level - psi.back();
        return right_level - gap * std::exp(lam * (x - x_end));
    }
    const double pos = (x + radius) / step;
    const auto k = std::min(static_cast<std::size_t>(pos), psi.size() - 2);
    const double x0 = -radius + step * static_cast<double>(k);
    return hermite(x0, x0 + step, psi[k], psi[k + 1], dpsi[k], dpsi[k + 1], x);
}

IgnitionWave ignition_wave(const SimParams& params, double r_star, double epsilon,
                           const IgnitionOptions& opts)
{
    params.validate();
    if (!(params.b > 2.0 * params.chi * params.mu)) throw ValidationError("ignition wave needs b > 2 chi mu");
    const double d = params.effective_damping();
    const double a0 = r_star * (params.b - 2.0 * params.chi * params.mu) / d;
    const double a = a0 - epsilon;
    if (!(epsilon > 0.0) || !(a > 0.0)) {
        throw ValidationError("epsilon must lie in (0, r*(b - 2 chi mu)/(b - chi mu))");
    }
    if (!(opts.step > 0.0) || !(opts.truncation_radius > 0.0) || !(opts.speed_tol > 0.0)) {
        throw ValidationError("ignition options must be positive");
    }
    const double plateau = a / d;
    const double bound = 2.0 * std::sqrt(a0);

    auto mismatch = [&](double c) {
        const Shooter sh{a, d, c, epsilon};
        const ShotResult r = shoot(sh, plateau, opts, false);
        return r.reached ? r.p0 - c * epsilon : -INFINITY;
    };

    double lo = 0.0;
    double hi = bound;
    if (!(mismatch(lo) > 0.0) || !(mismatch(hi) < 0.0)) {
        throw NumericalError("ignition shooting: no sign change on (0, speed bound)");
    }
    while (hi - lo > opts.speed_tol) {
        const double mid = 0.5 * (lo + hi);
        if (mismatch(mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double c = 0.5 * (lo + hi);
    const Shooter sh{a, d, c, epsilon};
    ShotResult shot = shoot(sh, plateau, opts, true);
    if (!shot.reached) {
        // The midpoint can sit on the failing side by less than speed_tol.
        shot = shoot(Shooter{a, d, lo, epsilon}, plateau, opts, true);
    }
    if (!shot.reached) throw NumericalError("ignition shooting lost the trajectory");

    IgnitionWave w;
    w.epsilon = epsilon;
    w.speed = c;
    w.speed_bound = bound;
    w.left_level = -epsilon;
    w.right_level = plateau;
    w.growth = a;
    w.step = opts.step;
    w.radius = opts.truncation_radius;

    // Trajectory in increasing x: x = length - s.
    const std::size_t K = shot.path.size();
    std::vector<double> tx(K + 1), tpsi(K + 1), tp(K + 1);
    tx[0] = 0.0;
    tpsi[0] = 0.0;
    tp[0] = shot.p0;
    for (std::size_t j = 0; j < K; ++j) {
        const std::size_t k = K - 1 - j;
        tx[j + 1] = shot.length - static_cast<double>(k) * opts.step;
        tpsi[j + 1] = shot.path[k].psi;
        tp[j + 1] = shot.path[k].p;
    }
    const double x_start = tx[K];
    const double lam = 0.5 * (c - std::sqrt(c * c + 4.0 * a));
    const double gap = plateau - tpsi[K];

    const double X = opts.truncation_radius;
    const auto n = static_cast<std::size_t>(std::llround(2.0 * X / opts.step)) + 1;
    w.psi.assign(n, 0.0);
    w.dpsi.assign(n, 0.0);
    std::size_t seg = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double x = -X + opts.step * static_cast<double>(j);
        if (x < 0.0) {
            w.psi[j] = (shot.p0 / c) * std::expm1(c * x);
            w.dpsi[j] = shot.p0 * std::exp(c * x);
        } else if (x >= x_start) {
            const double e = std::exp(lam * (x - x_start));
            w.psi[j] = plateau - gap * e;
            w.dpsi[j] = -lam * gap * e;
        } else {
            while (seg + 1 < K && tx[seg + 1] < x) ++seg;
            const double d0 = c * tp[seg] - sh.f(tpsi[seg]);
            const double d1 = c * tp[seg + 1] - sh.f(tpsi[seg + 1]);
            w.psi[j] = hermite(tx[seg], tx[seg + 1], tpsi[seg], tpsi[seg + 1], tp[seg], tp[seg + 1], x);
            w.dpsi[j] = hermite(tx[seg], tx[seg + 1], tp[seg], tp[seg + 1], d0, d1, x);
        }
    }

    // ODE residual by fourth-order differences, skipping stencils that
    // straddle the cut-off point x = 0 where f is not smooth.
    const double hs = opts.step;
    double res = 0.0;
    w.increasing = true;
    for (std::size_t j = 0; j < n; ++j) {
        if (!(w.dpsi[j] > 0.0)) w.increasing = false;
        if (j < 2 || j + 2 >= n) continue;
        const double x = -X + hs * static_cast<double>(j);
        if (std::abs(x) < 2.5 * hs) continue;
        const double dpsi = (-w.psi[j + 2] + 8 * w.psi[j + 1] - 8 * w.psi[j - 1] + w.psi[j - 2]) / (12 * hs);
        const double dp = (-w.dpsi[j + 2] + 8 * w.dpsi[j + 1] - 8 * w.dpsi[j - 1] + w.dpsi[j - 2]) / (12 * hs);
        res = std::max(res, std::abs(dpsi - w.dpsi[j]));
        res = std::max(res, std::abs(c * w.dpsi[j] - dp - sh.f(w.psi[j])));
    }
    w.boundary_residual = std::max(std::abs(w.psi.front() + epsilon), std::abs(w.psi.back() - plateau));
    w.residual = std::max(res, w.boundary_residual);
    return w;
}

double extrapolate_ignition_speed(std::span<const double> eps, std::span<const double> speeds,
                                  std::span<const double> right_levels)
{
    const std::size_t n = eps.size();
    if (n == 0 || speeds.size() != n || right_levels.size() != n) {
        throw ValidationError("extrapolation needs matching, non-empty inputs");
    }
    std::vector<double> s(n), q(speeds.begin(), speeds.end());
    for (std::size_t i = 0; i < n; ++i) {
        const double l = std::log(right_levels[i] / eps[i]);
        s[i] = 1.0 / (l * l);
    }
    // Neville's scheme at s = 0.
    for (std::size_t m = 1; m < n; ++m) {
        for (std::size_t i = 0; i + m < n; ++i) {
            q[i] = (s[i + m] * q[i] - s[i] * q[i + 1]) / (s[i + m] - s[i]);
        }
    }
    return q[0];
}

Envelope build_lower_envelope_case1(const SimParams& params, const GrowthProfile& profile,
                                    const Grid& grid, const IgnitionWave& wave,
                                    const Envelope& upper)
{
    if (upper.kind != EnvelopeKind::UpperCase1) throw ValidationError("lower envelope needs U1+");
    if (!(upper.grid == grid)) throw ValidationError("envelopes must share the grid");
    (void)params;
    const auto edge = profile.right_superlevel_edge(profile.r_star() - wave.epsilon);
    if (!edge || !std::isfinite(*edge)) {
        throw ValidationError("no x0 with r >= r* - eps beyond it");
    }
    const double x1 = upper.constants.at("x1");
    const double x0 = *edge > x1 ? *edge : x1 + grid.step();

    Envelope env;
    env.kind = EnvelopeKind::LowerCase1;
    env.grid = grid;
    env.values.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        env.values[i] = std::max(wave(grid.x(i) - x0), 0.0);
        if (!(env.values[i] < upper.values[i])) {
            throw NumericalError("U1- >= U1+ at x=" + std::to_string(grid.x(i)));
        }
    }
    env.constants = {{"epsilon", wave.epsilon}, {"x0", x0}, {"shift", x0}, {"speed", wave.speed}};
    return env;
}

Envelope build_lower_envelope_case2(const SimParams& params, const GrowthProfile& profile,
                                    const Envelope& upper, const LowerCase2Options& opts)
{
    if (upper.kind != EnvelopeKind::UpperCase2) throw ValidationError("lower envelope needs U2+");
    SimParams damped = params;
    damped.b = opts.damping_factor * params.b;
    if (!damped.globally_bounded()) throw ValidationError("enlarged damping must exceed chi*mu");

    RunConfig cfg = RunConfig::make(damped, profile, upper.grid, BoundaryCase::Case2, opts.tau, opts.T);
    const RunResult res = run(cfg, upper.values);
    if (res.fault) throw NumericalError("lower envelope run failed: " + *res.fault);

    Envelope env;
    env.kind = EnvelopeKind::LowerCase2Numeric;
    env.grid = upper.grid;
    env.values = res.final_state.u;
    // Clip to the favourable interval [xbar, xtilde]; outside it the run's
    // tail is set by its own chemotactic drift and carries no information.
    const double lo = upper.constants.at("xbar");
    const double hi = upper.constants.at("xtilde");
    for (std::size_t i = 0; i < env.values.size(); ++i) {
        const double x = env.grid.x(i);
        if (x <= lo || x >= hi) env.values[i] = 0.0;
    }
    for (std::size_t i = 0; i < env.values.size(); ++i) {
        const double x = env.grid.x(i);
        if (x <= lo || x >= hi) continue;
        if (!(env.values[i] > 0.0)) {
            throw NumericalError("numeric U2- is not positive at x=" + std::to_string(env.grid.x(i)));
        }
        if (!(env.values[i] < upper.values[i])) {
            throw NumericalError("numeric U2- >= U2+ at x=" + std::to_string(env.grid.x(i)));
        }
    }
    env.constants = {{"damping_factor", opts.damping_factor},
                     {"b_bar", damped.b},
                     {"T", opts.T},
                     {"peak", sup_norm(env.values)}};
    return env;
}

// ---------------------------------------------------------------------------

FrozenFlowResult frozen_flow_fixed_point(const SimParams& params, const GrowthProfile& profile,
                                         BoundaryCase bc, const Envelope& upper,
                                         const Envelope& lower, const FrozenFlowOptions& opts)
{
    require_bounded(params);
    const Grid& grid = upper.grid;
    if (!(lower.grid == grid)) throw ValidationError("envelopes must share the grid");
    if (!cfl_check(grid.step(), opts.tau)) throw ValidationError("frozen flow: CFL violated");
    if (opts.max_outer < 1) throw ValidationError("max_outer must be at least 1");

    const std::vector<double> r = sample(profile, grid);
    const ChemicalSolver solver(grid, params.nu, params.mu, bc, opts.closure);
    const auto window = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opts.window / opts.tau)));
    const auto max_steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(opts.inner_T / opts.tau)));

    std::vector<double> top = upper.values;
    apply_closure(top, bc, opts.closure);

    FrozenFlowResult out;
    std::vector<double> un = top;
    std::vector<double> U(grid.size()), next(grid.size()), saved(grid.size());
    ChemicalField chem;
    for (int n = 1; n <= opts.max_outer; ++n) {
        solver.solve_into(un, chem);
        U = top;
        saved = U;
        std::size_t k = 1;
        for (; k <= max_steps; ++k) {
            explicit_update(U, chem, r, params, grid, bc, opts.closure, opts.tau, next);
            for (std::size_t i = 0; i < U.size(); ++i) {
                if (!std::isfinite(next[i])) throw NumericalError("frozen flow produced a non-finite value");
                out.max_monotone_violation = std::max(out.max_monotone_violation, next[i] - U[i]);
            }
            U.swap(next);
            if (k % window == 0) {
                const double change = sup_diff(U, saved);
                saved = U;
                if (change < opts.inner_tol) break;
            }
        }
        out.inner_times.push_back(static_cast<double>(std::min(k, max_steps)) * opts.tau);

        for (std::size_t i = 0; i < U.size(); ++i) {
            const double v = std::max(lower.values[i] - U[i], U[i] - top[i]);
            out.max_sandwich_violation = std::max(out.max_sandwich_violation, v);
            if (v > opts.sandwich_slack) {
                std::ostringstream msg;
                msg << "frozen flow left [lower, upper] at outer iteration " << n << ", x=" << grid.x(i)
                    << ": lower=" << lower.values[i] << " U=" << U[i] << " upper=" << top[i];
                throw NumericalError(msg.str());
            }
        }

        const double diff = sup_diff(U, un);
        out.outer_diffs.push_back(diff);
        un.swap(U);
        out.iterations = n;
        if (diff < opts.outer_tol) {
            out.converged = true;
            break;
        }
    }

    solver.solve_into(un, chem);
    explicit_update(un, chem, r, params, grid, bc, opts.closure, opts.tau, next);
    const std::size_t m = grid.intervals();
    for (std::size_t i = 1; i < m; ++i) {
        out.stationary_residual = std::max(out.stationary_residual, std::abs(next[i] - un[i]) / opts.tau);
    }
    out.u = std::move(un);
    return out;
}

}  // namespace kswave
