#include "kswave/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "kswave/error.hpp"

namespace kswave {

namespace {

std::size_t steps_for(double span, double tau, const char* what)
{
    const double n = span / tau;
    const double rounded = std::round(n);
    if (std::abs(n - rounded) > 1e-9 * std::max(1.0, n)) {
        throw ValidationError(std::string(what) + " must be an integer multiple of tau");
    }
    return static_cast<std::size_t>(rounded);
}

}  // namespace

RunConfig RunConfig::make(const SimParams& params, const GrowthProfile& profile, const Grid& grid,
                          BoundaryCase bc, double tau, double T)
{
    RunConfig cfg;
    cfg.params = params;
    cfg.grid = grid;
    cfg.bc = bc;
    cfg.tau = tau;
    cfg.T = T;
    cfg.r_samples = sample(profile, grid);
    cfg.r_star = profile.r_star();
    return cfg;
}

void RunConfig::validate() const
{
    params.validate();
    if (!(tau > 0.0)) throw ValidationError("tau must be positive");
    if (!(T >= tau)) throw ValidationError("T must be at least tau");
    if (!(conv_window > 0.0) || !(conv_tol > 0.0) || !(extinct_tol > 0.0) ||
        !(plateau_rel_tol > 0.0)) {
        throw ValidationError("tolerances must be positive");
    }
    if (r_samples.size() != grid.size()) {
        throw ValidationError("r_samples length does not match the grid");
    }
    if (!allow_unstable && !cfl_check(grid.step(), tau)) {
        throw ValidationError("CFL violated: tau/h^2 = " + std::to_string(tau / (grid.step() * grid.step())) +
                              " > 1/2 (set allow_unstable to override)");
    }
    for (double t : snapshot_times) {
        if (t < 0.0 || t > T + 0.5 * tau) throw ValidationError("snapshot time outside [0, T]");
    }
    (void)total_steps();
    (void)window_steps();
}

std::size_t RunConfig::total_steps() const { return steps_for(T, tau, "T"); }

std::size_t RunConfig::window_steps() const
{
    return std::max<std::size_t>(1, steps_for(conv_window, tau, "conv_window"));
}

std::string to_string(OutcomeTag tag)
{
    switch (tag) {
    case OutcomeTag::ForcedWaveCase1: return "forced_wave_case1";
    case OutcomeTag::ForcedWaveCase2: return "forced_wave_case2";
    case OutcomeTag::Extinction: return "extinction";
    case OutcomeTag::Undetermined: return "undetermined";
    }
    return "undetermined";
}

bool cfl_check(double h, double tau) { return tau / (h * h) <= 0.5; }

void apply_closure(std::span<double> u, BoundaryCase bc, NeumannClosure closure)
{
    const std::size_t m = u.size() - 1;
    u[0] = 0.0;
    if (bc == BoundaryCase::Case2) {
        u[m] = 0.0;
    } else if (closure == NeumannClosure::FirstOrder) {
        u[m] = u[m - 1];
    }
}

void explicit_update(std::span<const double> u, const ChemicalField& chem,
                     std::span<const double> r, const SimParams& params, const Grid& grid,
                     BoundaryCase bc, NeumannClosure closure, double tau, std::span<double> out)
{
    const std::size_t m = grid.intervals();
    const double h = grid.step();
    const double lam = tau / (h * h);
    const double q = tau / (2.0 * h);
    const double chi = params.chi;
    const double decay = tau * chi * params.nu;
    const double damping = tau * params.effective_damping();
    const auto& v = chem.v;
    const auto& vx = chem.vx;

    auto update = [&](std::size_t i, double left, double right) {
        const double adv = params.c - chi * vx[i];
        return (lam - q * adv) * left +
               (1.0 - 2.0 * lam + tau * r[i] - decay * v[i]) * u[i] - damping * u[i] * u[i] +
               (lam + q * adv) * right;
    };

    for (std::size_t i = 1; i < m; ++i) out[i] = update(i, u[i - 1], u[i + 1]);
    if (bc == BoundaryCase::Case1 && closure == NeumannClosure::SecondOrder) {
        out[m] = update(m, u[m - 1], u[m - 1]);  // ghost u_{M+1} = u_{M-1}
    }
    apply_closure(out, bc, closure);
}

// ---------------------------------------------------------------------------

Stepper::Stepper(RunConfig cfg)
    : cfg_(std::move(cfg)),
      solver_(cfg_.grid, cfg_.params.nu, cfg_.params.mu, cfg_.bc, cfg_.closure),
      scratch_(cfg_.grid.size(), 0.0)
{
    cfg_.validate();
}

State Stepper::initial(std::span<const double> u0) const
{
    if (u0.size() != cfg_.grid.size()) throw ValidationError("u0 length does not match the grid");
    State s;
    s.t = 0.0;
    s.u.assign(u0.begin(), u0.end());
    for (double x : s.u) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw ValidationError("u0 must be finite and nonnegative");
    }
    apply_closure(s.u, cfg_.bc, cfg_.closure);
    solver_.solve_into(s.u, s.chem);
    return s;
}

void Stepper::advance(State& state)
{
    explicit_update(state.u, state.chem, cfg_.r_samples, cfg_.params, cfg_.grid, cfg_.bc,
                    cfg_.closure, cfg_.tau, scratch_);
    double peak = 0.0;
    for (double& x : scratch_) {
        if (!std::isfinite(x)) throw NumericalError("non-finite density (unstable step)");
        if (x < 0.0) {
            min_raw_ = std::min(min_raw_, x);
            x = 0.0;
        }
        peak = std::max(peak, x);
    }
    if (peak > cfg_.blowup_limit) {
        throw NumericalError("blow-up: ||u|| exceeded " + std::to_string(cfg_.blowup_limit) +
                             " at t=" + std::to_string(state.t + cfg_.tau));
    }
    state.u.swap(scratch_);
    // k*tau rather than a running sum, so snapshot times stay exact.
    state.t = static_cast<double>(std::llround(state.t / cfg_.tau) + 1) * cfg_.tau;
    solver_.solve_into(state.u, state.chem);
}

State step(const State& state, const RunConfig& cfg)
{
    Stepper stepper(cfg);
    State next = state;
    stepper.advance(next);
    return next;
}

std::vector<double> discrete_residual(std::span<const double> u, const ChemicalField& chem,
                                      const RunConfig& cfg)
{
    std::vector<double> next(u.size(), 0.0);
    explicit_update(u, chem, cfg.r_samples, cfg.params, cfg.grid, cfg.bc, cfg.closure, cfg.tau,
                    next);
    std::vector<double> res(u.size(), 0.0);
    const std::size_t m = cfg.grid.intervals();
    for (std::size_t i = 1; i < m; ++i) res[i] = (next[i] - u[i]) / cfg.tau;
    return res;
}

// ---------------------------------------------------------------------------

double sup_norm(std::span<const double> a)
{
    double s = 0.0;
    for (double x : a) s = std::max(s, std::abs(x));
    return s;
}

double sup_diff(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) s = std::max(s, std::abs(a[i] - b[i]));
    return s;
}

Outcome detect_outcome(const State& final_state, std::span<const double> u_window_start,
                       const RunConfig& cfg)
{
    Outcome out;
    const auto& u = final_state.u;
    out.final_sup_u = sup_norm(u);
    out.final_sup_diff = sup_diff(u, u_window_start);
    if (out.final_sup_u < cfg.extinct_tol) {
        out.tag = OutcomeTag::Extinction;
        return out;
    }
    if (!(out.final_sup_diff < cfg.conv_tol)) {
        out.tag = OutcomeTag::Undetermined;
        return out;
    }
    if (cfg.bc == BoundaryCase::Case1) {
        const double at_l = u.back();
        const double level = cfg.r_star / cfg.params.b;
        if (level > 0.0 && std::abs(at_l / level - 1.0) < cfg.plateau_rel_tol) {
            out.tag = OutcomeTag::ForcedWaveCase1;
            out.plateau = at_l;
        }
        return out;
    }
    const auto it = std::max_element(u.begin(), u.end());
    if (*it > 10.0 * cfg.extinct_tol) {
        out.tag = OutcomeTag::ForcedWaveCase2;
        out.peak = *it;
        out.peak_x = cfg.grid.x(static_cast<std::size_t>(it - u.begin()));
    }
    return out;
}

RunResult run(const RunConfig& cfg, std::span<const double> u0)
{
    Stepper stepper(cfg);
    RunResult result;
    State state = stepper.initial(u0);

    const std::size_t total = cfg.total_steps();
    const std::size_t window = cfg.window_steps();
    std::size_t parts = 1;
    for (std::size_t n = 10; n >= 1; --n) {
        if (window % n == 0) {
            parts = n;
            break;
        }
    }
    const std::size_t stride = window / parts;

    std::set<std::size_t> snap_steps;
    for (double t : cfg.snapshot_times) {
        snap_steps.insert(static_cast<std::size_t>(std::llround(t / cfg.tau)));
    }

    const std::vector<double> initial_u = state.u;
    std::deque<std::pair<std::size_t, std::vector<double>>> history;

    auto record = [&](std::size_t k) {
        if (snap_steps.count(k)) {
            result.snapshots.push_back({state.t, state.u, state.chem.v});
        }
        if ((total - k) % stride != 0) return;
        while (!history.empty() && history.front().first + window < k) history.pop_front();
        const std::vector<double>* past = &initial_u;
        if (!history.empty() && k >= window && history.front().first == k - window) {
            past = &history.front().second;
        }
        result.series.push_back({state.t, sup_diff(state.u, *past), sup_norm(state.u), state.u.back()});
        history.emplace_back(k, state.u);
    };

    result.max_u = sup_norm(state.u);
    record(0);
    try {
        for (std::size_t k = 1; k <= total; ++k) {
            stepper.advance(state);
            result.max_u = std::max(result.max_u, sup_norm(state.u));
            record(k);
        }
    } catch (const NumericalError& err) {
        result.fault = err.what();
    }
    result.min_raw_u = stepper.min_raw();

    const std::vector<double>* past = &initial_u;
    for (const auto& [k, u] : history) {
        if (k + window == total) past = &u;
    }
    result.outcome = detect_outcome(state, *past, cfg);
    if (result.fault) result.outcome.tag = OutcomeTag::Undetermined;
    result.final_state = std::move(state);
    return result;
}

}  // namespace kswave
