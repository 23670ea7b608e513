#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kswave/chemo.hpp"
#include "kswave/model.hpp"

namespace kswave {

/// (u, v) on the grid at time t. `chem` is always the chemical field of `u`.
struct State {
    double t = 0.0;
    std::vector<double> u;
    ChemicalField chem;
};

struct RunConfig {
    SimParams params;
    Grid grid;
    BoundaryCase bc = BoundaryCase::Case1;
    NeumannClosure closure = NeumannClosure::FirstOrder;
    double tau = 0.002;
    double T = 10.0;
    std::vector<double> r_samples;  ///< r(x_i) on the grid nodes
    double r_star = 0.0;            ///< sup r, used for the plateau level r*/b
    std::vector<double> snapshot_times;
    double conv_window = 1.0;
    double conv_tol = 1e-3;
    double extinct_tol = 1e-3;
    double plateau_rel_tol = 0.02;
    bool allow_unstable = false;
    double blowup_limit = 1e6;

    /// Builds a config with r_samples and r_star taken from `profile`.
    static RunConfig make(const SimParams& params, const GrowthProfile& profile, const Grid& grid,
                          BoundaryCase bc, double tau, double T);

    /// Throws ValidationError on inconsistent settings (including CFL
    /// violation unless allow_unstable is set).
    void validate() const;
    [[nodiscard]] std::size_t total_steps() const;
    [[nodiscard]] std::size_t window_steps() const;
};

enum class OutcomeTag { ForcedWaveCase1, ForcedWaveCase2, Extinction, Undetermined };

[[nodiscard]] std::string to_string(OutcomeTag tag);

struct Outcome {
    OutcomeTag tag = OutcomeTag::Undetermined;
    std::optional<double> plateau;  ///< u(T, L), Case-1 forced waves only
    std::optional<double> peak;     ///< max u(T, .), Case-2 forced waves only
    std::optional<double> peak_x;
    double final_sup_diff = 0.0;  ///< ||u(T) - u(T - window)||_inf
    double final_sup_u = 0.0;
};

/// Explicit-scheme stability: tau/h^2 <= 1/2.
[[nodiscard]] bool cfl_check(double h, double tau);

/// One explicit update of the interior nodes plus the boundary closure.
///
/// `chem` is held fixed over the step, which also makes this the update of
/// the frozen-chemotaxis flow. Writes into `out` (size M+1).
void explicit_update(std::span<const double> u, const ChemicalField& chem,
                     std::span<const double> r, const SimParams& params, const Grid& grid,
                     BoundaryCase bc, NeumannClosure closure, double tau, std::span<double> out);

/// Applies the boundary closure for `bc` to u in place.
void apply_closure(std::span<double> u, BoundaryCase bc, NeumannClosure closure);

/// Steady-state residual of the discrete scheme, (u^{n+1} - u^n)/tau at the
/// interior nodes for the given chemical field.
[[nodiscard]] std::vector<double> discrete_residual(std::span<const double> u,
                                                    const ChemicalField& chem,
                                                    const RunConfig& cfg);

/// Stateful integrator: owns the factorized chemical solver and scratch space.
class Stepper {
public:
    explicit Stepper(RunConfig cfg);

    /// Initial state from u0, after applying the boundary closure.
    [[nodiscard]] State initial(std::span<const double> u0) const;

    /// Advances `state` by one step in place. Throws NumericalError on blow-up.
    void advance(State& state);

    [[nodiscard]] const RunConfig& config() const { return cfg_; }
    [[nodiscard]] const ChemicalSolver& solver() const { return solver_; }
    /// Most negative value produced by an update before clamping.
    [[nodiscard]] double min_raw() const { return min_raw_; }

private:
    RunConfig cfg_;
    ChemicalSolver solver_;
    std::vector<double> scratch_;
    double min_raw_ = 0.0;
};

/// Pure single step; prefer Stepper for loops.
[[nodiscard]] State step(const State& state, const RunConfig& cfg);

struct Snapshot {
    double t = 0.0;
    std::vector<double> u;
    std::vector<double> v;
};

struct SeriesPoint {
    double t = 0.0;
    double sup_diff = 0.0;
    double sup_u = 0.0;
    double u_at_L = 0.0;
};

struct RunResult {
    std::vector<Snapshot> snapshots;
    std::vector<SeriesPoint> series;
    Outcome outcome;
    State final_state;
    std::optional<std::string> fault;  ///< set when the run stopped early
    double max_u = 0.0;                ///< over all steps
    double min_raw_u = 0.0;            ///< before clamping, over all steps
};

/// Integrates to cfg.T, recording snapshots and the convergence series.
/// On a numerical fault the partial trajectory is returned with `fault` set.
[[nodiscard]] RunResult run(const RunConfig& cfg, std::span<const double> u0);

/// Classifies a terminal state given u at T - window.
[[nodiscard]] Outcome detect_outcome(const State& final_state,
                                     std::span<const double> u_window_start,
                                     const RunConfig& cfg);

[[nodiscard]] double sup_norm(std::span<const double> a);
[[nodiscard]] double sup_diff(std::span<const double> a, std::span<const double> b);

}  // namespace kswave
