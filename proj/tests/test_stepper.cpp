#include <cmath>

#include "doctest.h"
#include "kswave/error.hpp"
#include "kswave/stepper.hpp"

using namespace kswave;
using doctest::Approx;

namespace {
const GrowthProfile kCase1({{-8, -1}, {-7, 10}});

RunConfig exp1(double T = 10)
{
    return RunConfig::make(SimParams{0.1, 1, 0.05, 1, 1}, kCase1, Grid(20, 0.1), BoundaryCase::Case1, 0.002, T);
}

std::vector<double> exp1_u0(const Grid& g)
{
    return sample(InitialCondition::piecewise_linear({{-1, 0}, {1, 10}}), g);
}
}  // namespace

TEST_CASE("cfl_check")
{
    CHECK(cfl_check(0.1, 0.002));
    CHECK_FALSE(cfl_check(0.1, 0.01));
    CHECK(cfl_check(0.05, 0.00125));
}

TEST_CASE("run refuses an unstable step unless overridden")
{
    auto cfg = exp1();
    cfg.tau = 0.01;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.allow_unstable = true;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("single-node hand update")
{
    auto cfg = RunConfig::make(SimParams{0, 1, 1, 1, 0}, GrowthProfile::constant(1), Grid(1, 1),
                               BoundaryCase::Case2, 0.1, 0.1);
    cfg.allow_unstable = true;  // tau / h^2 = 0.1 is fine, but keep the guard out of the way
    State s;
    s.u = {0, 1, 0};
    s.chem = solve_chemical(s.u, cfg.grid, 1, 1, BoundaryCase::Case2);
    const State next = step(s, cfg);
    CHECK(next.u[1] == Approx(0.8).epsilon(1e-15));
    CHECK(next.u[0] == 0);
    CHECK(next.u[2] == 0);
    CHECK(next.t == Approx(0.1));
}

TEST_CASE("zero is a fixed point and the run goes extinct")
{
    const auto cfg = exp1(2);
    const auto r = run(cfg, std::vector<double>(cfg.grid.size(), 0.0));
    CHECK(r.outcome.tag == OutcomeTag::Extinction);
    CHECK(sup_norm(r.final_state.u) == 0);
}

TEST_CASE("closure and boundary values")
{
    std::vector<double> u{3, 1, 2, 5};
    apply_closure(u, BoundaryCase::Case1, NeumannClosure::FirstOrder);
    CHECK(u == std::vector<double>{0, 1, 2, 2});
    u = {3, 1, 2, 5};
    apply_closure(u, BoundaryCase::Case2, NeumannClosure::FirstOrder);
    CHECK(u == std::vector<double>{0, 1, 2, 0});
}

TEST_CASE("Experiment 1 reaches the plateau; determinism, bounds and snapshots")
{
    auto cfg = exp1();
    cfg.snapshot_times = {0, 5, 10};
    const auto u0 = exp1_u0(cfg.grid);
    const auto a = run(cfg, u0);
    const auto b = run(cfg, u0);
    CHECK(a.outcome.tag == OutcomeTag::ForcedWaveCase1);
    REQUIRE(a.outcome.plateau.has_value());
    CHECK(*a.outcome.plateau == Approx(10).epsilon(0.02));
    CHECK(a.final_state.u == b.final_state.u);
    CHECK(a.final_state.t == 10.0);
    REQUIRE(a.snapshots.size() == 3);
    CHECK(a.snapshots[1].t == 5.0);
    CHECK(a.min_raw_u >= -1e-12);
    CHECK(a.max_u <= std::max(10.0, 100.0 / 9.0) + 1e-6);

    // detect_outcome on the terminal state alone: it is stationary
    const auto o = detect_outcome(a.final_state, a.final_state.u, cfg);
    CHECK(o.tag == OutcomeTag::ForcedWaveCase1);
}

TEST_CASE("all-zero terminal state is extinction")
{
    const auto cfg = exp1();
    State s;
    s.u.assign(cfg.grid.size(), 0.0);
    CHECK(detect_outcome(s, s.u, cfg).tag == OutcomeTag::Extinction);
}

TEST_CASE("constant habitat attractor")
{
    const double rs = 10, b = 1;
    auto cfg = RunConfig::make(SimParams{0.1, 1, 0.05, b, 0}, GrowthProfile::constant(rs), Grid(80, 0.1),
                               BoundaryCase::Case1, 0.002, 20);
    std::vector<double> u0(cfg.grid.size(), 1.0);
    const auto r = run(cfg, u0);
    double worst = 0;
    for (std::size_t i = 0; i < u0.size(); ++i)
        if (std::abs(cfg.grid.x(i)) <= 40) worst = std::max(worst, std::abs(r.final_state.u[i] - rs / b));
    CHECK(worst <= 1e-2);
}

TEST_CASE("blow-up is reported as a fault with a partial trajectory")
{
    auto cfg = exp1(1);
    cfg.tau = 0.01;
    cfg.allow_unstable = true;
    const auto r = run(cfg, exp1_u0(cfg.grid));
    CHECK(r.fault.has_value());
    CHECK(r.final_state.t < 1.0);
}

TEST_CASE("discrete residual vanishes at a stationary state")
{
    const auto cfg = exp1(30);
    const auto r = run(cfg, exp1_u0(cfg.grid));
    const auto res = discrete_residual(r.final_state.u, r.final_state.chem, cfg);
    CHECK(sup_norm(res) < 1e-3 * sup_norm(r.final_state.u));
}
