// Acceptance suite: one line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "kswave/analysis.hpp"
#include "kswave/chemo.hpp"
#include "kswave/harness.hpp"
#include "kswave/model.hpp"
#include "kswave/spectral.hpp"
#include "kswave/stepper.hpp"

using namespace kswave;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

RunSpec experiment(const std::string& name)
{
    return load_config(std::string(KSWAVE_EXPERIMENTS_DIR) + "/" + name);
}

RunResult simulate(const RunSpec& spec)
{
    return run(spec.run_config(), sample(*spec.u0, spec.grid()));
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Verdict criterion1()
{
    const auto t0 = std::chrono::steady_clock::now();
    const RunResult r = simulate(experiment("case1_exp1.cfg"));
    const double secs = seconds_since(t0);
    const Outcome& o = r.outcome;
    const double uL = r.final_state.u.back();
    const bool pass = !r.fault && o.tag == OutcomeTag::ForcedWaveCase1 && o.final_sup_diff < 1e-2 &&
                      std::abs(uL / 10.0 - 1.0) < 0.02 && secs < 30.0;
    return {pass, "outcome=" + to_string(o.tag) + " sup|u(10)-u(9)|=" + fmt(o.final_sup_diff) +
                      " u(10,L)=" + fmt(uL) + " runtime=" + fmt(secs) + "s"};
}

Verdict criterion2()
{
    const RunResult r = simulate(experiment("case1_exp3.cfg"));
    const double uL = r.final_state.u.back();
    const double target = 10.0 / 0.15;
    return {!r.fault && std::abs(uL / target - 1.0) < 0.02,
            "u(60,L)=" + fmt(uL) + " target=" + fmt(target) + " outcome=" + to_string(r.outcome.tag)};
}

Verdict criterion3()
{
    const RunResult r = simulate(experiment("case1_exp4.cfg"));
    const double sup = sup_norm(r.final_state.u);
    return {!r.fault && r.outcome.tag == OutcomeTag::Extinction && sup < 1e-3,
            "outcome=" + to_string(r.outcome.tag) + " sup u(140)=" + fmt(sup)};
}

Verdict criterion4()
{
    const RunResult a = simulate(experiment("case2_exp1.cfg"));
    const RunResult b = simulate(experiment("case2_exp3.cfg"));
    const double peak = sup_norm(a.final_state.u);
    const bool pass = !a.fault && !b.fault && a.outcome.tag == OutcomeTag::ForcedWaveCase2 &&
                      a.outcome.final_sup_diff < 1e-2 && peak > 1.0 && b.final_state.t <= 30.0 + 1e-9 &&
                      b.outcome.tag == OutcomeTag::Extinction;
    return {pass, "c=1: " + to_string(a.outcome.tag) + " sup_diff=" + fmt(a.outcome.final_sup_diff) +
                      " max u=" + fmt(peak) + "; c=6.5: " + to_string(b.outcome.tag) +
                      " sup u(30)=" + fmt(sup_norm(b.final_state.u))};
}

Verdict criterion5()
{
    // The habitat and the left Dirichlet end both sit at fixed x in the
    // moving frame, so the profiles are compared at equal x.
    RunSpec s20 = experiment("case1_exp1.cfg");
    RunSpec s40 = s20;
    s40.L = 40.0;
    const RunResult r20 = simulate(s20);
    const RunResult r40 = simulate(s40);
    const Grid g20 = s20.grid();
    const auto offset = static_cast<std::size_t>(std::lround((s40.L - s20.L) / s20.h));
    double worst = 0.0;
    for (std::size_t i = 0; i < g20.size(); ++i) {
        const double x = g20.x(i);
        if (x < -15.0 - 1e-9 || x > 15.0 + 1e-9) continue;
        worst = std::max(worst, std::abs(r20.final_state.u[i] - r40.final_state.u[i + offset]));
    }
    return {worst < 5e-2, "sup on [-15,15] of |u_L20 - u_L40| at T=10: " + fmt(worst)};
}

Verdict criterion6()
{
    const auto r = GrowthProfile::constant(10.0);
    const double exact = 10.0 - 0.25 - std::numbers::pi * std::numbers::pi / 196.0;
    const double l1 = principal_eigenvalue(r, 1.0, 7.0, 0.01).lambda;
    const double l2 = principal_eigenvalue(r, 1.0, 7.0, 0.005).lambda;
    const double e1 = std::abs(l1 - exact);
    const double e2 = std::abs(l2 - exact);
    const double ratio = e1 / e2;
    return {e2 < 1e-3 && ratio >= 3.5 && ratio <= 4.5,
            "lambda(h=0.005)=" + fmt(l2) + " err=" + fmt(e2) + " ratio err(0.01)/err(0.005)=" + fmt(ratio)};
}

Verdict criterion7()
{
    // Unit-scale bumps: the comparison is linear in u, so the absolute
    // tolerance is only meaningful for O(1) data.
    const Grid grid(40.0, 0.05);
    const auto xs = grid.nodes();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> centre(-15.0, 15.0), width(1.0, 5.0), amp(0.1, 1.0);
    std::uniform_int_distribution<int> nbumps(1, 4);
    double worst = 0.0;
    double worst_rel = 0.0;
    for (int s = 0; s < 50; ++s) {
        std::vector<double> u(grid.size(), 0.0);
        const int k = nbumps(rng);
        for (int j = 0; j < k; ++j) {
            const double c0 = centre(rng), w = width(rng), a = amp(rng);
            for (std::size_t i = 0; i < u.size(); ++i) {
                const double z = (xs[i] - c0) / w;
                if (std::abs(z) < 1.0) {
                    const double cz = std::cos(0.5 * std::numbers::pi * z);
                    u[i] += a * cz * cz;
                }
            }
        }
        const ChemicalField v = solve_chemical(u, grid, 1.0, 1.0, BoundaryCase::Case2);
        const auto psi = greens_psi(u, grid, 1.0, 1.0);
        double d = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (std::abs(xs[i]) <= 20.0) d = std::max(d, std::abs(v.v[i] - psi[i]));
        }
        worst = std::max(worst, d);
        worst_rel = std::max(worst_rel, d / sup_norm(u));
    }
    return {worst < 1e-3, "50 samples, sup |v - Psi| on [-20,20] = " + fmt(worst) +
                              " (relative to sup u: " + fmt(worst_rel) + ")"};
}

Verdict criterion8()
{
    const RunSpec s = experiment("case1_exp1.cfg");
    const GreenBoundReport g = certify_green_bounds(s.params, s.profile.r_star(), s.grid(), 200, 1);
    const bool pass = g.samples == 200 && g.worst_psi_slack >= -1e-8 && g.worst_psi_x_slack >= -1e-8;
    return {pass, "samples=" + std::to_string(g.samples) + " min slack Psi=" + fmt(g.worst_psi_slack) +
                      " Psi_x=" + fmt(g.worst_psi_x_slack)};
}

Verdict criterion9()
{
    std::string detail;
    bool pass = true;
    for (const char* name : {"case1_exp1.cfg", "case2_exp1.cfg"}) {
        const RunSpec s = experiment(name);
        const Grid grid = s.grid();
        const Envelope upper = s.bc == BoundaryCase::Case1
                                   ? build_upper_envelope_case1(s.params, s.profile, grid)
                                   : build_upper_envelope_case2(s.params, s.profile, grid);
        const CertificationReport rep = certify_supersolution(upper, s.params, s.profile, 100, 1);
        double worst = -INFINITY;
        for (const auto& row : rep.rows) worst = std::max(worst, row.worst_residual);
        pass = pass && rep.status == CertStatus::Certified && rep.samples == 100 && worst <= 1e-8;
        detail += std::string(detail.empty() ? "" : "; ") + name + ": " + to_string(rep.status) +
                  " worst residual=" + fmt(worst);
    }
    return {pass, detail};
}

Verdict criterion10()
{
    SimParams p;
    p.chi = 0.1;
    p.mu = 1.0;
    p.b = 1.0;
    const double bound = ignition_speed_bound(p, 10.0);
    const std::vector<double> eps{0.1, 0.05, 0.025};
    std::vector<double> speeds, levels;
    bool inside = true;
    std::string list;
    for (double e : eps) {
        const IgnitionWave w = ignition_wave(p, 10.0, e);
        speeds.push_back(w.speed);
        levels.push_back(w.right_level);
        inside = inside && w.speed > 0.0 && w.speed < bound;
        list += fmt(w.speed) + " ";
    }
    const double limit = extrapolate_ignition_speed(eps, speeds, levels);
    const double rel = std::abs(limit / bound - 1.0);
    return {inside && rel < 0.01, "speeds " + list + "bound=" + fmt(bound) + " limit=" + fmt(limit) +
                                      " rel.err=" + fmt(rel)};
}

Verdict criterion11()
{
    const RunSpec s = experiment("case1_exp1.cfg");
    const Grid grid = s.grid();
    const double r_star = s.profile.r_star();
    const Envelope upper = build_upper_envelope_case1(s.params, s.profile, grid);
    const IgnitionWave wave = ignition_wave(s.params, r_star, 0.05);
    const Envelope lower = build_lower_envelope_case1(s.params, s.profile, grid, wave, upper);
    const FrozenFlowResult fp = frozen_flow_fixed_point(s.params, s.profile, BoundaryCase::Case1, upper, lower);

    RunConfig cfg = s.run_config();
    cfg.T = 5.0;
    cfg.snapshot_times.clear();
    const RunResult r = run(cfg, fp.u);
    const double drift = sup_diff(r.final_state.u, fp.u);
    const double last = fp.outer_diffs.empty() ? INFINITY : fp.outer_diffs.back();
    const bool pass = fp.converged && fp.iterations <= 30 && last < 1e-4 && fp.max_monotone_violation <= 1e-10 &&
                      !r.fault && drift < 1e-3;
    return {pass, "outer iterations=" + std::to_string(fp.iterations) + " last diff=" + fmt(last) +
                      " max increase in t=" + fmt(fp.max_monotone_violation) + " drift over 5=" + fmt(drift)};
}

Verdict criterion12()
{
    const RunSpec s = experiment("sweep_case1_c.cfg");
    const auto rows = sweep(s);
    const auto tr = transition_speed(rows);
    const double target = -2.0 * std::sqrt(10.0);
    return {tr && std::abs(*tr - target) <= 0.2,
            "points=" + std::to_string(rows.size()) + " transition c=" + (tr ? fmt(*tr) : std::string("none")) +
                " target=" + fmt(target)};
}

}  // namespace

int main()
{
    const std::vector<std::function<Verdict()>> criteria{
        criterion1, criterion2, criterion3, criterion4,  criterion5,  criterion6,
        criterion7, criterion8, criterion9, criterion10, criterion11, criterion12};
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Verdict v;
        try {
            v = criteria[k]();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        if (!v.pass) ++failures;
        std::printf("criterion %2zu: %s  %s\n", k + 1, v.pass ? "PASS" : "FAIL", v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
