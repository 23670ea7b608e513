#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kswave/chemo.hpp"
#include "kswave/model.hpp"
#include "kswave/stepper.hpp"

namespace kswave {

/// Closed form of an upper envelope: a flat level with exponential tails,
///   level * e^{theta_left (x - x_left)}    for x < x_left,
///   level                                  on [x_left, x_right],
///   level * e^{-theta_right (x - x_right)} for x > x_right (if x_right set).
struct UpperShape {
    double level = 0.0;
    double x_left = 0.0;
    double theta_left = 0.0;
    std::optional<double> x_right;
    double theta_right = 0.0;

    [[nodiscard]] double operator()(double x) const;
};

enum class EnvelopeKind { UpperCase1, UpperCase2, LowerCase1, LowerCase2Numeric };

[[nodiscard]] std::string to_string(EnvelopeKind kind);

struct Envelope {
    EnvelopeKind kind = EnvelopeKind::UpperCase1;
    Grid grid;
    std::vector<double> values;
    std::map<std::string, double> constants;
    std::optional<UpperShape> shape;  ///< upper envelopes only
};

/// U1+ = min{level, level e^{theta1 (x - x1)}}, level = r*/(b - chi mu).
/// r1 defaults to r(-inf)/2; x1 is the largest x with r <= r1 on (-inf, x].
[[nodiscard]] Envelope build_upper_envelope_case1(const SimParams& params,
                                                  const GrowthProfile& profile, const Grid& grid,
                                                  std::optional<double> r1 = std::nullopt);

/// Three-branch U2+; rbar defaults to max{r(-inf), r(+inf)}/2.
[[nodiscard]] Envelope build_upper_envelope_case2(const SimParams& params,
                                                  const GrowthProfile& profile, const Grid& grid,
                                                  std::optional<double> rbar = std::nullopt);

struct ResidualField {
    std::vector<double> values;
    std::vector<bool> mask;  ///< nodes where a sign is claimed
};

/// A_u(U) = U'' + (c - chi Psi_x) U' + (r - chi nu Psi - (b - chi mu) U) U with
/// Psi = Psi(.; u_freeze) and U'' , U' by central differences. Boundary nodes
/// are unmasked.
[[nodiscard]] ResidualField residual_A(std::span<const double> u_freeze,
                                       std::span<const double> U, const Grid& grid,
                                       const SimParams& params, const GrowthProfile& profile);

/// Same for an upper envelope, with exact derivatives on each branch; the
/// kink nodes are excluded from the mask.
[[nodiscard]] ResidualField residual_A(std::span<const double> u_freeze, const Envelope& upper,
                                       const SimParams& params, const GrowthProfile& profile);

enum class CertStatus { Certified, Failed, Inconclusive };

[[nodiscard]] std::string to_string(CertStatus status);

struct CertRow {
    std::string lemma;   ///< "upper_case1" / "upper_case2"
    std::string region;  ///< "constant", "left_exponential", "right_exponential"
    double worst_residual = 0.0;
    std::size_t worst_sample = 0;
    double worst_x = 0.0;
    std::size_t nodes_checked = 0;
};

struct CertificationReport {
    CertStatus status = CertStatus::Certified;
    double tolerance = 1e-8;
    std::size_t samples = 0;
    std::vector<CertRow> rows;
    std::string message;
};

/// Random members of E+ (0 <= u <= bound): the bound itself, zero, scaled
/// copies, localized bumps and rough piecewise-linear modulations.
[[nodiscard]] std::vector<std::vector<double>> envelope_samples(std::span<const double> bound,
                                                                const Grid& grid,
                                                                std::size_t count,
                                                                std::uint64_t seed);

/// Evaluates each branch of `upper` on its claimed region against n_samples
/// random u in E+. Inconclusive (not Failed) when b < 1.5 chi mu.
[[nodiscard]] CertificationReport certify_supersolution(const Envelope& upper,
                                                        const SimParams& params,
                                                        const GrowthProfile& profile,
                                                        std::size_t n_samples = 100,
                                                        std::uint64_t seed = 1,
                                                        double tolerance = 1e-8);

struct GreenBoundReport {
    std::size_t samples = 0;
    double psi_bound = 0.0;
    double psi_x_bound = 0.0;
    double worst_psi_slack = 0.0;    ///< min over samples/nodes of bound - Psi
    double worst_psi_x_slack = 0.0;  ///< min of bound - |Psi_x|
    bool passed = false;
};

/// Checks Psi <= mu r*/(nu (b - chi mu)) and |Psi_x| <= mu r*/(2 sqrt(nu) (b - chi mu))
/// for random 0 <= u <= r*/(b - chi mu).
[[nodiscard]] GreenBoundReport certify_green_bounds(const SimParams& params, double r_star,
                                                    const Grid& grid, std::size_t n_samples = 200,
                                                    std::uint64_t seed = 1,
                                                    double slack = 1e-8);

// ---------------------------------------------------------------------------
// Ignition wave

struct IgnitionOptions {
    double truncation_radius = 60.0;
    double step = 1e-3;      ///< RK4 step
    double offset = 1e-6;    ///< distance from the plateau along the eigenvector
    double speed_tol = 1e-8;
    double max_length = 200.0;  ///< shooting trajectories longer than this undershoot
};

/// Increasing wave psi'' - c psi' + f_eps(psi) = 0 from -eps to the right
/// level, normalized so psi(0) = 0, tabulated on [-X, X].
struct IgnitionWave {
    double epsilon = 0.0;
    double speed = 0.0;
    double speed_bound = 0.0;
    double left_level = 0.0;
    double right_level = 0.0;
    double growth = 0.0;  ///< f_eps'(0)
    double step = 0.0;
    double radius = 0.0;
    std::vector<double> psi;   ///< at x_k = -X + k*step
    std::vector<double> dpsi;
    double residual = 0.0;        ///< sup of the ODE residual on the table
    double boundary_residual = 0.0;
    bool increasing = false;

    /// psi(x), using the exact tails beyond the table.
    [[nodiscard]] double operator()(double x) const;
};

[[nodiscard]] double ignition_speed_bound(const SimParams& params, double r_star);
[[nodiscard]] double ignition_right_level(const SimParams& params, double r_star, double epsilon);

/// Shooting + bisection on the speed. Throws ValidationError unless
/// b > 2 chi mu and 0 < eps < the positive zero of f_eps; NumericalError on a
/// bracket failure.
[[nodiscard]] IgnitionWave ignition_wave(const SimParams& params, double r_star, double epsilon,
                                         const IgnitionOptions& opts = {});

/// eps -> 0 limit of the speeds by polynomial extrapolation to s = 0 in
/// s = 1/ln^2(P_eps/eps), the cut-off front correction variable.
[[nodiscard]] double extrapolate_ignition_speed(std::span<const double> eps,
                                                std::span<const double> speeds,
                                                std::span<const double> right_levels);

/// U1- = max{psi(x - x0), 0}, x0 the smallest point with r >= r* - eps beyond
/// it (moved just right of x1 if needed). Throws if U1- < U1+ fails.
[[nodiscard]] Envelope build_lower_envelope_case1(const SimParams& params,
                                                  const GrowthProfile& profile, const Grid& grid,
                                                  const IgnitionWave& wave, const Envelope& upper);

struct LowerCase2Options {
    double damping_factor = 4.0;
    double tau = 0.002;
    double T = 30.0;
};

/// Terminal profile of the Case-2 cut-off problem with damping scaled by
/// `damping_factor`, started from U2+ and clipped to zero outside
/// (xbar, xtilde). Throws unless it is positive there and strictly below U2+.
[[nodiscard]] Envelope build_lower_envelope_case2(const SimParams& params,
                                                  const GrowthProfile& profile,
                                                  const Envelope& upper,
                                                  const LowerCase2Options& opts = {});

// ---------------------------------------------------------------------------
// Frozen-chemotaxis fixed point

struct FrozenFlowOptions {
    int max_outer = 30;
    double inner_T = 50.0;
    double tau = 0.002;
    double window = 1.0;
    double inner_tol = 1e-4;
    double outer_tol = 1e-4;
    double monotone_slack = 1e-10;
    double sandwich_slack = 1e-8;
    NeumannClosure closure = NeumannClosure::FirstOrder;
};

struct FrozenFlowResult {
    std::vector<double> u;
    int iterations = 0;
    bool converged = false;
    std::vector<double> outer_diffs;
    std::vector<double> inner_times;
    double max_monotone_violation = 0.0;  ///< max of U(t+tau) - U(t)
    double max_sandwich_violation = 0.0;
    double stationary_residual = 0.0;  ///< sup |discrete residual| at u*
};

/// u_{n+1} = lim_t U(t; u_n), where U_t = A_{u_n}(U) is evolved by the
/// explicit scheme with v(u_n) frozen, from U(0) = upper. Throws
/// NumericalError with diagnostics when an iterate leaves [lower, upper].
[[nodiscard]] FrozenFlowResult frozen_flow_fixed_point(const SimParams& params,
                                                       const GrowthProfile& profile,
                                                       BoundaryCase bc, const Envelope& upper,
                                                       const Envelope& lower,
                                                       const FrozenFlowOptions& opts = {});

}  // namespace kswave
