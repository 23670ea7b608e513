#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kswave {

/// Physical parameters of the chemotaxis system in the moving frame.
struct SimParams {
    double chi = 0.0;  ///< chemotaxis sensitivity
    double mu = 1.0;   ///< chemical production rate
    double nu = 1.0;   ///< chemical degradation rate
    double b = 1.0;    ///< logistic damping
    double c = 0.0;    ///< habitat shift speed

    /// Throws ValidationError unless mu, nu, b > 0 and chi >= 0.
    void validate() const;

    /// b > chi*mu: solutions exist globally and stay bounded.
    [[nodiscard]] bool globally_bounded() const { return b > chi * mu; }

    /// b - chi*mu, the effective damping after eliminating v_xx.
    [[nodiscard]] double effective_damping() const { return b - chi * mu; }

    bool operator==(const SimParams&) const = default;
};

struct Breakpoint {
    double x = 0.0;
    double value = 0.0;
    bool operator==(const Breakpoint&) const = default;
};

/// Continuous piecewise-linear function, constant outside its breakpoints.
///
/// Used both for the growth rate r(x) and for piecewise-linear initial data.
/// The value left of the first breakpoint is the left limit r(-inf); right of
/// the last one it is r(+inf).
class GrowthProfile {
public:
    GrowthProfile() = default;
    explicit GrowthProfile(std::vector<Breakpoint> breakpoints);

    /// Constant profile r(x) = value.
    static GrowthProfile constant(double value);

    [[nodiscard]] double operator()(double x) const;

    [[nodiscard]] double left_limit() const { return points_.front().value; }
    [[nodiscard]] double right_limit() const { return points_.back().value; }
    /// sup r, attained at a breakpoint.
    [[nodiscard]] double r_star() const;
    /// inf r.
    [[nodiscard]] double r_lower() const;

    [[nodiscard]] std::span<const Breakpoint> breakpoints() const { return points_; }

    /// Largest x such that r(y) <= level for every y <= x.
    /// nullopt when r(-inf) > level; +inf when r <= level everywhere.
    [[nodiscard]] std::optional<double> left_sublevel_edge(double level) const;

    /// Smallest x such that r(y) <= level for every y >= x.
    /// nullopt when r(+inf) > level; -inf when r <= level everywhere.
    [[nodiscard]] std::optional<double> right_sublevel_edge(double level) const;

    /// Smallest x such that r(y) >= level for every y >= x.
    /// nullopt when r(+inf) < level.
    [[nodiscard]] std::optional<double> right_superlevel_edge(double level) const;

    /// Largest |x| over the breakpoints; r is constant outside this radius.
    [[nodiscard]] double support_radius() const;

    bool operator==(const GrowthProfile&) const = default;

private:
    std::vector<Breakpoint> points_{{0.0, 0.0}, {1.0, 0.0}};
};

enum class ProfileClass { Case1, Case2, Unclassified };

/// Case1: r(-inf) < 0 < r(+inf). Case2: both limits negative and r* > 0.
[[nodiscard]] ProfileClass classify_profile(const GrowthProfile& profile);

/// True when Case-1 monotone bracketing r(-inf) <= r(x) <= r(+inf) fails.
/// The scheme runs regardless; callers report this as a warning.
[[nodiscard]] bool case1_bracketing_violated(const GrowthProfile& profile);

[[nodiscard]] std::string to_string(ProfileClass cls);

enum class BoundaryCase {
    Case1,  ///< Dirichlet at -L, zero flux at L
    Case2,  ///< Dirichlet at both ends
};

[[nodiscard]] std::string to_string(BoundaryCase bc);
[[nodiscard]] BoundaryCase parse_boundary_case(const std::string& text);

/// Uniform grid x_i = -L + i*h, i = 0..M, with M = 2L/h.
class Grid {
public:
    Grid() = default;
    /// Throws ValidationError when 2L/h is not an integer (relative tol 1e-12).
    Grid(double half_length, double step);

    [[nodiscard]] double half_length() const { return L_; }
    [[nodiscard]] double step() const { return h_; }
    /// Number of subintervals M.
    [[nodiscard]] std::size_t intervals() const { return m_; }
    /// Number of nodes M+1.
    [[nodiscard]] std::size_t size() const { return m_ + 1; }
    [[nodiscard]] double x(std::size_t i) const;
    [[nodiscard]] std::vector<double> nodes() const;

    bool operator==(const Grid&) const = default;

private:
    double L_ = 1.0;
    double h_ = 1.0;
    std::size_t m_ = 2;
};

/// Initial condition: piecewise-linear breakpoints or a parabolic bump
/// peak*(x-left)(right-x)/((right-left)/2)^2 on [left, right], zero elsewhere.
struct InitialCondition {
    enum class Kind { PiecewiseLinear, Bump };
    Kind kind = Kind::PiecewiseLinear;
    GrowthProfile linear;
    double bump_left = -1.0;
    double bump_right = 1.0;
    double bump_peak = 1.0;

    static InitialCondition piecewise_linear(std::vector<Breakpoint> points);
    static InitialCondition bump(double left, double right, double peak);

    [[nodiscard]] double operator()(double x) const;

    bool operator==(const InitialCondition&) const = default;
};

[[nodiscard]] std::vector<double> sample(const GrowthProfile& profile, const Grid& grid);
[[nodiscard]] std::vector<double> sample(const InitialCondition& init, const Grid& grid);

enum class RootOrientation {
    Forward,   ///< theta^2 + c*theta + r = 0
    Backward,  ///< theta^2 - c*theta + r = 0
};

/// Unique positive root of the decay-rate quadratic. Requires r < 0.
[[nodiscard]] double theta_root(double c, double r, RootOrientation orientation);

struct RegimeReport {
    bool damping_exceeds_twice = false;   ///< b > 2 chi mu
    std::optional<double> h1_threshold;   ///< defined only when b > 2 chi mu
    bool h1_holds = false;                ///< b > 2 chi mu and c > threshold
    bool h2_damping_holds = false;        ///< b >= 1.5 chi mu
    double c_star = 0.0;                  ///< 2 sqrt(r*)
    bool c_above_minus_c_star = false;
    bool c_inside_spreading_band = false;  ///< |c| < c*
    std::optional<double> lambda_inf;
};

/// Evaluates the damping and speed conditions for (params, profile).
/// Requires b > chi*mu.
[[nodiscard]] RegimeReport check_regime(const SimParams& params, const GrowthProfile& profile);

/// Right-hand side of the speed condition on c; requires b > 2 chi mu.
[[nodiscard]] double h1_threshold(const SimParams& params, double r_star);

}  // namespace kswave
