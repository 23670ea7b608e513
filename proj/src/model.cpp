#include "kswave/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kswave/error.hpp"

namespace kswave {

void SimParams::validate() const
{
    if (!(mu > 0.0)) throw ValidationError("mu must be positive");
    if (!(nu > 0.0)) throw ValidationError("nu must be positive");
    if (!(b > 0.0)) throw ValidationError("b must be positive");
    if (!(chi >= 0.0)) throw ValidationError("chi must be nonnegative");
    if (!std::isfinite(c)) throw ValidationError("c must be finite");
}

// ---------------------------------------------------------------------------

GrowthProfile::GrowthProfile(std::vector<Breakpoint> breakpoints)
    : points_(std::move(breakpoints))
{
    if (points_.size() < 2) {
        throw ValidationError("profile needs at least two breakpoints");
    }
    for (std::size_t k = 0; k < points_.size(); ++k) {
        if (!std::isfinite(points_[k].x) || !std::isfinite(points_[k].value)) {
            throw ValidationError("profile breakpoints must be finite");
        }
        if (k > 0 && !(points_[k].x > points_[k - 1].x)) {
            throw ValidationError("profile breakpoints must be strictly increasing in x");
        }
    }
}

GrowthProfile GrowthProfile::constant(double value)
{
    return GrowthProfile({{0.0, value}, {1.0, value}});
}

double GrowthProfile::operator()(double x) const
{
    if (x <= points_.front().x) return points_.front().value;
    if (x >= points_.back().x) return points_.back().value;
    auto hi = std::upper_bound(points_.begin(), points_.end(), x,
                               [](double v, const Breakpoint& p) { return v < p.x; });
    const Breakpoint& p1 = *hi;
    const Breakpoint& p0 = *(hi - 1);
    if (x == p0.x) return p0.value;
    const double t = (x - p0.x) / (p1.x - p0.x);
    const double v = p0.value + t * (p1.value - p0.value);
    return std::clamp(v, std::min(p0.value, p1.value), std::max(p0.value, p1.value));
}

double GrowthProfile::r_star() const
{
    return std::max_element(points_.begin(), points_.end(),
                            [](const auto& a, const auto& b) { return a.value < b.value; })
        ->value;
}

double GrowthProfile::r_lower() const
{
    return std::min_element(points_.begin(), points_.end(),
                            [](const auto& a, const auto& b) { return a.value < b.value; })
        ->value;
}

std::optional<double> GrowthProfile::left_sublevel_edge(double level) const
{
    if (left_limit() > level) return std::nullopt;
    for (std::size_t k = 0; k + 1 < points_.size(); ++k) {
        const auto& p0 = points_[k];
        const auto& p1 = points_[k + 1];
        if (p1.value <= level) continue;
        // p0.value <= level < p1.value
        return p0.x + (level - p0.value) / (p1.value - p0.value) * (p1.x - p0.x);
    }
    return std::numeric_limits<double>::infinity();
}

std::optional<double> GrowthProfile::right_sublevel_edge(double level) const
{
    if (right_limit() > level) return std::nullopt;
    for (std::size_t k = points_.size() - 1; k > 0; --k) {
        const auto& p0 = points_[k - 1];
        const auto& p1 = points_[k];
        if (p0.value <= level) continue;
        // p0.value > level >= p1.value
        return p1.x - (level - p1.value) / (p0.value - p1.value) * (p1.x - p0.x);
    }
    return -std::numeric_limits<double>::infinity();
}

std::optional<double> GrowthProfile::right_superlevel_edge(double level) const
{
    if (right_limit() < level) return std::nullopt;
    for (std::size_t k = points_.size() - 1; k > 0; --k) {
        const auto& p0 = points_[k - 1];
        const auto& p1 = points_[k];
        if (p0.value >= level) continue;
        // p0.value < level <= p1.value
        return p1.x - (p1.value - level) / (p1.value - p0.value) * (p1.x - p0.x);
    }
    return -std::numeric_limits<double>::infinity();
}

double GrowthProfile::support_radius() const
{
    return std::max(std::abs(points_.front().x), std::abs(points_.back().x));
}

ProfileClass classify_profile(const GrowthProfile& profile)
{
    const double left = profile.left_limit();
    const double right = profile.right_limit();
    if (left < 0.0 && right > 0.0) return ProfileClass::Case1;
    if (left < 0.0 && right < 0.0 && profile.r_star() > 0.0) return ProfileClass::Case2;
    return ProfileClass::Unclassified;
}

bool case1_bracketing_violated(const GrowthProfile& profile)
{
    return profile.r_lower() < profile.left_limit() || profile.r_star() > profile.right_limit();
}

std::string to_string(ProfileClass cls)
{
    switch (cls) {
    case ProfileClass::Case1: return "case1";
    case ProfileClass::Case2: return "case2";
    case ProfileClass::Unclassified: return "unclassified";
    }
    return "unclassified";
}

std::string to_string(BoundaryCase bc)
{
    return bc == BoundaryCase::Case1 ? "case1" : "case2";
}

BoundaryCase parse_boundary_case(const std::string& text)
{
    if (text == "case1") return BoundaryCase::Case1;
    if (text == "case2") return BoundaryCase::Case2;
    throw ValidationError("boundary case must be 'case1' or 'case2', got '" + text + "'");
}

// ---------------------------------------------------------------------------

Grid::Grid(double half_length, double step) : L_(half_length), h_(step)
{
    if (!(L_ > 0.0) || !std::isfinite(L_)) throw ValidationError("L must be positive");
    if (!(h_ > 0.0) || !std::isfinite(h_)) throw ValidationError("h must be positive");
    const double m = 2.0 * L_ / h_;
    const double rounded = std::round(m);
    if (rounded < 2.0 || std::abs(m - rounded) > 1e-12 * std::max(1.0, m)) {
        throw ValidationError("2L/h must be an integer >= 2 (got " + std::to_string(m) + ")");
    }
    m_ = static_cast<std::size_t>(rounded);
}

double Grid::x(std::size_t i) const
{
    if (i == m_) return L_;
    return -L_ + static_cast<double>(i) * h_;
}

std::vector<double> Grid::nodes() const
{
    std::vector<double> xs(size());
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = x(i);
    return xs;
}

// ---------------------------------------------------------------------------

InitialCondition InitialCondition::piecewise_linear(std::vector<Breakpoint> points)
{
    InitialCondition ic;
    ic.kind = Kind::PiecewiseLinear;
    ic.linear = GrowthProfile(std::move(points));
    return ic;
}

InitialCondition InitialCondition::bump(double left, double right, double peak)
{
    if (!(right > left)) throw ValidationError("bump requires left < right");
    if (!(peak >= 0.0)) throw ValidationError("bump peak must be nonnegative");
    InitialCondition ic;
    ic.kind = Kind::Bump;
    ic.bump_left = left;
    ic.bump_right = right;
    ic.bump_peak = peak;
    return ic;
}

double InitialCondition::operator()(double x) const
{
    if (kind == Kind::PiecewiseLinear) return linear(x);
    if (x < bump_left || x > bump_right) return 0.0;
    const double half = 0.5 * (bump_right - bump_left);
    return bump_peak * (x - bump_left) * (bump_right - x) / (half * half);
}

std::vector<double> sample(const GrowthProfile& profile, const Grid& grid)
{
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = profile(grid.x(i));
    return out;
}

std::vector<double> sample(const InitialCondition& init, const Grid& grid)
{
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = init(grid.x(i));
    return out;
}

// ---------------------------------------------------------------------------

double theta_root(double c, double r, RootOrientation orientation)
{
    if (!(r < 0.0)) throw ValidationError("theta_root requires a negative growth value");
    // Positive root of theta^2 + p*theta + r with p = +-c; the product of the
    // roots is r < 0, so exactly one is positive.
    const double p = orientation == RootOrientation::Forward ? c : -c;
    const double s = std::sqrt(p * p - 4.0 * r);
    if (p > 0.0) return -2.0 * r / (p + s);
    return 0.5 * (s - p);
}

double h1_threshold(const SimParams& params, double r_star)
{
    const double cm = params.chi * params.mu;
    if (!(params.b > 2.0 * cm)) {
        throw ValidationError("speed threshold is undefined unless b > 2 chi mu");
    }
    const double eff = params.b - cm;
    return cm * r_star / (2.0 * std::sqrt(params.nu) * eff) -
           2.0 * std::sqrt(r_star * (params.b - 2.0 * cm) / eff);
}

RegimeReport check_regime(const SimParams& params, const GrowthProfile& profile)
{
    params.validate();
    if (!params.globally_bounded()) {
        throw ValidationError("check_regime requires b > chi*mu");
    }
    const double r_star = profile.r_star();
    const double cm = params.chi * params.mu;
    RegimeReport rep;
    rep.c_star = 2.0 * std::sqrt(std::max(r_star, 0.0));
    rep.damping_exceeds_twice = params.b > 2.0 * cm;
    if (rep.damping_exceeds_twice) {
        rep.h1_threshold = h1_threshold(params, r_star);
        rep.h1_holds = params.c > *rep.h1_threshold;
    }
    rep.h2_damping_holds = params.b >= 1.5 * cm;
    rep.c_above_minus_c_star = params.c > -rep.c_star;
    rep.c_inside_spreading_band = std::abs(params.c) < rep.c_star;
    return rep;
}

}  // namespace kswave
