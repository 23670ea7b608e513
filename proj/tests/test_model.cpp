#include <cmath>
#include <limits>

#include "doctest.h"
#include "kswave/error.hpp"
#include "kswave/model.hpp"

using namespace kswave;
using doctest::Approx;

namespace {
GrowthProfile case1_profile() { return GrowthProfile({{-8, -1}, {-7, 10}}); }
GrowthProfile case2_profile() { return GrowthProfile({{-8, -1}, {-7, 10}, {7, 10}, {8, -1}}); }
}  // namespace

TEST_CASE("theta_root")
{
    CHECK(theta_root(1, -1, RootOrientation::Forward) == Approx((-1 + std::sqrt(5.0)) / 2).epsilon(1e-14));
    CHECK(theta_root(0, -4, RootOrientation::Forward) == Approx(2.0).epsilon(1e-14));
    // backward root via the quadratic formula for theta^2 - theta - 1
    const double t = theta_root(1, -1, RootOrientation::Backward);
    CHECK(t == Approx(0.5 * (1.0 + std::sqrt(1.0 + 4.0))).epsilon(1e-14));
    CHECK_THROWS_AS((void)theta_root(1, 0, RootOrientation::Forward), ValidationError);
    CHECK_THROWS_AS((void)theta_root(1, 2, RootOrientation::Forward), ValidationError);

    for (double c : {-50.0, -6.5, -1e-3, 0.0, 3.0, 1e3}) {
        for (double r : {-1e-6, -0.5, -10.0, -1e4}) {
            for (auto o : {RootOrientation::Forward, RootOrientation::Backward}) {
                const double th = theta_root(c, r, o);
                const double cc = o == RootOrientation::Forward ? c : -c;
                CHECK(th > 0.0);
                const double scale = std::max({1.0, std::abs(c), std::abs(r)});
                CHECK(std::abs(th * th + cc * th + r) <= 1e-12 * scale * std::max(1.0, th));
            }
        }
    }
}

TEST_CASE("growth profile evaluation and extrema")
{
    const auto r = case1_profile();
    CHECK(r(-100) == -1);
    CHECK(r(100) == 10);
    CHECK(r(-8) == -1);
    CHECK(r(-7) == 10);
    CHECK(r(-7.5) == Approx(11 * -7.5 + 87));
    CHECK(r.r_star() == 10);
    CHECK(r.r_lower() == -1);
    CHECK(r.support_radius() == 8);
    CHECK_THROWS_AS(GrowthProfile({{0, 1}}), ValidationError);
    CHECK_THROWS_AS(GrowthProfile({{0, 1}, {0, 2}}), ValidationError);
    CHECK_THROWS_AS(GrowthProfile({{1, 1}, {0, 2}}), ValidationError);
}

TEST_CASE("sublevel and superlevel edges on the ramps")
{
    const auto r = case1_profile();
    CHECK(*r.left_sublevel_edge(-0.5) == Approx(-87.5 / 11).epsilon(1e-14));
    CHECK(*r.right_superlevel_edge(9.95) == Approx(-77.05 / 11).epsilon(1e-14));
    CHECK_FALSE(r.left_sublevel_edge(-2).has_value());
    CHECK_FALSE(r.right_superlevel_edge(11).has_value());
    const auto r2 = case2_profile();
    CHECK(*r2.right_sublevel_edge(-0.5) == Approx(87.5 / 11).epsilon(1e-14));
}

TEST_CASE("classify_profile")
{
    CHECK(classify_profile(case1_profile()) == ProfileClass::Case1);
    CHECK(classify_profile(case2_profile()) == ProfileClass::Case2);
    CHECK(classify_profile(GrowthProfile::constant(1)) == ProfileClass::Unclassified);
    CHECK(classify_profile(GrowthProfile({{-1, 0}, {1, 5}})) == ProfileClass::Unclassified);
    // a redundant collinear breakpoint does not change the class
    CHECK(classify_profile(GrowthProfile({{-8, -1}, {-7.5, 4.5}, {-7, 10}})) == ProfileClass::Case1);
    CHECK_FALSE(case1_bracketing_violated(case1_profile()));
    CHECK(case1_bracketing_violated(GrowthProfile({{-8, -1}, {0, 20}, {8, 10}})));
}

TEST_CASE("grid")
{
    const Grid g(20, 0.1);
    CHECK(g.intervals() == 400);
    CHECK(g.size() == 401);
    CHECK(g.x(0) == -20);
    CHECK(g.x(400) == 20);
    CHECK(g.x(200) == Approx(0).epsilon(1e-15));
    CHECK_THROWS_AS(Grid(1, 0.3), ValidationError);
    CHECK_THROWS_AS(Grid(-1, 0.1), ValidationError);
}

TEST_CASE("sample")
{
    const Grid g(20, 0.1);
    const auto init = InitialCondition::piecewise_linear({{-1, 0}, {1, 10}});
    const auto u = sample(init, g);
    CHECK(u[200] == Approx(5.0));  // r*/(2b) at x = 0
    const auto bump = InitialCondition::bump(-1, 1, 1);
    CHECK(bump(0) == 1.0);
    CHECK(bump(0.5) == Approx((0.5 + 1) * (1 - 0.5)));
    CHECK(bump(2) == 0.0);
    const auto rs = sample(case1_profile(), g);
    CHECK(rs[120] == -1.0);  // x = -8
    CHECK(rs[130] == 10.0);  // x = -7
    CHECK(rs[125] == Approx(11 * -7.5 + 87).epsilon(1e-12));
}

TEST_CASE("regime checks")
{
    SimParams p{0.1, 1, 0.05, 1, 1};
    const auto rep = check_regime(p, case1_profile());
    REQUIRE(rep.h1_threshold.has_value());
    CHECK(*rep.h1_threshold == Approx(-3.478).epsilon(1e-3));
    CHECK(rep.h1_holds);
    CHECK(rep.h2_damping_holds);
    CHECK(rep.c_star == Approx(2 * std::sqrt(10.0)));

    p.c = -6;
    const auto rep2 = check_regime(p, case1_profile());
    CHECK_FALSE(rep2.h1_holds);
    CHECK(rep2.damping_exceeds_twice);
    CHECK(rep2.c_above_minus_c_star);

    p.chi = 0;
    CHECK(h1_threshold(p, 10) == Approx(-2 * std::sqrt(10.0)).epsilon(1e-14));

    p.chi = 0.6;
    p.nu = 1;
    const auto rep3 = check_regime(p, case2_profile());
    CHECK_FALSE(rep3.h1_threshold.has_value());
    CHECK_FALSE(rep3.h1_holds);

    p.chi = 2;  // b < chi mu
    CHECK_THROWS_AS((void)check_regime(p, case2_profile()), ValidationError);
}

TEST_CASE("h1 threshold increases with chi")
{
    SimParams p{0, 1, 0.05, 1, 0};
    double prev = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 50; ++k) {
        p.chi = 0.0099 * k;  // (0, b/(2 mu))
        const double t = h1_threshold(p, 10);
        CHECK(t > prev);
        prev = t;
    }
}

TEST_CASE("parameter validation")
{
    CHECK_NOTHROW(SimParams{0.1, 1, 0.05, 1, 1}.validate());
    CHECK_THROWS_AS((SimParams{-0.1, 1, 1, 1, 0}.validate()), ValidationError);
    CHECK_THROWS_AS((SimParams{0.1, 0, 1, 1, 0}.validate()), ValidationError);
    CHECK_THROWS_AS((SimParams{0.1, 1, 0, 1, 0}.validate()), ValidationError);
    CHECK_THROWS_AS((SimParams{0.1, 1, 1, 0, 0}.validate()), ValidationError);
}
