#include <cmath>
#include <random>

#include "doctest.h"
#include "kswave/chemo.hpp"
#include "kswave/stepper.hpp"

using namespace kswave;
using doctest::Approx;

namespace {
std::vector<double> random_u(const Grid& g, std::mt19937_64& rng, double top)
{
    std::uniform_real_distribution<double> d(0.0, top);
    std::vector<double> u(g.size());
    for (auto& x : u) x = d(rng);
    return u;
}
}  // namespace

TEST_CASE("solve_chemical hand examples")
{
    const Grid g3(1, 1);
    const auto f = solve_chemical(std::vector<double>{0, 1, 0}, g3, 1, 1, BoundaryCase::Case2);
    CHECK(f.v[0] == 0);
    CHECK(f.v[1] == Approx(1.0 / 3).epsilon(1e-15));
    CHECK(f.v[2] == 0);

    const Grid g(20, 0.1);
    const auto z = solve_chemical(std::vector<double>(g.size(), 0.0), g, 0.05, 1, BoundaryCase::Case1);
    for (double v : z.v) CHECK(v == 0);
}

TEST_CASE("constant input approaches mu c0 / nu away from the boundary")
{
    const Grid g(60, 0.1);
    const double level = 100.0 / 9.0;
    const auto f = solve_chemical(std::vector<double>(g.size(), level), g, 1, 1, BoundaryCase::Case2);
    CHECK(f.v[g.size() / 2] == Approx(level).epsilon(1e-10));
}

TEST_CASE("discrete residual, positivity and linearity")
{
    std::mt19937_64 rng(3);
    for (auto bc : {BoundaryCase::Case1, BoundaryCase::Case2}) {
        for (auto cl : {NeumannClosure::FirstOrder, NeumannClosure::SecondOrder}) {
            const Grid g(20, 0.1);
            const double nu = 0.05, mu = 1, h = g.step();
            const auto u1 = random_u(g, rng, 11);
            const auto u2 = random_u(g, rng, 11);
            const ChemicalSolver solver(g, nu, mu, bc, cl);
            const auto f1 = solver.solve(u1);
            const auto f2 = solver.solve(u2);
            double vmax = 0, umax = 0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                CHECK(f1.v[i] >= 0.0);
                vmax = std::max(vmax, std::abs(f1.v[i]));
                umax = std::max(umax, u1[i]);
            }
            for (std::size_t i = 1; i + 1 < g.size(); ++i) {
                const double res = (f1.v[i - 1] - 2 * f1.v[i] + f1.v[i + 1]) / (h * h) - nu * f1.v[i] + mu * u1[i];
                CHECK(std::abs(res) <= 1e-10 * (vmax * (2 / (h * h) + nu) + mu * umax));
            }
            CHECK(f1.v.front() == 0);
            if (bc == BoundaryCase::Case2) CHECK(f1.v.back() == 0);
            if (bc == BoundaryCase::Case1 && cl == NeumannClosure::FirstOrder)
                CHECK(f1.v.back() == f1.v[g.size() - 2]);

            std::vector<double> mix(g.size());
            for (std::size_t i = 0; i < g.size(); ++i) mix[i] = 2.5 * u1[i] - 0.75 * u2[i];
            const auto fm = solver.solve(mix);
            for (std::size_t i = 0; i < g.size(); ++i)
                CHECK(std::abs(fm.v[i] - (2.5 * f1.v[i] - 0.75 * f2.v[i])) <= 1e-10);
        }
    }
}

TEST_CASE("vx is the central difference in the interior")
{
    const Grid g(10, 0.1);
    std::vector<double> u(g.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::exp(-g.x(i) * g.x(i));
    const auto f = solve_chemical(u, g, 1, 1, BoundaryCase::Case1);
    for (std::size_t i = 1; i + 1 < u.size(); ++i)
        CHECK(f.vx[i] == Approx((f.v[i + 1] - f.v[i - 1]) / 0.2).epsilon(1e-12));
}

TEST_CASE("greens_psi basics")
{
    const Grid g(40, 0.05);
    const auto z = greens_psi(std::vector<double>(g.size(), 0.0), g, 1, 1);
    for (double v : z) CHECK(v == 0);

    // wide plateau: the kernel integrates to mu / nu
    std::vector<double> u(g.size(), 0.0);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::abs(g.x(i)) < 30 ? 2.0 : 0.0;
    const auto psi = greens_psi(u, g, 1, 3);
    CHECK(psi[g.size() / 2] == Approx(6.0).epsilon(1e-9));
}

TEST_CASE("greens_psi_x: symmetry and finite-difference consistency")
{
    const Grid g(20, 0.05);
    const double nu = 0.05;
    std::vector<double> u(g.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double x = g.x(i) - 2.0;
        u[i] = std::exp(-x * x);
    }
    const auto f = greens_field(u, g, nu, 1);
    CHECK(std::abs(f.psi_x[440]) <= 1e-8);  // x = 2, the centre

    // central differences of psi, compared on two grids: O(h^2)
    double err_fine = 0, err_coarse = 0;
    for (double h : {0.1, 0.05}) {
        const Grid gg(20, h);
        std::vector<double> w(gg.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(-std::pow(gg.x(i) - 2.0, 2));
        const auto ff = greens_field(w, gg, nu, 1);
        double e = 0;
        for (std::size_t i = 1; i + 1 < w.size(); ++i)
            e = std::max(e, std::abs((ff.psi[i + 1] - ff.psi[i - 1]) / (2 * h) - ff.psi_x[i]));
        (h == 0.1 ? err_coarse : err_fine) = e;
    }
    CHECK(err_fine < 1e-3);
    CHECK(err_coarse / err_fine == Approx(4.0).epsilon(0.15));
}

TEST_CASE("greens oracle agrees with the discrete solve to O(h^2)")
{
    auto diff = [](double h) {
        const Grid g(40, h);
        std::vector<double> u(g.size());
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::exp(-std::pow(g.x(i), 2));
        const auto v = solve_chemical(u, g, 1, 1, BoundaryCase::Case2);
        const auto psi = greens_psi(u, g, 1, 1);
        double d = 0;
        for (std::size_t i = 0; i < u.size(); ++i)
            if (std::abs(g.x(i)) <= 20) d = std::max(d, std::abs(v.v[i] - psi[i]));
        return d;
    };
    const double d1 = diff(0.1), d2 = diff(0.05);
    CHECK(d2 < 1e-3);
    CHECK(d1 / d2 == Approx(4.0).epsilon(0.1));
}
