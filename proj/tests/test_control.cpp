#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "deltabox/control.hpp"
#include "deltabox/errors.hpp"
#include "oracles.hpp"

using namespace deltabox;

namespace {

const double kEightPi = 8.0 * kPi;

Eigen::VectorXcd random_samples(std::mt19937_64& rng, const TimeGrid& grid) {
    std::normal_distribution<double> g;
    const double b1 = g(rng), b2 = g(rng), b3 = g(rng);
    Eigen::VectorXcd u(grid.size());
    for (int n = 0; n < grid.size(); ++n) {
        const double s = kPi * grid.t(n) / grid.t_end();
        u[n] = b1 * std::sin(s) + b2 * std::sin(2.0 * s) + b3 * std::cos(3.0 * s);
    }
    return u;
}

} // namespace

TEST_SUITE("control") {

TEST_CASE("gamma without interaction is free evolution") {
    const TimeGrid grid(2.0, 500);
    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(41);
    a[0] = 0.6;
    a[3] = 0.8;
    const SpectralCoefficients psi(a);
    CHECK((gamma(CouplingProfile(), psi, grid, 41) - free_evolve(psi, 2.0)).norm() < 1e-15);
    const auto psi2 = SpectralCoefficients::unit(2, 41);
    CHECK(gamma(CouplingProfile::sine_bump(2.0, 2.0), psi2, grid, 41) == free_evolve(psi2, 2.0));
}

TEST_CASE("derivative at zero coupling") {
    const int k_max = 21;
    const double t_end = 2.0;
    const TimeGrid grid(t_end, 2000);
    const auto psi1 = SpectralCoefficients::unit(1, k_max);
    CHECK(apply_linearized(CouplingProfile(), Eigen::VectorXcd::Zero(grid.size()), psi1, grid, k_max).norm() == 0.0);

    // dq = -u psi_1(0, t) and dGamma = F(dq, T)
    auto u = [&](double t) { return std::sin(kPi * t / t_end); };
    const auto d = apply_linearized(CouplingProfile(), CouplingProfile::sine_bump(1.0, t_end), psi1, grid, k_max);
    auto dq = [&](double t) { return -u(t) * std::polar(1.0, -0.25 * t) / kSqrtPi; };
    for (int k = 1; k <= k_max; ++k) {
        cplx expect = 0.0;
        if (k % 2 == 1) {
            expect = cplx(0.0, 1.0) / kSqrtPi * oracle::mode_convolution(dq, eigenvalue(k), t_end, 400000);
        }
        CHECK(std::abs(d[k] - expect) < 1e-6);
    }
}

TEST_CASE("derivative is linear in the direction") {
    std::mt19937_64 rng(3);
    const int k_max = 41;
    const TimeGrid grid(2.0, 500);
    const auto alpha = CouplingProfile::sine_bump(0.5, 2.0);
    const auto psi = SpectralCoefficients::unit(1, k_max);
    const auto u = random_samples(rng, grid);
    const auto v = random_samples(rng, grid);
    const cplx a(0.7, -0.2), b(-1.3, 0.4);
    const auto lhs = apply_linearized(alpha, Eigen::VectorXcd(a * u + b * v), psi, grid, k_max);
    const auto rhs = a * apply_linearized(alpha, u, psi, grid, k_max) + b * apply_linearized(alpha, v, psi, grid, k_max);
    CHECK((lhs - rhs).norm() < 1e-10 * lhs.norm());
    CHECK_THROWS_AS(apply_linearized(alpha, Eigen::VectorXcd(7), psi, grid, k_max), InputError);
}

TEST_CASE("derivative depends continuously on the base coupling") {
    std::mt19937_64 rng(11);
    const int k_max = 41;
    const TimeGrid grid(2.0, 400);
    const auto psi = SpectralCoefficients::unit(1, k_max);
    const auto base = CouplingProfile::sine_bump(0.5, 2.0);
    const auto shift = CouplingProfile::piecewise_linear({0.0, 1.0, 2.0}, {0.0, 1.0, 0.0});
    for (int trial = 0; trial < 10; ++trial) {
        const auto u = random_samples(rng, grid);
        const auto d0 = apply_linearized(base, u, psi, grid, k_max);
        std::vector<double> gaps;
        for (double h : {1e-1, 1e-2, 1e-3}) {
            const auto moved = combine(grid, {1.0, h}, {base, shift});
            gaps.push_back((apply_linearized(moved, u, psi, grid, k_max) - d0).norm());
        }
        CHECK(gaps[1] < gaps[0]);
        CHECK(gaps[2] < gaps[1]);
    }
}

TEST_CASE("moment solver input checks") {
    const TimeGrid grid(kEightPi, 1000);
    CHECK_THROWS_AS(validate_target({SpectralCoefficients::unit(1, 11), 4.0 * kPi}), UnsupportedHorizonError);
    CHECK_THROWS_AS(validate_target({SpectralCoefficients::unit(2, 11), kEightPi}), InputError);
    CHECK_NOTHROW(validate_target({SpectralCoefficients::unit(3, 11), 2.0 * kEightPi}));
    CHECK_THROWS_AS(solve_moment({SpectralCoefficients::unit(1, 11), 2.0 * kEightPi}, grid), InputError);
}

TEST_CASE("moment density") {
    const ControlTarget unit{SpectralCoefficients::unit(1, 11), kEightPi};
    CHECK(moment_density(unit, 0.0) == cplx(0.0));
    CHECK(std::abs(moment_density(unit, kEightPi)) < 1e-15);
    CHECK(std::abs(moment_density(unit, 2.0 * kPi) + 1.0 / (4.0 * kSqrtPi)) < 1e-15);

    const ControlTarget longer{SpectralCoefficients::unit(3, 11), 2.0 * kEightPi};
    const auto grid = TimeGrid::with_step(2.0 * kEightPi, 2e-3);
    const auto rho = solve_moment(longer, grid);
    for (int n = 0; n < grid.size(); ++n) {
        if (grid.t(n) > kEightPi + 1e-9) {
            CHECK(rho.u[n] == cplx(0.0));
        }
    }
    CHECK(moment_residual(rho, longer) < 1e-7);
}

TEST_CASE("moment residual") {
    const auto grid = TimeGrid::with_step(kEightPi, 1e-2);
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(11);
    c[0] = 0.5;
    c[4] = cplx(0.0, -2.0);
    const ControlTarget target{SpectralCoefficients(c), kEightPi};
    const SynthesizedControl zero{grid, Eigen::VectorXcd::Zero(grid.size()), 0.0};
    CHECK(moment_residual(zero, target) == doctest::Approx(2.0));

    const auto rho = solve_moment(target, grid);
    const ControlTarget doubled{SpectralCoefficients(Eigen::VectorXcd(2.0 * c)), kEightPi};
    const SynthesizedControl rho2{grid, Eigen::VectorXcd(2.0 * rho.u), 0.0};
    CHECK(moment_residual(rho2, doubled) == doctest::Approx(2.0 * moment_residual(rho, target)).epsilon(1e-6));
    CHECK(moment_residual(rho, target) < 1e-6);
}

TEST_CASE("oscillatory integral of a constant") {
    const TimeGrid grid(3.0, 301);
    const Eigen::VectorXcd one = Eigen::VectorXcd::Ones(grid.size());
    for (double w : {0.0, 0.5, 40.0}) {
        const cplx expect = w == 0.0 ? cplx(3.0) : (std::polar(1.0, 3.0 * w) - 1.0) / cplx(0.0, w);
        CHECK(std::abs(oscillatory_integral(grid, one, w) - expect) < 1e-13);
    }
}

TEST_CASE("synthesized control") {
    const int k_max = 21;
    const auto grid = TimeGrid::with_step(kEightPi, 2e-3);
    const ControlTarget target{SpectralCoefficients::unit(1, k_max), kEightPi};
    const auto u = synthesize_control(target, 1, grid);
    double worst = 0.0;
    for (int n = 0; n < grid.size(); ++n) {
        const double t = grid.t(n);
        worst = std::max(worst, std::abs(u.u[n] - 0.25 * std::sin(t / 4.0) * std::polar(1.0, t / 4.0)));
    }
    CHECK(worst < 1e-12);
    const auto rho = solve_moment(target, grid);
    for (int n = 0; n < grid.size(); n += 97) {
        CHECK(std::abs(u.u[n]) == doctest::Approx(kSqrtPi * std::abs(rho.u[n])));
    }
    const auto d = apply_linearized(CouplingProfile(), u.u, SpectralCoefficients::unit(1, k_max), grid, k_max);
    CHECK((d - target.c).norm() < 1e-6);
    CHECK_THROWS_AS(synthesize_control(target, 2, grid), InputError);
}

TEST_CASE("controllability experiment") {
    const int k_max = 21;
    const auto grid = TimeGrid::with_step(kEightPi, 1e-2);
    const auto psi5 = SpectralCoefficients::unit(5, k_max);
    CHECK(gamma(CouplingProfile(), psi5, grid, k_max) == free_evolve(psi5, grid.t_end()));

    const ControlTarget direction{SpectralCoefficients::unit(3, k_max), kEightPi};
    const auto rep = controllability_experiment(5, {1e-2, 1e-3}, direction, grid, k_max);
    REQUIRE(rep.points.size() == 2);
    CHECK(rep.points[1].remainder < rep.points[0].remainder);
    bool found = false;
    for (const auto& [k, j] : rep.collisions) {
        CHECK(k * k + j * j == 50);
        found = found || (k == 1 && j == 7);
    }
    CHECK(found);

    const ControlTarget loose{SpectralCoefficients(Eigen::VectorXcd(2.0 * direction.c.values())), kEightPi};
    CHECK_THROWS_AS(controllability_experiment(5, {1e-2}, loose, grid, k_max), InputError);
}

TEST_CASE("log-log slope") {
    CHECK(loglog_slope({1.0, 10.0, 100.0}, {3.0, 300.0, 30000.0}) == doctest::Approx(2.0));
    CHECK_THROWS_AS(loglog_slope({1.0}, {1.0}), InputError);
}

}
