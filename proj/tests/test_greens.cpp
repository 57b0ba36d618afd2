#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "deltabox/control.hpp"
#include "deltabox/errors.hpp"
#include "deltabox/greens.hpp"
#include "oracles.hpp"

using namespace deltabox;

TEST_SUITE("greens") {

TEST_CASE("closed form: boundary, origin, symmetry") {
    CHECK(std::abs(green_closed(kPi, 0.3, 1.0)) < 1e-12);
    CHECK(std::abs(green_closed(0.3, -kPi, 1.0)) < 1e-12);
    const cplx origin = green_closed(0.0, 0.0, 1.0);
    CHECK(std::abs(origin - std::tanh(M_PI) / 2.0) < 1e-14);
    CHECK(std::abs(origin - green_series(0.0, 0.0, 1.0, 1000000)) < 1e-6);
    CHECK(std::abs(green_closed(0.5, 0.2, 1.0) - green_closed(0.2, 0.5, 1.0)) < 1e-15);
    CHECK(std::abs(green_closed(0.0, 0.0, 0.0) - M_PI / 2.0) < 1e-15);
}

TEST_CASE("closed form stays finite for large |z|") {
    for (cplx z : {cplx(1e6, 0.0), cplx(1e8, 3e7), cplx(-4e4 + 0.3, 1e5)}) {
        const cplx g = green_closed(0.1, -0.2, z);
        CHECK(std::isfinite(g.real()));
        CHECK(std::isfinite(g.imag()));
    }
    // the diagonal behaves like 1/(2 sqrt z)
    CHECK(std::abs(green_closed(0.0, 0.0, 1e6) - 1.0 / 2000.0) < 1e-12);
}

TEST_CASE("closed form errors") {
    CHECK_THROWS_AS(green_closed(0.0, 0.0, -0.25), SingularityError);
    CHECK_THROWS_AS(green_closed(0.0, 0.0, -1.0), SingularityError);
    CHECK_THROWS_AS(green_closed(3.5, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(green_series(0.0, 0.0, -2.25, 10), SingularityError);
}

TEST_CASE("series converges to the closed form at order >= 1") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(-kPi, kPi);
    std::uniform_real_distribution<double> uz(0.1, 5.0);
    const std::vector<double> ks{1e3, 1e4, 1e5};
    for (int i = 0; i < 20; ++i) {
        const double x = ux(rng);
        const double y = ux(rng);
        const cplx z(uz(rng), uz(rng) - 2.5);
        const cplx exact = green_closed(x, y, z);
        std::vector<double> err;
        for (double k : ks) {
            err.push_back(std::abs(green_series(x, y, z, static_cast<int>(k)) - exact));
        }
        CHECK(-loglog_slope(ks, err) >= 1.0);
    }
    CHECK(std::abs(green_series(1.0, -1.0, 2.0, 100000) - green_closed(1.0, -1.0, 2.0)) < 1e-4);
}

TEST_CASE("origin kernel") {
    CHECK(std::abs(green_origin(1.0) - std::tanh(M_PI) / 2.0) < 1e-15);
    CHECK(std::abs(green_origin(1.0) - green_series(0.0, 0.0, 1.0, 200000)) < 1e-5);
    CHECK(green_origin(0.0) == cplx(M_PI / 2.0));
    CHECK(std::abs(green_origin(1e-12) - M_PI / 2.0) < 1e-10);
    CHECK(std::abs(green_series(0.0, 0.0, 1e-12, 1000000) - M_PI / 2.0) < 2e-6);
    CHECK_THROWS_AS(green_origin(-0.25), SingularityError);
    // -lambda_2 = -1 is a pole of the kernel but not of its origin value
    CHECK(std::isfinite(green_origin(-1.0).real()));
}

TEST_CASE("derivative jump across the source point") {
    const double h = 1e-5;
    for (double xp : {-1.3, 0.0, 0.7, 2.0}) {
        auto g = [&](double x) { return green_closed(x, xp, 1.5).real(); };
        const double right = (-3.0 * g(xp) + 4.0 * g(xp + h) - g(xp + 2.0 * h)) / (2.0 * h);
        const double left = (3.0 * g(xp) - 4.0 * g(xp - h) + g(xp - 2.0 * h)) / (2.0 * h);
        CHECK(std::abs(right - left + 1.0) < 1e-6);
    }
}

TEST_CASE("Green coefficients") {
    const auto g = green_coefficients(SpectralShift(), 9);
    CHECK(std::abs(g[1] - 1.0 / (std::sqrt(M_PI) * 1.25)) < 1e-15);
    CHECK(g[2] == cplx(0.0));
    CHECK(g[8] == cplx(0.0));
    const auto big = green_coefficients(SpectralShift(cplx(2.0, 0.5)), 100000);
    CHECK(std::abs(origin_trace(big) - green_origin(cplx(2.0, 0.5))) < 2e-5);
    CHECK_THROWS_AS(SpectralShift(-0.25), SingularityError);
    CHECK_THROWS_AS(SpectralShift(-4.0), SingularityError);
}

TEST_CASE("static spectrum: trivial cases") {
    const auto free = static_eigenvalues(0.0, EnergyWindow{0.0, 10.0}, 401);
    const std::vector<double> expected{0.25, 1.0, 2.25, 4.0, 6.25, 9.0};
    REQUIRE(free.size() == expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(free[i] == expected[i]);
    }
    for (double alpha : {-3.0, -0.5, 0.5, 7.0}) {
        const auto ev = static_eigenvalues(alpha, EnergyWindow{-50.0, 5.0}, 401);
        CHECK(std::count(ev.begin(), ev.end(), 1.0) == 1);
    }
    CHECK(static_eigenvalues(1.0, EnergyWindow{3.0, 3.0}, 401).empty());
    CHECK_THROWS_AS(static_eigenvalues(std::nan(""), EnergyWindow{0.0, 1.0}, 401), InputError);
}

TEST_CASE("static spectrum: pole structure") {
    for (int k = 1; k <= 9; k += 2) {
        const double l = eigenvalue(k);
        const double below = green_origin(-(l - 1e-6)).real();
        const double above = green_origin(-(l + 1e-6)).real();
        CHECK(below * above < 0.0);
    }
    for (double alpha : {-2.0, 2.0}) {
        const auto sp = static_spectrum(alpha, EnergyWindow{-50.0, eigenvalue(11)}, 401);
        // one even root in each gap between consecutive odd poles
        for (int k = 1; k + 2 <= 11; k += 2) {
            const auto n = std::count_if(sp.begin(), sp.end(), [&](const Eigenvalue& e) {
                return e.sector == Sector::even && e.energy > eigenvalue(k) && e.energy < eigenvalue(k + 2);
            });
            CHECK(n == 1);
        }
        const auto below_first = std::count_if(sp.begin(), sp.end(), [](const Eigenvalue& e) {
            return e.sector == Sector::even && e.energy < 0.25;
        });
        CHECK(below_first == (alpha < 0.0 ? 1 : 0));
        for (const auto& e : sp) {
            if (e.sector == Sector::even) {
                CHECK(std::abs(even_sector_condition(alpha, e.energy)) < 1e-9);
            }
        }
    }
}

TEST_CASE("static spectrum agrees with the finite-difference oracle") {
    for (double alpha : {-2.0, -0.5, 0.5, 2.0}) {
        const auto ev = static_eigenvalues(alpha, EnergyWindow{-50.0, 12.0}, 401);
        const auto fd = oracle::fd_spectrum(alpha, 3);
        for (int j = 0; j < 3; ++j) {
            CHECK(std::abs(ev[j] - fd[j]) < 1e-3);
        }
    }
}

}
