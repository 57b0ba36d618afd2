#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "deltabox/errors.hpp"
#include "deltabox/propagator.hpp"

using namespace deltabox;

namespace {

// Normalized even-sector eigenstate of -d^2/dx^2 + alpha delta at energy e,
// written as regular part plus charge on the default shift.
DomainState static_eigenstate(double alpha, double e, int k_max) {
    Eigen::VectorXcd reg = Eigen::VectorXcd::Zero(k_max);
    Eigen::VectorXcd full = Eigen::VectorXcd::Zero(k_max);
    for (int k = 1; k <= k_max; k += 2) {
        const double l = eigenvalue(k);
        reg[k - 1] = (1.0 + e) / ((l - e) * (l + 1.0)) / kSqrtPi;
        full[k - 1] = 1.0 / ((l - e) * kSqrtPi);
    }
    const double scale = 1.0 / full.norm();
    const SpectralCoefficients regular(Eigen::VectorXcd(scale * reg));
    const cplx g0 = green_origin(1.0);
    const cplx q = -alpha * origin_trace(regular) / (1.0 + alpha * g0);
    return DomainState{regular, q, SpectralShift()};
}

double ground_energy(double alpha) {
    return static_eigenvalues(alpha, {-50.0, 1.0}, 401).front();
}

ChargeTrajectory trajectory(const TimeGrid& grid, int k_max, const Eigen::VectorXcd& q) {
    return ChargeTrajectory{grid, k_max, q, Eigen::VectorXcd(), Eigen::VectorXcd()};
}

} // namespace

TEST_SUITE("propagator") {

TEST_CASE("F of a linear charge is exact") {
    const int k_max = 61;
    const TimeGrid grid(1.5, 300);
    Eigen::VectorXcd q(grid.size());
    for (int n = 0; n < grid.size(); ++n) {
        q[n] = cplx(2.0, -1.0) * grid.t(n);
    }
    const auto traj = trajectory(grid, k_max, q);
    for (double t : {0.0, 0.5, 1.5}) {
        const auto f = assemble_F(traj, t, k_max);
        for (int k = 1; k <= k_max; ++k) {
            cplx expect = 0.0;
            if (k % 2 == 1) {
                const cplx il(0.0, eigenvalue(k));
                const cplx integral = t / il - (1.0 - std::exp(-il * t)) / (il * il);
                expect = cplx(0.0, 1.0) / kSqrtPi * cplx(2.0, -1.0) * integral;
            }
            CHECK(std::abs(f[k] - expect) < 1e-13);
        }
    }
    CHECK(assemble_F(trajectory(grid, k_max, Eigen::VectorXcd::Zero(grid.size())), 1.5, k_max).norm() == 0.0);
    CHECK_THROWS_AS(assemble_F(traj, 0.123, k_max), InputError);
}

TEST_CASE("F identity: lambda F(w) = w(t) psi(0) + i F(w')") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    const int k_max = 41;
    const TimeGrid grid(2.0, 400);
    const double dt = grid.dt();
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXcd w(grid.size());
        w[0] = 0.0;
        for (int n = 1; n < grid.size(); ++n) {
            w[n] = w[n - 1] + std::sqrt(dt) * cplx(g(rng), g(rng));
        }
        const auto traj = trajectory(grid, k_max, w);
        const int node = 100 * (trial % 4 + 1);
        const double t = grid.t(node);
        const auto f = assemble_F(traj, t, k_max);
        double worst = 0.0;
        for (int k = 1; k <= k_max; k += 2) {
            const double l = eigenvalue(k);
            // w' is piecewise constant; its convolution integrates segment by segment
            cplx conv = 0.0;
            for (int j = 0; j < node; ++j) {
                const cplx slope = (w[j + 1] - w[j]) / dt;
                conv += slope * (std::polar(1.0, -l * (t - grid.t(j + 1))) - std::polar(1.0, -l * (t - grid.t(j)))) /
                        cplx(0.0, l);
            }
            const cplx f_prime = cplx(0.0, 1.0) / kSqrtPi * conv;
            worst = std::max(worst, std::abs(l * f[k] - w[node] / kSqrtPi - cplx(0.0, 1.0) * f_prime));
        }
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("Q(t) = (e^{it Delta} - 1) G + F(1, t) has denominator lambda_k (lambda_k + lambda)") {
    const int k_max = 41;
    const TimeGrid grid(1.3, 130);
    const auto one = trajectory(grid, k_max, Eigen::VectorXcd::Ones(grid.size()));
    for (const cplx lambda : {cplx(1.0), cplx(2.0, 1.0), cplx(0.3, -0.7)}) {
        const SpectralShift shift(lambda);
        const auto g = green_coefficients(shift, k_max);
        for (double t : {0.4, 1.3}) {
            const auto q = free_evolve(g, t) - g + assemble_F(one, t, k_max);
            double plus = 0.0;
            double minus = 0.0;
            for (int k = 1; k <= k_max; k += 2) {
                const double l = eigenvalue(k);
                const cplx phase = 1.0 - std::polar(1.0, -l * t);
                plus = std::max(plus, std::abs(q[k] - lambda * phase / (kSqrtPi * l * (l + lambda))));
                minus = std::max(minus, std::abs(q[k] - lambda * phase / (kSqrtPi * l * (l - lambda))));
            }
            CHECK(plus < 1e-15);
            CHECK(minus > 1e-3);
        }
    }
}

TEST_CASE("free and decoupled evolution") {
    const int k_max = 101;
    const TimeGrid grid(2.0, 1000);
    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(k_max);
    a[0] = 0.6;
    a[1] = cplx(0.0, 0.8);
    const SpectralCoefficients psi(a);
    const auto free = evolve(psi, CouplingProfile(), grid, k_max);
    CHECK((free.final_state().values() - free_evolve(psi, 2.0).values()).norm() < 1e-14);
    CHECK(free.charge.q.cwiseAbs().maxCoeff() == 0.0);

    const auto psi2 = SpectralCoefficients::unit(2, k_max);
    const auto bumped = evolve(psi2, CouplingProfile::sine_bump(3.0, 2.0), grid, k_max);
    CHECK(bumped.final_state() == free_evolve(psi2, 2.0));

    // Only the even sector feels the interaction.
    const auto mixed = evolve(psi, CouplingProfile::sine_bump(1.0, 2.0), grid, k_max);
    const auto diff = mixed.final_state() - free.final_state();
    for (int k = 2; k <= k_max; k += 2) {
        CHECK(diff[k] == cplx(0.0));
    }
    CHECK(std::abs(diff[1]) > 1e-3);
}

TEST_CASE("stored states follow the stride") {
    const TimeGrid grid(1.0, 25);
    const auto r = evolve(SpectralCoefficients::unit(1, 11), CouplingProfile(), grid, 11, 10);
    CHECK(r.stored_nodes == std::vector<int>{0, 10, 20, 25});
    const auto last = evolve(SpectralCoefficients::unit(1, 11), CouplingProfile(), grid, 11, 0);
    CHECK(last.stored_nodes == std::vector<int>{25});
    CHECK_THROWS_AS(evolve(SpectralCoefficients::unit(1, 11), CouplingProfile(), grid, 11, -1), InputError);
}

TEST_CASE("regular part") {
    const SpectralShift shift;
    const auto g = green_coefficients(shift, 201);
    const cplx q(0.3, -0.2);
    CHECK(regular_part(q * g, q, shift).norm() < 1e-15);
    const auto psi1 = SpectralCoefficients::unit(1, 201);
    CHECK(regular_part(psi1, 0.0, shift) == psi1);

    // The regular part of an evolved state lies in H^2: its lambda^2-weighted tail is small.
    const TimeGrid grid(2.0, 2000);
    const auto r = evolve(psi1, CouplingProfile::sine_bump(1.0, 2.0), grid, 401);
    const auto reg = regular_part(r.final_state(), r.charge.q[grid.n_steps()], shift);
    double tail = 0.0;
    for (int k = 101; k <= 401; ++k) {
        tail += std::pow(eigenvalue(k), 2) * std::norm(reg[k]);
    }
    CHECK(tail < 1e-5);
}

TEST_CASE("Hamiltonian on eigenstates") {
    const auto psi1 = SpectralCoefficients::unit(1, 201);
    const DomainState free{psi1, 0.0, SpectralShift()};
    const auto h = apply_hamiltonian(free);
    CHECK((h.values() - eigenvalue(1) * psi1.values()).norm() < 1e-15);

    const double alpha = 2.0;
    const double e = ground_energy(alpha);
    CHECK(e == doctest::Approx(0.620373).epsilon(1e-6));
    const auto state = static_eigenstate(alpha, e, 401);
    const auto full = state.full();
    const auto residual = apply_hamiltonian(state) - e * full;
    CHECK(residual.norm() < 1e-6);
    CHECK(std::abs(state.charge + alpha * origin_value(full, state.charge, state.shift)) < 1e-12);
    CHECK(energy(full, state.charge, state.shift) == doctest::Approx(e).epsilon(1e-6));
}

TEST_CASE("static eigenstate rotates by its phase") {
    const double alpha = 2.0;
    const double e = ground_energy(alpha);
    const auto state = static_eigenstate(alpha, e, 401);
    const TimeGrid grid(2.0, 4000);
    const auto r = evolve(state, CouplingProfile::constant(alpha), grid, 401, 0);
    const auto expect = std::polar(1.0, -e * 2.0) * state.full();
    CHECK((r.final_state() - expect).norm() < 1e-5);
}

TEST_CASE("diagnostics") {
    const TimeGrid grid(2.0, 2000);
    const auto psi1 = SpectralCoefficients::unit(1, 401);

    const auto free = evolve(psi1, CouplingProfile(), grid, 401);
    const auto d0 = diagnostics(free, CouplingProfile());
    CHECK(d0.boundary_residual == 0.0);
    CHECK(d0.norm_drift < 1e-14);
    CHECK(d0.energy_drift < 1e-12);
    CHECK(d0.energy_balance_error < 1e-12);

    const auto bump = CouplingProfile::sine_bump(1.0, 2.0);
    const auto d1 = diagnostics(evolve(psi1, bump, grid, 401), bump);
    CHECK(d1.boundary_residual < 1e-8);
    CHECK(d1.norm_drift < 1e-6);
    CHECK(d1.energy_balance_error < 1e-3);

    Eigen::VectorXcd reg = Eigen::VectorXcd::Zero(401);
    reg[0] = 0.8;
    reg[2] = 0.6;
    const double a0 = 0.5;
    const SpectralCoefficients regular(reg);
    const cplx q0 = -a0 * origin_trace(regular) / (1.0 + a0 * green_origin(1.0));
    const DomainState start{regular, q0, SpectralShift()};
    const auto constant = CouplingProfile::constant(a0);
    const auto d2 = diagnostics(evolve(start, constant, grid, 401), constant);
    CHECK(d2.energy_drift < 1e-5);
    CHECK(d2.boundary_residual < 1e-7);
}

TEST_CASE("norm drift is second order in dt") {
    const auto bump = CouplingProfile::sine_bump(1.0, 2.0);
    const auto psi1 = SpectralCoefficients::unit(1, 201);
    std::vector<double> drift;
    for (int n : {250, 500, 1000}) {
        drift.push_back(diagnostics(evolve(psi1, bump, TimeGrid(2.0, n), 201, 0), bump).norm_drift);
    }
    CHECK(std::log2(drift[0] / drift[1]) >= 1.8);
    CHECK(std::log2(drift[1] / drift[2]) >= 1.8);
}

TEST_CASE("boundary residual decreases with the cutoff") {
    const auto bump = CouplingProfile::sine_bump(1.0, 2.0);
    const TimeGrid grid(2.0, 2000);
    std::vector<double> res;
    for (int k : {51, 101, 201}) {
        res.push_back(diagnostics(evolve(SpectralCoefficients::unit(1, k), bump, grid, k, 0), bump).boundary_residual);
    }
    CHECK(std::log2(res[0] / res[1]) >= 1.0);
    CHECK(std::log2(res[1] / res[2]) >= 1.0);
}

}
