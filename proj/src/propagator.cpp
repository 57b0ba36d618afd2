#include "deltabox/propagator.hpp"

#include <algorithm>
#include <cmath>

#include "deltabox/errors.hpp"

namespace deltabox {

namespace {

EvolutionResult run(const SpectralCoefficients& psi0, ChargeTrajectory charge, const TimeGrid& grid,
                    int k_max, int store_stride, const SpectralShift& shift) {
    if (store_stride < 0) {
        throw InputError("store stride must be >= 0");
    }
    const int n_nodes = grid.size();
    const double dt = grid.dt();
    const Eigen::VectorXcd& q = charge.q;
    const Eigen::VectorXcd g = green_coefficients(shift, k_max).values();
    const cplx g0 = green_origin(shift.value());
    ModeAccumulator acc(k_max, dt);
    const Eigen::ArrayXd& lambda = acc.eigenvalues();
    const auto& a0 = psi0.values();

    Eigen::VectorXd norm(n_nodes);
    Eigen::VectorXd en(n_nodes);
    Eigen::VectorXcd origin(n_nodes);
    std::vector<int> stored;
    std::vector<SpectralCoefficients> states;
    Eigen::VectorXcd a(k_max);

    for (int n = 0; n < n_nodes; ++n) {
        const double t = grid.t(n);
        if (n > 0) {
            acc.advance((q[n] - q[n - 1]) / dt);
        }
        for (int k = 1; k <= k_max; ++k) {
            a[k - 1] = a0[k - 1] * std::polar(1.0, -eigenvalue(k) * t);
        }
        for (int i = 0; i < acc.size(); ++i) {
            const int k = ModeAccumulator::mode(i);
            a[k - 1] += (q[n] - q[0] * std::polar(1.0, -lambda[i] * t) - acc.values()[i]) /
                        (kSqrtPi * lambda[i]);
        }
        const SpectralCoefficients state(a);
        norm[n] = state.norm();
        en[n] = energy(state, q[n], shift);
        origin[n] = origin_trace(SpectralCoefficients(Eigen::VectorXcd(a - q[n] * g))) + q[n] * g0;
        if (n == n_nodes - 1 || (store_stride > 0 && n % store_stride == 0)) {
            stored.push_back(n);
            states.push_back(state);
        }
    }
    return EvolutionResult{grid,          std::move(charge), std::move(stored), std::move(states),
                           std::move(norm), std::move(en),   std::move(origin), shift};
}

} // namespace

SpectralCoefficients assemble_F(const ChargeTrajectory& q, double t, int k_max) {
    const int n = q.grid.node_of(t);
    if (n < 0) {
        throw InputError("assemble_F: t is not a node of the charge grid");
    }
    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(k_max);
    if (q.grid.t_end() == 0.0) {
        return SpectralCoefficients(std::move(a));
    }
    ModeAccumulator acc(k_max, q.grid.dt());
    for (int m = 1; m <= n; ++m) {
        acc.advance((q.q[m] - q.q[m - 1]) / q.grid.dt());
    }
    const double tn = q.grid.t(n);
    for (int i = 0; i < acc.size(); ++i) {
        const double l = acc.eigenvalues()[i];
        a[ModeAccumulator::mode(i) - 1] =
            (q.q[n] - q.q[0] * std::polar(1.0, -l * tn) - acc.values()[i]) / (kSqrtPi * l);
    }
    return SpectralCoefficients(std::move(a));
}

SpectralCoefficients regular_part(const SpectralCoefficients& state, cplx q, const SpectralShift& lambda) {
    if (q == cplx(0.0)) {
        return state;
    }
    return state - q * green_coefficients(lambda, state.k_max());
}

SpectralCoefficients apply_hamiltonian(const DomainState& state) {
    const int k_max = state.regular.k_max();
    const Eigen::VectorXcd g = green_coefficients(state.shift, k_max).values();
    Eigen::VectorXcd out(k_max);
    for (int k = 1; k <= k_max; ++k) {
        out[k - 1] = eigenvalue(k) * state.regular[k] - state.shift.value() * state.charge * g[k - 1];
    }
    return SpectralCoefficients(std::move(out));
}

cplx origin_value(const SpectralCoefficients& state, cplx q, const SpectralShift& lambda) {
    return origin_trace(regular_part(state, q, lambda)) + q * green_origin(lambda.value());
}

double energy(const SpectralCoefficients& state, cplx q, const SpectralShift& lambda) {
    const DomainState d{regular_part(state, q, lambda), q, lambda};
    return state.values().dot(apply_hamiltonian(d).values()).real();
}

EvolutionResult evolve(const SpectralCoefficients& psi0, const CouplingProfile& alpha,
                       const TimeGrid& grid, int k_max, int store_stride, const SpectralShift& shift) {
    const SpectralCoefficients psi = psi0.resized(k_max);
    return run(psi, solve_charge(alpha, psi, grid, k_max), grid, k_max, store_stride, shift);
}

EvolutionResult evolve(const DomainState& psi0, const CouplingProfile& alpha, const TimeGrid& grid,
                       int k_max, int store_stride) {
    DomainState d{psi0.regular.resized(k_max), psi0.charge, psi0.shift};
    ChargeTrajectory charge = solve_charge(alpha, d, grid, k_max);
    return run(d.full(), std::move(charge), grid, k_max, store_stride, psi0.shift);
}

DiagnosticsReport diagnostics(const EvolutionResult& result, const CouplingProfile& alpha) {
    const TimeGrid& grid = result.grid;
    const int n_nodes = grid.size();
    DiagnosticsReport rep{0.0, 0.0, 0.0, 0.0};
    for (int n = 0; n < n_nodes; ++n) {
        const double a = alpha.value(grid.t(n));
        rep.boundary_residual =
            std::max(rep.boundary_residual, std::abs(result.charge.q[n] + a * result.origin[n]));
        rep.norm_drift = std::max(rep.norm_drift, std::abs(result.norm[n] - result.norm[0]));
        rep.energy_drift = std::max(rep.energy_drift, std::abs(result.energy[n] - result.energy[0]));
    }
    double worst = 0.0;
    double scale = 0.0;
    const double dt = grid.dt();
    for (int n = 1; n + 1 < n_nodes; ++n) {
        const double de = (result.energy[n + 1] - result.energy[n - 1]) / (2.0 * dt);
        const double source = alpha.derivative(grid.t(n)) * std::norm(result.origin[n]);
        worst = std::max(worst, std::abs(de - source));
        scale = std::max(scale, std::abs(source));
    }
    rep.energy_balance_error = scale > 0.0 ? worst / scale : worst;
    return rep;
}

} // namespace deltabox
