#pragma once

#include <vector>

#include <Eigen/Core>

#include "deltabox/charge.hpp"
#include "deltabox/greens.hpp"
#include "deltabox/profile.hpp"
#include "deltabox/spectral.hpp"

namespace deltabox {

/// F(q, t) = (i/sqrt(pi)) sum_{k odd} (int_0^t q(s) e^{-i lambda_k (t-s)} ds) psi_k,
/// t a node of the charge grid.
SpectralCoefficients assemble_F(const ChargeTrajectory& q, double t, int k_max);

/// state - q G_0^lambda(., 0).
SpectralCoefficients regular_part(const SpectralCoefficients& state, cplx q, const SpectralShift& lambda);

/// H_alpha psi = lambda_k phi_k - lambda q (G_0^lambda)_k.
SpectralCoefficients apply_hamiltonian(const DomainState& state);

/// psi(0) through the decomposition: phi^lambda(0) + q G_0^lambda(0,0). Converges
/// faster in k_max than origin_trace(state) when q != 0.
cplx origin_value(const SpectralCoefficients& state, cplx q, const SpectralShift& lambda);

/// <psi, H_alpha psi> for a state whose charge is q.
double energy(const SpectralCoefficients& state, cplx q, const SpectralShift& lambda);

struct EvolutionResult {
    TimeGrid grid;
    ChargeTrajectory charge;
    /// Nodes whose full state was kept, ascending; always ends with the last node.
    std::vector<int> stored_nodes;
    std::vector<SpectralCoefficients> states;
    Eigen::VectorXd norm;
    Eigen::VectorXd energy;
    /// psi(0, t_n) from the decomposition with the run's shift.
    Eigen::VectorXcd origin;
    SpectralShift shift;

    const SpectralCoefficients& final_state() const { return states.back(); }
};

/// psi(t_n) = e^{it_n Delta} psi0 + F(q, t_n). Full states are kept every
/// `store_stride` nodes (0 keeps the final state only).
EvolutionResult evolve(const SpectralCoefficients& psi0, const CouplingProfile& alpha,
                       const TimeGrid& grid, int k_max, int store_stride = 10,
                       const SpectralShift& shift = SpectralShift());
EvolutionResult evolve(const DomainState& psi0, const CouplingProfile& alpha, const TimeGrid& grid,
                       int k_max, int store_stride = 10);

struct DiagnosticsReport {
    /// max_n |q(t_n) + alpha(t_n) psi(0, t_n)|
    double boundary_residual;
    /// max_n | ||psi(t_n)|| - ||psi0|| |
    double norm_drift;
    /// max_n |E(t_n) - E(0)|
    double energy_drift;
    /// max_n |dE/dt - alpha' |psi(0)|^2| over max_n |alpha' |psi(0)|^2| (central
    /// differences at interior nodes); the unscaled maximum when alpha' vanishes.
    double energy_balance_error;
};

DiagnosticsReport diagnostics(const EvolutionResult& result, const CouplingProfile& alpha);

} // namespace deltabox
