#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "deltabox/profile.hpp"
#include "deltabox/spectral.hpp"

namespace deltabox {

/// Desired coefficients on the even sector (odd k only) at horizon t_end.
struct ControlTarget {
    SpectralCoefficients c;
    double t_end;
};

/// Complex time samples on a grid.
struct SynthesizedControl {
    TimeGrid grid;
    Eigen::VectorXcd u;
    /// max_n |Im u_n|
    double realness_defect;
};

/// Throws InputError for even-k support, UnsupportedHorizonError unless t_end = 8 pi N.
void validate_target(const ControlTarget& target);

/// Final state of the interacting evolution.
SpectralCoefficients gamma(const CouplingProfile& alpha, const SpectralCoefficients& psi0,
                           const TimeGrid& grid, int k_max);

/// Derivative of gamma at alpha in the direction u (node samples, possibly complex).
SpectralCoefficients apply_linearized(const CouplingProfile& alpha, const Eigen::VectorXcd& u,
                                      const SpectralCoefficients& psi0, const TimeGrid& grid, int k_max);
SpectralCoefficients apply_linearized(const CouplingProfile& alpha, const CouplingProfile& u,
                                      const SpectralCoefficients& psi0, const TimeGrid& grid, int k_max);

/// rho_0(t) = (sqrt(pi)/i) (1/8pi) sum_{k odd} e^{i lambda_k T} c_k (e^{-i lambda_k t} - e^{i lambda_k t})
/// on [0, 8 pi], zero afterwards.
cplx moment_density(const ControlTarget& target, double t);

/// rho_0 sampled on `grid` (grid horizon must equal the target horizon).
SynthesizedControl solve_moment(const ControlTarget& target, const TimeGrid& grid);

/// int_0^T rho(s) e^{i omega s} ds with piecewise-quadratic interpolation of rho and
/// exact oscillatory moments (a trailing odd segment is treated as linear).
cplx oscillatory_integral(const TimeGrid& grid, const Eigen::VectorXcd& rho, double omega);

/// max_{k odd} |c_k - (i/sqrt(pi)) int_0^T rho(s) e^{-i lambda_k (T - s)} ds|.
double moment_residual(const SynthesizedControl& rho, const ControlTarget& target);

/// u(t) = -sqrt(pi) rho_0(t) e^{i lambda_kbar t}: steers psi_kbar by delta_target to
/// first order around alpha = 0.
SynthesizedControl synthesize_control(const ControlTarget& delta_target, int k_bar, const TimeGrid& grid);

struct SteeringPoint {
    double epsilon;
    /// ||gamma(eps Re u) - e^{-i lambda T} psi_kbar - eps dGamma(Re u)||
    double remainder;
    /// remainder / ||eps dGamma(Re u)||
    double displacement_error;
};

struct ControllabilityReport {
    std::vector<SteeringPoint> points;
    /// Least-squares slope of log remainder against log epsilon.
    double slope;
    double realness_defect;
    /// ||dGamma(Re u)|| for the unit direction.
    double linear_norm;
    /// Odd pairs (k, j), k < j <= k_max, with k^2 + j^2 = 2 k_bar^2.
    std::vector<std::pair<int, int>> collisions;
};

ControllabilityReport controllability_experiment(int k_bar, const std::vector<double>& epsilons,
                                                 const ControlTarget& direction, const TimeGrid& grid,
                                                 int k_max);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace deltabox
