#pragma once

#include <Eigen/Core>

#include "deltabox/greens.hpp"
#include "deltabox/profile.hpp"
#include "deltabox/spectral.hpp"

namespace deltabox {

/// psi = regular + charge * G_0^lambda(., 0).
struct DomainState {
    SpectralCoefficients regular;
    cplx charge;
    SpectralShift shift;

    /// Full coefficients at the cutoff of `regular`.
    SpectralCoefficients full() const;
};

/// Per-mode history B_k(n) = int_0^{t_n} q'(s) exp(-i lambda_k (t_n - s)) ds over
/// the odd modes k <= k_max, exact for piecewise-linear q. One step costs O(k_max).
class ModeAccumulator {
public:
    ModeAccumulator(int k_max, double dt);

    int size() const noexcept { return static_cast<int>(lambda_.size()); }
    /// Mode index of slot i.
    static int mode(int i) noexcept { return 2 * i + 1; }

    /// B <- E B + slope w, with E = exp(-i lambda dt), w = (1 - E)/(i lambda).
    void advance(cplx slope) { b_ = e_.cwiseProduct(b_) + slope * w_; }
    void reset() { b_.setZero(); }

    const Eigen::VectorXcd& values() const noexcept { return b_; }
    const Eigen::VectorXcd& step_phase() const noexcept { return e_; }
    const Eigen::VectorXcd& slope_weight() const noexcept { return w_; }
    const Eigen::ArrayXd& eigenvalues() const noexcept { return lambda_; }

private:
    Eigen::ArrayXd lambda_;
    Eigen::VectorXcd e_;
    Eigen::VectorXcd w_;
    Eigen::VectorXcd b_;
};

/// Charge samples on a grid. `origin` holds psi(0, t_n) when the solve knows
/// the free source (solve_charge), and is empty otherwise.
struct ChargeTrajectory {
    TimeGrid grid;
    int k_max;
    Eigen::VectorXcd q;
    Eigen::VectorXcd origin;
    /// B_k at the final node, odd k ascending.
    Eigen::VectorXcd accumulators;
};

/// How the instantaneous q(t) sum_k 1/(i lambda_k) term of U is evaluated.
enum class TailMode { analytic, truncated };

/// (Uq)(t_n) = sum_{k odd} [q(t_n) - q(0) e^{-i lambda_k t_n} - B_k(n)] / (i lambda_k),
/// q piecewise linear on the grid.
Eigen::VectorXcd apply_U(const TimeGrid& grid, const Eigen::VectorXcd& q, int k_max,
                         TailMode tail = TailMode::analytic);

/// v(0) = f0 / (1 + phi0 G_0^lambda(0,0)).
cplx initial_charge(cplx f0, double phi0, const SpectralShift& lambda);

/// v = f - phi (v(0) e^{it Delta} G_0^lambda(0,0) + (i/pi) U v) on the grid nodes.
ChargeTrajectory solve_charge_general(const Eigen::VectorXcd& f, const CouplingProfile& phi,
                                      const SpectralShift& lambda, const TimeGrid& grid, int k_max);

/// v = f - phi (i/pi) U v with v(0) = f(0); phi given by its node samples.
ChargeTrajectory solve_charge_plain(const Eigen::VectorXcd& f, const Eigen::VectorXd& phi,
                                    const TimeGrid& grid, int k_max);

/// q = -alpha e^{it Delta} psi0(0) - alpha (i/pi) U q, q(0) = -alpha(0) psi0(0).
ChargeTrajectory solve_charge(const CouplingProfile& alpha, const SpectralCoefficients& psi0,
                              const TimeGrid& grid, int k_max);

/// Same equation for a domain state; requires -q = alpha(0) psi0(0) to 1e-9.
ChargeTrajectory solve_charge(const CouplingProfile& alpha, const DomainState& psi0,
                              const TimeGrid& grid, int k_max);

/// (e^{it_n Delta} c)(0) for every node.
Eigen::VectorXcd free_origin_trace(const SpectralCoefficients& c, const TimeGrid& grid);

/// Trapezoid L2 plus forward-difference derivative, both squared, under a root.
double discrete_h1_norm(const TimeGrid& grid, const Eigen::VectorXcd& x);

struct LipschitzSample {
    double charge_gap;
    double coupling_gap;
};

/// Discrete H1 distances between the charges of two couplings and between the couplings.
LipschitzSample lipschitz_probe(const CouplingProfile& alpha, const CouplingProfile& alpha_tilde,
                                const SpectralCoefficients& psi0, const TimeGrid& grid, int k_max);

} // namespace deltabox
