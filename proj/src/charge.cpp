#include "deltabox/charge.hpp"

#include <cmath>
#include <string>

#include "deltabox/errors.hpp"

namespace deltabox {

namespace {

constexpr double kStepMargin = 1e-12;
constexpr double kCompatibilityTolerance = 1e-9;

struct March {
    Eigen::VectorXcd v;
    Eigen::VectorXcd bracket;
    Eigen::VectorXcd accumulators;
};

void check_grid(const TimeGrid& grid) {
    if (!(grid.t_end() > 0.0)) {
        throw InputError("charge solvers need a grid with positive horizon");
    }
}

// Marches v_n = f_n - phi_n * bracket_n, where
//   bracket_n = v0 gamma_n + (pi/2) v_n - (1/pi) sum_k B_k(n) / lambda_k,
//   gamma_n   = -sum_k gamma_weight_k exp(-i lambda_k t_n).
// The pi/2 is the full odd sum (1/pi) sum 1/lambda_k, so only the
// q(0) and history terms are truncated.
March march(const TimeGrid& grid, int k_max, const Eigen::VectorXcd& f, const Eigen::VectorXd& phi,
            cplx v0, cplx bracket0, const Eigen::VectorXcd& gamma_weight) {
    check_grid(grid);
    if (f.size() != grid.size() || phi.size() != grid.size()) {
        throw InputError("source and coupling samples must match the grid");
    }
    const int n_nodes = grid.size();
    const double dt = grid.dt();
    ModeAccumulator acc(k_max, dt);
    const Eigen::ArrayXd& lambda = acc.eigenvalues();
    const Eigen::VectorXcd phase_over_lambda = (acc.step_phase().array() / lambda).matrix();
    const cplx wc = (acc.slope_weight().array() / lambda).sum() / kPi;
    const double tail = kPi / 2.0;
    const bool has_initial_term = v0 != cplx(0.0);

    March out;
    out.v.resize(n_nodes);
    out.bracket.resize(n_nodes);
    out.v[0] = v0;
    out.bracket[0] = bracket0;

    for (int n = 1; n < n_nodes; ++n) {
        const double t = grid.t(n);
        const cplx history = phase_over_lambda.cwiseProduct(acc.values()).sum() / kPi;
        cplx gamma = 0.0;
        if (has_initial_term) {
            for (int i = 0; i < acc.size(); ++i) {
                gamma -= gamma_weight[i] * std::polar(1.0, -lambda[i] * t);
            }
        }
        const double p = phi[n];
        const cplx denom = 1.0 + p * (tail - wc / dt);
        if (std::abs(denom) < kStepMargin) {
            throw StepSingularityError("charge step is singular at t = " + std::to_string(t), t);
        }
        const cplx rhs = f[n] - p * (v0 * gamma - history + wc * out.v[n - 1] / dt);
        out.v[n] = rhs / denom;
        const cplx slope = (out.v[n] - out.v[n - 1]) / dt;
        acc.advance(slope);
        out.bracket[n] = v0 * gamma + tail * out.v[n] - history - wc * slope;
    }
    out.accumulators = acc.values();
    return out;
}

Eigen::VectorXcd plain_gamma_weight(int k_max) {
    const int n = (k_max + 1) / 2;
    Eigen::VectorXcd w(n);
    for (int i = 0; i < n; ++i) {
        w[i] = 1.0 / (kPi * eigenvalue(ModeAccumulator::mode(i)));
    }
    return w;
}

// e^{it Delta} G^lambda(0,0) minus the q(0) term of U: (1/pi) sum e^{-i lambda_k t}
// lambda / (lambda_k (lambda_k + lambda)), which decays like 1/k^4.
Eigen::VectorXcd shifted_gamma_weight(cplx l, int k_max) {
    const int n = (k_max + 1) / 2;
    Eigen::VectorXcd w(n);
    for (int i = 0; i < n; ++i) {
        const double lk = eigenvalue(ModeAccumulator::mode(i));
        w[i] = l / (kPi * lk * (lk + l));
    }
    return w;
}

} // namespace

SpectralCoefficients DomainState::full() const {
    return regular + charge * green_coefficients(shift, regular.k_max());
}

ModeAccumulator::ModeAccumulator(int k_max, double dt) {
    if (k_max < 1) {
        throw InputError("k_max must be >= 1");
    }
    if (!(dt > 0.0)) {
        throw InputError("time step must be positive");
    }
    const int n = (k_max + 1) / 2;
    lambda_.resize(n);
    e_.resize(n);
    w_.resize(n);
    b_ = Eigen::VectorXcd::Zero(n);
    for (int i = 0; i < n; ++i) {
        const double l = eigenvalue(mode(i));
        const double theta = l * dt;
        const double half = std::sin(0.5 * theta);
        lambda_[i] = l;
        e_[i] = std::polar(1.0, -theta);
        // (1 - e^{-i theta}) / (i l), written without cancellation
        w_[i] = cplx(std::sin(theta), -2.0 * half * half) / l;
    }
}

Eigen::VectorXcd apply_U(const TimeGrid& grid, const Eigen::VectorXcd& q, int k_max, TailMode tail) {
    if (q.size() == 0 || q.size() != grid.size()) {
        throw InputError("apply_U: charge samples must cover the grid");
    }
    check_grid(grid);
    const cplx i_unit(0.0, 1.0);
    ModeAccumulator acc(k_max, grid.dt());
    const Eigen::ArrayXd& lambda = acc.eigenvalues();
    const Eigen::ArrayXcd inv_i_lambda = 1.0 / (i_unit * lambda.cast<cplx>());
    const cplx instantaneous =
        tail == TailMode::analytic ? kOddInverseEigenvalueSum / i_unit : inv_i_lambda.sum();

    Eigen::VectorXcd out(q.size());
    out[0] = 0.0;
    Eigen::ArrayXcd phase(acc.size());
    for (int n = 1; n < q.size(); ++n) {
        acc.advance((q[n] - q[n - 1]) / grid.dt());
        const double t = grid.t(n);
        for (int i = 0; i < acc.size(); ++i) {
            phase[i] = std::polar(1.0, -lambda[i] * t);
        }
        const Eigen::ArrayXcd rest = -q[0] * phase - acc.values().array();
        out[n] = q[n] * instantaneous + (rest * inv_i_lambda).sum();
    }
    return out;
}

cplx initial_charge(cplx f0, double phi0, const SpectralShift& lambda) {
    const cplx denom = 1.0 + phi0 * green_origin(lambda.value());
    if (std::abs(denom) < kStepMargin) {
        throw SingularityError("1 + phi(0) G(0,0) vanishes: initial charge undefined");
    }
    return f0 / denom;
}

ChargeTrajectory solve_charge_general(const Eigen::VectorXcd& f, const CouplingProfile& phi,
                                      const SpectralShift& lambda, const TimeGrid& grid, int k_max) {
    check_grid(grid);
    if (f.size() != grid.size()) {
        throw InputError("source samples must match the grid");
    }
    const Eigen::VectorXd p = sample(phi, grid);
    const cplx v0 = initial_charge(f[0], p[0], lambda);
    const cplx l = lambda.value();
    March m = march(grid, k_max, f, p, v0, v0 * green_origin(l), shifted_gamma_weight(l, k_max));
    return ChargeTrajectory{grid, k_max, std::move(m.v), Eigen::VectorXcd(), std::move(m.accumulators)};
}

ChargeTrajectory solve_charge_plain(const Eigen::VectorXcd& f, const Eigen::VectorXd& phi,
                                    const TimeGrid& grid, int k_max) {
    check_grid(grid);
    if (f.size() != grid.size()) {
        throw InputError("source samples must match the grid");
    }
    March m = march(grid, k_max, f, phi, f[0], 0.0, plain_gamma_weight(k_max));
    return ChargeTrajectory{grid, k_max, std::move(m.v), Eigen::VectorXcd(), std::move(m.accumulators)};
}

ChargeTrajectory solve_charge(const CouplingProfile& alpha, const SpectralCoefficients& psi0,
                              const TimeGrid& grid, int k_max) {
    check_grid(grid);
    const SpectralCoefficients psi = psi0.resized(k_max);
    const Eigen::VectorXcd s = free_origin_trace(psi, grid);
    const Eigen::VectorXd a = sample(alpha, grid);
    const Eigen::VectorXcd f = -(a.cast<cplx>().cwiseProduct(s));
    March m = march(grid, k_max, f, a, f[0], 0.0, plain_gamma_weight(k_max));
    Eigen::VectorXcd origin = s + m.bracket;
    return ChargeTrajectory{grid, k_max, std::move(m.v), std::move(origin), std::move(m.accumulators)};
}

ChargeTrajectory solve_charge(const CouplingProfile& alpha, const DomainState& psi0,
                              const TimeGrid& grid, int k_max) {
    check_grid(grid);
    const SpectralCoefficients regular = psi0.regular.resized(k_max);
    const cplx g = green_origin(psi0.shift.value());
    const double a0 = alpha.value(0.0);
    const cplx origin0 = origin_trace(regular) + psi0.charge * g;
    const double mismatch = std::abs(psi0.charge + a0 * origin0);
    if (mismatch > kCompatibilityTolerance) {
        throw InputError("domain state violates -q = alpha(0) psi(0): mismatch " +
                         std::to_string(mismatch));
    }
    const Eigen::VectorXcd s = free_origin_trace(regular, grid);
    const Eigen::VectorXd a = sample(alpha, grid);
    const Eigen::VectorXcd f = -(a.cast<cplx>().cwiseProduct(s));
    const cplx v0 = initial_charge(f[0], a[0], psi0.shift);
    March m = march(grid, k_max, f, a, v0, v0 * g, shifted_gamma_weight(psi0.shift.value(), k_max));
    Eigen::VectorXcd origin = s + m.bracket;
    return ChargeTrajectory{grid, k_max, std::move(m.v), std::move(origin), std::move(m.accumulators)};
}

Eigen::VectorXcd free_origin_trace(const SpectralCoefficients& c, const TimeGrid& grid) {
    Eigen::VectorXcd out(grid.size());
    const auto& a = c.values();
    for (int n = 0; n < grid.size(); ++n) {
        const double t = grid.t(n);
        cplx sum = 0.0;
        for (int k = 1; k <= c.k_max(); k += 2) {
            sum += a[k - 1] * std::polar(1.0, -eigenvalue(k) * t);
        }
        out[n] = sum / kSqrtPi;
    }
    return out;
}

double discrete_h1_norm(const TimeGrid& grid, const Eigen::VectorXcd& x) {
    if (x.size() != grid.size()) {
        throw InputError("samples must match the grid");
    }
    const double dt = grid.dt();
    const Eigen::Index n = x.size();
    double l2 = x.squaredNorm() - 0.5 * (std::norm(x[0]) + std::norm(x[n - 1]));
    double d2 = n > 1 ? (x.tail(n - 1) - x.head(n - 1)).squaredNorm() / (dt * dt) : 0.0;
    return std::sqrt(dt * (l2 + d2));
}

LipschitzSample lipschitz_probe(const CouplingProfile& alpha, const CouplingProfile& alpha_tilde,
                                const SpectralCoefficients& psi0, const TimeGrid& grid, int k_max) {
    const ChargeTrajectory q = solve_charge(alpha, psi0, grid, k_max);
    const ChargeTrajectory qt = solve_charge(alpha_tilde, psi0, grid, k_max);
    const Eigen::VectorXd da = sample(alpha, grid) - sample(alpha_tilde, grid);
    return {discrete_h1_norm(grid, q.q - qt.q), discrete_h1_norm(grid, da.cast<cplx>())};
}

} // namespace deltabox
