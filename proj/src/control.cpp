#include "deltabox/control.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "deltabox/charge.hpp"
#include "deltabox/errors.hpp"
#include "deltabox/propagator.hpp"

namespace deltabox {

namespace {

constexpr double kHorizonTolerance = 1e-9;
constexpr double kMomentPeriod = 8.0 * kPi;

// int_{-h}^{h} tau^j e^{i w tau} d tau for j = 0, 1, 2.
struct Moments {
    cplx m0, m1, m2;
};

Moments centered_moments(double w, double h) {
    const double x = w * h;
    const cplx i_unit(0.0, 1.0);
    if (std::abs(x) < 0.5) {
        const double x2 = x * x;
        const double s0 = 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)));
        const double s1 = x / 3.0 - x * x2 / 30.0 + x * x2 * x2 / 840.0 - x * x2 * x2 * x2 / 45360.0;
        const double s2 = 1.0 / 3.0 - x2 / 10.0 + x2 * x2 / 168.0 - x2 * x2 * x2 / 6480.0 +
                          x2 * x2 * x2 * x2 / 443520.0;
        return {2.0 * h * s0, i_unit * 2.0 * h * h * s1, 2.0 * h * h * h * s2};
    }
    const double s = std::sin(x);
    const double c = std::cos(x);
    return {2.0 * s / w, i_unit * 2.0 * (s - x * c) / (w * w),
            2.0 * ((x * x - 2.0) * s + 2.0 * x * c) / (w * w * w)};
}

void check_mode(int k, int k_max) {
    if (k < 1 || k % 2 == 0 || k > k_max) {
        throw InputError("k_bar must be an odd mode index <= k_max, got " + std::to_string(k));
    }
}

} // namespace

void validate_target(const ControlTarget& target) {
    if (!target.c.in_even_sector()) {
        throw InputError("control target has support on even k (sine modes)");
    }
    const double n = std::round(target.t_end / kMomentPeriod);
    if (n < 1.0 || std::abs(target.t_end - n * kMomentPeriod) > kHorizonTolerance) {
        throw UnsupportedHorizonError("horizon T = " + std::to_string(target.t_end) +
                                      " is not a positive multiple of 8 pi");
    }
}

SpectralCoefficients gamma(const CouplingProfile& alpha, const SpectralCoefficients& psi0,
                           const TimeGrid& grid, int k_max) {
    return evolve(psi0, alpha, grid, k_max, 0).final_state();
}

SpectralCoefficients apply_linearized(const CouplingProfile& alpha, const Eigen::VectorXcd& u,
                                      const SpectralCoefficients& psi0, const TimeGrid& grid, int k_max) {
    if (u.size() != grid.size()) {
        throw InputError("perturbation samples must match the grid");
    }
    // psi(0, t) of the reference run: e^{it Delta} psi0(0) + (i/pi) U[V(alpha)]
    const ChargeTrajectory reference = solve_charge(alpha, psi0, grid, k_max);
    const Eigen::VectorXcd f = -u.cwiseProduct(reference.origin);
    const ChargeTrajectory dq = solve_charge_plain(f, sample(alpha, grid), grid, k_max);
    return assemble_F(dq, grid.t_end(), k_max);
}

SpectralCoefficients apply_linearized(const CouplingProfile& alpha, const CouplingProfile& u,
                                      const SpectralCoefficients& psi0, const TimeGrid& grid, int k_max) {
    return apply_linearized(alpha, Eigen::VectorXcd(sample(u, grid).cast<cplx>()), psi0, grid, k_max);
}

cplx moment_density(const ControlTarget& target, double t) {
    if (t <= 0.0 || t >= kMomentPeriod) {
        return 0.0;
    }
    // (e^{-i l t} - e^{i l t}) / i = -2 sin(l t)
    cplx sum = 0.0;
    const auto& c = target.c.values();
    for (int k = 1; k <= target.c.k_max(); k += 2) {
        if (c[k - 1] == cplx(0.0)) {
            continue;
        }
        const double l = eigenvalue(k);
        sum += std::polar(1.0, l * target.t_end) * c[k - 1] * std::sin(l * t);
    }
    return -kSqrtPi / (4.0 * kPi) * sum;
}

SynthesizedControl solve_moment(const ControlTarget& target, const TimeGrid& grid) {
    validate_target(target);
    if (std::abs(grid.t_end() - target.t_end) > kHorizonTolerance) {
        throw InputError("grid horizon does not match the target horizon");
    }
    Eigen::VectorXcd rho(grid.size());
    for (int n = 0; n < grid.size(); ++n) {
        rho[n] = moment_density(target, grid.t(n));
    }
    const double defect = rho.imag().cwiseAbs().maxCoeff();
    return SynthesizedControl{grid, std::move(rho), defect};
}

cplx oscillatory_integral(const TimeGrid& grid, const Eigen::VectorXcd& rho, double omega) {
    if (rho.size() != grid.size()) {
        throw InputError("samples must match the grid");
    }
    const double h = grid.dt();
    const int n_steps = grid.n_steps();
    cplx total = 0.0;
    int n = 0;
    for (; n + 2 <= n_steps; n += 2) {
        const cplx r0 = rho[n];
        const cplx r1 = rho[n + 1];
        const cplx r2 = rho[n + 2];
        const cplx b = (r2 - r0) / (2.0 * h);
        const cplx a = (r2 - 2.0 * r1 + r0) / (2.0 * h * h);
        const Moments m = centered_moments(omega, h);
        total += std::polar(1.0, omega * grid.t(n + 1)) * (r1 * m.m0 + b * m.m1 + a * m.m2);
    }
    if (n < n_steps) {
        const cplx ra = rho[n];
        const cplx rb = rho[n + 1];
        const double half = 0.5 * h;
        const Moments m = centered_moments(omega, half);
        const double center = 0.5 * (grid.t(n) + grid.t(n + 1));
        total += std::polar(1.0, omega * center) * (0.5 * (ra + rb) * m.m0 + (rb - ra) / h * m.m1);
    }
    return total;
}

double moment_residual(const SynthesizedControl& rho, const ControlTarget& target) {
    const double t_end = rho.grid.t_end();
    const cplx i_unit(0.0, 1.0);
    double worst = 0.0;
    for (int k = 1; k <= target.c.k_max(); k += 2) {
        const double l = eigenvalue(k);
        const cplx moment =
            i_unit / kSqrtPi * std::polar(1.0, -l * t_end) * oscillatory_integral(rho.grid, rho.u, l);
        worst = std::max(worst, std::abs(target.c[k] - moment));
    }
    return worst;
}

SynthesizedControl synthesize_control(const ControlTarget& delta_target, int k_bar, const TimeGrid& grid) {
    check_mode(k_bar, delta_target.c.k_max());
    SynthesizedControl rho = solve_moment(delta_target, grid);
    const double l = eigenvalue(k_bar);
    Eigen::VectorXcd u(grid.size());
    for (int n = 0; n < grid.size(); ++n) {
        u[n] = -kSqrtPi * rho.u[n] * std::polar(1.0, l * grid.t(n));
    }
    const double defect = u.imag().cwiseAbs().maxCoeff();
    return SynthesizedControl{grid, std::move(u), defect};
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw InputError("slope fit needs >= 2 matching points");
    }
    const auto n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ControllabilityReport controllability_experiment(int k_bar, const std::vector<double>& epsilons,
                                                 const ControlTarget& direction, const TimeGrid& grid,
                                                 int k_max) {
    check_mode(k_bar, k_max);
    if (std::abs(direction.c.norm() - 1.0) > 1e-9) {
        throw InputError("steering direction must have unit norm");
    }
    const SynthesizedControl u1 = synthesize_control(direction, k_bar, grid);
    const Eigen::VectorXd re_u = u1.u.real();
    const SpectralCoefficients psi0 = SpectralCoefficients::unit(k_bar, k_max);
    const SpectralCoefficients base = free_evolve(psi0, grid.t_end());
    const SpectralCoefficients d_gamma =
        apply_linearized(CouplingProfile(), Eigen::VectorXcd(re_u.cast<cplx>()), psi0, grid, k_max);

    ControllabilityReport rep;
    rep.realness_defect = u1.realness_defect;
    rep.linear_norm = d_gamma.norm();
    std::vector<double> eps_used;
    std::vector<double> remainders;
    for (double eps : epsilons) {
        if (eps == 0.0) {
            const SpectralCoefficients g = gamma(CouplingProfile(), psi0, grid, k_max);
            rep.points.push_back({0.0, (g - base).norm(), 0.0});
            continue;
        }
        const CouplingProfile alpha = CouplingProfile::sampled(grid, eps * re_u);
        const SpectralCoefficients g = gamma(alpha, psi0, grid, k_max);
        const double r = (g - base - eps * d_gamma).norm();
        rep.points.push_back({eps, r, r / (std::abs(eps) * rep.linear_norm)});
        eps_used.push_back(std::abs(eps));
        remainders.push_back(r);
    }
    rep.slope = eps_used.size() >= 2 ? loglog_slope(eps_used, remainders) : 0.0;
    for (int k = 1; k <= k_max; k += 2) {
        for (int j = k + 2; j <= k_max; j += 2) {
            if (k * k + j * j == 2 * k_bar * k_bar) {
                rep.collisions.emplace_back(k, j);
            }
        }
    }
    return rep;
}

} // namespace deltabox
