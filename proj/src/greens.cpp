#include "deltabox/greens.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "deltabox/errors.hpp"

namespace deltabox {

namespace {

// Relative distance below which z is treated as sitting on -lambda_k.
constexpr double kPoleTolerance = 1e-12;
// Distance kept from odd-sector poles when bracketing roots.
constexpr double kPoleMargin = 1e-9;
constexpr double kRootTolerance = 1e-12;

// 1 - exp(-w), without cancellation for small |w|.
cplx one_minus_exp_neg(cplx w) {
    if (std::abs(w) < 1e-3) {
        // w - w^2/2 + w^3/6 - w^4/24 + w^5/120
        return w * (1.0 - w * (0.5 - w * (1.0 / 6.0 - w * (1.0 / 24.0 - w / 120.0))));
    }
    return 1.0 - std::exp(-w);
}

// Index of the Dirichlet eigenvalue nearest to -z (>= 1).
int nearest_pole(cplx z) {
    const double e = std::max(-z.real(), 0.0);
    return std::max(1, static_cast<int>(std::lround(2.0 * std::sqrt(e))));
}

bool is_pole(cplx z, int k) {
    const double lk = eigenvalue(k);
    return std::abs(z + lk) <= kPoleTolerance * std::max(1.0, lk);
}

void check_not_pole(cplx z, bool odd_only) {
    const int k0 = nearest_pole(z);
    for (int k = std::max(1, k0 - 1); k <= k0 + 1; ++k) {
        if (odd_only && k % 2 == 0) {
            continue;
        }
        if (is_pole(z, k)) {
            throw SingularityError("z = " + std::to_string(z.real()) + "+" +
                                   std::to_string(z.imag()) + "i is the resolvent pole -lambda_" +
                                   std::to_string(k));
        }
    }
}

void check_in_box(double x) {
    if (!(std::abs(x) <= kPi)) {
        throw DomainError("x = " + std::to_string(x) + " lies outside [-pi, pi]");
    }
}

// G_0^{-E}(0,0) for real E away from the odd poles.
double origin_kernel_real(double energy) {
    if (energy > 0.0) {
        const double r = std::sqrt(energy);
        return std::tan(kPi * r) / (2.0 * r);
    }
    if (energy < 0.0) {
        const double r = std::sqrt(-energy);
        return std::tanh(kPi * r) / (2.0 * r);
    }
    return kPi / 2.0;
}

} // namespace

SpectralShift::SpectralShift(cplx lambda) : lambda_(lambda) {
    if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag())) {
        throw InputError("spectral shift must be finite");
    }
    // lambda + lambda_k = 0 would put the shift on a pole of the resolvent.
    check_not_pole(lambda, false);
}

cplx green_closed(double x, double x_prime, cplx z) {
    check_in_box(x);
    check_in_box(x_prime);
    check_not_pole(z, false);

    const double hi = std::max(x, x_prime);
    const double lo = std::min(x, x_prime);
    const cplx s = std::sqrt(z);
    if (s == cplx(0.0)) {
        return (kPi - hi) * (kPi + lo) / (2.0 * kPi);
    }
    // sinh(a) sinh(b) / (s sinh(c)) with a + b = c - s (hi - lo), all
    // exponentials written with nonpositive real part.
    const cplx a = s * (kPi - hi);
    const cplx b = s * (kPi + lo);
    const cplx c = s * (2.0 * kPi);
    return std::exp(-s * (hi - lo)) * one_minus_exp_neg(2.0 * a) * one_minus_exp_neg(2.0 * b) /
           (2.0 * s * one_minus_exp_neg(2.0 * c));
}

cplx green_series(double x, double x_prime, cplx z, int k_max) {
    check_in_box(x);
    check_in_box(x_prime);
    check_not_pole(z, false);
    if (k_max < 1) {
        throw InputError("k_max must be >= 1");
    }
    cplx sum = 0.0;
    for (int k = 1; k <= k_max; ++k) {
        const double arg = 0.5 * k;
        const double px = k % 2 == 1 ? std::cos(arg * x) : std::sin(arg * x);
        const double pxp = k % 2 == 1 ? std::cos(arg * x_prime) : std::sin(arg * x_prime);
        sum += px * pxp / (eigenvalue(k) + z);
    }
    return sum / kPi;
}

cplx green_origin(cplx z) {
    check_not_pole(z, true);
    const cplx s = std::sqrt(z);
    if (s == cplx(0.0)) {
        return kPi / 2.0;
    }
    // tanh(pi s) = (1 - e^{-2 pi s}) / (1 + e^{-2 pi s})
    const cplx m = one_minus_exp_neg(2.0 * kPi * s);
    return m / ((2.0 - m) * 2.0 * s);
}

SpectralCoefficients green_coefficients(const SpectralShift& shift, int k_max) {
    if (k_max < 1) {
        throw InputError("k_max must be >= 1");
    }
    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(k_max);
    for (int k = 1; k <= k_max; k += 2) {
        a[k - 1] = (1.0 / kSqrtPi) / (eigenvalue(k) + shift.value());
    }
    return SpectralCoefficients(std::move(a));
}

EnergyWindow bound_state_window() { return {-50.0, 0.0}; }

EnergyWindow excited_window(int k_max) {
    const double half = 0.5 * k_max;
    return {0.0, half * half * 0.25};
}

double even_sector_condition(double alpha, double energy) {
    return 1.0 + alpha * origin_kernel_real(energy);
}

std::vector<Eigenvalue> static_spectrum(double alpha, EnergyWindow window, int k_max) {
    if (std::isnan(alpha) || !std::isfinite(alpha)) {
        throw InputError("coupling alpha must be finite");
    }
    if (std::isnan(window.lo) || std::isnan(window.hi) || !std::isfinite(window.lo) ||
        !std::isfinite(window.hi)) {
        throw InputError("energy window must be bounded");
    }
    if (k_max < 1) {
        throw InputError("k_max must be >= 1");
    }
    std::vector<Eigenvalue> out;
    if (!(window.lo < window.hi)) {
        return out;
    }
    auto inside = [&](double e) { return e > window.lo && e < window.hi; };

    // Sine modes vanish at the origin and never see the interaction.
    for (int k = 2; k <= k_max; k += 2) {
        if (inside(eigenvalue(k))) {
            out.push_back({eigenvalue(k), Sector::odd});
        }
    }

    if (alpha == 0.0) {
        for (int k = 1; k <= k_max; k += 2) {
            if (inside(eigenvalue(k))) {
                out.push_back({eigenvalue(k), Sector::even});
            }
        }
    } else {
        // G_0^{-E}(0,0) increases strictly between consecutive odd poles, so each
        // bracket holds at most one root of 1 + alpha G.
        const double inf = std::numeric_limits<double>::infinity();
        double left = -inf;
        for (int k = 1; k <= k_max; k += 2) {
            const double right = eigenvalue(k);
            double a = left == -inf ? window.lo : std::max(left + kPoleMargin, window.lo);
            double b = std::min(right - kPoleMargin, window.hi);
            left = right;
            if (!(a < b)) {
                continue;
            }
            double fa = even_sector_condition(alpha, a);
            const double fb = even_sector_condition(alpha, b);
            if (fa == 0.0) {
                if (inside(a)) {
                    out.push_back({a, Sector::even});
                }
                continue;
            }
            if (fb == 0.0 || (fa < 0.0) == (fb < 0.0)) {
                if (fb == 0.0 && inside(b)) {
                    out.push_back({b, Sector::even});
                }
                continue;
            }
            for (int it = 0; it < 400; ++it) {
                const double mid = 0.5 * (a + b);
                if (b - a <= kRootTolerance * std::max(1.0, std::abs(mid)) || mid == a || mid == b) {
                    break;
                }
                const double fm = even_sector_condition(alpha, mid);
                if ((fm < 0.0) == (fa < 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            out.push_back({0.5 * (a + b), Sector::even});
        }
    }

    std::sort(out.begin(), out.end(), [](const Eigenvalue& x, const Eigenvalue& y) {
        return x.energy < y.energy || (x.energy == y.energy && x.sector < y.sector);
    });
    return out;
}

std::vector<double> static_eigenvalues(double alpha, EnergyWindow window, int k_max) {
    std::vector<double> out;
    for (const auto& e : static_spectrum(alpha, window, k_max)) {
        out.push_back(e.energy);
    }
    return out;
}

} // namespace deltabox
