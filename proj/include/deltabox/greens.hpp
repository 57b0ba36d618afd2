#pragma once

#include <vector>

#include "deltabox/spectral.hpp"

namespace deltabox {

/// Resolvent shift lambda in the decomposition psi = phi^lambda + q G_0^lambda(., 0).
/// -lambda must not be a Dirichlet eigenvalue; the default is the real value 1.
class SpectralShift {
public:
    SpectralShift() = default;
    explicit SpectralShift(cplx lambda);

    cplx value() const noexcept { return lambda_; }

private:
    cplx lambda_{1.0, 0.0};
};

/// Dirichlet Green's function of (-d^2/dx^2 + z) on [-pi, pi], closed form.
/// Evaluated with decaying exponentials only, so large |z| does not overflow.
cplx green_closed(double x, double x_prime, cplx z);

/// The same kernel as the eigenfunction series truncated at k_max.
cplx green_series(double x, double x_prime, cplx z, int k_max);

/// G_0^z(0, 0) = tanh(pi sqrt z) / (2 sqrt z) = (1/pi) sum_{k odd} 1/(lambda_k + z).
cplx green_origin(cplx z);

/// Coefficients of G_0^lambda(., 0): (1/sqrt(pi))/(lambda_k + lambda) on odd k.
SpectralCoefficients green_coefficients(const SpectralShift& shift, int k_max);

/// Real energy interval (lo, hi).
struct EnergyWindow {
    double lo;
    double hi;
};

/// Default windows: bound states and the excited range covered by k_max.
EnergyWindow bound_state_window();
EnergyWindow excited_window(int k_max);

enum class Sector { even, odd };

struct Eigenvalue {
    double energy;
    Sector sector;
};

/// Spectrum of -d^2/dx^2 + alpha delta inside the window: the even-sector
/// roots of 1 + alpha G_0^{-E}(0,0) merged with the unperturbed odd-sector
/// levels lambda_k (k even), sorted by energy. Modes above k_max are ignored.
std::vector<Eigenvalue> static_spectrum(double alpha, EnergyWindow window, int k_max);

/// Energies of static_spectrum only.
std::vector<double> static_eigenvalues(double alpha, EnergyWindow window, int k_max);

/// 1 + alpha G_0^{-E}(0,0) as a real function of E (E off the odd poles).
double even_sector_condition(double alpha, double energy);

} // namespace deltabox
