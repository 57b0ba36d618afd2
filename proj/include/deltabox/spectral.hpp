#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace deltabox {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrtPi = 1.77245385090551602730;
/// Sum over odd k of 1/lambda_k = sum 4/k^2 = pi^2/2.
inline constexpr double kOddInverseEigenvalueSum = kPi * kPi / 2.0;
inline constexpr int kDefaultKMax = 401;

/// Index of a Dirichlet eigenmode of [-pi, pi]. Odd k are cosines (even
/// functions, nonzero at the origin), even k are sines.
class ModeIndex {
public:
    explicit ModeIndex(int k);

    int value() const noexcept { return k_; }
    bool is_odd() const noexcept { return k_ % 2 == 1; }
    double eigenvalue() const noexcept { return 0.25 * k_ * k_; }

private:
    int k_;
};

/// lambda_k = k^2 / 4.
inline double eigenvalue(int k) noexcept { return 0.25 * static_cast<double>(k) * k; }

/// psi_k(x) = cos(kx/2)/sqrt(pi) for odd k, sin(kx/2)/sqrt(pi) for even k.
double eigenmode_value(ModeIndex k, double x);

/// Coefficients a_1..a_kmax of a state on the Dirichlet eigenbasis.
class SpectralCoefficients {
public:
    explicit SpectralCoefficients(int k_max);
    explicit SpectralCoefficients(Eigen::VectorXcd a);

    static SpectralCoefficients unit(int k, int k_max);

    int k_max() const noexcept { return static_cast<int>(a_.size()); }

    /// Coefficient of mode k (1-based).
    cplx operator[](int k) const { return a_[k - 1]; }
    const Eigen::VectorXcd& values() const noexcept { return a_; }

    double norm() const { return a_.norm(); }
    double squared_norm() const { return a_.squaredNorm(); }
    bool in_even_sector() const;

    /// Same state padded with zeros (or checked-truncated) to a new cutoff.
    SpectralCoefficients resized(int k_max) const;

    friend SpectralCoefficients operator+(const SpectralCoefficients& a, const SpectralCoefficients& b);
    friend SpectralCoefficients operator-(const SpectralCoefficients& a, const SpectralCoefficients& b);
    friend SpectralCoefficients operator*(cplx s, const SpectralCoefficients& a);
    friend bool operator==(const SpectralCoefficients& a, const SpectralCoefficients& b) {
        return a.a_ == b.a_;
    }

private:
    Eigen::VectorXcd a_;
};

/// Uniform discretization t_n = n * dt of [0, t_end].
class TimeGrid {
public:
    TimeGrid(double t_end, int n_steps);

    /// Grid with n_steps = round(t_end / dt).
    static TimeGrid with_step(double t_end, double dt);

    double t_end() const noexcept { return t_end_; }
    int n_steps() const noexcept { return n_steps_; }
    int size() const noexcept { return n_steps_ + 1; }
    double dt() const noexcept { return t_end_ / n_steps_; }
    double t(int n) const noexcept { return n == n_steps_ ? t_end_ : n * dt(); }

    /// Index of the node equal to t, or -1 if t is not a node.
    int node_of(double t) const noexcept;

private:
    double t_end_;
    int n_steps_;
};

/// psi(0) = (1/sqrt(pi)) * sum of a_k over odd k.
cplx origin_trace(const SpectralCoefficients& c);

/// a_k -> a_k exp(-i lambda_k t).
SpectralCoefficients free_evolve(const SpectralCoefficients& c, double t);

/// Pointwise synthesis sum_k a_k psi_k(x).
std::vector<cplx> evaluate_state(const SpectralCoefficients& c, std::span<const double> xs);

/// (psi_k, f) by the trapezoid rule on `resolution` uniform intervals of [-pi, pi].
SpectralCoefficients project_function(const std::function<cplx(double)>& f, int k_max,
                                      int resolution);

} // namespace deltabox
