#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "deltabox/spectral.hpp"

namespace deltabox {

enum class ProfileKind { constant, sine_bump, piecewise_linear };

/// Real coupling alpha(t) on [0, T].
class CouplingProfile {
public:
    /// alpha == 0.
    CouplingProfile();

    static CouplingProfile constant(double amplitude);
    /// A sin(pi t / T) on [0, T], zero outside.
    static CouplingProfile sine_bump(double amplitude, double t_end);
    /// Linear interpolation of (times, values); times strictly increasing,
    /// value held constant outside the sampled range.
    static CouplingProfile piecewise_linear(std::vector<double> times, std::vector<double> values);
    /// Node samples on a grid, interpolated linearly.
    static CouplingProfile sampled(const TimeGrid& grid, const Eigen::VectorXd& values);

    ProfileKind kind() const noexcept { return kind_; }
    double amplitude() const noexcept { return amplitude_; }

    double value(double t) const;
    /// Right derivative; on the last sample the left one.
    double derivative(double t) const;

    /// alpha(0) = alpha(T) = 0 exactly, with T the profile's horizon
    /// (the last sample for piecewise_linear).
    bool h10() const;
    bool is_zero() const;

    /// Short text form, e.g. "bump:0.5:T=2".
    std::string descriptor() const;

private:
    ProfileKind kind_ = ProfileKind::constant;
    double amplitude_ = 0.0;
    double t_end_ = 0.0;
    std::vector<double> times_;
    std::vector<double> values_;
};

/// alpha(t_n) at every node.
Eigen::VectorXd sample(const CouplingProfile& alpha, const TimeGrid& grid);

/// sum_i w_i alpha_i sampled on the grid.
CouplingProfile combine(const TimeGrid& grid, const std::vector<double>& weights,
                        const std::vector<CouplingProfile>& profiles);

} // namespace deltabox
