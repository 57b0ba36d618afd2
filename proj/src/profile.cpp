#include "deltabox/profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "deltabox/errors.hpp"

namespace deltabox {

namespace {

void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw InputError(std::string(what) + " must be finite");
    }
}

} // namespace

CouplingProfile::CouplingProfile() = default;

CouplingProfile CouplingProfile::constant(double amplitude) {
    check_finite(amplitude, "amplitude");
    CouplingProfile p;
    p.kind_ = ProfileKind::constant;
    p.amplitude_ = amplitude;
    return p;
}

CouplingProfile CouplingProfile::sine_bump(double amplitude, double t_end) {
    check_finite(amplitude, "amplitude");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) {
        throw InputError("bump horizon must be positive");
    }
    CouplingProfile p;
    p.kind_ = ProfileKind::sine_bump;
    p.amplitude_ = amplitude;
    p.t_end_ = t_end;
    return p;
}

CouplingProfile CouplingProfile::piecewise_linear(std::vector<double> times, std::vector<double> values) {
    if (times.size() != values.size() || times.size() < 2) {
        throw InputError("piecewise-linear profile needs >= 2 matching samples");
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        check_finite(times[i], "sample time");
        check_finite(values[i], "sample value");
        if (i > 0 && !(times[i] > times[i - 1])) {
            throw InputError("sample times must increase strictly");
        }
    }
    CouplingProfile p;
    p.kind_ = ProfileKind::piecewise_linear;
    p.t_end_ = times.back();
    p.amplitude_ = 0.0;
    for (double v : values) {
        p.amplitude_ = std::max(p.amplitude_, std::abs(v));
    }
    p.times_ = std::move(times);
    p.values_ = std::move(values);
    return p;
}

CouplingProfile CouplingProfile::sampled(const TimeGrid& grid, const Eigen::VectorXd& values) {
    if (values.size() != grid.size()) {
        throw InputError("sample count does not match the grid");
    }
    std::vector<double> t(grid.size());
    for (int n = 0; n < grid.size(); ++n) {
        t[n] = grid.t(n);
    }
    return piecewise_linear(std::move(t), std::vector<double>(values.data(), values.data() + values.size()));
}

double CouplingProfile::value(double t) const {
    switch (kind_) {
    case ProfileKind::constant:
        return amplitude_;
    case ProfileKind::sine_bump:
        if (t <= 0.0 || t >= t_end_) {
            return 0.0;
        }
        return amplitude_ * std::sin(kPi * t / t_end_);
    case ProfileKind::piecewise_linear: {
        if (t <= times_.front()) {
            return values_.front();
        }
        if (t >= times_.back()) {
            return values_.back();
        }
        const auto it = std::upper_bound(times_.begin(), times_.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - times_.begin());
        const double s = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
        return values_[i - 1] + s * (values_[i] - values_[i - 1]);
    }
    }
    return 0.0;
}

double CouplingProfile::derivative(double t) const {
    switch (kind_) {
    case ProfileKind::constant:
        return 0.0;
    case ProfileKind::sine_bump:
        if (t < 0.0 || t > t_end_) {
            return 0.0;
        }
        return amplitude_ * (kPi / t_end_) * std::cos(kPi * t / t_end_);
    case ProfileKind::piecewise_linear: {
        if (t < times_.front() || t > times_.back()) {
            return 0.0;
        }
        auto it = std::upper_bound(times_.begin(), times_.end(), t);
        std::size_t i = static_cast<std::size_t>(it - times_.begin());
        i = std::clamp<std::size_t>(i, 1, times_.size() - 1);
        return (values_[i] - values_[i - 1]) / (times_[i] - times_[i - 1]);
    }
    }
    return 0.0;
}

bool CouplingProfile::h10() const {
    switch (kind_) {
    case ProfileKind::constant:
        return amplitude_ == 0.0;
    case ProfileKind::sine_bump:
        return true;
    case ProfileKind::piecewise_linear:
        return values_.front() == 0.0 && values_.back() == 0.0;
    }
    return false;
}

bool CouplingProfile::is_zero() const {
    if (kind_ == ProfileKind::piecewise_linear) {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
    }
    return amplitude_ == 0.0;
}

std::string CouplingProfile::descriptor() const {
    char buf[96];
    switch (kind_) {
    case ProfileKind::constant:
        if (amplitude_ == 0.0) {
            return "zero";
        }
        std::snprintf(buf, sizeof buf, "const:%.17g", amplitude_);
        return buf;
    case ProfileKind::sine_bump:
        std::snprintf(buf, sizeof buf, "bump:%.17g:T=%.17g", amplitude_, t_end_);
        return buf;
    case ProfileKind::piecewise_linear:
        std::snprintf(buf, sizeof buf, "pwl:%zu samples:max=%.6g", values_.size(), amplitude_);
        return buf;
    }
    return "unknown";
}

Eigen::VectorXd sample(const CouplingProfile& alpha, const TimeGrid& grid) {
    Eigen::VectorXd out(grid.size());
    for (int n = 0; n < grid.size(); ++n) {
        out[n] = alpha.value(grid.t(n));
    }
    return out;
}

CouplingProfile combine(const TimeGrid& grid, const std::vector<double>& weights,
                        const std::vector<CouplingProfile>& profiles) {
    if (weights.size() != profiles.size()) {
        throw InputError("combine: weight/profile count mismatch");
    }
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(grid.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        sum += weights[i] * sample(profiles[i], grid);
    }
    return CouplingProfile::sampled(grid, sum);
}

} // namespace deltabox
