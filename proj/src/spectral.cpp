#include "deltabox/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "deltabox/errors.hpp"

namespace deltabox {

namespace {

void check_in_box(double x) {
    if (!(std::abs(x) <= kPi)) {
        throw DomainError("x = " + std::to_string(x) + " lies outside [-pi, pi]");
    }
}

// Mode value without the range check; x assumed in the box.
double mode_value_unchecked(int k, double x) {
    const double arg = 0.5 * k * x;
    return (k % 2 == 1 ? std::cos(arg) : std::sin(arg)) / kSqrtPi;
}

} // namespace

ModeIndex::ModeIndex(int k) : k_(k) {
    if (k < 1) {
        throw InputError("mode index must be >= 1, got " + std::to_string(k));
    }
}

double eigenmode_value(ModeIndex k, double x) {
    check_in_box(x);
    // Exact zero at the walls; cos(k pi / 2) rounds to ~1e-16 otherwise.
    if (std::abs(x) == kPi) {
        return 0.0;
    }
    return mode_value_unchecked(k.value(), x);
}

SpectralCoefficients::SpectralCoefficients(int k_max) {
    if (k_max < 1) {
        throw InputError("k_max must be >= 1");
    }
    a_ = Eigen::VectorXcd::Zero(k_max);
}

SpectralCoefficients::SpectralCoefficients(Eigen::VectorXcd a) : a_(std::move(a)) {
    if (a_.size() < 1) {
        throw InputError("coefficient vector must be nonempty");
    }
    if (!a_.allFinite()) {
        throw InputError("coefficient vector has non-finite entries");
    }
}

SpectralCoefficients SpectralCoefficients::unit(int k, int k_max) {
    ModeIndex idx(k);
    if (k > k_max) {
        throw InputError("mode " + std::to_string(k) + " exceeds k_max " + std::to_string(k_max));
    }
    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(k_max);
    a[idx.value() - 1] = 1.0;
    return SpectralCoefficients(std::move(a));
}

bool SpectralCoefficients::in_even_sector() const {
    for (int k = 2; k <= k_max(); k += 2) {
        if (a_[k - 1] != cplx(0.0)) {
            return false;
        }
    }
    return true;
}

SpectralCoefficients SpectralCoefficients::resized(int k_max) const {
    if (k_max < 1) {
        throw InputError("k_max must be >= 1");
    }
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(k_max);
    const int common = std::min<int>(k_max, a_.size());
    out.head(common) = a_.head(common);
    for (int i = common; i < a_.size(); ++i) {
        if (a_[i] != cplx(0.0)) {
            throw InputError("cannot truncate state to k_max = " + std::to_string(k_max) +
                             ": mode " + std::to_string(i + 1) + " is populated");
        }
    }
    return SpectralCoefficients(std::move(out));
}

SpectralCoefficients operator+(const SpectralCoefficients& a, const SpectralCoefficients& b) {
    if (a.k_max() != b.k_max()) {
        throw InputError("k_max mismatch in state addition");
    }
    return SpectralCoefficients(Eigen::VectorXcd(a.a_ + b.a_));
}

SpectralCoefficients operator-(const SpectralCoefficients& a, const SpectralCoefficients& b) {
    if (a.k_max() != b.k_max()) {
        throw InputError("k_max mismatch in state subtraction");
    }
    return SpectralCoefficients(Eigen::VectorXcd(a.a_ - b.a_));
}

SpectralCoefficients operator*(cplx s, const SpectralCoefficients& a) {
    return SpectralCoefficients(Eigen::VectorXcd(s * a.a_));
}

TimeGrid::TimeGrid(double t_end, int n_steps) : t_end_(t_end), n_steps_(n_steps) {
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
        throw InputError("time horizon must be finite and nonnegative");
    }
    if (n_steps < 1) {
        throw InputError("time grid needs at least one step");
    }
}

TimeGrid TimeGrid::with_step(double t_end, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw InputError("time step must be positive and finite");
    }
    const auto n = static_cast<int>(std::llround(t_end / dt));
    return TimeGrid(t_end, std::max(n, 1));
}

int TimeGrid::node_of(double t) const noexcept {
    if (t_end_ == 0.0) {
        return t == 0.0 ? 0 : -1;
    }
    const double pos = t / dt();
    const long n = std::lround(pos);
    if (n < 0 || n > n_steps_ || std::abs(pos - static_cast<double>(n)) > 1e-9) {
        return -1;
    }
    return static_cast<int>(n);
}

cplx origin_trace(const SpectralCoefficients& c) {
    cplx sum = 0.0;
    const auto& a = c.values();
    for (int k = 1; k <= c.k_max(); k += 2) {
        sum += a[k - 1];
    }
    return sum / kSqrtPi;
}

SpectralCoefficients free_evolve(const SpectralCoefficients& c, double t) {
    Eigen::VectorXcd out(c.k_max());
    const auto& a = c.values();
    for (int k = 1; k <= c.k_max(); ++k) {
        out[k - 1] = a[k - 1] * std::polar(1.0, -eigenvalue(k) * t);
    }
    return SpectralCoefficients(std::move(out));
}

std::vector<cplx> evaluate_state(const SpectralCoefficients& c, std::span<const double> xs) {
    std::vector<cplx> out;
    out.reserve(xs.size());
    const auto& a = c.values();
    for (double x : xs) {
        check_in_box(x);
        if (std::abs(x) == kPi) {
            out.emplace_back(0.0);
            continue;
        }
        cplx sum = 0.0;
        for (int k = 1; k <= c.k_max(); ++k) {
            sum += a[k - 1] * mode_value_unchecked(k, x);
        }
        out.push_back(sum);
    }
    return out;
}

SpectralCoefficients project_function(const std::function<cplx(double)>& f, int k_max,
                                      int resolution) {
    if (k_max < 1) {
        throw InputError("k_max must be >= 1");
    }
    if (resolution < 2 * k_max) {
        throw InputError("quadrature resolution " + std::to_string(resolution) +
                         " aliases modes up to k_max = " + std::to_string(k_max) +
                         " (need >= 2 k_max)");
    }
    const double h = 2.0 * kPi / resolution;
    std::vector<cplx> samples(resolution + 1);
    for (int j = 0; j <= resolution; ++j) {
        const double x = j == resolution ? kPi : -kPi + j * h;
        samples[j] = f(x) * (j == 0 || j == resolution ? 0.5 : 1.0);
    }
    Eigen::VectorXcd a(k_max);
    for (int k = 1; k <= k_max; ++k) {
        cplx sum = 0.0;
        // Walls contribute psi_k(+-pi) = 0.
        for (int j = 1; j < resolution; ++j) {
            sum += samples[j] * mode_value_unchecked(k, -kPi + j * h);
        }
        a[k - 1] = sum * h;
    }
    return SpectralCoefficients(std::move(a));
}

} // namespace deltabox
