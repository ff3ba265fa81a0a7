#include "meanloop/kepler.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "meanloop/errors.hpp"
#include "meanloop/fourier.hpp"

namespace meanloop {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void collision_guard(const PlanarLoop& z, double tol, const char* who) {
    if (z.min_radius() <= tol)
        throw DomainError(std::string(who) + ": loop passes through the origin");
}
}  // namespace

FieldAlongLoop bov_residual(const PlanarLoop& z) {
    const int N = z.size();
    const Eigen::MatrixXd dz = fourier::derivative(z.samples);
    const Eigen::MatrixXd ddz = fourier::second_derivative(z.samples);

    const double mean_z2 = z.samples.colwise().squaredNorm().sum() / N;
    const double mean_dz2 = dz.colwise().squaredNorm().sum() / N;
    const double factor = mean_dz2 / mean_z2 - 1.0 / (2.0 * std::pow(mean_z2, 3));

    return FieldAlongLoop(z.grid, ddz - factor * z.samples);
}

TimeTransform::TimeTransform(const PlanarLoop& z, double collision_tol)
    : grid_(z.grid),
      forward_(z.size() + 1),
      slopes_(z.size() + 1),
      inverse_(z.size() + 1) {
    collision_guard(z, collision_tol, "time_transform");
    const int N = z.size();

    // Spectral antiderivative of the periodic integrand |z|^2: linear-in-mean
    // part plus the periodic part with coefficients divided by 2 pi i k.
    Eigen::VectorXd r2(N);
    for (int k = 0; k < N; ++k) r2(k) = z.samples.col(k).squaredNorm();
    const fourier::ComplexVector c =
        fourier::dft(r2.cast<std::complex<double>>());
    const double mean = c(0).real();

    auto antiderivative = [&](double tau) {
        double acc = mean * tau;
        for (int j = 1; j < N; ++j) {
            if (N % 2 == 0 && j == N / 2) {
                // Nyquist bin contributes c * cos(pi N tau).
                acc += c(j).real() * std::sin(std::numbers::pi * N * tau) /
                       (std::numbers::pi * N);
                continue;
            }
            const int freq = (j <= N / 2) ? j : j - N;
            const std::complex<double> e(std::cos(kTwoPi * freq * tau),
                                         std::sin(kTwoPi * freq * tau));
            acc += (c(j) * (e - 1.0) / std::complex<double>(0.0, kTwoPi * freq)).real();
        }
        return acc;
    };

    for (int k = 0; k <= N; ++k) {
        const double tau = static_cast<double>(k) / N;
        forward_(k) = antiderivative(tau) / mean;
        slopes_(k) = (k < N ? r2(k) : r2(0)) / mean;
    }
    forward_(0) = 0.0;
    forward_(N) = 1.0;
    for (int k = 0; k < N; ++k)
        if (!(forward_(k + 1) > forward_(k)))
            throw DomainError("time_transform: forward map is not strictly increasing");

    for (int k = 0; k <= N; ++k) inverse_(k) = inverse(static_cast<double>(k) / N);
}

namespace {
// Cubic Hermite on [0,1] with values (a, b) and scaled slopes (ma, mb).
double hermite(double s, double a, double b, double ma, double mb) {
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * a + (s3 - 2 * s2 + s) * ma + (-2 * s3 + 3 * s2) * b +
           (s3 - s2) * mb;
}
double hermite_deriv(double s, double a, double b, double ma, double mb) {
    const double s2 = s * s;
    return (6 * s2 - 6 * s) * a + (3 * s2 - 4 * s + 1) * ma + (-6 * s2 + 6 * s) * b +
           (3 * s2 - 2 * s) * mb;
}
}  // namespace

double TimeTransform::forward(double tau) const {
    const int N = grid_.size();
    tau = std::clamp(tau, 0.0, 1.0);
    int k = std::min(static_cast<int>(tau * N), N - 1);
    const double h = 1.0 / N;
    const double s = (tau - k * h) / h;
    return hermite(s, forward_(k), forward_(k + 1), h * slopes_(k), h * slopes_(k + 1));
}

double TimeTransform::inverse(double t) const {
    const int N = grid_.size();
    t = std::clamp(t, 0.0, 1.0);
    // Bracket by binary search over the monotone node values.
    int lo = 0, hi = N;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        (forward_(mid) <= t ? lo : hi) = mid;
    }
    const double h = 1.0 / N;
    const double a = forward_(lo), b = forward_(lo + 1);
    const double ma = h * slopes_(lo), mb = h * slopes_(lo + 1);

    double s = (b > a) ? (t - a) / (b - a) : 0.5;  // secant start
    double s_lo = 0.0, s_hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        const double f = hermite(s, a, b, ma, mb) - t;
        if (f > 0)
            s_hi = s;
        else
            s_lo = s;
        const double df = hermite_deriv(s, a, b, ma, mb);
        double next = (df != 0.0) ? s - f / df : 0.5 * (s_lo + s_hi);
        if (!(next > s_lo && next < s_hi)) next = 0.5 * (s_lo + s_hi);  // bisection fallback
        if (std::abs(next - s) < 1e-15) {
            s = next;
            break;
        }
        s = next;
    }
    return (lo + s) * h;
}

TimeTransform time_transform(const PlanarLoop& z) { return TimeTransform(z); }

PlanarLoop levi_civita_orbit(const PlanarLoop& z) {
    const TimeTransform tt(z);
    const int N = z.size();
    Eigen::VectorXd taus(N);
    for (int k = 0; k < N; ++k) taus(k) = tt.inverse(z.grid.node(k));
    const Eigen::MatrixXd zs = fourier::resample(z.samples, taus);
    Eigen::MatrixXd x(2, N);
    for (int k = 0; k < N; ++k) {
        const std::complex<double> v(zs(0, k), zs(1, k));
        const std::complex<double> v2 = v * v;
        x(0, k) = v2.real();
        x(1, k) = v2.imag();
    }
    return PlanarLoop{z.grid, std::move(x)};
}

double kepler_residual(const PlanarLoop& x, double mu) {
    collision_guard(x, 1e-9, "kepler_residual");
    const Eigen::MatrixXd ddx = fourier::second_derivative(x.samples);
    double worst = 0.0;
    for (int k = 0; k < x.size(); ++k) {
        const double r = x.samples.col(k).norm();
        const Eigen::Vector2d v = ddx.col(k) + mu * x.samples.col(k) / (r * r * r);
        worst = std::max(worst, v.norm());
    }
    return worst;
}

Eigen::VectorXd kepler_energy(const PlanarLoop& x, double mu) {
    collision_guard(x, 1e-9, "kepler_energy");
    const Eigen::MatrixXd dx = fourier::derivative(x.samples);
    Eigen::VectorXd e(x.size());
    for (int k = 0; k < x.size(); ++k)
        e(k) = 0.5 * dx.col(k).squaredNorm() - mu / x.samples.col(k).norm();
    return e;
}

}  // namespace meanloop
