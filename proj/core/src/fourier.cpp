#include "meanloop/fourier.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace meanloop::fourier {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Signed frequency of DFT bin j on an N-point grid; Nyquist handled by caller.
int bin_frequency(int j, int N) { return (j <= N / 2) ? j : j - N; }
}  // namespace

namespace {

// Compensated (Kahan) accumulation keeps the O(N^2) transform's roundoff
// near eps log N instead of eps N, which matters once spectral second
// derivatives amplify coefficient noise by (pi N)^2.
struct KahanSum {
    double sum = 0.0, carry = 0.0;
    void add(double v) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

}  // namespace

ComplexVector dft(const ComplexVector& f) {
    const int N = static_cast<int>(f.size());
    ComplexVector c = ComplexVector::Zero(N);
    for (int j = 0; j < N; ++j) {
        KahanSum re, im;
        for (int k = 0; k < N; ++k) {
            // reduce j*k mod N first so the phase argument stays small
            const double phase = -kTwoPi * static_cast<double>((static_cast<long long>(j) * k) % N) / N;
            const double cs = std::cos(phase), sn = std::sin(phase);
            re.add(f(k).real() * cs - f(k).imag() * sn);
            im.add(f(k).real() * sn + f(k).imag() * cs);
        }
        c(j) = std::complex<double>(re.sum / N, im.sum / N);
    }
    return c;
}

ComplexVector idft(const ComplexVector& c) {
    const int N = static_cast<int>(c.size());
    ComplexVector f = ComplexVector::Zero(N);
    for (int k = 0; k < N; ++k) {
        KahanSum re, im;
        for (int j = 0; j < N; ++j) {
            const double phase = kTwoPi * static_cast<double>((static_cast<long long>(j) * k) % N) / N;
            const double cs = std::cos(phase), sn = std::sin(phase);
            re.add(c(j).real() * cs - c(j).imag() * sn);
            im.add(c(j).real() * sn + c(j).imag() * cs);
        }
        f(k) = std::complex<double>(re.sum, im.sum);
    }
    return f;
}

Eigen::MatrixXd derivative(const Eigen::MatrixXd& samples) {
    const int rows = static_cast<int>(samples.rows());
    const int N = static_cast<int>(samples.cols());
    Eigen::MatrixXd out(rows, N);
    for (int r = 0; r < rows; ++r) {
        ComplexVector c = dft(samples.row(r).transpose().cast<std::complex<double>>());
        for (int j = 0; j < N; ++j) {
            if (N % 2 == 0 && j == N / 2) {
                c(j) = 0.0;  // Nyquist convention for real data
            } else {
                c(j) *= std::complex<double>(0.0, kTwoPi * bin_frequency(j, N));
            }
        }
        out.row(r) = idft(c).real().transpose();
    }
    return out;
}

Eigen::MatrixXd second_derivative(const Eigen::MatrixXd& samples) {
    const int rows = static_cast<int>(samples.rows());
    const int N = static_cast<int>(samples.cols());
    Eigen::MatrixXd out(rows, N);
    for (int r = 0; r < rows; ++r) {
        ComplexVector c = dft(samples.row(r).transpose().cast<std::complex<double>>());
        for (int j = 0; j < N; ++j) {
            const int freq = (N % 2 == 0 && j == N / 2) ? N / 2 : bin_frequency(j, N);
            c(j) *= -kTwoPi * kTwoPi * freq * freq;
        }
        out.row(r) = idft(c).real().transpose();
    }
    return out;
}

Eigen::MatrixXd resample(const Eigen::MatrixXd& samples, const Eigen::VectorXd& at) {
    const int rows = static_cast<int>(samples.rows());
    const int N = static_cast<int>(samples.cols());
    const int M = static_cast<int>(at.size());
    Eigen::MatrixXd out(rows, M);
    for (int r = 0; r < rows; ++r) {
        ComplexVector c = dft(samples.row(r).transpose().cast<std::complex<double>>());
        for (int q = 0; q < M; ++q) {
            const double t = at(q) - std::floor(at(q));
            std::complex<double> acc(0.0, 0.0);
            for (int j = 0; j < N; ++j) {
                if (N % 2 == 0 && j == N / 2) {
                    // Real interpolant of the Nyquist bin: cos(pi N t).
                    acc += c(j) * std::cos(std::numbers::pi * N * t);
                    continue;
                }
                const double phase = kTwoPi * bin_frequency(j, N) * t;
                acc += c(j) * std::complex<double>(std::cos(phase), std::sin(phase));
            }
            out(r, q) = acc.real();
        }
    }
    return out;
}

FieldAlongLoop loop_derivative(const Loop& u) {
    return FieldAlongLoop(u.grid, derivative(u.samples));
}

Eigen::MatrixXd random_band_limited(int rows, const TimeGrid& grid, int max_mode,
                                    std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    const int N = grid.size();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, N);
    for (int r = 0; r < rows; ++r) {
        const double a0 = gauss(rng);
        for (int k = 0; k < N; ++k) out(r, k) = a0;
        for (int mode = 1; mode <= max_mode; ++mode) {
            const double a = gauss(rng) / mode;
            const double b = gauss(rng) / mode;
            for (int k = 0; k < N; ++k) {
                const double phase = kTwoPi * mode * grid.node(k);
                out(r, k) += a * std::cos(phase) + b * std::sin(phase);
            }
        }
    }
    return out;
}

}  // namespace meanloop::fourier
