#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

#include "meanloop/loop.hpp"

namespace meanloop {

/// Trigonometric differentiation and interpolation of periodic samples.
///
/// Loops in all experiments are smooth, so derivatives taken this way keep
/// residual thresholds tight. The Nyquist mode (even N) is differentiated to
/// zero, the standard real-data convention.
namespace fourier {

using ComplexVector = Eigen::VectorXcd;

/// Forward DFT, c_j = sum_k f_k exp(-2 pi i j k / N) / N.
ComplexVector dft(const ComplexVector& f);

/// Inverse of `dft`.
ComplexVector idft(const ComplexVector& c);

/// Derivative of the trigonometric interpolant, sampled on the same grid.
/// Rows are treated as independent periodic scalar signals.
Eigen::MatrixXd derivative(const Eigen::MatrixXd& samples);

/// Second derivative of the interpolant.
Eigen::MatrixXd second_derivative(const Eigen::MatrixXd& samples);

/// Evaluate the interpolant at arbitrary parameters (taken mod 1).
Eigen::MatrixXd resample(const Eigen::MatrixXd& samples, const Eigen::VectorXd& at);

/// Time derivative of a loop as a field along it.
FieldAlongLoop loop_derivative(const Loop& u);

/// Random real band-limited periodic curves, rows x grid.size() samples.
/// Modes up to `max_mode`, coefficient scale decaying with frequency.
Eigen::MatrixXd random_band_limited(int rows, const TimeGrid& grid, int max_mode,
                                    std::uint64_t seed);

}  // namespace fourier
}  // namespace meanloop
