#pragma once

#include <Eigen/Dense>

#include "meanloop/loop.hpp"

namespace meanloop {

/// A loop in the plane R^2 ~ C; column k holds z(t_k).
struct PlanarLoop {
    TimeGrid grid;
    Eigen::MatrixXd samples;  // 2 x N

    int size() const { return static_cast<int>(samples.cols()); }
    double min_radius() const { return samples.colwise().norm().minCoeff(); }
};

/// Residual of the closed second-order equation in z:
///   z'' - ( int |z'|^2 / int |z|^2  -  1 / (2 (int |z|^2)^3) ) z,
/// spectral derivatives, periodic quadrature.
FieldAlongLoop bov_residual(const PlanarLoop& z);

/// The monotone reparametrization driven by |z|^2:
///   t_z(tau) = int_0^tau |z|^2 / int_0^1 |z|^2,
/// together with its inverse. Node values come from the spectral
/// antiderivative of |z|^2; between nodes a monotone cubic Hermite segment
/// (exact slopes) is inverted by safeguarded Newton with bisection fallback.
class TimeTransform {
public:
    /// Throws DomainError when z approaches the origin (collision guard).
    explicit TimeTransform(const PlanarLoop& z, double collision_tol = 1e-9);

    double forward(double tau) const;   // t_z, maps [0,1] -> [0,1]
    double inverse(double t) const;     // tau_z

    /// t_z at the grid nodes plus the right endpoint (N+1 values, first 0, last 1).
    const Eigen::VectorXd& forward_samples() const { return forward_; }
    /// tau_z at the grid nodes plus the right endpoint.
    const Eigen::VectorXd& inverse_samples() const { return inverse_; }

private:
    TimeGrid grid_;
    Eigen::VectorXd forward_;   // monotone node values
    Eigen::VectorXd slopes_;    // |z|^2 / total at nodes (exact derivative values)
    Eigen::VectorXd inverse_;
};

TimeTransform time_transform(const PlanarLoop& z);

/// The squared loop in the transformed time: x(t) = z(tau_z(t))^2 (complex
/// square), resampled onto the same grid.
PlanarLoop levi_civita_orbit(const PlanarLoop& z);

/// max_t | x''(t) + mu x(t) / |x(t)|^3 | with spectral second derivatives.
double kepler_residual(const PlanarLoop& x, double mu);

/// Samples of the two-body energy (1/2)|x'|^2 - mu/|x| along the loop.
Eigen::VectorXd kepler_energy(const PlanarLoop& x, double mu);

}  // namespace meanloop
