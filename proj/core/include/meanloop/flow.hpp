#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "meanloop/loop.hpp"
#include "meanloop/phase_space.hpp"

namespace meanloop {

/// Time-dependent vector field on R^{2n}.
using VectorField = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& x)>;

/// Time-dependent Jacobian of a vector field, evaluated along a state.
using FieldJacobian = std::function<Eigen::MatrixXd(double t, const Eigen::VectorXd& x)>;

/// Trajectory samples of a fixed-step RK4 integration of `field` from x0 over
/// [t0, t1]; column k holds the state after k steps (steps+1 columns).
/// Throws IntegrationBlowupError if the state leaves the finite range.
Eigen::MatrixXd integrate_flow(const VectorField& field, const Eigen::VectorXd& x0, double t0,
                               double t1, int steps);

/// State and linearization transported together along a flow.
struct VariationalSolution {
    Eigen::MatrixXd trajectory;          ///< states at the requested sample times
    std::vector<Eigen::MatrixXd> frames; ///< Psi(t_k): solution of Psi' = DX(u) Psi, Psi(0)=I
};

/// Integrates x' = X(t,x) together with the variational equation
/// Psi' = DX(t, x(t)) Psi, recording both at `samples`+1 equally spaced times
/// over [0, T] with `substeps` RK4 steps between consecutive samples.
VariationalSolution flow_with_variational(const VectorField& field, const FieldJacobian& jacobian,
                                          const Eigen::VectorXd& x0, double T, int samples,
                                          int substeps);

/// Fundamental solution samples of the matrix ODE Psi' = A(t) Psi, Psi(0) = I,
/// at `samples`+1 equally spaced times over [0, T].
std::vector<Eigen::MatrixXd> linearized_flow(
    const std::function<Eigen::MatrixXd(double)>& A, double T, int samples, int substeps);

/// Integrates an autonomous field for one period and returns the loop sampled
/// on `grid` (the state at t=1 is not stored; closure is the caller's concern).
Loop sample_orbit(const VectorField& field, const Eigen::VectorXd& x0, const TimeGrid& grid,
                  int substeps_per_node = 4);

/// RK4 substeps per grid interval so the per-period error of a field with
/// Jacobian norm `stiffness` stays near `err_target` (order-4 heuristic).
int auto_substeps(double stiffness, int grid_n, int min_substeps = 4,
                  double err_target = 1e-11);

}  // namespace meanloop
