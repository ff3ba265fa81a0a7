#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "meanloop/critical_point.hpp"
#include "meanloop/flow.hpp"
#include "meanloop/systems.hpp"

namespace meanloop {

struct SolveConfig {
    int grid_n = 256;
    int substeps = 4;              // RK4 substeps per grid interval
    double newton_tol = 1e-10;     // residual of the closure + self-consistency system
    double mean_tol = 1e-10;       // stop threshold on the mean update per step
    double damping = 0.5;          // Newton step fraction theta in (0, 1]
    int max_outer = 200;
    double accept_tol = 1e-8;      // final independent residual gate
    Eigen::VectorXd mu0;           // initial mean, must lie in W
    Eigen::VectorXd x0;            // initial loop point u(0)
    /// Directions at u(0) the Newton step must not slide along (continuous
    /// symmetries); the time-shift direction is always anchored.
    std::function<std::vector<Eigen::VectorXd>(const Eigen::VectorXd&)> symmetry_anchors;
};

/// Convergence diagnostics filled by self_consistent_solve when requested.
struct SolveTrace {
    std::vector<double> system_residuals;      // inf norm of the Newton system
    std::vector<Eigen::VectorXd> mean_history;
    int iterations = 0;
};

/// Shooting for a 1-periodic orbit of an autonomous field: Newton on
/// phi^1(x) - x with the monodromy Jacobian and a minimum-norm least-squares
/// step; the phase condition <x - guess, u'(0)> = 0 pins the time shift.
Loop periodic_orbit(const VectorField& field, const FieldJacobian& jacobian,
                    const Eigen::VectorXd& guess, const TimeGrid& grid,
                    const SolveConfig& config = {});

/// Finds a critical point of the pair's action: damped Newton on the joint
/// system (phi^1_{X_{df(mu) . H}}(x0) - x0, mean(orbit) - mu) in the unknowns
/// (x0, mu), with symmetry directions anchored. The returned point is
/// re-validated independently of the solve path (residual <= accept_tol).
/// Throws DomainError if an iterate's mean leaves W, SolverFailure otherwise.
CriticalPoint self_consistent_solve(const PairSpec& pair, const SolveConfig& config,
                                    SolveTrace* trace = nullptr);

/// Winding-k branch of the planar system with H = (|z|^2, |w|^2): seeds the
/// circular ansatz of radius (16 pi^2 k^2)^{-1/6}, polishes with the general
/// solver, and checks the closed second-order equation in z as an independent
/// residual (both residuals <= accept_tol).
CriticalPoint bov_solve(int k, const SolveConfig& config, SolveTrace* trace = nullptr);

/// Seeded SolveConfig for a registered system's winding-k branch.
SolveConfig default_config_for(const SystemSpec& sys, int k);

}  // namespace meanloop
