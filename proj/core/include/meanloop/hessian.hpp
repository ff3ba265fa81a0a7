#pragma once

#include <Eigen/Dense>

#include "meanloop/critical_point.hpp"
#include "meanloop/twisted_operator.hpp"

namespace meanloop {

/// Kernel dimensions of the action Hessian measured along two independent
/// routes, with the applicable bounds.
struct NullityReport {
    int nullity_direct = 0;
    int nullity_reduced = 0;
    int bound_A = 0;                    // dim M + dim V, always applicable
    int bound_B = -1;                   // dim M, present iff the pair commutes
    bool commuting = false;
    Eigen::VectorXd spectrum_direct;    // singular values, descending (base grid)
    Eigen::VectorXd spectrum_reduced;
    bool routes_agree = false;
    bool bounds_hold = false;
};

/// Dense linearization of the critical-point equation on periodic fields:
///   eta'(t) - DX_{c.H}(u(t)) eta(t) - sum_ij a_ij delta_i(eta) J grad H_j(u(t)),
/// delta_i(eta) = int <grad H_i(u), eta>, c = df(mean), a = d2f(mean);
/// eta' by the spectral differentiation matrix. Kernel = kernel of the
/// Hessian of the action at the critical point.
/// Pass N = 0 to use the loop's own grid. Throws PreconditionError when the
/// stored residual exceeds `residual_gate`.
Eigen::MatrixXd direct_hessian(const CriticalPoint& cp, int N = 0,
                               double residual_gate = 1e-6);

/// Untwists the linearization by the flow: Psi(t) from the variational
/// equation along the orbit, twist Phi = Psi(1)^{-1} (symplectic inverse),
/// curves Y_i(t) = J Psi(t)^{-1} X_{H_i}(u(t)) = -Psi(t)^T grad H_i(u(t)),
/// and A = d2f(mean). The kernel of the resulting twisted-loop operator is in
/// bijection with the kernel of direct_hessian via xi = Psi^{-1} eta.
OperatorSpec reduce_to_operator(const CriticalPoint& cp, int N = 0,
                                double residual_gate = 1e-6);

/// Runs the grid-doubling kernel count on both routes and fills the bounds.
NullityReport nullity_report(const CriticalPoint& cp, NullityOptions opts = {});

/// Spectral differentiation matrix for period-1 data on N nodes.
Eigen::MatrixXd spectral_derivative_matrix(int N);

}  // namespace meanloop
