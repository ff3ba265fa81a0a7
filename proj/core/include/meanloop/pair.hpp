#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "meanloop/loop.hpp"
#include "meanloop/phase_space.hpp"

namespace meanloop {

/// A mean-coupled Hamiltonian pair: a vector-valued Hamiltonian H: R^{2n} -> R^m
/// together with a coupling function f defined on an open set W of R^m.
///
/// The associated action of a loop u is
///     A(u) = (1/2) int omega(u, u') dt  -  f( int H(u(t)) dt ),
/// whose critical points solve the nonlocal equation
///     u'(t) = X_{ df(mean) . H }(u(t)).
///
/// Callers supply gradients and Hessians analytically; finite differences are
/// used only by the self-check.
struct PairSpec {
    PhaseSpace phase = PhaseSpace(1);
    int m = 0;

    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> H_eval;       // R^{2n} -> R^m
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> H_grad;       // m x 2n, rows grad H_i
    std::function<std::vector<Eigen::MatrixXd>(const Eigen::VectorXd&)> H_hess;  // m of 2n x 2n
    std::function<double(const Eigen::VectorXd&)> f_eval;                // W -> R
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> f_grad;       // df, R^m
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> f_hess;       // d2f, symmetric m x m
    std::function<bool(const Eigen::VectorXd&)> in_W;

    /// Set by product_pair; lets the stronger commuting kernel bound apply
    /// without sampling.
    bool commuting_by_construction = false;

    /// Region for random sample points (commuting test, self-check):
    /// points are drawn as sample_center + sample_scale * gaussian.
    double sample_scale = 1.0;
    Eigen::VectorXd sample_center;  // defaults to the origin when empty

    /// G_c = sum_i c_i H_i evaluated pieces.
    Eigen::VectorXd grad_cH(const Eigen::VectorXd& x, const Eigen::VectorXd& c) const {
        return H_grad(x).transpose() * c;
    }
    Eigen::MatrixXd hess_cH(const Eigen::VectorXd& x, const Eigen::VectorXd& c) const {
        auto hh = H_hess(x);
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(phase.dim(), phase.dim());
        for (int i = 0; i < m; ++i) out += c(i) * hh[i];
        return out;
    }
    /// Hamiltonian vector field of c . H.
    Eigen::VectorXd field_cH(const Eigen::VectorXd& x, const Eigen::VectorXd& c) const {
        return phase.applyJ(grad_cH(x, c));
    }
    /// Its Jacobian, J Hess(c . H).
    Eigen::MatrixXd field_jacobian_cH(const Eigen::VectorXd& x, const Eigen::VectorXd& c) const {
        return phase.J() * hess_cH(x, c);
    }
};

/// The loop-mean of H with a domain flag.
struct MeanValue {
    Eigen::VectorXd value;
    bool in_domain = false;
};

/// Componentwise quadrature of H along the loop; flags membership in W.
/// Pointwise values H(u(t)) are allowed to leave W, only the mean is tested.
MeanValue mean_value(const PairSpec& pair, const Loop& u);

/// Action of the loop; the area term is (1/2) int omega(u, u') dt with a
/// spectral derivative (any primitive of omega gives the same value on R^{2n}).
/// Throws DomainError if the mean leaves W.
double action(const PairSpec& pair, const Loop& u);

/// Residual r(t) = u'(t) - X_{df(mean) . H}(u(t)) of the critical-point
/// equation, with spectral differentiation of u.
FieldAlongLoop critical_residual(const PairSpec& pair, const Loop& u);

/// Bundle for the coupling function on the product of scalar factors.
struct CouplingFunction {
    std::function<double(const Eigen::VectorXd&)> f;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> df;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> d2f;
    std::function<bool(const Eigen::VectorXd&)> in_W;
};

/// Pair on the product phase space with H = (H_1(x_1), ..., H_m(x_m)).
/// Each factor must have a scalar Hamiltonian (m_j = 1); the result commutes
/// by construction. Factor j's coordinates land in global q/p blocks so the
/// (q_1..q_n, p_1..p_n) ordering is preserved.
PairSpec product_pair(const std::vector<PairSpec>& factors, CouplingFunction f);

struct CommutingReport {
    bool commuting = false;
    double max_bracket = 0.0;
};

/// Samples omega(X_{H_i}, X_{H_j}) at random points for all i < j; commuting
/// iff the largest magnitude stays below `tol`. Component pairs suffice by
/// bilinearity. Pairs flagged commuting-by-construction short-circuit to true.
CommutingReport is_commuting(const PairSpec& pair, int sample_count = 200,
                             std::uint64_t seed = 0x5eedf00d, double tol = 1e-8);

/// Central finite-difference consistency of H_grad vs H_eval at random points.
/// Returns the largest entrywise deviation (self-check utility).
double pair_gradient_self_check(const PairSpec& pair, int sample_count = 20,
                                std::uint64_t seed = 7);

}  // namespace meanloop
