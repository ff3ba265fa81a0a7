#pragma once

#include <Eigen/Dense>

#include "meanloop/errors.hpp"

namespace meanloop {

/// Standard symplectic vector space R^{2n}, coordinates ordered (q_1..q_n, p_1..p_n).
///
/// Conventions used throughout the library:
///   J (q, p) = (-p, q),   omega(x, y) = <J x, y>,   X_G = J grad G.
/// These satisfy dG = omega(., X_G) and omega(x, J y) = <x, y>.
class PhaseSpace {
public:
    explicit PhaseSpace(int n) : n_(n) {
        if (n < 1) throw InvalidArgumentError("PhaseSpace: n must be >= 1");
    }

    int n() const { return n_; }
    int dim() const { return 2 * n_; }

    /// The standard complex structure as a dense 2n x 2n matrix (integer entries).
    Eigen::MatrixXd J() const {
        Eigen::MatrixXd j = Eigen::MatrixXd::Zero(dim(), dim());
        for (int i = 0; i < n_; ++i) {
            j(i, n_ + i) = -1.0;
            j(n_ + i, i) = 1.0;
        }
        return j;
    }

    /// J x without forming the matrix.
    Eigen::VectorXd applyJ(const Eigen::VectorXd& x) const {
        check(x);
        Eigen::VectorXd y(dim());
        y.head(n_) = -x.tail(n_);
        y.tail(n_) = x.head(n_);
        return y;
    }

    /// J^{-1} x = -J x.
    Eigen::VectorXd applyJinv(const Eigen::VectorXd& x) const { return -applyJ(x); }

    /// omega(x, y) = <J x, y>.
    double omega(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
        check(x);
        check(y);
        return x.head(n_).dot(y.tail(n_)) - x.tail(n_).dot(y.head(n_));
    }

    /// Hamiltonian vector field from a Euclidean gradient: X_G(x) = J grad G(x).
    Eigen::VectorXd ham_vector_field(const Eigen::VectorXd& gradG) const { return applyJ(gradG); }

    /// Symplectic inverse of a symplectic matrix: Phi^{-1} = -J Phi^T J (exact identity).
    Eigen::MatrixXd symplectic_inverse(const Eigen::MatrixXd& Phi) const {
        return -J() * Phi.transpose() * J();
    }

    /// || Phi^T J Phi - J ||_inf, zero iff Phi preserves omega.
    double symplectic_defect(const Eigen::MatrixXd& Phi) const {
        return (Phi.transpose() * J() * Phi - J()).cwiseAbs().maxCoeff();
    }

private:
    void check(const Eigen::VectorXd& x) const {
        if (x.size() != dim())
            throw InvalidArgumentError("PhaseSpace: vector has dimension " +
                                       std::to_string(x.size()) + ", expected " +
                                       std::to_string(dim()));
    }

    int n_;
};

}  // namespace meanloop
