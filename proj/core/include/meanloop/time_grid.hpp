#pragma once

#include <Eigen/Dense>

#include "meanloop/errors.hpp"

namespace meanloop {

/// Uniform grid t_k = k/N on the unit circle [0,1).
///
/// Full-period integrals of periodic data use the rectangle rule (spectrally
/// accurate in that case); partial integrals use cumulative trapezoid sums.
class TimeGrid {
public:
    explicit TimeGrid(int N) : N_(N) {
        if (N < 8) throw InvalidArgumentError("TimeGrid: N must be >= 8");
    }

    int size() const { return N_; }
    double h() const { return 1.0 / N_; }
    double node(int k) const { return static_cast<double>(k) / N_; }
    double midpoint(int k) const { return (k + 0.5) / N_; }

    Eigen::VectorXd nodes() const {
        Eigen::VectorXd t(N_);
        for (int k = 0; k < N_; ++k) t(k) = node(k);
        return t;
    }

    /// Rectangle rule over the full period; exact for constants.
    double quadrature(const Eigen::VectorXd& samples) const {
        check(samples);
        return samples.sum() / N_;
    }

    /// Componentwise rectangle rule for vector-valued samples (columns = nodes).
    Eigen::VectorXd quadrature(const Eigen::MatrixXd& samples) const {
        if (samples.cols() != N_)
            throw InvalidArgumentError("TimeGrid: sample count mismatch");
        return samples.rowwise().sum() / N_;
    }

    /// Cumulative trapezoid sums: result(k) ~= integral of f over [0, t_k],
    /// result has N+1 entries, the last one using `end_value` for f(1).
    Eigen::VectorXd cumulative_trapezoid(const Eigen::VectorXd& samples, double end_value) const {
        check(samples);
        Eigen::VectorXd out(N_ + 1);
        out(0) = 0.0;
        for (int k = 0; k < N_; ++k) {
            const double right = (k + 1 < N_) ? samples(k + 1) : end_value;
            out(k + 1) = out(k) + 0.5 * h() * (samples(k) + right);
        }
        return out;
    }

    bool operator==(const TimeGrid& other) const { return N_ == other.N_; }

private:
    void check(const Eigen::VectorXd& samples) const {
        if (samples.size() != N_)
            throw InvalidArgumentError("TimeGrid: sample count mismatch");
    }

    int N_;
};

}  // namespace meanloop
