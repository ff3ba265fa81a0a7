#pragma once

#include <Eigen/Dense>

#include "meanloop/errors.hpp"
#include "meanloop/time_grid.hpp"

namespace meanloop {

namespace detail {
inline void check_samples(const TimeGrid& grid, const Eigen::MatrixXd& samples,
                          const char* what) {
    if (samples.cols() != grid.size())
        throw InvalidArgumentError(std::string(what) + ": sample count does not match grid");
    if (samples.rows() < 2 || samples.rows() % 2 != 0)
        throw InvalidArgumentError(std::string(what) + ": ambient dimension must be even >= 2");
    if (!samples.allFinite())
        throw InvalidArgumentError(std::string(what) + ": non-finite sample");
}
}  // namespace detail

/// A sampled 1-periodic loop in R^{2n}; column k holds u(t_k).
struct Loop {
    Loop(TimeGrid g, Eigen::MatrixXd s) : grid(std::move(g)), samples(std::move(s)) {
        detail::check_samples(grid, samples, "Loop");
    }

    int dim() const { return static_cast<int>(samples.rows()); }
    int size() const { return static_cast<int>(samples.cols()); }

    /// Constant loop at a point.
    static Loop constant(const TimeGrid& g, const Eigen::VectorXd& x) {
        return Loop(g, x.replicate(1, g.size()));
    }

    TimeGrid grid;
    Eigen::MatrixXd samples;
};

/// A sampled vector field along a loop (tangent data, same shape as Loop).
struct FieldAlongLoop {
    FieldAlongLoop(TimeGrid g, Eigen::MatrixXd s) : grid(std::move(g)), samples(std::move(s)) {
        detail::check_samples(grid, samples, "FieldAlongLoop");
    }

    int dim() const { return static_cast<int>(samples.rows()); }
    int size() const { return static_cast<int>(samples.cols()); }
    double max_norm() const { return samples.colwise().norm().maxCoeff(); }
    double l2_norm() const { return std::sqrt(samples.squaredNorm() / samples.cols()); }

    TimeGrid grid;
    Eigen::MatrixXd samples;
};

}  // namespace meanloop
