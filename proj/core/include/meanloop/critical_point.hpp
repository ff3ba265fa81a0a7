#pragma once

#include <Eigen/Dense>

#include "meanloop/loop.hpp"
#include "meanloop/pair.hpp"

namespace meanloop {

/// A numerically validated critical point of the action of a pair.
struct CriticalPoint {
    PairSpec pair;
    Loop loop;
    MeanValue mean;
    double residual_norm = 0.0;       // sup norm of the critical-point residual
    Eigen::VectorXd covector;         // df at the mean, the frozen field coefficients
};

}  // namespace meanloop
