#pragma once

#include <map>
#include <string>
#include <vector>

#include "meanloop/pair.hpp"

namespace meanloop {

/// A registered pair with solver seeds for branch selection by winding number.
struct SystemSpec {
    std::string name;
    PairSpec pair;
    std::map<std::string, double> params;
    bool solvable = true;  // Example 3 ships for evaluation only

    /// Initial phase-space point and mean for the winding-k branch.
    std::function<Eigen::VectorXd(int k)> seed_point;
    std::function<Eigen::VectorXd(int k)> seed_mean;
};

/// Built-in systems:
///   "example1-linear"               linear coupling, classical 1-periodic orbits (param c)
///   "example2-harmonic"             f(x) = x^2/2, period-equals-energy circles
///   "example3-helium"               two radial electrons coupled through mean positions
///                                   (param mu > 1); evaluation only
///   "example4-bov"                  H = (|z|^2, |w|^2), f = (x2-8)/(8 x1)
///   "example5-coupled-oscillators"  product of harmonic oscillators (param epsilon)
/// Unknown parameter keys are rejected.
SystemSpec make_system(const std::string& name,
                       const std::map<std::string, double>& params = {});

std::vector<std::string> system_names();

}  // namespace meanloop
