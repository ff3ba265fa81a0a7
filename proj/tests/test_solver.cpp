#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "meanloop/errors.hpp"
#include "meanloop/fourier.hpp"
#include "meanloop/solver.hpp"

using namespace meanloop;
namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

TEST_CASE("periodic orbit shooting on the frozen harmonic field") {
    const PhaseSpace phase(1);
    const TimeGrid grid(256);

    // c = 2 pi makes every point 1-periodic; the solver keeps the guess ray
    VectorField f = [&phase](double, const Eigen::VectorXd& x) {
        return Eigen::VectorXd(kTwoPi * phase.applyJ(x));
    };
    FieldJacobian df = [&phase](double, const Eigen::VectorXd&) {
        return Eigen::MatrixXd(kTwoPi * phase.J());
    };
    const Eigen::Vector2d guess(3.5, 0.0);
    const Loop orbit = periodic_orbit(f, df, guess, grid);
    CHECK((orbit.samples.col(0) - guess).norm() < 1e-12);
    const Eigen::MatrixXd traj = integrate_flow(f, orbit.samples.col(0), 0.0, 1.0, 16384);
    CHECK((traj.col(16384) - orbit.samples.col(0)).norm() < 1e-10);

    // zero field: every point is fixed, the constant loop comes back
    VectorField zero = [](double, const Eigen::VectorXd& x) {
        return Eigen::VectorXd::Zero(x.size());
    };
    FieldJacobian dzero = [](double, const Eigen::VectorXd& x) {
        return Eigen::MatrixXd::Zero(x.size(), x.size()).eval();
    };
    const Loop cst = periodic_orbit(zero, dzero, guess, grid);
    CHECK((cst.samples.colwise() - guess).cwiseAbs().maxCoeff() == 0.0);

    // c = 1: only the origin is 1-periodic
    VectorField slow = [&phase](double, const Eigen::VectorXd& x) { return phase.applyJ(x); };
    FieldJacobian dslow = [&phase](double, const Eigen::VectorXd&) { return phase.J(); };
    SolveConfig cfg;
    cfg.damping = 1.0;
    const Loop origin = periodic_orbit(slow, dslow, Eigen::Vector2d(0.3, 0.1), grid, cfg);
    CHECK(origin.samples.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("harmonic self-consistency: mean 2 pi, radius 2 sqrt(pi)") {
    const SystemSpec sys = make_system("example2-harmonic");
    SolveConfig cfg = default_config_for(sys, 1);
    SolveTrace trace;
    const CriticalPoint cp = self_consistent_solve(sys.pair, cfg, &trace);

    CHECK(std::abs(cp.mean.value(0) - kTwoPi) < 1e-8);
    CHECK(std::abs(cp.loop.samples.col(0).norm() - 2.0 * std::sqrt(kPi)) < 1e-6);
    CHECK(cp.residual_norm <= 1e-8);
    CHECK((mean_value(cp.pair, cp.loop).value - cp.mean.value).cwiseAbs().maxCoeff() < 1e-9);

    // winding 2 branch: mean 4 pi, radius 2 sqrt(2 pi)
    const CriticalPoint cp2 = self_consistent_solve(sys.pair, default_config_for(sys, 2));
    CHECK(std::abs(cp2.mean.value(0) - 2.0 * kTwoPi) < 1e-8);
    CHECK(std::abs(cp2.loop.samples.col(0).norm() - 2.0 * std::sqrt(2.0 * kPi)) < 1e-6);

    // the action at the closed form: pi r^2 k - mu^2 / 2
    const double r = 2.0 * std::sqrt(kPi);
    CHECK(action(cp.pair, cp.loop) ==
          doctest::Approx(kPi * r * r - 0.5 * kTwoPi * kTwoPi).epsilon(1e-9));
}

TEST_CASE("coupled oscillators: means solve the linear self-consistency system") {
    const double eps = 0.1;
    const SystemSpec sys = make_system("example5-coupled-oscillators", {{"epsilon", eps}});
    const CriticalPoint cp = self_consistent_solve(sys.pair, default_config_for(sys, 1));

    const double expected = kTwoPi / (1.0 + eps);
    CHECK(std::abs(cp.mean.value(0) - expected) < 1e-8);
    CHECK(std::abs(cp.mean.value(1) - expected) < 1e-8);
    CHECK(cp.residual_norm <= 1e-8);

    // radii r_i = sqrt(2 mu_i), read off factor blocks (q1, q2, p1, p2)
    const double r = std::sqrt(2.0 * expected);
    const Eigen::Vector2d z1(cp.loop.samples(0, 0), cp.loop.samples(2, 0));
    const Eigen::Vector2d z2(cp.loop.samples(1, 0), cp.loop.samples(3, 0));
    CHECK(std::abs(z1.norm() - r) < 1e-6);
    CHECK(std::abs(z2.norm() - r) < 1e-6);
}

TEST_CASE("solver failure on a field without periodic orbits") {
    // H = p on the plane: the frozen field translates, nothing closes up
    PairSpec pair;
    pair.m = 1;
    pair.H_eval = [](const Eigen::VectorXd& x) {
        Eigen::VectorXd h(1);
        h(0) = x(1);
        return h;
    };
    pair.H_grad = [](const Eigen::VectorXd&) {
        Eigen::MatrixXd g(1, 2);
        g << 0.0, 1.0;
        return g;
    };
    pair.H_hess = [](const Eigen::VectorXd&) {
        return std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Zero(2, 2)};
    };
    pair.f_eval = [](const Eigen::VectorXd& v) { return v(0); };
    pair.f_grad = [](const Eigen::VectorXd&) { return Eigen::VectorXd::Ones(1).eval(); };
    pair.f_hess = [](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(1, 1); };
    pair.in_W = [](const Eigen::VectorXd&) { return true; };

    SolveConfig cfg;
    cfg.x0 = Eigen::Vector2d(0.2, 0.4);
    cfg.mu0 = Eigen::VectorXd::Constant(1, 0.4);
    cfg.max_outer = 40;
    CHECK_THROWS_AS(self_consistent_solve(pair, cfg), SolverFailure);
}

TEST_CASE("config validation") {
    const SystemSpec sys = make_system("example2-harmonic");
    SolveConfig cfg = default_config_for(sys, 1);
    cfg.damping = 1.5;
    CHECK_THROWS_AS(self_consistent_solve(sys.pair, cfg), InvalidArgumentError);
    cfg = default_config_for(sys, 1);
    cfg.x0.resize(4);
    CHECK_THROWS_AS(self_consistent_solve(sys.pair, cfg), InvalidArgumentError);

    const SystemSpec bov = make_system("example4-bov");
    SolveConfig bad = default_config_for(bov, 1);
    bad.mu0(0) = 0.0;  // outside W from the start
    CHECK_THROWS_AS(self_consistent_solve(bov.pair, bad), InvalidArgumentError);
}

TEST_CASE("planar winding branches of the quadratic system") {
    for (int k : {1, 2}) {
        SolveConfig cfg;
        const CriticalPoint cp = bov_solve(k, cfg);
        const double R = std::pow(16.0 * kPi * kPi * k * k, -1.0 / 6.0);
        const Eigen::Vector2d z0(cp.loop.samples(0, 0), cp.loop.samples(1, 0));
        CHECK(std::abs(z0.norm() - R) < 1e-6);
        CHECK(cp.residual_norm <= 1e-8);

        // mean lies in W, first component is the positive circle radius^2
        CHECK(cp.mean.in_domain);
        CHECK(cp.mean.value(0) == doctest::Approx(R * R).epsilon(1e-6));
        CHECK(cp.mean.value(1) == doctest::Approx(4.0).epsilon(1e-6));
    }
    CHECK_THROWS_AS(bov_solve(0, SolveConfig{}), InvalidArgumentError);
}

TEST_CASE("action is stationary along random directions at solved points") {
    const SystemSpec sys = make_system("example2-harmonic");
    const CriticalPoint cp = self_consistent_solve(sys.pair, default_config_for(sys, 1));
    std::mt19937_64 rng(6);
    const double eps = 1e-5;
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXd v = fourier::random_band_limited(2, cp.loop.grid, 4, rng());
        v /= v.norm() / std::sqrt(double(cp.loop.grid.size()));
        const Loop up(cp.loop.grid, cp.loop.samples + eps * v);
        const Loop um(cp.loop.grid, cp.loop.samples - eps * v);
        const double fd = (action(cp.pair, up) - action(cp.pair, um)) / (2.0 * eps);
        CHECK(std::abs(fd) < 1e-5);
    }
}

TEST_CASE("identical configuration reproduces the loop bitwise") {
    const SystemSpec sys = make_system("example2-harmonic");
    const CriticalPoint a = self_consistent_solve(sys.pair, default_config_for(sys, 1));
    const CriticalPoint b = self_consistent_solve(sys.pair, default_config_for(sys, 1));
    CHECK((a.loop.samples - b.loop.samples).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.mean.value(0) == b.mean.value(0));
}
