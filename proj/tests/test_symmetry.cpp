#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "meanloop/errors.hpp"
#include "meanloop/fourier.hpp"
#include "meanloop/monoid.hpp"
#include "meanloop/solver.hpp"

using namespace meanloop;
namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

TEST_CASE("monoid composition: identity, worked product, associativity") {
    const MonoidElement g = make_element(3, 0.7);
    const MonoidElement e = compose(make_element(1, 0.0), g);
    CHECK(e.n == 3);
    CHECK(e.r == 0.7);

    const MonoidElement p = compose(make_element(2, 0.1), make_element(3, 0.2));
    CHECK(p.n == 6);
    CHECK(p.r == doctest::Approx(0.5).epsilon(1e-15));

    // exact associativity on dyadic circle coordinates
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        auto dyadic = [&]() {
            return make_element(1 + static_cast<int>(rng() % 5),
                                static_cast<double>(rng() % 64) / 64.0);
        };
        const MonoidElement a = dyadic(), b = dyadic(), c = dyadic();
        const MonoidElement left = compose(compose(a, b), c);
        const MonoidElement right = compose(a, compose(b, c));
        CHECK(left.n == right.n);
        CHECK(left.r == right.r);
    }

    CHECK_THROWS_AS(make_element(0, 0.2), InvalidArgumentError);
}

TEST_CASE("action on loops: identity, mode doubling, mean invariance") {
    const TimeGrid grid(64);
    Eigen::MatrixXd s(2, 64);
    for (int k = 0; k < 64; ++k) {
        s(0, k) = std::cos(kTwoPi * grid.node(k));
        s(1, k) = std::sin(kTwoPi * grid.node(k));
    }
    const Loop u(grid, s);

    const Loop same = act(make_element(1, 0.0), u);
    CHECK((same.samples - u.samples).cwiseAbs().maxCoeff() < 1e-10);

    const Loop doubled = act(make_element(2, 0.0), u);
    for (int k = 0; k < 64; ++k) {
        CHECK(doubled.samples(0, k) ==
              doctest::Approx(std::cos(2.0 * kTwoPi * grid.node(k))).epsilon(1e-10));
        CHECK(doubled.samples(1, k) ==
              doctest::Approx(std::sin(2.0 * kTwoPi * grid.node(k))).epsilon(1e-10));
    }

    const SystemSpec sys = make_system("example2-harmonic");
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 5; ++trial) {
        const Loop w(grid, fourier::random_band_limited(2, grid, 6, rng()));
        const MonoidElement g = make_element(trial % 2 ? 2 : -3, 0.37 * trial);
        const Eigen::VectorXd before = mean_value(sys.pair, w).value;
        const Eigen::VectorXd after = mean_value(sys.pair, act(g, w)).value;
        CHECK((before - after).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("composition orientation: the monoid acts on the right") {
    const TimeGrid grid(128);
    std::mt19937_64 rng(12);
    const Loop u(grid, fourier::random_band_limited(2, grid, 5, rng()));
    const MonoidElement g1 = make_element(2, 0.23), g2 = make_element(-3, 0.61);

    const Loop lhs = act(compose(g1, g2), u);
    const Loop rhs = act(g2, act(g1, u));
    CHECK((lhs.samples - rhs.samples).cwiseAbs().maxCoeff() < 1e-9);

    // the opposite order genuinely differs for non-commuting elements
    const Loop wrong = act(g1, act(g2, u));
    CHECK((lhs.samples - wrong.samples).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("pullback of pairs rescales the coupling only") {
    const SystemSpec sys = make_system("example2-harmonic");
    const Eigen::VectorXd v = Eigen::VectorXd::Constant(1, 1.7);

    const PairSpec same = pullback_pair(make_element(1, 0.4), sys.pair);
    CHECK(same.f_eval(v) == sys.pair.f_eval(v));

    const PairSpec half = pullback_pair(make_element(2, 0.0), sys.pair);
    CHECK(half.f_eval(v) == doctest::Approx(0.5 * sys.pair.f_eval(v)));
    CHECK(half.f_grad(v)(0) == doctest::Approx(0.5 * sys.pair.f_grad(v)(0)));
    CHECK(half.f_hess(v)(0, 0) == doctest::Approx(0.5));

    // action identity: area term unchanged, coupling term scaled by 1/n
    const TimeGrid grid(64);
    std::mt19937_64 rng(5);
    const Loop u(grid, fourier::random_band_limited(2, grid, 4, rng()));
    const double mu = mean_value(sys.pair, u).value(0);
    const double area = action(sys.pair, u) + sys.pair.f_eval(Eigen::VectorXd::Constant(1, mu));
    CHECK(action(half, u) ==
          doctest::Approx(area - 0.5 * sys.pair.f_eval(Eigen::VectorXd::Constant(1, mu)))
              .epsilon(1e-12));
}

TEST_CASE("iteration equivalence at the harmonic critical point") {
    const SystemSpec sys = make_system("example2-harmonic");
    const MonoidElement g = make_element(2, 0.0);

    // solve the pulled-back problem: means double, radius scales by sqrt 2
    const PairSpec pulled = pullback_pair(g, sys.pair);
    SolveConfig cfg;
    cfg.x0 = Eigen::Vector2d(3.5 * std::sqrt(2.0), 0.0);
    cfg.mu0 = Eigen::VectorXd::Constant(1, 12.0);
    const CriticalPoint cp = self_consistent_solve(pulled, cfg);
    CHECK(std::abs(cp.mean.value(0) - 2.0 * kTwoPi) < 1e-8);

    const PropositionReport rep = proposition_check(sys.pair, g, cp.loop);
    CHECK(rep.residual_pullback <= 1e-7);
    CHECK(rep.residual_iterate <= 1e-7);
    CHECK(rep.agree);

    // time shifts of the autonomous orbit stay critical
    const CriticalPoint base =
        self_consistent_solve(sys.pair, default_config_for(sys, 1));
    const PropositionReport shift =
        proposition_check(sys.pair, make_element(1, 0.37), base.loop);
    CHECK(shift.residual_pullback <= 1e-7);
    CHECK(shift.residual_iterate <= 1e-7);
    CHECK(shift.agree);

    // a random loop is critical for neither side
    std::mt19937_64 rng(44);
    const Loop noise(base.loop.grid,
                     fourier::random_band_limited(2, base.loop.grid, 4, rng()));
    const PropositionReport neither = proposition_check(sys.pair, g, noise);
    CHECK(neither.residual_pullback > 1e-3);
    CHECK(neither.residual_iterate > 1e-3);
    CHECK(neither.agree);
}

TEST_CASE("equivariance: iterates keep residuals within a factor of ten") {
    const SystemSpec sys = make_system("example2-harmonic");
    for (int n : {2, 3}) {
        const MonoidElement g = make_element(n, 0.3);
        const PairSpec pulled = pullback_pair(g, sys.pair);
        SolveConfig cfg;
        cfg.x0 = Eigen::Vector2d(3.5 * std::sqrt(double(n)), 0.0);
        cfg.mu0 = Eigen::VectorXd::Constant(1, 6.0 * n);
        const CriticalPoint cp = self_consistent_solve(pulled, cfg);
        const double iterate_res = critical_residual(sys.pair, act(g, cp.loop)).max_norm();
        CHECK(iterate_res <= 10.0 * std::max(cp.residual_norm, 1e-9));
    }
}
