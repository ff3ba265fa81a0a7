#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "meanloop/errors.hpp"
#include "meanloop/fourier.hpp"
#include "meanloop/pair.hpp"
#include "meanloop/systems.hpp"

using namespace meanloop;
namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

Loop circle(const TimeGrid& grid, double radius, int winding = 1) {
    Eigen::MatrixXd s(2, grid.size());
    for (int k = 0; k < grid.size(); ++k) {
        const double a = kTwoPi * winding * grid.node(k);
        s(0, k) = radius * std::cos(a);
        s(1, k) = radius * std::sin(a);
    }
    return Loop(grid, s);
}

// Signed polygon area of the sampled planar loop.
double shoelace(const Loop& u) {
    double acc = 0.0;
    const int N = u.size();
    for (int k = 0; k < N; ++k) {
        const int k1 = (k + 1) % N;
        acc += u.samples(0, k) * u.samples(1, k1) - u.samples(0, k1) * u.samples(1, k);
    }
    return 0.5 * acc;
}
}  // namespace

TEST_CASE("mean value: constant loop, circle energy, centered components") {
    const TimeGrid grid(64);
    const SystemSpec harmonic = make_system("example2-harmonic");

    const Eigen::Vector2d x(1.25, -0.5);
    MeanValue mv = mean_value(harmonic.pair, Loop::constant(grid, x));
    CHECK(mv.value(0) == doctest::Approx(0.5 * x.squaredNorm()).epsilon(1e-15));
    CHECK(mv.in_domain);

    mv = mean_value(harmonic.pair, circle(grid, 1.7));
    CHECK(mv.value(0) == doctest::Approx(0.5 * 1.7 * 1.7).epsilon(1e-13));

    // identity components average to zero over the unit circle
    PairSpec ident;
    ident.m = 2;
    ident.H_eval = [](const Eigen::VectorXd& v) { return v; };
    ident.H_grad = [](const Eigen::VectorXd&) { return Eigen::MatrixXd::Identity(2, 2); };
    ident.H_hess = [](const Eigen::VectorXd&) {
        return std::vector<Eigen::MatrixXd>(2, Eigen::MatrixXd::Zero(2, 2));
    };
    ident.f_eval = [](const Eigen::VectorXd& v) { return v(0); };
    ident.f_grad = [](const Eigen::VectorXd&) { return Eigen::Vector2d(1.0, 0.0).eval(); };
    ident.f_hess = [](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(2, 2); };
    ident.in_W = [](const Eigen::VectorXd&) { return true; };
    mv = mean_value(ident, circle(grid, 1.0));
    CHECK(mv.value.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("action: constant loop, shoelace oracle, harmonic closed form") {
    const TimeGrid grid(128);
    const SystemSpec harmonic = make_system("example2-harmonic");

    const Eigen::Vector2d x(0.8, 0.1);
    const double ax = action(harmonic.pair, Loop::constant(grid, x));
    CHECK(ax == doctest::Approx(-0.5 * std::pow(0.5 * x.squaredNorm(), 2)).epsilon(1e-13));

    // area term vs the polygon oracle on an off-center smooth loop; the
    // polygon area is O(N^-2) away from the smooth one, so Richardson-
    // extrapolate the shoelace values from two grids
    auto wobble_at = [](const TimeGrid& g) {
        Eigen::MatrixXd s(2, g.size());
        for (int k = 0; k < g.size(); ++k) {
            const double t = kTwoPi * g.node(k);
            s(0, k) = 1.3 * std::cos(t) + 0.2 * std::cos(2 * t) + 0.4;
            s(1, k) = 1.1 * std::sin(t) - 0.1 * std::sin(2 * t);
        }
        return Loop(g, s);
    };
    const Loop wobble = wobble_at(grid);
    const double mean_h = mean_value(harmonic.pair, wobble).value(0);
    const double area = action(harmonic.pair, wobble) + 0.5 * mean_h * mean_h;
    const double sh1 = shoelace(wobble_at(TimeGrid(512)));
    const double sh2 = shoelace(wobble_at(TimeGrid(1024)));
    CHECK(area == doctest::Approx((4.0 * sh2 - sh1) / 3.0).epsilon(1e-8));

    // positively traversed circle of radius r: area pi r^2
    const double r = 2.0 * std::sqrt(kPi);
    const double a2 = action(harmonic.pair, circle(grid, r));
    CHECK(a2 == doctest::Approx(kPi * r * r - 0.5 * kTwoPi * kTwoPi).epsilon(1e-10));
}

TEST_CASE("critical residual: harmonic closed form, constant loop, linear coupling") {
    const TimeGrid grid(256);
    const SystemSpec harmonic = make_system("example2-harmonic");

    // u(t) = 2 sqrt(pi) e^{2 pi i t} solves the nonlocal equation
    const Loop u = circle(grid, 2.0 * std::sqrt(kPi));
    CHECK(critical_residual(harmonic.pair, u).max_norm() < 1e-8);

    // constant loop: residual equals |X| at the point
    const Eigen::Vector2d x(1.5, 0.0);
    const Loop cu = Loop::constant(grid, x);
    const double h = 0.5 * x.squaredNorm();
    CHECK(critical_residual(harmonic.pair, cu).max_norm() ==
          doctest::Approx(h * x.norm()).epsilon(1e-12));

    // linear coupling reduces to the classical residual u' - c X_H(u)
    const SystemSpec linear = make_system("example1-linear", {{"c", 0.83}});
    const Loop v = circle(grid, 1.2);
    const FieldAlongLoop res = critical_residual(linear.pair, v);
    const Eigen::MatrixXd dv = fourier::derivative(v.samples);
    double worst = 0.0;
    for (int k = 0; k < grid.size(); ++k) {
        Eigen::Vector2d classical =
            dv.col(k) - 0.83 * linear.pair.phase.applyJ(v.samples.col(k));
        worst = std::max(worst, (res.samples.col(k) - classical).norm());
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("action of the linear pair equals the classical action") {
    const TimeGrid grid(96);
    const double c = 1.37;
    const SystemSpec linear = make_system("example1-linear", {{"c", c}});
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::MatrixXd s = fourier::random_band_limited(2, grid, 5, rng());
        const Loop u(grid, s);
        // classical action: area - mean of (c H)
        const Eigen::MatrixXd du = fourier::derivative(s);
        Eigen::VectorXd w(grid.size()), h(grid.size());
        for (int k = 0; k < grid.size(); ++k) {
            w(k) = linear.pair.phase.omega(s.col(k), du.col(k));
            h(k) = c * 0.5 * s.col(k).squaredNorm();
        }
        const double classical = 0.5 * grid.quadrature(w) - grid.quadrature(h);
        CHECK(action(linear.pair, u) == doctest::Approx(classical).epsilon(1e-10));
    }
}

TEST_CASE("domain error when the mean leaves W") {
    const SystemSpec bov = make_system("example4-bov");
    const TimeGrid grid(32);
    // z identically zero puts the first mean component at the excluded value
    const Loop u = Loop::constant(grid, Eigen::Vector4d(0.0, 0.0, 0.3, 0.0).eval());
    CHECK_THROWS_AS(action(bov.pair, u), DomainError);
    CHECK_THROWS_AS(critical_residual(bov.pair, u), DomainError);
    CHECK_FALSE(mean_value(bov.pair, u).in_domain);  // reported, not thrown
}

TEST_CASE("product pair: sizes, embedding, commuting by construction") {
    const SystemSpec osc2 = make_system("example5-coupled-oscillators", {{"epsilon", 0.1}});
    CHECK(osc2.pair.phase.dim() == 4);
    CHECK(osc2.pair.m == 2);
    CHECK(osc2.pair.commuting_by_construction);
    CHECK(is_commuting(osc2.pair).commuting);

    // H evaluates factorwise in the (q1, q2, p1, p2) global ordering
    Eigen::VectorXd x(4);
    x << 1.0, 2.0, 3.0, 4.0;  // factor 1: (1,3), factor 2: (2,4)
    const Eigen::VectorXd h = osc2.pair.H_eval(x);
    CHECK(h(0) == doctest::Approx(0.5 * (1.0 + 9.0)));
    CHECK(h(1) == doctest::Approx(0.5 * (4.0 + 16.0)));

    const SystemSpec osc3 =
        make_system("example5-coupled-oscillators", {{"epsilon", 0.05}, {"factors", 3}});
    CHECK(osc3.pair.phase.dim() == 6);
    CHECK(osc3.pair.m == 3);
    CHECK(is_commuting(osc3.pair).commuting);

    // a single factor embeds the scalar pair unchanged
    const SystemSpec osc1 = make_system("example5-coupled-oscillators", {{"factors", 1}});
    CHECK(osc1.pair.phase.dim() == 2);
    const Eigen::Vector2d pt(0.4, -1.1);
    CHECK(osc1.pair.H_eval(pt)(0) == doctest::Approx(0.5 * pt.squaredNorm()));
    CHECK((osc1.pair.H_grad(pt).row(0).transpose() - pt).norm() == 0.0);

    CHECK_THROWS_AS(product_pair({}, CouplingFunction{}), InvalidArgumentError);
}

TEST_CASE("commuting test: scalar pair, product, and the planar counterexample") {
    CHECK(is_commuting(make_system("example2-harmonic").pair).commuting);

    // H = (|z|^2, |w|^2): bracket equals 4 <z, w> pointwise
    const SystemSpec bov = make_system("example4-bov");
    CommutingReport rep = is_commuting(bov.pair, 200, 77);
    CHECK_FALSE(rep.commuting);

    std::mt19937_64 rng(77);  // same stream the test uses internally is not
                              // needed; check the symbolic value at fixed points
    (void)rng;
    const PhaseSpace& ps = bov.pair.phase;
    Eigen::VectorXd x(4);
    x << 0.3, -1.0, 0.7, 0.2;
    const Eigen::MatrixXd g = bov.pair.H_grad(x);
    const double bracket =
        ps.omega(ps.applyJ(g.row(0).transpose()), ps.applyJ(g.row(1).transpose()));
    const double zw = x(0) * x(2) + x(1) * x(3);
    CHECK(bracket == doctest::Approx(4.0 * zw).epsilon(1e-13));

    // helium couples positions and momenta, not commuting either
    CHECK_FALSE(is_commuting(make_system("example3-helium").pair).commuting);
}

TEST_CASE("gradient-vs-residual consistency along random directions") {
    const TimeGrid grid(64);
    const SystemSpec harmonic = make_system("example2-harmonic");
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 4; ++trial) {
        const Loop u(grid, fourier::random_band_limited(2, grid, 4, rng()));
        const Eigen::MatrixXd v = fourier::random_band_limited(2, grid, 4, rng());
        const FieldAlongLoop r = critical_residual(harmonic.pair, u);

        const double eps = 1e-5;
        const Loop up(grid, u.samples + eps * v);
        const Loop um(grid, u.samples - eps * v);
        const double fd = (action(harmonic.pair, up) - action(harmonic.pair, um)) / (2 * eps);

        double pairing = 0.0;  // dA(u)[v] = -int omega(r, v)
        for (int k = 0; k < grid.size(); ++k)
            pairing -= harmonic.pair.phase.omega(r.samples.col(k), v.col(k));
        pairing /= grid.size();
        CHECK(std::abs(fd - pairing) < 1e-4);
    }
}

TEST_CASE("helium pair evaluates action and residual in its domain") {
    const SystemSpec helium = make_system("example3-helium", {{"mu", 2.0}});
    CHECK_FALSE(helium.solvable);
    CHECK(pair_gradient_self_check(helium.pair) < 1e-5);

    const TimeGrid grid(64);
    Eigen::MatrixXd s(4, grid.size());
    for (int k = 0; k < grid.size(); ++k) {
        const double t = kTwoPi * grid.node(k);
        s(0, k) = 1.0 + 0.2 * std::cos(t);
        s(1, k) = 2.5 + 0.3 * std::sin(t);
        s(2, k) = 0.2 * std::sin(t);
        s(3, k) = -0.1 * std::cos(t);
    }
    const Loop u(grid, s);
    const MeanValue mv = mean_value(helium.pair, u);
    CHECK(mv.in_domain);

    // direct evaluation of both action terms as the oracle
    const Eigen::MatrixXd du = fourier::derivative(s);
    Eigen::VectorXd w(grid.size());
    for (int k = 0; k < grid.size(); ++k)
        w(k) = helium.pair.phase.omega(s.col(k), du.col(k));
    const double expected =
        0.5 * grid.quadrature(w) - (mv.value(0) + 1.0 / (mv.value(2) - mv.value(1)));
    CHECK(action(helium.pair, u) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(critical_residual(helium.pair, u).max_norm() > 0.0);
}

TEST_CASE("built-in gradients agree with finite differences") {
    for (const auto& name : system_names()) {
        const SystemSpec sys = make_system(name);
        CHECK(pair_gradient_self_check(sys.pair) < 1e-5);
    }
}

TEST_CASE("coupling Hessians are symmetric at sample points") {
    std::mt19937_64 rng(417);
    std::normal_distribution<double> gauss;
    for (const auto& name : system_names()) {
        const SystemSpec sys = make_system(name);
        for (int trial = 0; trial < 10; ++trial) {
            Eigen::VectorXd v(sys.pair.m);
            for (int i = 0; i < v.size(); ++i) v(i) = gauss(rng);
            if (name == "example3-helium") v(2) = v(1) + 1.0 + std::abs(v(2));
            if (name == "example4-bov") v(0) = 0.5 + std::abs(v(0));
            if (!sys.pair.in_W(v)) continue;
            const Eigen::MatrixXd h = sys.pair.f_hess(v);
            CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("unknown systems and parameters are rejected") {
    CHECK_THROWS_AS(make_system("example9-nope"), InvalidArgumentError);
    CHECK_THROWS_AS(make_system("example2-harmonic", {{"zeta", 1.0}}), InvalidArgumentError);
}
