#include <doctest.h>

#include <cmath>
#include <numbers>

#include "meanloop/errors.hpp"
#include "meanloop/kepler.hpp"
#include "meanloop/solver.hpp"

using namespace meanloop;
namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

PlanarLoop circle(int N, double radius, int winding = 1, double phase = 0.0) {
    Eigen::MatrixXd s(2, N);
    const TimeGrid grid(N);
    for (int k = 0; k < N; ++k) {
        const double a = kTwoPi * winding * grid.node(k) + phase;
        s(0, k) = radius * std::cos(a);
        s(1, k) = radius * std::sin(a);
    }
    return PlanarLoop{grid, s};
}

double bov_radius(int k) { return std::pow(16.0 * kPi * kPi * k * k, -1.0 / 6.0); }
}  // namespace

TEST_CASE("second-order residual of the circular branch") {
    const PlanarLoop good = circle(256, bov_radius(1));
    CHECK(bov_residual(good).max_norm() < 1e-8);

    const PlanarLoop wrong = circle(256, 1.0);
    CHECK(bov_residual(wrong).max_norm() > 0.1);

    // the equation is not homogeneous: residual(2z) != 2 residual(z)
    PlanarLoop doubled = good;
    doubled.samples *= 2.0;
    const double r2 = bov_residual(doubled).max_norm();
    CHECK(std::abs(r2 - 2.0 * bov_residual(good).max_norm()) > 0.1);
}

TEST_CASE("time transform: identity for constant speed, closed form otherwise") {
    const PlanarLoop unif = circle(128, 0.8);
    const TimeTransform tt(unif);
    for (int k = 0; k <= 128; ++k) {
        const double t = k / 128.0;
        CHECK(std::abs(tt.forward(t) - t) < 1e-12);
        CHECK(std::abs(tt.inverse(t) - t) < 1e-12);
    }

    // |z(s)|^2 = 1 + cos(2 pi s)/2: t_z(tau) = tau + sin(2 pi tau)/(4 pi)
    const int N = 256;
    Eigen::MatrixXd s(2, N);
    const TimeGrid grid(N);
    for (int k = 0; k < N; ++k) {
        const double r = std::sqrt(1.0 + 0.5 * std::cos(kTwoPi * grid.node(k)));
        s(0, k) = r * std::cos(kTwoPi * grid.node(k));
        s(1, k) = r * std::sin(kTwoPi * grid.node(k));
    }
    const TimeTransform tw = time_transform(PlanarLoop{grid, s});
    CHECK(tw.forward_samples()(0) == 0.0);
    CHECK(tw.forward_samples()(N) == 1.0);
    for (int k = 0; k <= N; ++k) {
        const double tau = static_cast<double>(k) / N;
        const double closed = tau + std::sin(kTwoPi * tau) / (4.0 * kPi);
        CHECK(std::abs(tw.forward_samples()(k) - closed) < 1e-10);
        if (k < N) CHECK(tw.forward_samples()(k + 1) > tw.forward_samples()(k));
    }
    // round trip through the inverse
    for (double t : {0.0, 0.1, 0.31, 0.5, 0.77, 0.999, 1.0})
        CHECK(std::abs(tw.forward(tw.inverse(t)) - t) < 1e-8);

    // collision guard
    PlanarLoop dead = circle(64, 1.0);
    dead.samples.col(10).setZero();
    CHECK_THROWS_AS(time_transform(dead), DomainError);
}

TEST_CASE("squaring map: circles double their winding, constants square") {
    const PlanarLoop z = circle(128, 0.7, 1, 0.3);
    const PlanarLoop x = levi_civita_orbit(z);
    for (int k = 0; k < 128; ++k) {
        const double a = 2.0 * (kTwoPi * z.grid.node(k) + 0.3);
        CHECK(x.samples(0, k) == doctest::Approx(0.49 * std::cos(a)).epsilon(1e-9));
        CHECK(x.samples(1, k) == doctest::Approx(0.49 * std::sin(a)).epsilon(1e-9));
    }

    PlanarLoop cst{TimeGrid(64), Eigen::Vector2d(0.3, -0.4).replicate(1, 64)};
    const PlanarLoop csq = levi_civita_orbit(cst);
    CHECK(csq.samples(0, 0) == doctest::Approx(0.3 * 0.3 - 0.4 * 0.4));
    CHECK(csq.samples(1, 0) == doctest::Approx(2.0 * 0.3 * -0.4));
}

TEST_CASE("transform accuracy improves at second order or better") {
    // non-circular z with an analytic profile; compare against a fine grid
    auto z_at = [](int N) {
        Eigen::MatrixXd s(2, N);
        const TimeGrid grid(N);
        for (int k = 0; k < N; ++k) {
            const double t = grid.node(k);
            const double r = 1.0 + 0.3 * std::cos(kTwoPi * t);
            s(0, k) = r * std::cos(kTwoPi * t);
            s(1, k) = r * std::sin(kTwoPi * t);
        }
        return PlanarLoop{TimeGrid(N), s};
    };
    const PlanarLoop ref = levi_civita_orbit(z_at(1024));
    auto deviation = [&](int N) {
        const PlanarLoop coarse = levi_civita_orbit(z_at(N));
        double worst = 0.0;
        for (int k = 0; k < N; ++k) {
            const int kk = k * (1024 / N);
            worst = std::max(worst, (coarse.samples.col(k) - ref.samples.col(kk)).norm());
        }
        return worst;
    };
    const double e64 = deviation(64), e128 = deviation(128);
    CHECK(e128 < e64 / 4.0 * 1.3);  // order >= 2 with a little slack
}

TEST_CASE("kepler residual: balance of circular orbits") {
    // hand-built circle: x = rho e^{2 pi i t} solves x'' = -mu x / |x|^3 with
    // mu = 4 pi^2 rho^3
    const double rho = 0.8;
    const PlanarLoop x = circle(256, rho);
    CHECK(kepler_residual(x, 4.0 * kPi * kPi * rho * rho * rho) < 1e-8);
    CHECK(kepler_residual(x, 0.0) == doctest::Approx(4.0 * kPi * kPi * rho).epsilon(1e-10));
}

TEST_CASE("pipeline: the squared reparametrized branch solves the two-body problem") {
    SolveConfig cfg;
    cfg.grid_n = 512;
    const CriticalPoint cp = bov_solve(1, cfg);
    const PlanarLoop z{cp.loop.grid, cp.loop.samples.topRows(2)};

    const TimeTransform tt(z);
    for (int k = 0; k <= 512; ++k) {
        const double t = k / 512.0;
        CHECK(std::abs(tt.forward(tt.inverse(t)) - t) < 1e-8);
    }

    const PlanarLoop x = levi_civita_orbit(z);
    CHECK(kepler_residual(x, 1.0) < 1e-5);  // gravitational parameter is one

    // the two-body energy is constant along the transformed orbit
    const Eigen::VectorXd e = kepler_energy(x, 1.0);
    CHECK(e.maxCoeff() - e.minCoeff() < 1e-5);

    // winding doubles: x is an ellipse-degenerate circle traversed twice
    CHECK(x.min_radius() == doctest::Approx(bov_radius(1) * bov_radius(1)).epsilon(1e-6));
}
