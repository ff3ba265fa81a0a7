#include "meanloop/flow.hpp"

#include <cmath>

#include "meanloop/errors.hpp"

namespace meanloop {

namespace {

void rk4_step(const VectorField& f, double t, double h, Eigen::VectorXd& x) {
    const Eigen::VectorXd k1 = f(t, x);
    const Eigen::VectorXd k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
    const Eigen::VectorXd k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
    const Eigen::VectorXd k4 = f(t + h, x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void ensure_finite(const Eigen::VectorXd& x, double t) {
    if (!x.allFinite()) throw IntegrationBlowupError("integration blow-up", t);
}

}  // namespace

Eigen::MatrixXd integrate_flow(const VectorField& field, const Eigen::VectorXd& x0, double t0,
                               double t1, int steps) {
    if (steps < 1) throw InvalidArgumentError("integrate_flow: steps must be >= 1");
    const double h = (t1 - t0) / steps;
    Eigen::MatrixXd out(x0.size(), steps + 1);
    Eigen::VectorXd x = x0;
    out.col(0) = x;
    for (int k = 0; k < steps; ++k) {
        const double t = t0 + k * h;
        rk4_step(field, t, h, x);
        ensure_finite(x, t + h);
        out.col(k + 1) = x;
    }
    return out;
}

VariationalSolution flow_with_variational(const VectorField& field, const FieldJacobian& jacobian,
                                          const Eigen::VectorXd& x0, double T, int samples,
                                          int substeps) {
    if (samples < 1 || substeps < 1)
        throw InvalidArgumentError("flow_with_variational: samples and substeps must be >= 1");
    const int d = static_cast<int>(x0.size());

    // Augmented state (x, Psi) flattened column-major.
    VectorField aug = [&](double t, const Eigen::VectorXd& z) {
        const Eigen::VectorXd x = z.head(d);
        const Eigen::MatrixXd Psi = Eigen::Map<const Eigen::MatrixXd>(z.data() + d, d, d);
        const Eigen::MatrixXd dPsi = jacobian(t, x) * Psi;
        Eigen::VectorXd dz(d + d * d);
        dz.head(d) = field(t, x);
        Eigen::Map<Eigen::MatrixXd>(dz.data() + d, d, d) = dPsi;
        return dz;
    };

    Eigen::VectorXd z(d + d * d);
    z.head(d) = x0;
    Eigen::Map<Eigen::MatrixXd>(z.data() + d, d, d) = Eigen::MatrixXd::Identity(d, d);

    VariationalSolution sol;
    sol.trajectory.resize(d, samples + 1);
    sol.frames.reserve(samples + 1);
    sol.trajectory.col(0) = x0;
    sol.frames.push_back(Eigen::MatrixXd::Identity(d, d));

    const double h = T / (samples * static_cast<double>(substeps));
    for (int k = 0; k < samples; ++k) {
        for (int s = 0; s < substeps; ++s) {
            const double t = (k * static_cast<double>(substeps) + s) * h;
            rk4_step(aug, t, h, z);
            ensure_finite(z, t + h);
        }
        sol.trajectory.col(k + 1) = z.head(d);
        sol.frames.push_back(Eigen::Map<const Eigen::MatrixXd>(z.data() + d, d, d));
    }
    return sol;
}

std::vector<Eigen::MatrixXd> linearized_flow(const std::function<Eigen::MatrixXd(double)>& A,
                                             double T, int samples, int substeps) {
    const int d = static_cast<int>(A(0.0).rows());
    VectorField zero = [d](double, const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(d); };
    FieldJacobian jac = [&A](double t, const Eigen::VectorXd&) { return A(t); };
    return flow_with_variational(zero, jac, Eigen::VectorXd::Zero(d), T, samples, substeps).frames;
}

Loop sample_orbit(const VectorField& field, const Eigen::VectorXd& x0, const TimeGrid& grid,
                  int substeps_per_node) {
    const int N = grid.size();
    Eigen::MatrixXd traj =
        integrate_flow(field, x0, 0.0, 1.0, N * substeps_per_node);
    Eigen::MatrixXd samples(x0.size(), N);
    for (int k = 0; k < N; ++k) samples.col(k) = traj.col(k * substeps_per_node);
    return Loop(grid, samples);
}

int auto_substeps(double stiffness, int grid_n, int min_substeps, double err_target) {
    const double L = std::max(stiffness, 1.0);
    // accumulated RK4 error ~ L^5 / (120 (N s)^4)
    const double total_steps = std::pow(std::pow(L, 5) / (120.0 * err_target), 0.25);
    const int s = static_cast<int>(std::ceil(total_steps / grid_n));
    return std::clamp(s, min_substeps, 512);
}

}  // namespace meanloop
