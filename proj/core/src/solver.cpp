#include "meanloop/solver.hpp"

#include <cmath>

#include "meanloop/errors.hpp"
#include "meanloop/fourier.hpp"
#include "meanloop/kepler.hpp"

namespace meanloop {

namespace {

// One RK4 step of the joint system (x, Psi, V): state, monodromy frame, and
// mean-parameter sensitivities of the frozen field X_{df(mu) . H}.
struct JointState {
    Eigen::VectorXd x;
    Eigen::MatrixXd Psi;
    Eigen::MatrixXd V;
};

struct JointDeriv {
    Eigen::VectorXd dx;
    Eigen::MatrixXd dPsi;
    Eigen::MatrixXd dV;
};

class FrozenField {
public:
    FrozenField(const PairSpec& pair, const Eigen::VectorXd& mu)
        : pair_(pair), c_(pair.f_grad(mu)), a_(pair.f_hess(mu)) {}

    Eigen::VectorXd field(const Eigen::VectorXd& x) const { return pair_.field_cH(x, c_); }
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const {
        return pair_.field_jacobian_cH(x, c_);
    }
    // d/dmu_j of the field: J sum_i a_ij grad H_i(x).
    Eigen::MatrixXd mu_sensitivity(const Eigen::VectorXd& x) const {
        const Eigen::MatrixXd g = pair_.H_grad(x);  // m x 2n
        Eigen::MatrixXd s(pair_.phase.dim(), pair_.m);
        for (int j = 0; j < pair_.m; ++j) {
            Eigen::VectorXd acc = Eigen::VectorXd::Zero(pair_.phase.dim());
            for (int i = 0; i < pair_.m; ++i) acc += a_(i, j) * g.row(i).transpose();
            s.col(j) = pair_.phase.applyJ(acc);
        }
        return s;
    }
    const Eigen::VectorXd& covector() const { return c_; }

private:
    const PairSpec& pair_;
    Eigen::VectorXd c_;
    Eigen::MatrixXd a_;
};

JointDeriv joint_rhs(const FrozenField& f, const JointState& s) {
    JointDeriv d;
    d.dx = f.field(s.x);
    const Eigen::MatrixXd DX = f.jacobian(s.x);
    d.dPsi = DX * s.Psi;
    d.dV = DX * s.V + f.mu_sensitivity(s.x);
    return d;
}

JointState axpy(const JointState& s, const JointDeriv& d, double h) {
    return {s.x + h * d.dx, s.Psi + h * d.dPsi, s.V + h * d.dV};
}

// Node-sampled joint integration over one period.
struct JointSolution {
    Eigen::MatrixXd traj;                 // 2n x (N+1)
    std::vector<Eigen::MatrixXd> Psi;     // N+1 frames
    std::vector<Eigen::MatrixXd> V;       // N+1 sensitivity blocks
};

JointSolution integrate_joint(const FrozenField& f, const Eigen::VectorXd& x0, int N,
                              int substeps, int m) {
    const int d = static_cast<int>(x0.size());
    JointState s{x0, Eigen::MatrixXd::Identity(d, d), Eigen::MatrixXd::Zero(d, m)};
    JointSolution out;
    out.traj.resize(d, N + 1);
    out.traj.col(0) = s.x;
    out.Psi.push_back(s.Psi);
    out.V.push_back(s.V);
    const double h = 1.0 / (N * static_cast<double>(substeps));
    for (int k = 0; k < N; ++k) {
        for (int q = 0; q < substeps; ++q) {
            const JointDeriv k1 = joint_rhs(f, s);
            const JointDeriv k2 = joint_rhs(f, axpy(s, k1, 0.5 * h));
            const JointDeriv k3 = joint_rhs(f, axpy(s, k2, 0.5 * h));
            const JointDeriv k4 = joint_rhs(f, axpy(s, k3, h));
            s.x += (h / 6.0) * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx);
            s.Psi += (h / 6.0) * (k1.dPsi + 2.0 * k2.dPsi + 2.0 * k3.dPsi + k4.dPsi);
            s.V += (h / 6.0) * (k1.dV + 2.0 * k2.dV + 2.0 * k3.dV + k4.dV);
            if (!s.x.allFinite())
                throw IntegrationBlowupError("self-consistent solve blow-up",
                                             (k * substeps + q + 1) * h);
        }
        out.traj.col(k + 1) = s.x;
        out.Psi.push_back(s.Psi);
        out.V.push_back(s.V);
    }
    return out;
}

}  // namespace

Loop periodic_orbit(const VectorField& field, const FieldJacobian& jacobian,
                    const Eigen::VectorXd& guess, const TimeGrid& grid,
                    const SolveConfig& config) {
    const int d = static_cast<int>(guess.size());
    Eigen::VectorXd x = guess;
    std::vector<double> history;
    const int substeps = auto_substeps(jacobian(0.0, guess).cwiseAbs().rowwise().sum().maxCoeff(),
                                       grid.size(), config.substeps);

    for (int it = 0; it < config.max_outer; ++it) {
        const VariationalSolution sol =
            flow_with_variational(field, jacobian, x, 1.0, grid.size(), substeps);
        const Eigen::VectorXd F = sol.trajectory.col(grid.size()) - x;
        history.push_back(F.cwiseAbs().maxCoeff());

        const Eigen::VectorXd xdot = field(0.0, x);
        const double phase_gap = (x - guess).dot(xdot);
        if (history.back() <= config.newton_tol && std::abs(phase_gap) <= 1e-9) {
            Eigen::MatrixXd samples(d, grid.size());
            for (int k = 0; k < grid.size(); ++k) samples.col(k) = sol.trajectory.col(k);
            return Loop(grid, samples);
        }

        Eigen::MatrixXd Jac(d + 1, d);
        Jac.topRows(d) = sol.frames[grid.size()] - Eigen::MatrixXd::Identity(d, d);
        Jac.row(d) = xdot.transpose();
        Eigen::VectorXd rhs(d + 1);
        rhs.head(d) = -F;
        rhs(d) = -phase_gap;
        const Eigen::VectorXd step =
            Jac.completeOrthogonalDecomposition().solve(rhs);
        x += config.damping * step;
        if (!x.allFinite()) throw SolverFailure("periodic_orbit: iterate diverged", history);
    }
    throw SolverFailure("periodic_orbit: no convergence", history);
}

CriticalPoint self_consistent_solve(const PairSpec& pair, const SolveConfig& config,
                                    SolveTrace* trace) {
    if (config.damping <= 0.0 || config.damping > 1.0)
        throw InvalidArgumentError("self_consistent_solve: damping must lie in (0, 1]");
    if (config.mu0.size() != pair.m || config.x0.size() != pair.phase.dim())
        throw InvalidArgumentError("self_consistent_solve: seed sizes do not match the pair");
    if (!pair.in_W(config.mu0))
        throw InvalidArgumentError("self_consistent_solve: initial mean lies outside W");

    const int d = pair.phase.dim();
    const int m = pair.m;
    const int N = config.grid_n;
    const TimeGrid grid(N);

    Eigen::VectorXd x0 = config.x0;
    Eigen::VectorXd mu = config.mu0;
    std::vector<double> residual_history;
    std::vector<Eigen::VectorXd> mean_history{mu};
    const int substeps = auto_substeps(
        FrozenField(pair, mu).jacobian(x0).cwiseAbs().rowwise().sum().maxCoeff(), N,
        config.substeps);

    double last_mean_update = std::numeric_limits<double>::infinity();
    bool converged = false;
    int used_iterations = 0;

    for (int it = 0; it < config.max_outer; ++it) {
        used_iterations = it + 1;
        if (!pair.in_W(mu)) {
            std::string msg = "self_consistent_solve: mean left W; trace:";
            for (const auto& v : mean_history) {
                msg += " [";
                for (int i = 0; i < v.size(); ++i)
                    msg += (i ? "," : "") + std::to_string(v(i));
                msg += "]";
            }
            throw DomainError(msg);
        }

        const FrozenField frozen(pair, mu);
        const JointSolution sol = integrate_joint(frozen, x0, N, substeps, m);

        // Closure defect and mean self-consistency defect.
        Eigen::VectorXd G(d + m);
        G.head(d) = sol.traj.col(N) - x0;
        Eigen::MatrixXd h_values(m, N);
        for (int k = 0; k < N; ++k) h_values.col(k) = pair.H_eval(sol.traj.col(k));
        const Eigen::VectorXd hbar = grid.quadrature(h_values);
        G.tail(m) = hbar - mu;

        const double gnorm = G.cwiseAbs().maxCoeff();
        residual_history.push_back(gnorm);
        if (gnorm <= config.newton_tol && last_mean_update <= config.mean_tol) {
            converged = true;
            break;
        }

        // Jacobian blocks of G in (x0, mu).
        Eigen::MatrixXd Jac = Eigen::MatrixXd::Zero(d + m, d + m);
        Jac.topLeftCorner(d, d) = sol.Psi[N] - Eigen::MatrixXd::Identity(d, d);
        Jac.topRightCorner(d, m) = sol.V[N];
        for (int k = 0; k < N; ++k) {
            const Eigen::MatrixXd g = pair.H_grad(sol.traj.col(k));  // m x 2n
            Jac.bottomLeftCorner(m, d) += g * sol.Psi[k] / N;
            Jac.bottomRightCorner(m, m) += g * sol.V[k] / N;
        }
        Jac.bottomRightCorner(m, m) -= Eigen::MatrixXd::Identity(m, m);

        // Anchor rows: never slide along continuous symmetry directions.
        std::vector<Eigen::VectorXd> anchors{frozen.field(x0)};
        if (config.symmetry_anchors)
            for (auto& a : config.symmetry_anchors(x0)) anchors.push_back(a);
        Eigen::MatrixXd full(d + m + anchors.size(), d + m);
        Eigen::VectorXd rhs(d + m + anchors.size());
        full.topRows(d + m) = Jac;
        rhs.head(d + m) = -G;
        for (std::size_t a = 0; a < anchors.size(); ++a) {
            full.row(d + m + a).setZero();
            full.row(d + m + a).head(d) = anchors[a].transpose();
            rhs(d + m + static_cast<int>(a)) = 0.0;
        }

        const Eigen::VectorXd step = full.completeOrthogonalDecomposition().solve(rhs);
        x0 += config.damping * step.head(d);
        mu += config.damping * step.tail(m);
        last_mean_update = m > 0 ? (config.damping * step.tail(m)).cwiseAbs().maxCoeff() : 0.0;
        mean_history.push_back(mu);
        if (!x0.allFinite() || !mu.allFinite())
            throw SolverFailure("self_consistent_solve: iterate diverged", residual_history);
    }

    if (trace) {
        trace->system_residuals = residual_history;
        trace->mean_history = mean_history;
        trace->iterations = used_iterations;
    }
    if (!converged)
        throw SolverFailure("self_consistent_solve: no convergence in max iterations",
                            residual_history);

    // Validation is independent of the solve path: resample the orbit, close
    // the residual seam (the defect is at the Newton tolerance) with a ramp
    // whose derivatives all vanish at the endpoints, so spectral derivatives
    // of the closed loop stay clean, then re-check residual and mean.
    const FrozenField frozen(pair, mu);
    VectorField field = [&frozen](double, const Eigen::VectorXd& x) { return frozen.field(x); };
    Eigen::MatrixXd traj = integrate_flow(field, x0, 0.0, 1.0, N * substeps);
    const Eigen::VectorXd closure = traj.col(0) - traj.col(N * substeps);
    auto ramp = [](double t) {
        if (t <= 0.0) return 0.0;
        if (t >= 1.0) return 1.0;
        const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
        return a / (a + b);
    };
    Eigen::MatrixXd samples(d, N);
    for (int k = 0; k < N; ++k)
        samples.col(k) = traj.col(k * substeps) + ramp(grid.node(k)) * closure;
    Loop loop(grid, std::move(samples));

    CriticalPoint cp{pair, loop, mean_value(pair, loop), 0.0, Eigen::VectorXd()};
    if (!cp.mean.in_domain)
        throw SolverFailure("self_consistent_solve: converged mean outside W", residual_history);
    cp.residual_norm = critical_residual(pair, loop).max_norm();
    cp.covector = pair.f_grad(cp.mean.value);
    if ((cp.mean.value - mu).cwiseAbs().maxCoeff() > 10.0 * config.mean_tol + 1e-12)
        throw SolverFailure("self_consistent_solve: mean self-consistency check failed",
                            residual_history);
    if (cp.residual_norm > config.accept_tol)
        throw SolverFailure("self_consistent_solve: residual above acceptance tolerance (" +
                                std::to_string(cp.residual_norm) + ")",
                            residual_history);
    return cp;
}

CriticalPoint bov_solve(int k, const SolveConfig& config, SolveTrace* trace) {
    if (k < 1) throw InvalidArgumentError("bov_solve: winding k must be >= 1");
    SystemSpec sys = make_system("example4-bov");
    SolveConfig cfg = config;
    if (cfg.x0.size() == 0) cfg.x0 = sys.seed_point(k);
    if (cfg.mu0.size() == 0) cfg.mu0 = sys.seed_mean(k);
    if (!cfg.symmetry_anchors)
        cfg.symmetry_anchors = [](const Eigen::VectorXd& x) {
            // Simultaneous rotation of z and w.
            std::vector<Eigen::VectorXd> a;
            a.push_back((Eigen::VectorXd(4) << -x(1), x(0), -x(3), x(2)).finished());
            return a;
        };

    CriticalPoint cp = self_consistent_solve(sys.pair, cfg, trace);

    // Independent check through the closed second-order equation in z.
    PlanarLoop z{cp.loop.grid, cp.loop.samples.topRows(2)};
    const double second_order = bov_residual(z).max_norm();
    if (second_order > cfg.accept_tol)
        throw SolverFailure("bov_solve: second-order residual above tolerance (" +
                                std::to_string(second_order) + ")",
                            {second_order});
    return cp;
}

SolveConfig default_config_for(const SystemSpec& sys, int k) {
    SolveConfig cfg;
    cfg.x0 = sys.seed_point(k);
    cfg.mu0 = sys.seed_mean(k);
    if (sys.name == "example4-bov") {
        cfg.symmetry_anchors = [](const Eigen::VectorXd& x) {
            std::vector<Eigen::VectorXd> a;
            a.push_back((Eigen::VectorXd(4) << -x(1), x(0), -x(3), x(2)).finished());
            return a;
        };
    } else if (sys.name == "example5-coupled-oscillators") {
        cfg.symmetry_anchors = [](const Eigen::VectorXd& x) {
            const int m = static_cast<int>(x.size()) / 2;
            std::vector<Eigen::VectorXd> a;
            for (int j = 0; j < m; ++j) {
                Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * m);
                g(j) = -x(m + j);
                g(m + j) = x(j);
                a.push_back(std::move(g));
            }
            return a;
        };
    }
    return cfg;
}

}  // namespace meanloop
