#include "meanloop/hessian.hpp"

#include <cmath>
#include <numbers>

#include "meanloop/errors.hpp"
#include "meanloop/flow.hpp"

namespace meanloop {

Eigen::MatrixXd spectral_derivative_matrix(int N) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(N, N);
    for (int k = 0; k < N; ++k) {
        for (int l = 0; l < N; ++l) {
            if (k == l) continue;
            const double arg = std::numbers::pi * (k - l) / N;
            const double sign = ((k - l) % 2 == 0) ? 1.0 : -1.0;
            D(k, l) = (N % 2 == 0) ? std::numbers::pi * sign / std::tan(arg)
                                   : std::numbers::pi * sign / std::sin(arg);
        }
    }
    return D;
}

namespace {

struct OrbitData {
    Loop loop;
    std::vector<Eigen::MatrixXd> Psi;  // N+1 frames, Psi[0] = I
    Eigen::VectorXd end_state;
};

OrbitData rebuild_orbit(const CriticalPoint& cp, int N, bool with_frames) {
    const Eigen::VectorXd c = cp.covector;
    const PairSpec& pair = cp.pair;
    VectorField field = [&pair, c](double, const Eigen::VectorXd& x) {
        return pair.field_cH(x, c);
    };
    const TimeGrid grid(N);
    const int substeps = auto_substeps(
        pair.field_jacobian_cH(cp.loop.samples.col(0), c).cwiseAbs().rowwise().sum().maxCoeff(),
        N);
    if (!with_frames) {
        return OrbitData{sample_orbit(field, cp.loop.samples.col(0), grid, substeps), {},
                         Eigen::VectorXd()};
    }
    FieldJacobian jac = [&pair, c](double, const Eigen::VectorXd& x) {
        return pair.field_jacobian_cH(x, c);
    };
    VariationalSolution sol =
        flow_with_variational(field, jac, cp.loop.samples.col(0), 1.0, N, substeps);
    Eigen::MatrixXd samples = sol.trajectory.leftCols(N);
    return OrbitData{Loop(grid, std::move(samples)), std::move(sol.frames),
                     sol.trajectory.col(N)};
}

void check_critical(const CriticalPoint& cp, double gate, const char* who) {
    if (cp.residual_norm > gate)
        throw PreconditionError(std::string(who) + ": input is not critical (residual " +
                                std::to_string(cp.residual_norm) + ")");
}

}  // namespace

Eigen::MatrixXd direct_hessian(const CriticalPoint& cp, int N, double residual_gate) {
    check_critical(cp, residual_gate, "direct_hessian");
    if (N == 0) N = cp.loop.grid.size();
    const OrbitData orbit = rebuild_orbit(cp, N, false);
    const PairSpec& pair = cp.pair;
    const int d = pair.phase.dim();
    const int m = pair.m;
    const Eigen::VectorXd mu = cp.mean.value;
    const Eigen::VectorXd c = cp.covector;
    const Eigen::MatrixXd a = pair.f_hess(mu);
    const Eigen::MatrixXd Dspec = spectral_derivative_matrix(N);

    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(N * d, N * d);
    for (int k = 0; k < N; ++k)
        for (int l = 0; l < N; ++l)
            if (Dspec(k, l) != 0.0)
                L.block(k * d, l * d, d, d) =
                    Dspec(k, l) * Eigen::MatrixXd::Identity(d, d);
    for (int k = 0; k < N; ++k)
        L.block(k * d, k * d, d, d) -= pair.field_jacobian_cH(orbit.loop.samples.col(k), c);

    if (m > 0) {
        Eigen::MatrixXd cols(N * d, m);  // J grad H_j along the orbit
        Eigen::MatrixXd rows(N * d, m);  // quadrature weights of delta_i
        for (int k = 0; k < N; ++k) {
            const Eigen::MatrixXd g = pair.H_grad(orbit.loop.samples.col(k));  // m x 2n
            for (int j = 0; j < m; ++j) {
                cols.block(k * d, j, d, 1) = pair.phase.applyJ(g.row(j).transpose());
                rows.block(k * d, j, d, 1) = g.row(j).transpose() / N;
            }
        }
        L -= cols * a.transpose() * rows.transpose();
    }
    return L;
}

OperatorSpec reduce_to_operator(const CriticalPoint& cp, int N, double residual_gate) {
    check_critical(cp, residual_gate, "reduce_to_operator");
    if (N == 0) N = cp.loop.grid.size();
    const OrbitData orbit = rebuild_orbit(cp, N, true);
    const PairSpec& pair = cp.pair;
    const int d = pair.phase.dim();
    const int m = pair.m;

    const Eigen::MatrixXd& Psi1 = orbit.Psi[N];
    OperatorSpec spec{pair.phase, pair.phase.symplectic_inverse(Psi1), {}, {},
                      pair.f_hess(cp.mean.value), TimeGrid(N)};
    spec.Ys.reserve(m);
    for (int i = 0; i < m; ++i) spec.Ys.push_back(Eigen::MatrixXd(d, N));
    spec.Ys_end.resize(d, m);
    for (int k = 0; k <= N; ++k) {
        const Eigen::VectorXd x =
            (k < N) ? orbit.loop.samples.col(k).eval() : orbit.end_state;
        const Eigen::MatrixXd g = pair.H_grad(x);  // m x 2n
        for (int i = 0; i < m; ++i) {
            const Eigen::VectorXd y = -orbit.Psi[k].transpose() * g.row(i).transpose();
            if (k < N)
                spec.Ys[i].col(k) = y;
            else
                spec.Ys_end.col(i) = y;
        }
    }
    return spec;
}

NullityReport nullity_report(const CriticalPoint& cp, NullityOptions opts) {
    NullityReport rep;
    rep.commuting =
        cp.pair.commuting_by_construction || is_commuting(cp.pair).commuting;
    rep.bound_A = cp.pair.phase.dim() + cp.pair.m;
    rep.bound_B = rep.commuting ? cp.pair.phase.dim() : -1;
    const int bound = rep.commuting ? rep.bound_B : rep.bound_A;
    const int N = cp.loop.grid.size();

    NullityOptions o = opts;
    o.bound = bound;
    const RefinedNullity direct =
        refined_nullity([&](int n) { return direct_hessian(cp, n); }, N, o);
    const RefinedNullity reduced = refined_nullity(
        [&](int n) { return assemble_matrix(reduce_to_operator(cp, n)); }, N, o);

    rep.nullity_direct = direct.report.nullity;
    rep.nullity_reduced = reduced.report.nullity;
    rep.spectrum_direct = direct.report.singular_values;
    rep.spectrum_reduced = reduced.report.singular_values;
    rep.routes_agree = rep.nullity_direct == rep.nullity_reduced;
    rep.bounds_hold = rep.nullity_direct <= rep.bound_A &&
                      rep.nullity_reduced <= rep.bound_A &&
                      (!rep.commuting || (rep.nullity_direct <= rep.bound_B &&
                                          rep.nullity_reduced <= rep.bound_B));
    return rep;
}

}  // namespace meanloop
