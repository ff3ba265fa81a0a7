#include "meanloop/twisted_operator.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <random>

#include "meanloop/errors.hpp"
#include "meanloop/fourier.hpp"

namespace meanloop {

void OperatorSpec::validate(double tol) const {
    if (Phi.rows() != phase.dim() || Phi.cols() != phase.dim())
        throw InvalidArgumentError("OperatorSpec: Phi has the wrong shape");
    if (phase.symplectic_defect(Phi) > tol)
        throw InvalidArgumentError("OperatorSpec: Phi does not preserve omega");
    if (A.rows() != m() || A.cols() != m())
        throw InvalidArgumentError("OperatorSpec: A has the wrong shape");
    if (m() > 0 && (A - A.transpose()).cwiseAbs().maxCoeff() > 0.0)
        throw InvalidArgumentError("OperatorSpec: A is not symmetric");
    for (const auto& y : Ys)
        if (y.rows() != phase.dim() || y.cols() != grid.size())
            throw InvalidArgumentError("OperatorSpec: curve sample shape mismatch");
}

OperatorSpec OperatorSpec::resampled(int new_N) const {
    OperatorSpec out{phase, Phi, {}, {}, A, TimeGrid(new_N)};
    out.Ys.reserve(Ys.size());
    const Eigen::VectorXd t = out.grid.nodes();
    for (int j = 0; j < m(); ++j) out.Ys.push_back(fourier::resample(Ys[j], t));
    if (Ys_end.size() > 0) out.Ys_end = Ys_end;
    return out;
}

FieldAlongLoop apply(const OperatorSpec& spec, const FieldAlongLoop& xi) {
    if (!(xi.grid == spec.grid) || xi.dim() != spec.phase.dim())
        throw InvalidArgumentError("apply: field does not match the operator grid");
    const int N = spec.grid.size();
    const double h = spec.grid.h();
    const int mm = spec.m();

    const Eigen::VectorXd c = nonlocal_coefficients(spec, xi.samples);
    const Eigen::VectorXd beta = mm > 0 ? Eigen::VectorXd(spec.A.transpose() * c)
                                        : Eigen::VectorXd();

    Eigen::MatrixXd out(xi.dim(), N);
    for (int k = 0; k < N; ++k) {
        const Eigen::VectorXd next =
            (k + 1 < N) ? xi.samples.col(k + 1).eval()
                        : Eigen::VectorXd(spec.Phi * xi.samples.col(0));
        Eigen::VectorXd v = spec.phase.applyJ((next - xi.samples.col(k)) / h);
        for (int j = 0; j < mm; ++j) v += beta(j) * spec.y_mid(j, k);
        out.col(k) = v;
    }
    return FieldAlongLoop(spec.grid, std::move(out));
}

Eigen::VectorXd nonlocal_coefficients(const OperatorSpec& spec, const Eigen::MatrixXd& xi_nodes) {
    const int N = spec.grid.size();
    const double h = spec.grid.h();
    const int mm = spec.m();
    Eigen::VectorXd c = Eigen::VectorXd::Zero(mm);
    for (int k = 0; k < N; ++k) {
        const Eigen::VectorXd next =
            (k + 1 < N) ? xi_nodes.col(k + 1).eval() : Eigen::VectorXd(spec.Phi * xi_nodes.col(0));
        const Eigen::VectorXd cell = 0.5 * (xi_nodes.col(k) + next);
        for (int i = 0; i < mm; ++i) c(i) += h * spec.y_mid(i, k).dot(cell);
    }
    return c;
}

Eigen::MatrixXd assemble_matrix(const OperatorSpec& spec) {
    const int N = spec.grid.size();
    const int d = spec.phase.dim();
    const double h = spec.grid.h();
    const int mm = spec.m();
    const Eigen::MatrixXd J = spec.phase.J();

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N * d, N * d);
    // Local part: row block k holds J (xi_{k+1} - xi_k)/h with the Phi wrap.
    for (int k = 0; k < N; ++k) {
        M.block(k * d, k * d, d, d) -= J / h;
        if (k + 1 < N)
            M.block(k * d, (k + 1) * d, d, d) += J / h;
        else
            M.block(k * d, 0, d, d) += J * spec.Phi / h;
    }

    if (mm == 0) return M;

    // Nonlocal rank <= m part: columns of curve values times quadrature rows.
    Eigen::MatrixXd cols(N * d, mm);   // col j: Y_j on midpoints
    Eigen::MatrixXd rows(N * d, mm);   // row i: gradient of c_i w.r.t. samples
    for (int j = 0; j < mm; ++j)
        for (int k = 0; k < N; ++k) cols.block(k * d, j, d, 1) = spec.y_mid(j, k);
    for (int i = 0; i < mm; ++i) {
        for (int l = 0; l < N; ++l) {
            Eigen::VectorXd w = spec.y_mid(i, l);
            if (l > 0)
                w += spec.y_mid(i, l - 1);
            else
                w += spec.Phi.transpose() * spec.y_mid(i, N - 1);
            rows.block(l * d, i, d, 1) = 0.5 * h * w;
        }
    }
    M += cols * spec.A.transpose() * rows.transpose();
    return M;
}

double symmetry_defect(const OperatorSpec& spec, int trials, std::uint64_t seed) {
    const int N = spec.grid.size();
    const int d = spec.phase.dim();
    const double h = spec.grid.h();

    auto twisted_field = [&](std::uint64_t s) {
        Eigen::MatrixXd zeta = fourier::random_band_limited(d, spec.grid, 4, s);
        const Eigen::VectorXd jump = (spec.Phi - Eigen::MatrixXd::Identity(d, d)) * zeta.col(0);
        Eigen::MatrixXd xi = zeta;
        for (int k = 0; k < N; ++k) xi.col(k) += spec.grid.node(k) * jump;
        return FieldAlongLoop(spec.grid, std::move(xi));
    };
    // Pairs midpoint-valued images against cell averages of node-valued fields.
    auto pairing = [&](const FieldAlongLoop& image, const FieldAlongLoop& eta) {
        double acc = 0.0;
        for (int k = 0; k < N; ++k) {
            const Eigen::VectorXd next = (k + 1 < N)
                                             ? eta.samples.col(k + 1).eval()
                                             : Eigen::VectorXd(spec.Phi * eta.samples.col(0));
            acc += h * image.samples.col(k).dot(0.5 * (eta.samples.col(k) + next));
        }
        return acc;
    };

    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const FieldAlongLoop xi = twisted_field(seed + 2 * t);
        const FieldAlongLoop eta = twisted_field(seed + 2 * t + 1);
        const FieldAlongLoop dxi = apply(spec, xi);
        const FieldAlongLoop deta = apply(spec, eta);
        worst = std::max(worst, std::abs(pairing(dxi, eta) - pairing(deta, xi)));
    }
    return worst;
}

SpectralReport numerical_nullity(const Eigen::MatrixXd& matrix, double atol, double rtol,
                                 int bound) {
    if (matrix.rows() != matrix.cols())
        throw InvalidArgumentError("numerical_nullity: matrix must be square");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(matrix);
    if (svd.info() != Eigen::Success) throw NumericalError("numerical_nullity: SVD failed");

    SpectralReport rep;
    rep.singular_values = svd.singularValues();
    const double sigma_max = rep.singular_values.size() ? rep.singular_values(0) : 0.0;
    rep.tolerance_used = std::max(atol, rtol * sigma_max);
    rep.nullity = static_cast<int>(
        (rep.singular_values.array() < rep.tolerance_used).count());
    rep.bound = bound;
    rep.bound_satisfied = bound < 0 || rep.nullity <= bound;
    return rep;
}

RefinedNullity refined_nullity(const std::function<Eigen::MatrixXd(int)>& assemble_at, int N,
                               const NullityOptions& opts) {
    RefinedNullity out;
    out.report = numerical_nullity(assemble_at(N), opts.atol_base * std::sqrt(double(N)),
                                   opts.rtol, opts.bound);
    const Eigen::VectorXd& sv = out.report.singular_values;
    const int total = static_cast<int>(sv.size());

    std::vector<double> cand;  // ascending tail below the candidate cut
    for (int i = total - 1; i >= 0 && sv(i) < opts.candidate_cut; --i) cand.push_back(sv(i));
    if (cand.empty()) {
        out.report.nullity = 0;
        out.report.bound_satisfied = opts.bound < 0 || 0 <= opts.bound;
        return out;
    }

    const SpectralReport fine = numerical_nullity(
        assemble_at(2 * N), opts.atol_base * std::sqrt(2.0 * N), opts.rtol, opts.bound);
    const Eigen::VectorXd& fv = fine.singular_values;
    const int fine_total = static_cast<int>(fv.size());

    out.refinement_ran = true;
    out.candidates_base = Eigen::Map<const Eigen::VectorXd>(cand.data(), cand.size());
    out.candidates_refined.resize(cand.size());

    int nullity = 0;
    for (std::size_t q = 0; q < cand.size(); ++q) {
        const double refined = fv(fine_total - 1 - static_cast<int>(q));
        out.candidates_refined(static_cast<int>(q)) = refined;
        const bool kernel =
            refined <= std::max(fine.tolerance_used, opts.decrease_ratio * cand[q]);
        if (!kernel) break;  // kernel directions occupy the bottom of the spectrum
        ++nullity;
    }
    out.report.nullity = nullity;
    out.report.bound_satisfied = opts.bound < 0 || nullity <= opts.bound;
    return out;
}

Eigen::VectorXd gamma_embedding(const OperatorSpec& spec, const FieldAlongLoop& xi) {
    Eigen::VectorXd g(spec.phase.dim() + spec.m());
    g.head(spec.phase.dim()) = xi.samples.col(0);
    g.tail(spec.m()) = nonlocal_coefficients(spec, xi.samples);
    return g;
}

FieldAlongLoop reconstruct_from_gamma(const OperatorSpec& spec, const Eigen::VectorXd& gamma) {
    const int N = spec.grid.size();
    const int d = spec.phase.dim();
    const double h = spec.grid.h();
    const int mm = spec.m();
    if (gamma.size() != d + mm)
        throw InvalidArgumentError("reconstruct_from_gamma: wrong embedding size");

    const Eigen::VectorXd beta =
        mm > 0 ? Eigen::VectorXd(spec.A.transpose() * gamma.tail(mm)) : Eigen::VectorXd();
    Eigen::MatrixXd xi(d, N);
    Eigen::VectorXd acc = gamma.head(d);
    xi.col(0) = acc;
    for (int k = 1; k < N; ++k) {
        Eigen::VectorXd drift = Eigen::VectorXd::Zero(d);
        for (int j = 0; j < mm; ++j) drift += beta(j) * spec.y_mid(j, k - 1);
        acc += h * spec.phase.applyJ(drift);
        xi.col(k) = acc;
    }
    return FieldAlongLoop(spec.grid, std::move(xi));
}

CommutingKernel commuting_kernel(const OperatorSpec& spec, double assumption_tol) {
    const int d = spec.phase.dim();
    const int mm = spec.m();
    const int N = spec.grid.size();

    for (int j = 0; j < mm; ++j) {
        const Eigen::VectorXd y0 = spec.Ys[j].col(0);
        double dev = (spec.y_end(j) - y0).cwiseAbs().maxCoeff();
        for (int k = 1; k < N; ++k)
            dev = std::max(dev, (spec.Ys[j].col(k) - y0).cwiseAbs().maxCoeff());
        if (dev > assumption_tol)
            throw PreconditionError("commuting_kernel: assumption (i) fails, Y_" +
                                    std::to_string(j + 1) + " depends on time");
    }
    for (int i = 0; i < mm; ++i)
        for (int j = i + 1; j < mm; ++j)
            if (std::abs(spec.phase.omega(spec.Ys[i].col(0), spec.Ys[j].col(0))) > assumption_tol)
                throw PreconditionError(
                    "commuting_kernel: assumption (ii) fails, omega(Y_i, Y_j) != 0");

    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < mm; ++i)
        for (int j = 0; j < mm; ++j)
            B += spec.A(i, j) * spec.phase.applyJ(spec.Ys[j].col(0)) *
                 spec.Ys[i].col(0).transpose();

    const Eigen::MatrixXd K = spec.Phi - Eigen::MatrixXd::Identity(d, d) - B;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(K, Eigen::ComputeFullV);
    const Eigen::VectorXd sv = svd.singularValues();
    const double tol = std::max(1e-10, 1e-12 * (sv.size() ? sv(0) : 0.0));

    CommutingKernel out;
    out.dimension = static_cast<int>((sv.array() < tol).count());
    out.basis0 = svd.matrixV().rightCols(out.dimension);
    for (int q = 0; q < out.dimension; ++q) {
        const Eigen::VectorXd xi0 = out.basis0.col(q);
        const Eigen::VectorXd drift = B * xi0;
        Eigen::MatrixXd samples(d, N);
        for (int k = 0; k < N; ++k) samples.col(k) = xi0 + spec.grid.node(k) * drift;
        out.fields.emplace_back(spec.grid, std::move(samples));
    }
    return out;
}

OperatorSpec random_instance(int n, int m, std::uint64_t seed, bool commuting, int N) {
    if (n < 1 || m < 0) throw InvalidArgumentError("random_instance: need n >= 1, m >= 0");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    const int d = 2 * n;
    const PhaseSpace phase(n);

    auto random_symmetric = [&](int dim, double scale) {
        Eigen::MatrixXd g(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) g(i, j) = gauss(rng);
        return Eigen::MatrixXd(scale * 0.5 * (g + g.transpose()));
    };

    OperatorSpec spec{phase, Eigen::MatrixXd(), {}, {}, Eigen::MatrixXd::Zero(m, m),
                      TimeGrid(N)};

    // Hamiltonian generator keeps Phi symplectic: Phi = exp(J S), S = S^T.
    const Eigen::MatrixXd S = random_symmetric(d, 0.6 / std::sqrt(double(d)));
    const Eigen::MatrixXd generator = phase.J() * S;
    Eigen::MatrixXd Phi = generator.exp();

    if (m > 0) spec.A = random_symmetric(m, 1.0);

    if (commuting) {
        // Constant curves drawn from an omega-isotropic family: the first n
        // columns of a symplectic matrix span a Lagrangian subspace.
        const Eigen::MatrixXd S2 = random_symmetric(d, 0.7 / std::sqrt(double(d)));
        const Eigen::MatrixXd Q = Eigen::MatrixXd((phase.J() * S2).exp()).leftCols(n);
        for (int j = 0; j < m; ++j) {
            Eigen::VectorXd g(n);
            for (int i = 0; i < n; ++i) g(i) = gauss(rng);
            const Eigen::VectorXd y = Q * g;
            spec.Ys.push_back(y.replicate(1, N));
        }
        // A slice of instances twists by I + B, which is symplectic exactly
        // when the curves are isotropic; there the closed-form kernel is all
        // of R^{2n}, exercising the nonzero-nullity branch.
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        if (m > 0 && unif(rng) < 0.15) {
            Eigen::MatrixXd B = Eigen::MatrixXd::Zero(d, d);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    B += spec.A(i, j) * phase.applyJ(spec.Ys[j].col(0)) *
                         spec.Ys[i].col(0).transpose();
            Phi = Eigen::MatrixXd::Identity(d, d) + B;
        }
    } else {
        for (int j = 0; j < m; ++j) {
            std::uniform_int_distribution<std::uint64_t> sub(0, ~std::uint64_t(0));
            spec.Ys.push_back(fourier::random_band_limited(d, spec.grid, 3, sub(rng)));
        }
    }

    spec.Phi = std::move(Phi);
    return spec;
}

SpectralEdges estimate_spectral_edges(const Eigen::MatrixXd& M, int block, int iters,
                                      std::uint64_t seed) {
    SpectralEdges out;
    const int dim = static_cast<int>(M.rows());
    block = std::min(block, dim);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;

    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = gauss(rng);
    v.normalize();
    for (int it = 0; it < 12; ++it) {
        v = M.transpose() * (M * v);
        const double nrm = v.norm();
        if (nrm == 0.0) break;
        v /= nrm;
    }
    out.sigma_max = (M * v).norm();

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    Eigen::MatrixXd V(dim, block);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < block; ++j) V(i, j) = gauss(rng);
    for (int it = 0; it < iters; ++it) {
        // one step of inverse iteration on M^T M
        V = lu.solve(Eigen::MatrixXd(lu.transpose().solve(V)));
        if (!V.allFinite()) return out;  // singular to working precision
        const Eigen::HouseholderQR<Eigen::MatrixXd> qr(V);
        V = qr.householderQ() * Eigen::MatrixXd::Identity(dim, block);
    }
    const Eigen::MatrixXd W = M * V;
    Eigen::JacobiSVD<Eigen::MatrixXd> ritz(W);
    out.sigma_min = ritz.singularValues().minCoeff();
    out.usable = true;
    return out;
}

}  // namespace meanloop
