#include "meanloop/pair.hpp"

#include <cmath>
#include <random>

#include "meanloop/errors.hpp"
#include "meanloop/fourier.hpp"

namespace meanloop {

MeanValue mean_value(const PairSpec& pair, const Loop& u) {
    const int N = u.size();
    Eigen::MatrixXd values(pair.m, N);
    for (int k = 0; k < N; ++k) values.col(k) = pair.H_eval(u.samples.col(k));
    MeanValue mv;
    mv.value = u.grid.quadrature(values);
    mv.in_domain = pair.in_W(mv.value);
    return mv;
}

namespace {

Eigen::VectorXd mean_or_throw(const PairSpec& pair, const Loop& u) {
    MeanValue mv = mean_value(pair, u);
    if (!mv.in_domain) throw DomainError("mean value of H lies outside W");
    return mv.value;
}

}  // namespace

double action(const PairSpec& pair, const Loop& u) {
    const Eigen::VectorXd mu = mean_or_throw(pair, u);
    const Eigen::MatrixXd du = fourier::derivative(u.samples);
    const int N = u.size();
    Eigen::VectorXd integrand(N);
    for (int k = 0; k < N; ++k)
        integrand(k) = pair.phase.omega(u.samples.col(k), du.col(k));
    return 0.5 * u.grid.quadrature(integrand) - pair.f_eval(mu);
}

FieldAlongLoop critical_residual(const PairSpec& pair, const Loop& u) {
    const Eigen::VectorXd mu = mean_or_throw(pair, u);
    const Eigen::VectorXd c = pair.f_grad(mu);
    Eigen::MatrixXd r = fourier::derivative(u.samples);
    for (int k = 0; k < u.size(); ++k)
        r.col(k) -= pair.field_cH(u.samples.col(k), c);
    return FieldAlongLoop(u.grid, std::move(r));
}

PairSpec product_pair(const std::vector<PairSpec>& factors, CouplingFunction f) {
    if (factors.empty()) throw InvalidArgumentError("product_pair: empty factor list");
    const int m = static_cast<int>(factors.size());
    int n_total = 0;
    for (const auto& fac : factors) {
        if (fac.m != 1)
            throw InvalidArgumentError("product_pair: every factor needs a scalar Hamiltonian");
        n_total += fac.phase.n();
    }

    // Global index maps: factor j's q block and p block inside (q..., p...).
    std::vector<int> q_offset(m), n_of(m);
    {
        int off = 0;
        for (int j = 0; j < m; ++j) {
            q_offset[j] = off;
            n_of[j] = factors[j].phase.n();
            off += n_of[j];
        }
    }

    auto extract = [=](const Eigen::VectorXd& x, int j) {
        Eigen::VectorXd xj(2 * n_of[j]);
        xj.head(n_of[j]) = x.segment(q_offset[j], n_of[j]);
        xj.tail(n_of[j]) = x.segment(n_total + q_offset[j], n_of[j]);
        return xj;
    };
    auto scatter = [=](Eigen::VectorXd& x, int j, const Eigen::VectorXd& xj) {
        x.segment(q_offset[j], n_of[j]) = xj.head(n_of[j]);
        x.segment(n_total + q_offset[j], n_of[j]) = xj.tail(n_of[j]);
    };

    PairSpec out;
    out.phase = PhaseSpace(n_total);
    out.m = m;
    out.commuting_by_construction = true;

    out.H_eval = [factors, extract, m](const Eigen::VectorXd& x) {
        Eigen::VectorXd h(m);
        for (int j = 0; j < m; ++j) h(j) = factors[j].H_eval(extract(x, j))(0);
        return h;
    };
    out.H_grad = [factors, extract, scatter, m, n_total](const Eigen::VectorXd& x) {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, 2 * n_total);
        for (int j = 0; j < m; ++j) {
            Eigen::VectorXd gj = factors[j].H_grad(extract(x, j)).row(0);
            Eigen::VectorXd row = Eigen::VectorXd::Zero(2 * n_total);
            scatter(row, j, gj);
            g.row(j) = row;
        }
        return g;
    };
    out.H_hess = [factors, extract, m, n_total, q_offset, n_of](const Eigen::VectorXd& x) {
        std::vector<Eigen::MatrixXd> hs;
        hs.reserve(m);
        for (int j = 0; j < m; ++j) {
            Eigen::MatrixXd hj = factors[j].H_hess(extract(x, j))[0];
            Eigen::MatrixXd big = Eigen::MatrixXd::Zero(2 * n_total, 2 * n_total);
            const int nj = n_of[j];
            // Scatter the 2x2 block structure (qq, qp; pq, pp) of factor j.
            auto gi = [&](int local) {
                return local < nj ? q_offset[j] + local : n_total + q_offset[j] + (local - nj);
            };
            for (int a = 0; a < 2 * nj; ++a)
                for (int b = 0; b < 2 * nj; ++b) big(gi(a), gi(b)) = hj(a, b);
            hs.push_back(std::move(big));
        }
        return hs;
    };
    out.f_eval = std::move(f.f);
    out.f_grad = std::move(f.df);
    out.f_hess = std::move(f.d2f);
    out.in_W = std::move(f.in_W);
    return out;
}

CommutingReport is_commuting(const PairSpec& pair, int sample_count, std::uint64_t seed,
                             double tol) {
    CommutingReport rep;
    if (pair.m <= 1 || pair.commuting_by_construction) {
        rep.commuting = true;
        return rep;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    for (int s = 0; s < sample_count; ++s) {
        Eigen::VectorXd x(pair.phase.dim());
        for (int i = 0; i < x.size(); ++i) x(i) = pair.sample_scale * gauss(rng);
        if (pair.sample_center.size() == x.size()) x += pair.sample_center;
        if (!std::isfinite(pair.H_eval(x).sum())) continue;
        const Eigen::MatrixXd g = pair.H_grad(x);
        for (int i = 0; i < pair.m; ++i) {
            const Eigen::VectorXd xi = pair.phase.applyJ(g.row(i).transpose());
            for (int j = i + 1; j < pair.m; ++j) {
                const Eigen::VectorXd xj = pair.phase.applyJ(g.row(j).transpose());
                rep.max_bracket = std::max(rep.max_bracket,
                                           std::abs(pair.phase.omega(xi, xj)));
            }
        }
    }
    rep.commuting = rep.max_bracket <= tol;
    return rep;
}

double pair_gradient_self_check(const PairSpec& pair, int sample_count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    const int d = pair.phase.dim();
    const double step = 1e-6;
    double worst = 0.0;
    for (int s = 0; s < sample_count; ++s) {
        Eigen::VectorXd x(d);
        for (int i = 0; i < d; ++i) x(i) = pair.sample_scale * gauss(rng);
        if (pair.sample_center.size() == x.size()) x += pair.sample_center;
        const Eigen::MatrixXd g = pair.H_grad(x);
        for (int i = 0; i < d; ++i) {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
            e(i) = step;
            const Eigen::VectorXd fd = (pair.H_eval(x + e) - pair.H_eval(x - e)) / (2.0 * step);
            if (!fd.allFinite()) continue;
            worst = std::max(worst, (fd - g.col(i)).cwiseAbs().maxCoeff());
        }
    }
    return worst;
}

}  // namespace meanloop
