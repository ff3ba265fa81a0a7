#include "meanloop/monoid.hpp"

#include <cmath>

#include "meanloop/errors.hpp"
#include "meanloop/fourier.hpp"

namespace meanloop {

namespace {
double frac(double x) {
    double f = x - std::floor(x);
    if (f >= 1.0) f -= 1.0;  // guard against rounding at the seam
    return f;
}
}  // namespace

MonoidElement make_element(int n, double r) {
    if (n == 0) throw InvalidArgumentError("MonoidElement: n must be nonzero");
    return MonoidElement{n, frac(r)};
}

MonoidElement compose(const MonoidElement& g1, const MonoidElement& g2) {
    return make_element(g1.n * g2.n, g1.n * g2.r + g1.r);
}

Loop act(const MonoidElement& g, const Loop& u) {
    const int N = u.size();
    Eigen::VectorXd at(N);
    for (int k = 0; k < N; ++k) at(k) = frac(g.n * u.grid.node(k) + g.r);
    return Loop(u.grid, fourier::resample(u.samples, at));
}

PairSpec pullback_pair(const MonoidElement& g, const PairSpec& pair) {
    PairSpec out = pair;
    const double scale = 1.0 / g.n;
    auto f = pair.f_eval;
    auto df = pair.f_grad;
    auto d2f = pair.f_hess;
    out.f_eval = [f, scale](const Eigen::VectorXd& v) { return scale * f(v); };
    out.f_grad = [df, scale](const Eigen::VectorXd& v) {
        return Eigen::VectorXd(scale * df(v));
    };
    out.f_hess = [d2f, scale](const Eigen::VectorXd& v) {
        return Eigen::MatrixXd(scale * d2f(v));
    };
    return out;
}

PropositionReport proposition_check(const PairSpec& pair, const MonoidElement& g, const Loop& u,
                                    double tol) {
    PropositionReport rep;
    rep.tol = tol;
    rep.residual_pullback = critical_residual(pullback_pair(g, pair), u).max_norm();
    rep.residual_iterate = critical_residual(pair, act(g, u)).max_norm();
    rep.pullback_critical = rep.residual_pullback <= tol;
    rep.iterate_critical = rep.residual_iterate <= tol;
    rep.agree = rep.pullback_critical == rep.iterate_critical;
    return rep;
}

}  // namespace meanloop
