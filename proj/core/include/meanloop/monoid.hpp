#pragma once

#include "meanloop/loop.hpp"
#include "meanloop/pair.hpp"

namespace meanloop {

/// Element (n, r) of the iteration-and-shift monoid: n a nonzero integer,
/// r a circle coordinate normalized to [0, 1).
struct MonoidElement {
    int n = 1;
    double r = 0.0;
};

MonoidElement make_element(int n, double r);

/// (n1, r1) (n2, r2) = (n1 n2, n1 r2 + r1 mod 1).
MonoidElement compose(const MonoidElement& g1, const MonoidElement& g2);

/// Reparametrized loop t -> u(n t + r), resampled by trigonometric
/// interpolation. The realized composition order is
///   act(compose(g1, g2), u) == act(g2, act(g1, u)),
/// i.e. the monoid acts on the right; this orientation is fixed by the
/// numerical composition test.
Loop act(const MonoidElement& g, const Loop& u);

/// The pulled-back pair (f/n, H); the admissible set W is unchanged, so the
/// domains of the two action functionals coincide.
PairSpec pullback_pair(const MonoidElement& g, const PairSpec& pair);

/// Both sides of the iteration equivalence, by residual:
/// u critical for the pulled-back pair  <=>  the iterate acts(g, u) critical
/// for the original pair.
struct PropositionReport {
    double residual_pullback = 0.0;   // ||residual of (f/n, H) at u||_inf
    double residual_iterate = 0.0;    // ||residual of (f, H) at act(g, u)||_inf
    bool pullback_critical = false;
    bool iterate_critical = false;
    bool agree = false;               // the two verdicts coincide
    double tol = 0.0;
};

PropositionReport proposition_check(const PairSpec& pair, const MonoidElement& g, const Loop& u,
                                    double tol = 1e-7);

}  // namespace meanloop
