#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "meanloop/loop.hpp"
#include "meanloop/phase_space.hpp"

namespace meanloop {

/// Data of a twisted-loop operator on fields xi: [0,1] -> R^{2n} with
/// xi(1) = Phi xi(0):
///
///   (D xi)(t) = J xi'(t) + sum_{ij} a_ij ( int <Y_i(s), xi(s)> ds ) Y_j(t).
///
/// Phi is a linear symplectomorphism, A = {a_ij} symmetric, and the Y_j are
/// smooth curves sampled on the grid nodes (plus an explicit terminal sample,
/// since the curves need not be periodic).
struct OperatorSpec {
    PhaseSpace phase;
    Eigen::MatrixXd Phi;                // 2n x 2n
    std::vector<Eigen::MatrixXd> Ys;    // m curves, each 2n x N (node samples)
    Eigen::MatrixXd Ys_end;             // 2n x m, values Y_j(1); empty => Y_j(0)
    Eigen::MatrixXd A;                  // m x m symmetric
    TimeGrid grid;

    int m() const { return static_cast<int>(Ys.size()); }
    int matrix_dim() const { return phase.dim() * grid.size(); }

    /// Terminal sample of curve j (the wrap default covers periodic curves).
    Eigen::VectorXd y_end(int j) const {
        return Ys_end.size() > 0 ? Ys_end.col(j).eval() : Ys[j].col(0).eval();
    }
    /// Curve j averaged onto midpoint cells: (Y_j(t_k) + Y_j(t_{k+1})) / 2.
    Eigen::VectorXd y_mid(int j, int k) const {
        const int N = grid.size();
        return 0.5 * (Ys[j].col(k) + (k + 1 < N ? Ys[j].col(k + 1).eval() : y_end(j)));
    }

    /// Throws unless Phi preserves omega (<= tol) and A is symmetric.
    void validate(double tol = 1e-8) const;

    /// Rebuild the same operator data on a finer grid by trigonometric
    /// resampling of the curves (valid for the band-limited instances the
    /// ensemble generates; reduced operators resample exactly via their own
    /// builder instead).
    OperatorSpec resampled(int new_N) const;
};

/// Applies D through the midpoint (box) discretization. The input lives on
/// grid nodes; the returned samples live on cell midpoints t_{k+1/2}. The
/// twist enters only through the wrap xi(t_N) := Phi xi(t_0); the scheme is
/// free of spurious null modes and keeps the discrete kernel determined by
/// (xi(0), nonlocal coefficients).
FieldAlongLoop apply(const OperatorSpec& spec, const FieldAlongLoop& xi);

/// Dense matrix of `apply` on the N-point twisted discretization,
/// (2nN) x (2nN); the nonlocal part is a rank <= m update. The matrix being
/// square, its row and column rank deficiencies coincide — the
/// finite-dimensional stand-in for the operator having index zero.
Eigen::MatrixXd assemble_matrix(const OperatorSpec& spec);

/// Nonlocal coefficients c_i(xi) = int <Y_i, xi> under the box quadrature.
Eigen::VectorXd nonlocal_coefficients(const OperatorSpec& spec, const Eigen::MatrixXd& xi_nodes);

/// max |<D xi, eta> - <xi, D eta>|_{L2} over random smooth twisted pairs.
/// The box discretization is symmetric up to roundoff whenever Phi preserves
/// omega (the discrete pairing telescopes exactly), so values sit at the
/// floating-point floor; a Phi that fails to be symplectic shows up at O(1).
double symmetry_defect(const OperatorSpec& spec, int trials = 16, std::uint64_t seed = 11);

/// Spectral decision data for a kernel-dimension measurement.
struct SpectralReport {
    Eigen::VectorXd singular_values;  // descending
    int nullity = 0;
    double tolerance_used = 0.0;
    double symmetry_defect = -1.0;    // filled by callers that measured it
    int bound = -1;
    bool bound_satisfied = true;
};

/// Full SVD rank decision: nullity = #{sigma < max(atol, rtol * sigma_max)}.
SpectralReport numerical_nullity(const Eigen::MatrixXd& matrix, double atol, double rtol,
                                 int bound = -1);

struct NullityOptions {
    double atol_base = 1e-8;        // floor scales as atol_base * sqrt(N)
    double rtol = 1e-10;
    double candidate_cut = 0.1;     // singular values below this get refined
    double decrease_ratio = 0.45;   // kernel iff sigma(2N) <= ratio * sigma(N) (or under floor)
    int bound = -1;
};

struct RefinedNullity {
    SpectralReport report;              // at the base grid, nullity = refined decision
    Eigen::VectorXd candidates_base;    // ascending, the examined tail
    Eigen::VectorXd candidates_refined; // matched values on the doubled grid
    bool refinement_ran = false;
};

/// Grid-doubling kernel count: singular values below the candidate cut are
/// re-measured on the doubled grid; a direction counts toward the kernel when
/// it sits under the tolerance floor (converged) or keeps decreasing at the
/// discretization rate. Directions that plateau at O(1) are spectrum, not
/// kernel.
RefinedNullity refined_nullity(const std::function<Eigen::MatrixXd(int)>& assemble_at, int N,
                               const NullityOptions& opts = {});

/// Gamma(xi) = (xi(0), c_1(xi), ..., c_m(xi)) in R^{2n+m}; injective on the
/// kernel, which is what bounds its dimension by 2n+m.
Eigen::VectorXd gamma_embedding(const OperatorSpec& spec, const FieldAlongLoop& xi);

/// Inverts Gamma on kernel data: xi(t) = xi(0) + sum a_ij c_i int_0^t J Y_j,
/// with the cumulative integral taken by the discretization's own sums.
FieldAlongLoop reconstruct_from_gamma(const OperatorSpec& spec, const Eigen::VectorXd& gamma);

struct CommutingKernel {
    int dimension = 0;
    Eigen::MatrixXd basis0;               // 2n x dim, orthonormal xi(0) directions
    std::vector<FieldAlongLoop> fields;   // lifted kernel elements on the grid
};

/// Closed-form kernel for time-independent, pairwise omega-isotropic curves:
/// kernel = nullspace of (Phi - I - B), B = sum a_ij (J Y_j) Y_i^T, lifted by
/// xi(t) = xi(0) + t B xi(0). Throws PreconditionError naming assumption (i)
/// (time independence) or (ii) (isotropy) when violated.
CommutingKernel commuting_kernel(const OperatorSpec& spec, double assumption_tol = 1e-10);

/// Seeded random operator data: Phi = exp(J S) for random symmetric S; smooth
/// band-limited curves (or, for commuting instances, constant vectors from an
/// omega-isotropic family, with a fraction of instances twisted by Phi = I + B
/// so the closed-form kernel is the whole of R^{2n}).
OperatorSpec random_instance(int n, int m, std::uint64_t seed, bool commuting = false, int N = 256);

struct SpectralEdges {
    double sigma_min = 0.0;   // Rayleigh-Ritz estimate from the smallest block
    double sigma_max = 0.0;   // power-iteration estimate
    bool usable = false;      // false when the factorization broke down
};

/// Cheap smallest/largest singular value estimates: power iteration for the
/// top, LU-based block inverse iteration for the bottom. The bottom estimates
/// converge from above, so a clearly-large sigma_min is a sound certificate
/// that the kernel is empty; anything borderline must go through the SVD.
SpectralEdges estimate_spectral_edges(const Eigen::MatrixXd& M, int block, int iters,
                                      std::uint64_t seed);

}  // namespace meanloop
