#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cstar/matrix.hpp"
#include "cstar/random.hpp"

namespace cstar::opspace {

/// A linear subspace X of M_n, carried by a basis that is orthonormal
/// under the trace inner product. When the ambient identity lies in the
/// span and the space was built with `mark_unit`, `unit_index` points at
/// the basis element proportional to I_n (the element sqrt(n) * basis[k]
/// reconstructs the identity).
struct OperatorSpace {
    int ambient_dim = 0;
    std::vector<CMatrix> basis;
    std::optional<int> unit_index;

    int dim() const { return static_cast<int>(basis.size()); }
    bool is_unital() const { return unit_index.has_value(); }

    /// Coefficients of m against the orthonormal basis.
    Eigen::VectorXcd coefficients(const CMatrix& m) const;
    /// Frobenius distance from m to the span.
    double span_distance(const CMatrix& m) const;
    /// The member of the span closest to m.
    CMatrix project(const CMatrix& m) const;
};

/// Orthonormalize a spanning set under the trace inner product.
/// Near-dependent directions (residual below 1e-9 of the input scale) are
/// dropped. With `mark_unit`, the identity must lie in the span (distance
/// <= 1e-8 * ||I||_F) and is installed as basis[0].
OperatorSpace make_space(const std::vector<CMatrix>& matrices, bool mark_unit);

/// A linear map X -> M_m given by the images of the basis of X.
struct SpaceMap {
    OperatorSpace domain;
    int codomain_dim = 0;
    std::vector<CMatrix> images;

    /// Apply to an arbitrary member of the span of the domain.
    CMatrix apply(const CMatrix& x) const;
};

/// Build a map from a callable acting linearly on domain basis elements.
template <typename F>
SpaceMap make_map(OperatorSpace domain, int codomain_dim, F&& f) {
    SpaceMap t;
    t.domain = std::move(domain);
    t.codomain_dim = codomain_dim;
    t.images.reserve(t.domain.basis.size());
    for (const auto& b : t.domain.basis) t.images.push_back(f(b));
    return t;
}

/// The amplification T_k applied to x in M_k(X): x is (kn)x(kn) and every
/// n x n block must lie in the span of X within 1e-8; the result is the
/// (km)x(km) matrix of blockwise images.
CMatrix map_apply_level(const SpaceMap& t, int level, const CMatrix& x);

struct LevelNormBound {
    double bound = 0.0;
    CMatrix witness;  // member of M_k(X) with spectral norm 1 achieving `bound`
};

/// Seeded multi-restart ascent on ||T_k(x)|| / ||x|| over M_k(X). The
/// result is a certified lower bound for ||T_k|| (the witness is returned
/// so the ratio can be re-checked). Lower-level witnesses are re-used as
/// warm starts, which makes the bound nondecreasing in k.
LevelNormBound level_norm_lower_bound(const SpaceMap& t, int level, int restarts,
                                      std::uint64_t seed);

/// The Paulsen system S(X) in M_{2n}: scalar diagonal corners plus X and
/// X* in the off-diagonal corners. Always unital.
OperatorSpace paulsen_system(const OperatorSpace& x);

/// The Paulsen map of T : X -> M_m, acting on S(X) by keeping the scalar
/// diagonal and applying T (resp. T(.)*) to the corners. Unital.
SpaceMap paulsen_map(const SpaceMap& t);

struct ChoiResult {
    bool is_cp = false;
    double min_eigenvalue = 0.0;
};

/// Choi test for a map M_p -> M_q given by the images of all p^2 matrix
/// units in row-major order: CP iff the Choi matrix has min eigenvalue
/// >= -1e-9.
ChoiResult choi_cp_test(int p, int q, const std::vector<CMatrix>& unit_images);

struct FeasibilityResult {
    bool feasible = false;
    double residual = 0.0;
    int iterations = 0;
};

/// Decide whether phi : S -> M_q (S a unital operator system in M_p,
/// phi *-compatible) admits a completely positive extension M_p -> M_q.
/// A Choi matrix is sought in the intersection of the PSD cone with the
/// affine set matching phi on S, by Dykstra-corrected alternating
/// projections plus a rank-factorized Gauss-Newton polish that turns
/// near-feasible iterates into certified feasible points.
FeasibilityResult cp_extension_feasible(const SpaceMap& phi, double tol, int max_iters);

enum class CbVerdict { CompletelyContractive, Violated, Indeterminate };

const char* to_string(CbVerdict v);

struct CbCertificate {
    CbVerdict verdict = CbVerdict::Indeterminate;
    int level_checked = 0;
    std::optional<CMatrix> witness;   // present when Violated and the ascent found one
    double witness_ratio = 0.0;       // ||T_k(w)|| for the unit-norm witness
    double feasibility_residual = 0.0;
};

/// Complete contractivity via the Paulsen criterion: T is completely
/// contractive iff its Paulsen map has a CP extension. The nonconvex
/// ascent runs first to attach a human-readable violation witness when
/// one exists; residuals in (tol, 100 tol] are reported Indeterminate.
CbCertificate is_completely_contractive(const SpaceMap& t, double tol);

/// The inverse map T(X) -> X of an injective T, defined on an
/// orthonormalized basis of the image span.
SpaceMap inverse_on_range(const SpaceMap& t);

struct IsometryCheck {
    bool complete_isometry = false;
    bool injective = false;
    CbCertificate forward;
    CbCertificate inverse;
};

/// T is a complete isometry iff it is injective on the span and both T
/// and its inverse on the range are completely contractive.
IsometryCheck is_complete_isometry(const SpaceMap& t, double tol);

namespace detail {
/// Orthonormal basis of the span of `mats` (trace inner product),
/// dropping directions with singular value below `drop_tol` relative to
/// the largest. Returns basis matrices of shape rows x cols.
std::vector<CMatrix> orthonormal_span(const std::vector<CMatrix>& mats, double drop_tol = 1e-9);
}  // namespace detail

}  // namespace cstar::opspace
