#pragma once

#include <vector>

#include "cstar/envelope.hpp"
#include "cstar/operator_space.hpp"

namespace cstar::banachstone {

struct Residuals {
    double factorization = 0.0;    // max ||T(a) e - u pi(a)||
    double reverse = 0.0;          // max ||pi(a) - u* T(a)||
    double initial = 0.0;          // ||u* u - e||
    double final = 0.0;            // ||u u* - f||
    double multiplicativity = 0.0; // max ||pi(ab) - pi(a) pi(b)||
    double unitality = 0.0;        // ||pi(1) - e||
    double worst() const;
};

/// The certified factorization data of a complete isometry T from a
/// unital matrix operator algebra into M_m: a partial isometry u with
/// initial projection e and final projection f, and a 1-1 unital
/// *-homomorphism pi with T(a) e = u pi(a).
struct IsometryDecomposition {
    CMatrix e;  // initial projection in M_m
    CMatrix f;  // final projection in M_m
    CMatrix u;  // partial isometry, u* u = e, u u* = f
    std::vector<CMatrix> pi_images;  // pi on the domain basis
    Residuals residuals;
    bool verified = false;
};

/// Residuals of a candidate tuple against a map, reusable for noise
/// studies: nothing is recomputed from T except the stated identities.
Residuals compute_residuals(const opspace::SpaceMap& t, const CMatrix& e, const CMatrix& f,
                            const CMatrix& u, const std::vector<CMatrix>& pi_images);

/// Unital special case: T(1) = 1, so e = f = u and pi = e T(.) e with e
/// the co-support of the envelope of T(A) inside C*(T(A)).
IsometryDecomposition decompose_unital(const opspace::SpaceMap& t, double tol);

/// General case via the Paulsen system: the envelope of S(T(A)) inside
/// C*(S(T(A))) yields the central projection p0 = f (+) e; then
/// u = f T(1) e and pi = u* T(.).
IsometryDecomposition decompose_general(const opspace::SpaceMap& t, double tol);

/// As decompose_general but without the complete-isometry precondition
/// and without failing on large residuals; used to study how residuals
/// scale when the input map is perturbed away from an exact isometry.
IsometryDecomposition decompose_general_unchecked(const opspace::SpaceMap& t, double tol);

struct SurjectiveForm {
    CMatrix u;  // unitary, u = T(1)
    std::vector<CMatrix> pi_images;
    double unitary_residual = 0.0;
    double multiplicativity_residual = 0.0;  // max ||pi(a)* pi(b) - pi(a* b)||
};

/// Surjective C*-case: T = u pi(.) with u = T(1) unitary and pi a
/// *-isomorphism. Fails with a diagnosis when T(1) is not unitary.
SurjectiveForm decompose_surjective(const opspace::SpaceMap& t, double tol);

struct SpatialForm {
    CMatrix e_frame;   // orthonormal columns spanning E = range(e)
    CMatrix f_frame;   // spanning F = range(f)
    CMatrix u_block;   // unitary E -> F in the frames
    std::vector<CMatrix> s_images;  // compression of T to E-perp -> F-perp
    double reassembly_residual = 0.0;
};

/// Splits T along E, F: T(a) carries E into F as u pi(a) and E-perp into
/// F-perp as the completely contractive remainder S(a); conjugating
/// diag(pi(a), S(a)) by the frame unitaries reassembles T(a).
SpatialForm spatial_form(const IsometryDecomposition& dec, const opspace::SpaceMap& t);

struct CommutativeForm {
    std::vector<int> ideal_coordinates;       // diagonal positions where e vanishes
    std::vector<Complex> gamma;               // unimodular diagonal of u on kept coordinates
    std::vector<CMatrix> theta_images;        // pi restricted to kept coordinates (diagonal)
    std::vector<int> selection;               // kept coordinate -> smallest domain coordinate it evaluates
    std::vector<int> kept_coordinates;
};

/// Diagonal-algebra specialization: deleted coordinates form the ideal,
/// u restricts to a unimodular twist gamma, and pi becomes a coordinate
/// selection of the domain parameters.
CommutativeForm commutative_form(const IsometryDecomposition& dec, const opspace::SpaceMap& t);

namespace detail {
bool span_multiplicatively_closed(const opspace::OperatorSpace& x, double tol = 1e-8);
}

}  // namespace cstar::banachstone
