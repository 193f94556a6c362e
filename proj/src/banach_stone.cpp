#include "cstar/banach_stone.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SVD>

namespace cstar::banachstone {

using opspace::OperatorSpace;
using opspace::SpaceMap;

namespace detail {

bool span_multiplicatively_closed(const OperatorSpace& x, double tol) {
    for (const auto& a : x.basis)
        for (const auto& b : x.basis) {
            const CMatrix prod = a * b;
            if (x.span_distance(prod) > tol * std::max(1.0, prod.norm())) return false;
        }
    return true;
}

}  // namespace detail

namespace {

void require_unital_algebra(const OperatorSpace& x, const char* who) {
    const CMatrix eye = matcore::identity(x.ambient_dim);
    if (x.span_distance(eye) > 1e-8 * eye.norm())
        throw ContractViolation(std::string(who) + ": domain must contain the identity");
    if (!detail::span_multiplicatively_closed(x))
        throw ContractViolation(std::string(who) +
                                ": domain span is not an operator algebra (products leave it)");
}

void require_complete_isometry(const SpaceMap& t, double tol, const char* who) {
    const auto check = opspace::is_complete_isometry(t, tol);
    if (check.complete_isometry) return;
    std::ostringstream msg;
    msg << who << ": map is not a complete isometry";
    if (!check.injective) {
        msg << " (not injective on the span)";
    } else if (check.forward.verdict == opspace::CbVerdict::Violated && check.forward.witness) {
        msg << " (forward violation at level " << check.forward.level_checked << ", ratio "
            << check.forward.witness_ratio << ")";
    } else if (check.inverse.verdict == opspace::CbVerdict::Violated && check.inverse.witness) {
        msg << " (inverse violation at level " << check.inverse.level_checked << ", ratio "
            << check.inverse.witness_ratio << ")";
    } else if (check.forward.verdict == opspace::CbVerdict::Indeterminate ||
               check.inverse.verdict == opspace::CbVerdict::Indeterminate) {
        msg << " (certificate indeterminate near the contractivity boundary)";
    }
    throw ContractViolation(msg.str());
}

CMatrix apply_pi(const OperatorSpace& domain, const std::vector<CMatrix>& pi_images,
                 const CMatrix& a) {
    const Eigen::VectorXcd c = domain.coefficients(a);
    CMatrix out = CMatrix::Zero(pi_images[0].rows(), pi_images[0].cols());
    for (int i = 0; i < domain.dim(); ++i) out += c(i) * pi_images[static_cast<size_t>(i)];
    return out;
}

int stacked_rank(const std::vector<CMatrix>& mats) {
    if (mats.empty()) return 0;
    CMatrix stacked(mats[0].size(), static_cast<Eigen::Index>(mats.size()));
    for (size_t i = 0; i < mats.size(); ++i)
        stacked.col(static_cast<Eigen::Index>(i)) =
            Eigen::Map<const Eigen::VectorXcd>(mats[i].data(), mats[i].size());
    Eigen::JacobiSVD<CMatrix> svd(stacked);
    int rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > 1e-8 * std::max(1.0, svd.singularValues()(0))) ++rank;
    return rank;
}

// Sampled check that pi is isometric at amplification levels 1..cap.
// pi a 1-1 *-homomorphism is isometric at every level; this re-checks
// the concrete images rather than trusting the algebra.
double pi_level_isometry_defect(const SpaceMap& pi, int cap, std::uint64_t seed) {
    Sampler sampler(seed);
    double worst = 0.0;
    for (int k = 1; k <= cap; ++k) {
        for (int trial = 0; trial < 3; ++trial) {
            CMatrix x = CMatrix::Zero(k * pi.domain.ambient_dim, k * pi.domain.ambient_dim);
            for (int i = 0; i < pi.domain.dim(); ++i)
                x += matcore::kron(sampler.gaussian(k, k), pi.domain.basis[static_cast<size_t>(i)]);
            const double nx = matcore::opnorm(x);
            if (nx < 1e-12) continue;
            const CMatrix y = opspace::map_apply_level(pi, k, x);
            worst = std::max(worst, std::abs(matcore::opnorm(y) - nx) / nx);
        }
    }
    return worst;
}

void verify_decomposition(IsometryDecomposition& dec, const SpaceMap& t, double tol,
                          const char* who) {
    dec.residuals = compute_residuals(t, dec.e, dec.f, dec.u, dec.pi_images);

    // f T(a) = T(a) e, part of the certified identities.
    double intertwine = 0.0;
    for (size_t i = 0; i < t.images.size(); ++i)
        intertwine = std::max(
            intertwine, matcore::opnorm(dec.f * t.images[i] - t.images[i] * dec.e));

    const int rank = stacked_rank(dec.pi_images);
    if (rank != t.domain.dim())
        throw DecompositionError(std::string(who) + ": pi is not injective", 0.0);

    SpaceMap pi;
    pi.domain = t.domain;
    pi.codomain_dim = static_cast<int>(dec.e.rows());
    pi.images = dec.pi_images;
    const int cap = std::min({t.domain.ambient_dim, static_cast<int>(dec.e.rows()), 4});
    const double iso_defect = pi_level_isometry_defect(pi, cap, kDefaultSeed);

    const double worst = std::max({dec.residuals.worst(), intertwine, iso_defect});
    if (worst > 10.0 * tol) {
        std::ostringstream msg;
        msg << who << ": decomposition residuals too large (worst " << worst << ")";
        throw DecompositionError(msg.str(), worst);
    }
    dec.verified = true;
}

}  // namespace

double Residuals::worst() const {
    return std::max({factorization, reverse, initial, final, multiplicativity, unitality});
}

Residuals compute_residuals(const SpaceMap& t, const CMatrix& e, const CMatrix& f,
                            const CMatrix& u, const std::vector<CMatrix>& pi_images) {
    Residuals r;
    const OperatorSpace& dom = t.domain;
    for (size_t i = 0; i < t.images.size(); ++i) {
        const CMatrix& pi_i = pi_images[i];
        r.factorization =
            std::max(r.factorization, matcore::opnorm(t.images[i] * e - u * pi_i));
        r.reverse = std::max(r.reverse, matcore::opnorm(pi_i - u.adjoint() * t.images[i]));
    }
    r.initial = matcore::opnorm(u.adjoint() * u - e);
    r.final = matcore::opnorm(u * u.adjoint() - f);
    for (size_t i = 0; i < dom.basis.size(); ++i)
        for (size_t j = 0; j < dom.basis.size(); ++j) {
            const CMatrix prod = dom.basis[i] * dom.basis[j];
            const CMatrix lhs = apply_pi(dom, pi_images, prod);
            r.multiplicativity =
                std::max(r.multiplicativity, matcore::opnorm(lhs - pi_images[i] * pi_images[j]));
        }
    const CMatrix eye = matcore::identity(dom.ambient_dim);
    r.unitality = matcore::opnorm(apply_pi(dom, pi_images, eye) - e);
    return r;
}

IsometryDecomposition decompose_unital(const SpaceMap& t, double tol) {
    require_unital_algebra(t.domain, "decompose_unital");
    const Eigen::Index m = t.codomain_dim;
    const CMatrix t1 = t.apply(matcore::identity(t.domain.ambient_dim));
    if ((t1 - matcore::identity(m)).norm() > tol * std::sqrt(static_cast<double>(m)))
        throw ContractViolation(
            "decompose_unital: T(1) != 1; use decompose_general for non-unital maps");
    require_complete_isometry(t, tol, "decompose_unital");

    const OperatorSpace image_space = opspace::make_space(t.images, /*mark_unit=*/true);
    const envelope::EnvelopeResult env = envelope::c_star_envelope(image_space, tol);

    IsometryDecomposition dec;
    dec.e = env.co_support;
    dec.f = env.co_support;
    dec.u = env.co_support;
    dec.pi_images.reserve(t.images.size());
    for (const auto& img : t.images) dec.pi_images.push_back(dec.e * img * dec.e);

    // e is central in C*(T(A)) by construction; spot-check it.
    double central = 0.0;
    for (const auto& b : env.generated.basis)
        central = std::max(central, (dec.e * b - b * dec.e).norm());
    if (central > 10.0 * tol)
        throw InternalConsistencyError("decompose_unital: co-support is not central");

    verify_decomposition(dec, t, tol, "decompose_unital");
    return dec;
}

namespace {

IsometryDecomposition decompose_general_impl(const SpaceMap& t, double tol, bool strict) {
    require_unital_algebra(t.domain, "decompose_general");
    if (strict) require_complete_isometry(t, tol, "decompose_general");

    const Eigen::Index m = t.codomain_dim;
    const SpaceMap phi = opspace::paulsen_map(t);
    const OperatorSpace s_ta = opspace::make_space(phi.images, /*mark_unit=*/true);
    const envelope::EnvelopeResult env = envelope::c_star_envelope(s_ta, tol);
    const CMatrix& p0 = env.co_support;

    // p0 is central in C*(S(T(A))), which contains the two diagonal
    // corner projections, so p0 must split as f (+) e.
    CMatrix d1 = CMatrix::Zero(2 * m, 2 * m);
    d1.topLeftCorner(m, m) = matcore::identity(m);
    const double commute = matcore::opnorm(p0 * d1 - d1 * p0);
    if (commute > 100.0 * tol)
        throw InternalConsistencyError(
            "decompose_general: p0 does not commute with the corner projections; "
            "the envelope is numerically broken");

    IsometryDecomposition dec;
    dec.f = p0.topLeftCorner(m, m);
    dec.e = p0.bottomRightCorner(m, m);
    const CMatrix t1 = t.apply(matcore::identity(t.domain.ambient_dim));
    dec.u = dec.f * t1 * dec.e;
    dec.pi_images.reserve(t.images.size());
    for (const auto& img : t.images) dec.pi_images.push_back(dec.u.adjoint() * img);

    if (strict) {
        verify_decomposition(dec, t, tol, "decompose_general");
    } else {
        dec.residuals = compute_residuals(t, dec.e, dec.f, dec.u, dec.pi_images);
    }
    return dec;
}

}  // namespace

IsometryDecomposition decompose_general(const SpaceMap& t, double tol) {
    return decompose_general_impl(t, tol, /*strict=*/true);
}

IsometryDecomposition decompose_general_unchecked(const SpaceMap& t, double tol) {
    return decompose_general_impl(t, tol, /*strict=*/false);
}

SurjectiveForm decompose_surjective(const SpaceMap& t, double tol) {
    require_unital_algebra(t.domain, "decompose_surjective");
    for (const auto& b : t.domain.basis)
        if (t.domain.span_distance(b.adjoint()) > 1e-8)
            throw ContractViolation("decompose_surjective: domain is not *-closed");

    const OperatorSpace image_space = opspace::make_space(t.images, /*mark_unit=*/false);
    const CMatrix eye_m = matcore::identity(t.codomain_dim);
    if (image_space.span_distance(eye_m) > 1e-8 * eye_m.norm())
        throw ContractViolation("decompose_surjective: range does not contain the identity");
    for (const auto& img : image_space.basis)
        if (image_space.span_distance(img.adjoint()) > 1e-8)
            throw ContractViolation("decompose_surjective: range is not *-closed");
    if (image_space.dim() != t.domain.dim())
        throw ContractViolation(
            "decompose_surjective: map is not a bijection onto its range algebra");
    require_complete_isometry(t, tol, "decompose_surjective");

    SurjectiveForm out;
    out.u = t.apply(matcore::identity(t.domain.ambient_dim));
    out.unitary_residual = std::max(matcore::opnorm(out.u.adjoint() * out.u - eye_m),
                                    matcore::opnorm(out.u * out.u.adjoint() - eye_m));
    if (out.unitary_residual > tol)
        throw ContractViolation(
            "decompose_surjective: T(1) is not unitary, so T cannot be a surjective "
            "complete isometry between C*-algebras");

    out.pi_images.reserve(t.images.size());
    for (const auto& img : t.images) out.pi_images.push_back(out.u.adjoint() * img);

    // Kadison-Schwarz saturation in the transformed form:
    // pi(a)* pi(b) = pi(a* b) on basis pairs (covers multiplicativity and
    // *-preservation at once).
    const OperatorSpace& dom = t.domain;
    for (size_t i = 0; i < dom.basis.size(); ++i)
        for (size_t j = 0; j < dom.basis.size(); ++j) {
            const CMatrix prod = dom.basis[i].adjoint() * dom.basis[j];
            const CMatrix lhs = out.pi_images[i].adjoint() * out.pi_images[j];
            out.multiplicativity_residual =
                std::max(out.multiplicativity_residual,
                         matcore::opnorm(lhs - apply_pi(dom, out.pi_images, prod)));
        }
    if (out.multiplicativity_residual > 10.0 * tol)
        throw DecompositionError("decompose_surjective: pi failed the *-isomorphism checks",
                                 out.multiplicativity_residual);
    if (stacked_rank(out.pi_images) != dom.dim())
        throw DecompositionError("decompose_surjective: pi is not bijective", 0.0);
    return out;
}

namespace {

CMatrix projection_range_frame(const CMatrix& p, const char* who) {
    const matcore::HermEig eig = matcore::herm_eig(p);
    int rank = 0;
    for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
        if (eig.values(i) > 0.5) {
            ++rank;
        } else if (eig.values(i) > 1e-6 && eig.values(i) < 1.0 - 1e-6) {
            throw ContractViolation(std::string(who) + ": matrix is not a projection");
        }
    }
    return eig.frame.leftCols(rank);
}

CMatrix projection_kernel_frame(const CMatrix& p) {
    const matcore::HermEig eig = matcore::herm_eig(p);
    int rank = 0;
    for (Eigen::Index i = 0; i < eig.values.size(); ++i)
        if (eig.values(i) > 0.5) ++rank;
    return eig.frame.rightCols(p.rows() - rank);
}

}  // namespace

SpatialForm spatial_form(const IsometryDecomposition& dec, const SpaceMap& t) {
    if (!dec.verified)
        throw ContractViolation("spatial_form: decomposition must be verified");
    SpatialForm out;
    out.e_frame = projection_range_frame(dec.e, "spatial_form(e)");
    out.f_frame = projection_range_frame(dec.f, "spatial_form(f)");
    if (out.e_frame.cols() != out.f_frame.cols())
        throw ContractViolation("spatial_form: rank(e) != rank(f)");
    const Eigen::Index r = out.e_frame.cols();
    const Eigen::Index m = dec.e.rows();

    out.u_block = out.f_frame.adjoint() * dec.u * out.e_frame;
    if ((out.u_block.adjoint() * out.u_block - CMatrix::Identity(r, r)).norm() > 1e-7 * std::max<double>(1, r))
        throw InternalConsistencyError("spatial_form: u does not restrict to a unitary E -> F");

    const CMatrix e_perp = projection_kernel_frame(dec.e);
    const CMatrix f_perp = projection_kernel_frame(dec.f);
    out.s_images.reserve(t.images.size());
    for (const auto& img : t.images) out.s_images.push_back(f_perp.adjoint() * img * e_perp);

    for (size_t i = 0; i < t.images.size(); ++i) {
        const CMatrix pi_r =
            out.e_frame.adjoint() * (dec.u.adjoint() * t.images[i]) * out.e_frame;
        CMatrix rebuilt = CMatrix::Zero(m, m);
        rebuilt += out.f_frame * out.u_block * pi_r * out.e_frame.adjoint();
        if (e_perp.cols() > 0 && f_perp.cols() > 0)
            rebuilt += f_perp * out.s_images[i] * e_perp.adjoint();
        out.reassembly_residual =
            std::max(out.reassembly_residual, matcore::opnorm(rebuilt - t.images[i]));
    }
    if (out.reassembly_residual > 1e-8)
        throw DecompositionError("spatial_form: reassembly residual too large",
                                 out.reassembly_residual);
    return out;
}

namespace {

bool is_diagonal(const CMatrix& m, double tol) {
    CMatrix off = m;
    off.diagonal().setZero();
    return off.norm() <= tol * std::max(1.0, m.norm());
}

}  // namespace

CommutativeForm commutative_form(const IsometryDecomposition& dec, const SpaceMap& t) {
    if (!dec.verified)
        throw ContractViolation("commutative_form: decomposition must be verified");
    for (const auto& b : t.domain.basis)
        if (!is_diagonal(b, 1e-10))
            throw ContractViolation("commutative_form: domain is not a diagonal algebra");
    for (const auto& img : t.images)
        if (!is_diagonal(img, 1e-10))
            throw ContractViolation("commutative_form: codomain images are not diagonal");
    if (!is_diagonal(dec.e, 1e-8) || !is_diagonal(dec.u, 1e-8))
        throw InternalConsistencyError("commutative_form: e or u is not diagonal");

    const Eigen::Index m = dec.e.rows();
    CommutativeForm out;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double v = dec.e(i, i).real();
        if (std::abs(v) < 1e-6) {
            out.ideal_coordinates.push_back(static_cast<int>(i));
        } else if (std::abs(v - 1.0) < 1e-6) {
            out.kept_coordinates.push_back(static_cast<int>(i));
        } else {
            throw InternalConsistencyError(
                "commutative_form: e has a diagonal entry away from {0, 1}");
        }
    }

    for (int i : out.kept_coordinates) {
        const Complex g = dec.u(i, i);
        if (std::abs(std::abs(g) - 1.0) > 1e-8)
            throw InternalConsistencyError("commutative_form: u is not unimodular on kept coordinates");
        out.gamma.push_back(g);
    }

    const Eigen::Index kept = static_cast<Eigen::Index>(out.kept_coordinates.size());
    for (const auto& pi_i : dec.pi_images) {
        CMatrix th = CMatrix::Zero(kept, kept);
        for (Eigen::Index a = 0; a < kept; ++a)
            th(a, a) = pi_i(out.kept_coordinates[static_cast<size_t>(a)],
                            out.kept_coordinates[static_cast<size_t>(a)]);
        out.theta_images.push_back(std::move(th));
    }

    // theta must be a unital 1-1 homomorphism of diagonal algebras, i.e.
    // a coordinate selection: recover which domain coordinate each kept
    // coordinate evaluates.
    const OperatorSpace& dom = t.domain;
    const Eigen::Index n = dom.ambient_dim;
    for (Eigen::Index a = 0; a < kept; ++a) {
        int chosen = -1;
        for (Eigen::Index j = 0; j < n; ++j) {
            bool matches = true;
            for (size_t bi = 0; bi < dom.basis.size(); ++bi) {
                if (std::abs(out.theta_images[bi](a, a) - dom.basis[bi](j, j)) > 1e-7) {
                    matches = false;
                    break;
                }
            }
            if (matches) {
                chosen = static_cast<int>(j);
                break;
            }
        }
        if (chosen < 0)
            throw InternalConsistencyError(
                "commutative_form: theta is not a coordinate selection of the domain");
        out.selection.push_back(chosen);
    }

    // Every domain coordinate class must be selected (theta is 1-1).
    if (stacked_rank(out.theta_images) != dom.dim())
        throw InternalConsistencyError("commutative_form: theta is not injective");
    return out;
}

}  // namespace cstar::banachstone
