#include "cstar/operator_space.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace cstar::opspace {

namespace {

Eigen::VectorXcd vec(const CMatrix& m) {
    return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

CMatrix unvec(const Eigen::VectorXcd& v, Eigen::Index rows, Eigen::Index cols) {
    return Eigen::Map<const CMatrix>(v.data(), rows, cols);
}

}  // namespace

namespace detail {

std::vector<CMatrix> orthonormal_span(const std::vector<CMatrix>& mats, double drop_tol) {
    if (mats.empty()) return {};
    const Eigen::Index rows = mats[0].rows(), cols = mats[0].cols();
    CMatrix stacked(rows * cols, static_cast<Eigen::Index>(mats.size()));
    for (size_t i = 0; i < mats.size(); ++i) {
        if (mats[i].rows() != rows || mats[i].cols() != cols)
            throw DimensionError("orthonormal_span: mixed matrix dimensions");
        stacked.col(static_cast<Eigen::Index>(i)) = vec(mats[i]);
    }
    Eigen::JacobiSVD<CMatrix> svd(stacked, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    std::vector<CMatrix> basis;
    if (sv.size() == 0 || sv(0) <= 0.0) return basis;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (sv(k) < drop_tol * sv(0)) break;
        basis.push_back(unvec(svd.matrixU().col(k), rows, cols));
    }
    return basis;
}

}  // namespace detail

Eigen::VectorXcd OperatorSpace::coefficients(const CMatrix& m) const {
    Eigen::VectorXcd c(dim());
    for (int i = 0; i < dim(); ++i) c(i) = matcore::trace_inner(basis[static_cast<size_t>(i)], m);
    return c;
}

CMatrix OperatorSpace::project(const CMatrix& m) const {
    const Eigen::VectorXcd c = coefficients(m);
    CMatrix out = CMatrix::Zero(m.rows(), m.cols());
    for (int i = 0; i < dim(); ++i) out += c(i) * basis[static_cast<size_t>(i)];
    return out;
}

double OperatorSpace::span_distance(const CMatrix& m) const {
    return (m - project(m)).norm();
}

OperatorSpace make_space(const std::vector<CMatrix>& matrices, bool mark_unit) {
    if (matrices.empty()) throw DimensionError("make_space: no generators");
    const Eigen::Index n = matrices[0].rows();
    if (n == 0 || matrices[0].cols() != n)
        throw DimensionError("make_space: generators must be square and nonempty");
    for (const auto& m : matrices)
        if (m.rows() != n || m.cols() != n)
            throw DimensionError("make_space: mixed generator dimensions");

    OperatorSpace x;
    x.ambient_dim = static_cast<int>(n);
    x.basis = detail::orthonormal_span(matrices);
    if (x.basis.empty()) throw ContractViolation("make_space: span is zero");

    if (mark_unit) {
        const CMatrix eye = matcore::identity(n);
        if (x.span_distance(eye) > 1e-8 * eye.norm())
            throw NotUnitalError("make_space: identity does not lie in the span");
        const CMatrix unit = eye / eye.norm();
        std::vector<CMatrix> deflated;
        deflated.reserve(x.basis.size());
        for (const auto& b : x.basis)
            deflated.push_back(b - matcore::trace_inner(unit, b) * unit);
        std::vector<CMatrix> rest = detail::orthonormal_span(deflated);
        x.basis.clear();
        x.basis.push_back(unit);
        for (auto& b : rest) x.basis.push_back(std::move(b));
        x.unit_index = 0;
    }
    return x;
}

CMatrix SpaceMap::apply(const CMatrix& x) const {
    const Eigen::VectorXcd c = domain.coefficients(x);
    CMatrix out = CMatrix::Zero(codomain_dim, codomain_dim);
    for (int i = 0; i < domain.dim(); ++i) out += c(i) * images[static_cast<size_t>(i)];
    return out;
}

CMatrix map_apply_level(const SpaceMap& t, int level, const CMatrix& x) {
    if (level < 1) throw DimensionError("map_apply_level: level must be >= 1");
    const Eigen::Index n = t.domain.ambient_dim, m = t.codomain_dim, k = level;
    if (x.rows() != k * n || x.cols() != k * n)
        throw DimensionError("map_apply_level: input must be (kn)x(kn)");
    CMatrix out = CMatrix::Zero(k * m, k * m);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            const CMatrix block = x.block(i * n, j * n, n, n);
            const double dist = t.domain.span_distance(block);
            if (dist > 1e-8 * std::max(1.0, block.norm()))
                throw MembershipError("map_apply_level: block outside the domain span",
                                      static_cast<int>(i * k + j), dist);
            out.block(i * m, j * m, m, m) = t.apply(block);
        }
    }
    return out;
}

OperatorSpace paulsen_system(const OperatorSpace& x) {
    const Eigen::Index n = x.ambient_dim;
    std::vector<CMatrix> gens;
    gens.reserve(2 * x.basis.size() + 2);
    CMatrix upper = CMatrix::Zero(2 * n, 2 * n);
    upper.topLeftCorner(n, n) = matcore::identity(n);
    gens.push_back(upper);
    CMatrix lower = CMatrix::Zero(2 * n, 2 * n);
    lower.bottomRightCorner(n, n) = matcore::identity(n);
    gens.push_back(lower);
    for (const auto& b : x.basis) {
        CMatrix corner = CMatrix::Zero(2 * n, 2 * n);
        corner.topRightCorner(n, n) = b;
        gens.push_back(corner);
        CMatrix star = CMatrix::Zero(2 * n, 2 * n);
        star.bottomLeftCorner(n, n) = b.adjoint();
        gens.push_back(star);
    }
    return make_space(gens, /*mark_unit=*/true);
}

SpaceMap paulsen_map(const SpaceMap& t) {
    const Eigen::Index n = t.domain.ambient_dim, m = t.codomain_dim;
    SpaceMap phi;
    phi.domain = paulsen_system(t.domain);
    phi.codomain_dim = static_cast<int>(2 * m);
    phi.images.reserve(phi.domain.basis.size());
    for (const auto& s : phi.domain.basis) {
        const Complex lambda = s.topLeftCorner(n, n).trace() / static_cast<double>(n);
        const Complex mu = s.bottomRightCorner(n, n).trace() / static_cast<double>(n);
        const CMatrix xc = s.topRightCorner(n, n);
        const CMatrix yc = s.bottomLeftCorner(n, n).adjoint();
        CMatrix img = CMatrix::Zero(2 * m, 2 * m);
        img.topLeftCorner(m, m) = lambda * matcore::identity(m);
        img.bottomRightCorner(m, m) = mu * matcore::identity(m);
        img.topRightCorner(m, m) = t.apply(xc);
        img.bottomLeftCorner(m, m) = t.apply(yc).adjoint();
        phi.images.push_back(std::move(img));
    }
    return phi;
}

ChoiResult choi_cp_test(int p, int q, const std::vector<CMatrix>& unit_images) {
    if (p < 1 || q < 1) throw DimensionError("choi_cp_test: dimensions must be positive");
    if (unit_images.size() != static_cast<size_t>(p) * static_cast<size_t>(p))
        throw DimensionError("choi_cp_test: expected p^2 matrix-unit images");
    for (const auto& img : unit_images)
        if (img.rows() != q || img.cols() != q)
            throw DimensionError("choi_cp_test: images must be q x q");
    CMatrix choi(p * q, p * q);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            choi.block(i * q, j * q, q, q) = unit_images[static_cast<size_t>(i * p + j)];
    const double defect = matcore::hermiticity_defect(choi);
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (choi + choi.adjoint()),
                                               Eigen::EigenvaluesOnly);
    ChoiResult out;
    out.min_eigenvalue = eig.eigenvalues().minCoeff();
    out.is_cp = out.min_eigenvalue >= -1e-9 && defect <= 1e-9;
    return out;
}

SpaceMap inverse_on_range(const SpaceMap& t) {
    const Eigen::Index m = t.codomain_dim;
    const CMatrix eye = matcore::identity(m);

    CMatrix stacked(m * m, static_cast<Eigen::Index>(t.images.size()));
    for (size_t i = 0; i < t.images.size(); ++i)
        stacked.col(static_cast<Eigen::Index>(i)) = vec(t.images[i]);
    Eigen::CompleteOrthogonalDecomposition<CMatrix> cod(stacked);

    OperatorSpace range = make_space(t.images, /*mark_unit=*/false);
    if (range.span_distance(eye) <= 1e-8 * eye.norm())
        range = make_space(t.images, /*mark_unit=*/true);

    SpaceMap inv;
    inv.domain = std::move(range);
    inv.codomain_dim = t.domain.ambient_dim;
    inv.images.reserve(inv.domain.basis.size());
    for (const auto& b : inv.domain.basis) {
        const Eigen::VectorXcd c = cod.solve(vec(b));
        CMatrix img = CMatrix::Zero(t.domain.ambient_dim, t.domain.ambient_dim);
        for (int i = 0; i < t.domain.dim(); ++i)
            img += c(i) * t.domain.basis[static_cast<size_t>(i)];
        inv.images.push_back(std::move(img));
    }
    return inv;
}

const char* to_string(CbVerdict v) {
    switch (v) {
        case CbVerdict::CompletelyContractive: return "completely_contractive";
        case CbVerdict::Violated: return "violated";
        case CbVerdict::Indeterminate: return "indeterminate";
    }
    return "unknown";
}

}  // namespace cstar::opspace
