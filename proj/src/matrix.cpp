#include "cstar/matrix.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace cstar::matcore {

Complex trace_inner(const CMatrix& a, const CMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("trace_inner: shape mismatch");
    return (a.adjoint() * b).trace();
}

double opnorm(const CMatrix& m) {
    if (m.rows() == 0 || m.cols() == 0)
        throw DimensionError("opnorm: empty matrix");
    if (m.isZero(0.0)) return 0.0;
    // Small matrices go through the one-sided Jacobi SVD; larger ones
    // through the square root of the top eigenvalue of m* m, which is
    // considerably faster and equally deterministic.
    if (std::max(m.rows(), m.cols()) <= 48) {
        Eigen::JacobiSVD<CMatrix> svd(m);
        return svd.singularValues()(0);
    }
    const CMatrix gram = (m.cols() <= m.rows()) ? CMatrix(m.adjoint() * m)
                                                : CMatrix(m * m.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram, Eigen::EigenvaluesOnly);
    const double top = eig.eigenvalues().maxCoeff();
    return top > 0.0 ? std::sqrt(top) : 0.0;
}

double hermiticity_defect(const CMatrix& h) {
    const double scale = h.norm();
    if (scale == 0.0) return 0.0;
    return (h - h.adjoint()).norm() / scale;
}

HermEig herm_eig(const CMatrix& h) {
    if (h.rows() == 0 || h.rows() != h.cols())
        throw DimensionError("herm_eig: matrix must be square and nonempty");
    if (hermiticity_defect(h) > 1e-10)
        throw ContractViolation("herm_eig: input is not Hermitian within 1e-10");
    const CMatrix sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(sym);
    if (eig.info() != Eigen::Success)
        throw NumericalDegeneracyError("herm_eig: eigensolver failed to converge");
    const Eigen::Index n = h.rows();
    HermEig out;
    out.values = eig.eigenvalues().reverse();
    out.frame = CMatrix(n, n);
    for (Eigen::Index j = 0; j < n; ++j) out.frame.col(j) = eig.eigenvectors().col(n - 1 - j);
    return out;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CMatrix psd_project(const CMatrix& h) {
    if (h.rows() != h.cols())
        throw DimensionError("psd_project: matrix must be square");
    const CMatrix sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(sym);
    Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
    return eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().adjoint();
}

}  // namespace cstar::matcore
