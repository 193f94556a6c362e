#pragma once

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cstar/errors.hpp"

namespace cstar {

using Complex = std::complex<double>;

/// Dense complex matrix, the universal numerical carrier of the toolkit.
using CMatrix = Eigen::MatrixXcd;

namespace matcore {

/// Identity and zero helpers with the toolkit's canonical types.
inline CMatrix identity(Eigen::Index n) { return CMatrix::Identity(n, n); }
inline CMatrix zero(Eigen::Index r, Eigen::Index c) { return CMatrix::Zero(r, c); }

/// Trace inner product <a, b> = tr(a* b).
Complex trace_inner(const CMatrix& a, const CMatrix& b);

/// Operator norm (largest singular value). Throws DimensionError on an
/// empty matrix.
double opnorm(const CMatrix& m);

struct HermEig {
    Eigen::VectorXd values;  // descending
    CMatrix frame;           // unitary, columns match `values`
};

/// Hermitian eigendecomposition H = U diag(values) U*. Input must satisfy
/// ||H - H*||_F <= 1e-10 ||H||_F; it is symmetrized before solving.
HermEig herm_eig(const CMatrix& h);

/// Kronecker product; realizes the amplification M_k(X) = M_k (x) X.
CMatrix kron(const CMatrix& a, const CMatrix& b);

/// Nearest positive semidefinite matrix in Frobenius norm (input is
/// symmetrized, negative eigenvalues are clipped to zero).
CMatrix psd_project(const CMatrix& h);

/// Relative Hermiticity defect ||H - H*||_F / ||H||_F (0 for the zero matrix).
double hermiticity_defect(const CMatrix& h);

}  // namespace matcore
}  // namespace cstar
