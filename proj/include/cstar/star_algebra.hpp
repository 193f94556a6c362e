#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cstar/matrix.hpp"
#include "cstar/random.hpp"

namespace cstar::staralg {

/// One Wedderburn block of a finite-dimensional C*-algebra: the
/// compression of the algebra by `projection` is *-isomorphic to
/// M_size (x) I_multiplicity, realized concretely by `frame` (an
/// isometry onto the range of the projection whose columns are ordered
/// so that compressed algebra elements are literally block matrices
/// size x size with multiplicity-fold scalar blocks).
struct Block {
    int size = 0;
    int multiplicity = 0;
    CMatrix projection;  // minimal central projection, n x n
    CMatrix frame;       // n x (size*multiplicity), frame* frame = I
};

/// A unital *-closed subalgebra of M_n with its center and Wedderburn
/// block data.
struct StarAlgebra {
    int ambient_dim = 0;
    std::vector<CMatrix> basis;         // orthonormal, spans the algebra
    std::vector<CMatrix> center_basis;  // orthonormal, spans the center
    std::vector<Block> blocks;          // sorted (size, multiplicity) descending

    int dim() const { return static_cast<int>(basis.size()); }
    std::vector<std::pair<int, int>> profile() const;

    Eigen::VectorXcd coefficients(const CMatrix& m) const;
    double span_distance(const CMatrix& m) const;

    /// Compress a to the standard picture of block k and keep a single
    /// copy: the returned matrix is size x size.
    CMatrix block_compression(const CMatrix& a, int k) const;
};

/// Close a seed set under products and adjoints, adjoining the identity
/// when asked, and return the fully decomposed algebra.
StarAlgebra generate_star_algebra(const std::vector<CMatrix>& seed_set, bool include_unit,
                                  std::uint64_t seed = kDefaultSeed);

/// Decompose a unital *-closed span: center, minimal central projections
/// (read off the spectral projections of a random self-adjoint central
/// element with separated eigenvalues), block sizes and multiplicities.
StarAlgebra block_decompose(const std::vector<CMatrix>& span_basis,
                            std::uint64_t seed = kDefaultSeed);

/// A two-sided ideal presented as the complement of a set of kept blocks.
struct BlockIdeal {
    StarAlgebra parent;
    std::vector<int> kept_blocks;
};

/// Validate the BlockIdeal invariant: the span of the dropped blocks is
/// closed under multiplication by the algebra basis (within tol).
bool is_valid_block_ideal(const BlockIdeal& ideal, double tol = 1e-8);

/// The unit of the ideal: sum of the dropped minimal central projections.
CMatrix support_projection(const BlockIdeal& ideal);

/// The quotient by the ideal realized as the compression
/// z -> (1-s) z (1-s) of every basis element, s = support_projection.
std::vector<CMatrix> compress_quotient(const StarAlgebra& a, const BlockIdeal& ideal);

}  // namespace cstar::staralg
