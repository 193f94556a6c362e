#pragma once

#include <utility>
#include <vector>

#include "cstar/operator_space.hpp"
#include "cstar/star_algebra.hpp"

namespace cstar::envelope {

/// The C*-envelope of a unital matrix operator space, presented as the
/// generated algebra together with the minimal set of blocks whose joint
/// compression is still completely isometric on the space.
struct EnvelopeResult {
    staralg::StarAlgebra generated;
    std::vector<int> kept_blocks;
    CMatrix co_support;  // p0 = sum of kept minimal central projections
    std::vector<std::pair<int, int>> envelope_profile;
    opspace::SpaceMap embedding;  // x -> p0 x p0 on the original space
};

/// True iff dropping block k (keeping the rest of `current_kept`) leaves
/// the compression of X completely isometric at tol. Indeterminate
/// certificates count as "not redundant": keeping a block is always
/// sound, dropping one is not.
bool is_block_redundant(const opspace::OperatorSpace& x, const staralg::StarAlgebra& a, int k,
                        const std::vector<int>& current_kept, double tol);

/// Generate C*(X), block-decompose it, and greedily eliminate redundant
/// blocks (deterministic order, repeated passes to a fixed point). The
/// returned embedding is verified completely isometric.
EnvelopeResult c_star_envelope(const opspace::OperatorSpace& x, double tol);

struct PaulsenEnvelope {
    EnvelopeResult envelope;                           // envelope of S(X)
    std::vector<std::pair<int, int>> base_profile;     // envelope profile of X
    bool dimension_consistent = false;                 // S-profile == doubling of base profile
};

/// Envelope of the Paulsen system S(X), cross-checked against the
/// block-doubling of the envelope of X.
PaulsenEnvelope envelope_of_paulsen(const opspace::OperatorSpace& x, double tol);

namespace detail {
/// The compression of X onto the named blocks with multiplicities
/// collapsed to a single copy; completely isometrically equivalent to
/// compression by the corresponding central projection.
opspace::SpaceMap reduced_compression(const opspace::OperatorSpace& x,
                                      const staralg::StarAlgebra& a,
                                      const std::vector<int>& blocks);
}  // namespace detail

}  // namespace cstar::envelope
