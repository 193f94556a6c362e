#include "cstar/envelope.hpp"

#include <algorithm>

namespace cstar::envelope {

using opspace::OperatorSpace;
using opspace::SpaceMap;
using staralg::StarAlgebra;

namespace detail {

SpaceMap reduced_compression(const OperatorSpace& x, const StarAlgebra& a,
                             const std::vector<int>& blocks) {
    int target = 0;
    for (int k : blocks) target += a.blocks[static_cast<size_t>(k)].size;

    SpaceMap map;
    map.domain = x;
    map.codomain_dim = std::max(target, 1);
    map.images.reserve(x.basis.size());
    for (const auto& b : x.basis) {
        CMatrix img = CMatrix::Zero(map.codomain_dim, map.codomain_dim);
        int off = 0;
        for (int k : blocks) {
            const int sz = a.blocks[static_cast<size_t>(k)].size;
            img.block(off, off, sz, sz) = a.block_compression(b, k);
            off += sz;
        }
        map.images.push_back(std::move(img));
    }
    return map;
}

}  // namespace detail

bool is_block_redundant(const OperatorSpace& x, const StarAlgebra& a, int k,
                        const std::vector<int>& current_kept, double tol) {
    if (!x.is_unital())
        throw ContractViolation("is_block_redundant: space must be unital");
    if (std::find(current_kept.begin(), current_kept.end(), k) == current_kept.end())
        throw ContractViolation("is_block_redundant: block is not among the kept ones");
    for (const auto& b : x.basis)
        if (a.span_distance(b) > 1e-8)
            throw ContractViolation("is_block_redundant: space does not lie in the algebra");

    std::vector<int> rest;
    for (int j : current_kept)
        if (j != k) rest.push_back(j);
    if (rest.empty()) return false;  // dropping the last block kills the space

    const SpaceMap compression = detail::reduced_compression(x, a, rest);
    return opspace::is_complete_isometry(compression, tol).complete_isometry;
}

EnvelopeResult c_star_envelope(const OperatorSpace& x, double tol) {
    if (!x.is_unital()) throw ContractViolation("c_star_envelope: space must be unital");

    EnvelopeResult result;
    result.generated = staralg::generate_star_algebra(x.basis, /*include_unit=*/true);
    const StarAlgebra& alg = result.generated;

    std::vector<int> kept(alg.blocks.size());
    for (size_t i = 0; i < kept.size(); ++i) kept[i] = static_cast<int>(i);

    // Greedy elimination in the deterministic block order, repeated until
    // a full pass removes nothing. Redundancy of a block can depend on
    // which others remain, so the fixed point matters.
    bool changed = true;
    while (changed && kept.size() > 1) {
        changed = false;
        for (size_t i = 0; i < kept.size() && kept.size() > 1;) {
            if (is_block_redundant(x, alg, kept[i], kept, tol)) {
                kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(i));
                changed = true;
            } else {
                ++i;
            }
        }
    }

    result.kept_blocks = kept;
    result.co_support = CMatrix::Zero(alg.ambient_dim, alg.ambient_dim);
    for (int k : kept) result.co_support += alg.blocks[static_cast<size_t>(k)].projection;
    for (int k : kept)
        result.envelope_profile.push_back({alg.blocks[static_cast<size_t>(k)].size,
                                           alg.blocks[static_cast<size_t>(k)].multiplicity});

    result.embedding.domain = x;
    result.embedding.codomain_dim = x.ambient_dim;
    for (const auto& b : x.basis)
        result.embedding.images.push_back(result.co_support * b * result.co_support);

    // Verify on the multiplicity-reduced picture, which carries the very
    // same matrix norms at every level but keeps the solve small.
    const SpaceMap reduced = detail::reduced_compression(x, alg, kept);
    if (!opspace::is_complete_isometry(reduced, tol).complete_isometry)
        throw InternalConsistencyError(
            "c_star_envelope: kept-block compression failed the complete-isometry check");
    return result;
}

PaulsenEnvelope envelope_of_paulsen(const OperatorSpace& x, double tol) {
    if (!x.is_unital()) throw ContractViolation("envelope_of_paulsen: space must be unital");

    PaulsenEnvelope out;
    out.envelope = c_star_envelope(opspace::paulsen_system(x), tol);
    out.base_profile = c_star_envelope(x, tol).envelope_profile;

    std::vector<std::pair<int, int>> doubled;
    for (const auto& [sz, mult] : out.base_profile) doubled.push_back({2 * sz, mult});
    std::sort(doubled.begin(), doubled.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second > b.second;
    });
    std::vector<std::pair<int, int>> got = out.envelope.envelope_profile;
    std::sort(got.begin(), got.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second > b.second;
    });

    int dim_s = 0, dim_x = 0;
    for (const auto& [sz, mult] : got) dim_s += sz * sz;
    for (const auto& [sz, mult] : out.base_profile) dim_x += sz * sz;
    out.dimension_consistent = (got == doubled) && (dim_s == 4 * dim_x);
    return out;
}

}  // namespace cstar::envelope
