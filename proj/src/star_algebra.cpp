#include "cstar/star_algebra.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "cstar/operator_space.hpp"

namespace cstar::staralg {

namespace {

using opspace::detail::orthonormal_span;

// Orthonormalize a set of Hermitian matrices over the reals, so the
// output members stay Hermitian.
std::vector<CMatrix> real_orthonormal_span(const std::vector<CMatrix>& mats) {
    if (mats.empty()) return {};
    const Eigen::Index n = mats[0].rows();
    Eigen::MatrixXd stacked(2 * n * n, static_cast<Eigen::Index>(mats.size()));
    for (size_t i = 0; i < mats.size(); ++i) {
        Eigen::Index k = 0;
        for (Eigen::Index c = 0; c < n; ++c)
            for (Eigen::Index r = 0; r < n; ++r) {
                stacked(k++, static_cast<Eigen::Index>(i)) = mats[i](r, c).real();
                stacked(k++, static_cast<Eigen::Index>(i)) = mats[i](r, c).imag();
            }
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    std::vector<CMatrix> out;
    if (sv.size() == 0 || sv(0) <= 0.0) return out;
    for (Eigen::Index c = 0; c < sv.size(); ++c) {
        if (sv(c) < 1e-9 * sv(0)) break;
        CMatrix m(n, n);
        Eigen::Index k = 0;
        for (Eigen::Index cc = 0; cc < n; ++cc)
            for (Eigen::Index r = 0; r < n; ++r) {
                m(r, cc) = Complex(svd.matrixU()(k, c), svd.matrixU()(k + 1, c));
                k += 2;
            }
        out.push_back(0.5 * (m + m.adjoint()));
    }
    return out;
}

// Cluster descending eigenvalues; returns cluster boundaries or empty if
// the separation/coherence requirements fail.
std::vector<std::pair<int, int>> cluster_eigenvalues(const Eigen::VectorXd& vals,
                                                     int expected_clusters, double gap_tol) {
    std::vector<std::pair<int, int>> clusters;
    const int n = static_cast<int>(vals.size());
    int start = 0;
    for (int i = 0; i + 1 < n; ++i) {
        if (vals(i) - vals(i + 1) > gap_tol) {
            clusters.push_back({start, i});
            start = i + 1;
        }
    }
    clusters.push_back({start, n - 1});
    if (static_cast<int>(clusters.size()) != expected_clusters) return {};
    for (const auto& [a, b] : clusters)
        if (vals(a) - vals(b) > 1e-3 * gap_tol) return {};
    return clusters;
}

struct BlockFrame {
    CMatrix frame;
    int size = 0;
    int multiplicity = 0;
};

// Standardize one block: find a frame of range(p) in which the
// compressed algebra reads literally as M_size (x) I_multiplicity.
BlockFrame standardize_block(const std::vector<CMatrix>& basis, const CMatrix& p,
                             Sampler& sampler) {
    const Eigen::Index n = p.rows();

    // Range frame of the projection.
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (p + p.adjoint()));
    std::vector<Eigen::Index> range_cols;
    for (Eigen::Index i = 0; i < n; ++i)
        if (eig.eigenvalues()(i) > 0.5) range_cols.push_back(i);
    const Eigen::Index rk = static_cast<Eigen::Index>(range_cols.size());
    CMatrix q(n, rk);
    for (Eigen::Index i = 0; i < rk; ++i) q.col(i) = eig.eigenvectors().col(range_cols[i]);

    // Dimension of the compressed algebra fixes size and multiplicity.
    std::vector<CMatrix> compressed;
    compressed.reserve(basis.size());
    for (const auto& b : basis) compressed.push_back(q.adjoint() * b * q);
    const auto comp_basis = orthonormal_span(compressed);
    const int block_dim = static_cast<int>(comp_basis.size());
    const int size = static_cast<int>(std::lround(std::sqrt(static_cast<double>(block_dim))));
    if (size * size != block_dim || rk % size != 0)
        throw NumericalDegeneracyError("block decomposition: inconsistent block dimensions");
    const int mult = static_cast<int>(rk) / size;

    BlockFrame out;
    out.size = size;
    out.multiplicity = mult;
    if (size == 1) {
        out.frame = q;
        return out;
    }

    for (int attempt = 0; attempt < 16; ++attempt) {
        // Generic Hermitian element of the compressed block.
        CMatrix h = CMatrix::Zero(rk, rk);
        for (const auto& cb : comp_basis) {
            const Complex w = Complex(sampler.normal(), sampler.normal());
            h += w * cb + std::conj(w) * cb.adjoint();
        }
        h = 0.5 * (h + h.adjoint());
        Eigen::SelfAdjointEigenSolver<CMatrix> heig(h);
        Eigen::VectorXd vals = heig.eigenvalues().reverse();
        const double scale = std::max(1.0, std::abs(vals(0)) + std::abs(vals(rk - 1)));
        const auto clusters = cluster_eigenvalues(vals, size, 1e-6 * scale);
        if (clusters.empty()) continue;

        std::vector<CMatrix> eigenframes;
        bool coherent = true;
        for (const auto& [a, b] : clusters) {
            if (b - a + 1 != mult) {
                coherent = false;
                break;
            }
            CMatrix fr(rk, mult);
            for (int c = a; c <= b; ++c) fr.col(c - a) = heig.eigenvectors().col(rk - 1 - c);
            eigenframes.push_back(std::move(fr));
        }
        if (!coherent) continue;

        // A generic algebra element aligns the eigenframes: the polar
        // part of F_i* x F_1 transports frame 1 to frame i.
        CMatrix x = CMatrix::Zero(rk, rk);
        for (const auto& cb : comp_basis) x += Complex(sampler.normal(), sampler.normal()) * cb;
        bool aligned = true;
        CMatrix w(rk, static_cast<Eigen::Index>(size) * mult);
        w.block(0, 0, rk, mult) = eigenframes[0];
        for (int i = 1; i < size; ++i) {
            const CMatrix m = eigenframes[static_cast<size_t>(i)].adjoint() * x * eigenframes[0];
            Eigen::JacobiSVD<CMatrix> msvd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
            if (msvd.singularValues()(mult - 1) < 1e-8 * std::max(1.0, msvd.singularValues()(0))) {
                aligned = false;
                break;
            }
            const CMatrix polar = msvd.matrixU() * msvd.matrixV().adjoint();
            w.block(0, static_cast<Eigen::Index>(i) * mult, rk, mult) =
                eigenframes[static_cast<size_t>(i)] * polar;
        }
        if (!aligned) continue;

        // Validate: every basis element must compress to scalar blocks.
        const CMatrix frame = q * w;
        bool scalar_blocks = true;
        for (const auto& b : basis) {
            const CMatrix c = frame.adjoint() * b * frame;
            for (int bi = 0; bi < size && scalar_blocks; ++bi)
                for (int bj = 0; bj < size && scalar_blocks; ++bj) {
                    const CMatrix blk = c.block(bi * mult, bj * mult, mult, mult);
                    const Complex mean = blk.trace() / static_cast<double>(mult);
                    if ((blk - mean * CMatrix::Identity(mult, mult)).norm() >
                        1e-7 * std::max(1.0, c.norm()))
                        scalar_blocks = false;
                }
            if (!scalar_blocks) break;
        }
        if (!scalar_blocks) continue;

        out.frame = frame;
        return out;
    }
    throw NumericalDegeneracyError(
        "block decomposition: failed to standardize a block after 16 attempts");
}

}  // namespace

std::vector<std::pair<int, int>> StarAlgebra::profile() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(blocks.size());
    for (const auto& b : blocks) out.push_back({b.size, b.multiplicity});
    return out;
}

Eigen::VectorXcd StarAlgebra::coefficients(const CMatrix& m) const {
    Eigen::VectorXcd c(dim());
    for (int i = 0; i < dim(); ++i) c(i) = matcore::trace_inner(basis[static_cast<size_t>(i)], m);
    return c;
}

double StarAlgebra::span_distance(const CMatrix& m) const {
    const Eigen::VectorXcd c = coefficients(m);
    CMatrix proj = CMatrix::Zero(m.rows(), m.cols());
    for (int i = 0; i < dim(); ++i) proj += c(i) * basis[static_cast<size_t>(i)];
    return (m - proj).norm();
}

CMatrix StarAlgebra::block_compression(const CMatrix& a, int k) const {
    const Block& blk = blocks.at(static_cast<size_t>(k));
    const CMatrix c = blk.frame.adjoint() * a * blk.frame;
    CMatrix out(blk.size, blk.size);
    for (int i = 0; i < blk.size; ++i)
        for (int j = 0; j < blk.size; ++j)
            out(i, j) = c.block(i * blk.multiplicity, j * blk.multiplicity, blk.multiplicity,
                                blk.multiplicity)
                            .trace() /
                        static_cast<double>(blk.multiplicity);
    return out;
}

StarAlgebra block_decompose(const std::vector<CMatrix>& span_basis, std::uint64_t seed) {
    if (span_basis.empty()) throw DimensionError("block_decompose: empty span");
    const Eigen::Index n = span_basis[0].rows();
    if (span_basis[0].cols() != n) throw DimensionError("block_decompose: matrices must be square");

    StarAlgebra alg;
    alg.ambient_dim = static_cast<int>(n);
    alg.basis = orthonormal_span(span_basis);

    opspace::OperatorSpace as_space;
    as_space.ambient_dim = alg.ambient_dim;
    as_space.basis = alg.basis;
    const CMatrix eye = matcore::identity(n);
    if (as_space.span_distance(eye) > 1e-8 * eye.norm())
        throw ContractViolation("block_decompose: span does not contain the identity");
    for (const auto& a : alg.basis) {
        if (as_space.span_distance(a.adjoint()) > 1e-8)
            throw ContractViolation("block_decompose: span is not *-closed");
        for (const auto& b : alg.basis)
            if (as_space.span_distance(a * b) > 1e-8 * std::max(1.0, (a * b).norm()))
                throw ContractViolation("block_decompose: span is not multiplicatively closed");
    }

    // Center: null space of the stacked commutator map on coefficients.
    const Eigen::Index d = static_cast<Eigen::Index>(alg.basis.size());
    CMatrix commutators(d * n * n, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index i = 0; i < d; ++i) {
            const CMatrix com = alg.basis[static_cast<size_t>(j)] * alg.basis[static_cast<size_t>(i)] -
                                alg.basis[static_cast<size_t>(i)] * alg.basis[static_cast<size_t>(j)];
            commutators.block(i * n * n, j, n * n, 1) =
                Eigen::Map<const Eigen::VectorXcd>(com.data(), n * n);
        }
    }
    Eigen::JacobiSVD<CMatrix> csvd(commutators, Eigen::ComputeThinV);
    const auto& sv = csvd.singularValues();
    const double sv_scale = sv.size() > 0 ? std::max(sv(0), 1.0) : 1.0;
    std::vector<CMatrix> center_raw;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (sv(k) > 1e-9 * sv_scale) continue;
        CMatrix z = CMatrix::Zero(n, n);
        for (Eigen::Index j = 0; j < d; ++j)
            z += csvd.matrixV()(j, k) * alg.basis[static_cast<size_t>(j)];
        center_raw.push_back(std::move(z));
    }
    alg.center_basis = orthonormal_span(center_raw);
    const int r = static_cast<int>(alg.center_basis.size());
    if (r == 0) throw InternalConsistencyError("block_decompose: empty center");

    // Hermitian basis of the center (the center is *-closed).
    std::vector<CMatrix> herm_parts;
    for (const auto& z : alg.center_basis) {
        herm_parts.push_back(0.5 * (z + z.adjoint()));
        herm_parts.push_back(Complex(0.0, -0.5) * (z - z.adjoint()));
    }
    const std::vector<CMatrix> herm_center = real_orthonormal_span(herm_parts);
    if (static_cast<int>(herm_center.size()) != r)
        throw InternalConsistencyError("block_decompose: center Hermitian dimension mismatch");

    // Random self-adjoint central element with separated eigenvalues.
    Sampler sampler(seed);
    std::vector<CMatrix> projections;
    for (int attempt = 0; attempt < 16 && projections.empty(); ++attempt) {
        CMatrix h = CMatrix::Zero(n, n);
        for (const auto& z : herm_center) h += sampler.normal() * z;
        h = 0.5 * (h + h.adjoint());
        Eigen::SelfAdjointEigenSolver<CMatrix> heig(h);
        Eigen::VectorXd vals = heig.eigenvalues().reverse();
        const double scale = std::max(1.0, std::abs(vals(0)) + std::abs(vals(n - 1)));
        const auto clusters = cluster_eigenvalues(vals, r, 1e-6 * scale);
        if (clusters.empty()) continue;
        for (const auto& [a, b] : clusters) {
            CMatrix u(n, b - a + 1);
            for (int c = a; c <= b; ++c) u.col(c - a) = heig.eigenvectors().col(n - 1 - c);
            projections.push_back(u * u.adjoint());
        }
    }
    if (projections.empty())
        throw NumericalDegeneracyError(
            "block_decompose: central eigenvalues stayed degenerate after 16 resamples");

    for (const auto& p : projections) {
        BlockFrame bf = standardize_block(alg.basis, p, sampler);
        Block blk;
        blk.size = bf.size;
        blk.multiplicity = bf.multiplicity;
        blk.projection = p;
        blk.frame = bf.frame;
        alg.blocks.push_back(std::move(blk));
    }

    // Sorted by (size, multiplicity) descending; ties keep the spectral
    // order of the sampled central element, which is seed-deterministic.
    std::stable_sort(alg.blocks.begin(), alg.blocks.end(), [](const Block& a, const Block& b) {
        if (a.size != b.size) return a.size > b.size;
        return a.multiplicity > b.multiplicity;
    });

    int dim_sum = 0, rank_sum = 0;
    for (const auto& b : alg.blocks) {
        dim_sum += b.size * b.size;
        rank_sum += b.size * b.multiplicity;
    }
    if (dim_sum != alg.dim() || rank_sum != alg.ambient_dim)
        throw InternalConsistencyError("block_decompose: block bookkeeping failed");
    return alg;
}

StarAlgebra generate_star_algebra(const std::vector<CMatrix>& seed_set, bool include_unit,
                                  std::uint64_t seed) {
    if (seed_set.empty() && !include_unit)
        throw DimensionError("generate_star_algebra: empty seed set");
    Eigen::Index n = seed_set.empty() ? 0 : seed_set[0].rows();
    if (!seed_set.empty() && seed_set[0].cols() != n)
        throw DimensionError("generate_star_algebra: matrices must be square");
    std::vector<CMatrix> gens = seed_set;
    if (include_unit) {
        if (n == 0) throw DimensionError("generate_star_algebra: cannot infer dimension");
        gens.push_back(matcore::identity(n));
    }

    std::vector<CMatrix> basis = orthonormal_span(gens);
    const size_t bound = static_cast<size_t>(n) * static_cast<size_t>(n);
    while (true) {
        std::vector<CMatrix> extended = basis;
        for (const auto& a : basis) extended.push_back(a.adjoint());
        for (const auto& a : basis)
            for (const auto& b : basis) extended.push_back(a * b);
        std::vector<CMatrix> closed = orthonormal_span(extended);
        const bool stable = closed.size() == basis.size() || closed.size() >= bound;
        basis = std::move(closed);
        if (stable) break;
    }
    return block_decompose(basis, seed);
}

bool is_valid_block_ideal(const BlockIdeal& ideal, double tol) {
    const StarAlgebra& a = ideal.parent;
    for (int k : ideal.kept_blocks)
        if (k < 0 || k >= static_cast<int>(a.blocks.size())) return false;

    std::vector<CMatrix> ideal_gens;
    for (size_t k = 0; k < a.blocks.size(); ++k) {
        if (std::find(ideal.kept_blocks.begin(), ideal.kept_blocks.end(), static_cast<int>(k)) !=
            ideal.kept_blocks.end())
            continue;
        for (const auto& b : a.basis) ideal_gens.push_back(a.blocks[k].projection * b);
    }
    if (ideal_gens.empty()) return true;  // zero ideal

    opspace::OperatorSpace span;
    span.ambient_dim = a.ambient_dim;
    span.basis = orthonormal_span(ideal_gens);
    for (const auto& e : span.basis)
        for (const auto& b : a.basis) {
            if (span.span_distance(e * b) > tol * std::max(1.0, (e * b).norm())) return false;
            if (span.span_distance(b * e) > tol * std::max(1.0, (b * e).norm())) return false;
        }
    return true;
}

CMatrix support_projection(const BlockIdeal& ideal) {
    const StarAlgebra& a = ideal.parent;
    CMatrix s = CMatrix::Zero(a.ambient_dim, a.ambient_dim);
    for (size_t k = 0; k < a.blocks.size(); ++k) {
        if (std::find(ideal.kept_blocks.begin(), ideal.kept_blocks.end(), static_cast<int>(k)) !=
            ideal.kept_blocks.end())
            continue;
        s += a.blocks[k].projection;
    }
    return s;
}

std::vector<CMatrix> compress_quotient(const StarAlgebra& a, const BlockIdeal& ideal) {
    const CMatrix comp = matcore::identity(a.ambient_dim) - support_projection(ideal);
    std::vector<CMatrix> images;
    images.reserve(a.basis.size());
    for (const auto& b : a.basis) images.push_back(comp * b * comp);
    return images;
}

}  // namespace cstar::staralg
