#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "cstar/operator_space.hpp"

namespace cstar::opspace {

namespace {

// ---------------------------------------------------------------------------
// Level-norm ascent
// ---------------------------------------------------------------------------

// Coefficients live in C^{d x k x k}: x(c) = sum_{i,a,b} c(i,a,b) E_ab (x) B_i.
struct AscentProblem {
    const std::vector<CMatrix>* mats;  // d matrices of size s x s
    Eigen::Index s;
    Eigen::Index k;

    CMatrix assemble(const Eigen::VectorXcd& c) const {
        const Eigen::Index d = static_cast<Eigen::Index>(mats->size());
        CMatrix out = CMatrix::Zero(k * s, k * s);
        for (Eigen::Index a = 0; a < k; ++a)
            for (Eigen::Index b = 0; b < k; ++b) {
                CMatrix block = CMatrix::Zero(s, s);
                for (Eigen::Index i = 0; i < d; ++i)
                    block += c(i * k * k + a * k + b) * (*mats)[static_cast<size_t>(i)];
                out.block(a * s, b * s, s, s) = block;
            }
        return out;
    }
};

struct TopTriple {
    double sigma;
    Eigen::VectorXcd u, v;
};

TopTriple top_singular(const CMatrix& m) {
    Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    TopTriple t;
    t.sigma = svd.singularValues()(0);
    t.u = svd.matrixU().col(0);
    t.v = svd.matrixV().col(0);
    return t;
}

// Wirtinger gradient of sigma_max(assemble(c)) in conj coordinates:
// grad(i,a,b) = conj(u_a* M_i v_b) with u, v the top singular pair.
Eigen::VectorXcd sigma_gradient(const AscentProblem& p, const TopTriple& t) {
    const Eigen::Index d = static_cast<Eigen::Index>(p.mats->size());
    Eigen::VectorXcd g(d * p.k * p.k);
    for (Eigen::Index i = 0; i < d; ++i) {
        const CMatrix& mi = (*p.mats)[static_cast<size_t>(i)];
        for (Eigen::Index a = 0; a < p.k; ++a) {
            const Eigen::VectorXcd ua = t.u.segment(a * p.s, p.s);
            const Eigen::VectorXcd mua = mi.adjoint() * ua;
            for (Eigen::Index b = 0; b < p.k; ++b) {
                const Eigen::VectorXcd vb = t.v.segment(b * p.s, p.s);
                g(i * p.k * p.k + a * p.k + b) = std::conj(mua.dot(vb));
            }
        }
    }
    return g;
}

struct RatioPoint {
    double ratio = 0.0;
    double sigma_x = 0.0;
    Eigen::VectorXcd c;
};

// Projected gradient ascent on ||T_k(x)|| / ||x|| with backtracking.
RatioPoint ascend(const AscentProblem& px, const AscentProblem& py, Eigen::VectorXcd c,
                  int max_iters) {
    CMatrix X = px.assemble(c), Y = py.assemble(c);
    TopTriple tx = top_singular(X), ty = top_singular(Y);
    double sx = tx.sigma;
    double sy = ty.sigma;
    if (sx <= 0.0) return {0.0, 0.0, c};
    double ratio = sy / sx;
    double step = 0.5;
    for (int it = 0; it < max_iters && step > 1e-9; ++it) {
        const Eigen::VectorXcd gx = sigma_gradient(px, tx);
        const Eigen::VectorXcd gy = sigma_gradient(py, ty);
        Eigen::VectorXcd grad = (gy * sx - sy * gx) / (sx * sx);
        const double gn = grad.norm();
        if (gn < 1e-14) break;
        grad *= c.norm() / gn;
        bool improved = false;
        for (int bt = 0; bt < 20; ++bt) {
            Eigen::VectorXcd cand = c + step * grad;
            cand /= cand.norm();
            const CMatrix Xc = px.assemble(cand);
            const double sxc = top_singular(Xc).sigma;
            if (sxc <= 0.0) {
                step *= 0.5;
                continue;
            }
            const CMatrix Yc = py.assemble(cand);
            const TopTriple tyc = top_singular(Yc);
            const double rc = tyc.sigma / sxc;
            if (rc > ratio + 1e-14) {
                c = std::move(cand);
                ratio = rc;
                sx = sxc;
                sy = tyc.sigma;
                tx = top_singular(Xc);
                ty = tyc;
                step = std::min(step * 1.5, 4.0);
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;
    }
    return {ratio, sx, c};
}

}  // namespace

LevelNormBound level_norm_lower_bound(const SpaceMap& t, int level, int restarts,
                                      std::uint64_t seed) {
    if (level < 1) throw DimensionError("level_norm_lower_bound: level must be >= 1");
    if (restarts < 1) restarts = 1;
    const Eigen::Index d = static_cast<Eigen::Index>(t.domain.basis.size());
    Sampler sampler(seed);

    RatioPoint best;
    bool have_best = false;
    // Each level re-uses the previous level's best point (zero-padded) as a
    // warm start, so the reported bound is nondecreasing in the level.
    for (Eigen::Index k = 1; k <= level; ++k) {
        AscentProblem px{&t.domain.basis, t.domain.ambient_dim, k};
        AscentProblem py{&t.images, t.codomain_dim, k};
        std::vector<Eigen::VectorXcd> starts;
        if (have_best && k > 1) {
            Eigen::VectorXcd padded = Eigen::VectorXcd::Zero(d * k * k);
            const Eigen::Index kp = k - 1;
            for (Eigen::Index i = 0; i < d; ++i)
                for (Eigen::Index a = 0; a < kp; ++a)
                    for (Eigen::Index b = 0; b < kp; ++b)
                        padded(i * k * k + a * k + b) = best.c(i * kp * kp + a * kp + b);
            starts.push_back(std::move(padded));
        }
        const int fresh = (k == level) ? restarts : std::max(2, restarts / 2);
        for (int r = 0; r < fresh; ++r) {
            Eigen::VectorXcd c(d * k * k);
            for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = sampler.cnormal();
            c /= c.norm();
            starts.push_back(std::move(c));
        }
        RatioPoint level_best;
        bool have_level = false;
        for (auto& c0 : starts) {
            RatioPoint p = ascend(px, py, c0, 300);
            if (!have_level || p.ratio > level_best.ratio) {
                level_best = std::move(p);
                have_level = true;
            }
        }
        best = std::move(level_best);
        have_best = true;
    }

    LevelNormBound out;
    out.bound = best.ratio;
    AscentProblem px{&t.domain.basis, t.domain.ambient_dim, level};
    if (best.sigma_x > 0.0)
        out.witness = px.assemble(best.c) / best.sigma_x;
    else
        out.witness = CMatrix::Zero(level * t.domain.ambient_dim, level * t.domain.ambient_dim);
    return out;
}

// ---------------------------------------------------------------------------
// CP-extension feasibility
// ---------------------------------------------------------------------------

namespace {

// Affine structure of the matching set {C : L_C(s_r) = b_r}. Because the
// system basis is trace-orthonormal the constraint rows are orthonormal,
// so the affine projection is C - A*(A(C) - b) with no normal solve.
struct MatchingSet {
    const OperatorSpace* system;
    std::vector<CMatrix> rhs;  // q x q targets per basis element
    Eigen::Index p, q;

    std::vector<CMatrix> apply(const CMatrix& c) const {
        std::vector<CMatrix> out;
        out.reserve(system->basis.size());
        for (const auto& s : system->basis) {
            CMatrix y = CMatrix::Zero(q, q);
            for (Eigen::Index i = 0; i < p; ++i)
                for (Eigen::Index j = 0; j < p; ++j) {
                    const Complex w = s(i, j);
                    if (w != Complex(0.0, 0.0)) y += w * c.block(i * q, j * q, q, q);
                }
            out.push_back(std::move(y));
        }
        return out;
    }

    CMatrix adjoint(const std::vector<CMatrix>& ys) const {
        CMatrix out = CMatrix::Zero(p * q, p * q);
        for (size_t r = 0; r < ys.size(); ++r) {
            const CMatrix& s = system->basis[r];
            for (Eigen::Index i = 0; i < p; ++i)
                for (Eigen::Index j = 0; j < p; ++j) {
                    const Complex w = std::conj(s(i, j));
                    if (w != Complex(0.0, 0.0)) out.block(i * q, j * q, q, q) += w * ys[r];
                }
        }
        return out;
    }

    double defect(const CMatrix& c, std::vector<CMatrix>* out_diff = nullptr) const {
        std::vector<CMatrix> ac = apply(c);
        double sq = 0.0;
        for (size_t r = 0; r < ac.size(); ++r) {
            ac[r] -= rhs[r];
            sq += ac[r].squaredNorm();
        }
        if (out_diff) *out_diff = std::move(ac);
        return std::sqrt(sq);
    }

    CMatrix project(const CMatrix& c) const {
        std::vector<CMatrix> diff;
        defect(c, &diff);
        return c - adjoint(diff);
    }
};

double stack_norm(const std::vector<CMatrix>& ys) {
    double sq = 0.0;
    for (const auto& y : ys) sq += y.squaredNorm();
    return std::sqrt(sq);
}

// Gauss-Newton / Levenberg-Marquardt polish on the factorized Choi matrix
// C = G G*. Succeeding turns a near-feasible iterate into a certified
// feasible point: G G* is exactly PSD and the constraint defect is tiny.
bool gn_polish(const MatchingSet& aff, CMatrix& g, double target, int max_rounds) {
    const Eigen::Index dim = aff.p * aff.q;

    auto residual = [&](const CMatrix& gg, std::vector<CMatrix>& out) {
        out = aff.apply(gg * gg.adjoint());
        for (size_t r = 0; r < out.size(); ++r) out[r] -= aff.rhs[r];
    };

    auto jt = [&](const std::vector<CMatrix>& ys, const CMatrix& gg) {
        const CMatrix a = aff.adjoint(ys);
        return CMatrix((a + a.adjoint()) * gg);
    };

    std::vector<CMatrix> f;
    residual(g, f);
    double fnorm = stack_norm(f);
    double mu = std::max(1e-12, 1e-4 * fnorm);

    for (int round = 0; round < max_rounds; ++round) {
        if (fnorm <= target) return true;
        // CG on the LM normal equations (J^T J + mu I) delta = J^T f in the
        // real inner product Re tr(X* Y).
        const CMatrix rhs0 = jt(f, g);
        CMatrix delta = CMatrix::Zero(dim, g.cols());
        CMatrix res = rhs0;
        CMatrix dir = res;
        double rs = res.squaredNorm();
        const double rs0 = rs;
        for (int cg = 0; cg < 200 && rs > 1e-6 * rs0; ++cg) {
            const CMatrix jd_mat = dir * g.adjoint() + g * dir.adjoint();
            std::vector<CMatrix> jd = aff.apply(jd_mat);
            CMatrix ndir = jt(jd, g) + mu * dir;
            const double denom = (dir.adjoint() * ndir).trace().real();
            if (denom <= 0.0) break;
            const double alpha = rs / denom;
            delta += alpha * dir;
            res -= alpha * ndir;
            const double rs_new = res.squaredNorm();
            dir = res + (rs_new / rs) * dir;
            rs = rs_new;
        }
        const CMatrix cand = g - delta;
        std::vector<CMatrix> fc;
        residual(cand, fc);
        const double fc_norm = stack_norm(fc);
        if (fc_norm < fnorm) {
            g = cand;
            f = std::move(fc);
            fnorm = fc_norm;
            mu = std::max(mu * 0.3, 1e-14);
        } else {
            mu *= 8.0;
            if (mu > 1e8) break;
        }
    }
    return fnorm <= target;
}

CMatrix psd_factor(const CMatrix& h, Eigen::Index min_rank) {
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (h + h.adjoint()));
    const Eigen::Index n = h.rows();
    const double top = std::max(eig.eigenvalues().maxCoeff(), 0.0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        if (eig.eigenvalues()(i) > std::max(1e-7 * top, 1e-14)) ++rank;
    rank = std::min(n, std::max({rank, min_rank, Eigen::Index(1)}));
    CMatrix g(n, rank);
    for (Eigen::Index k = 0; k < rank; ++k) {
        const Eigen::Index idx = n - 1 - k;  // eigenvalues ascend
        const double lam = eig.eigenvalues()(idx);
        const double w = lam > 0.0 ? std::sqrt(lam) : std::sqrt(top) * 1e-4 + 1e-12;
        g.col(k) = eig.eigenvectors().col(idx) * w;
    }
    return g;
}

}  // namespace

FeasibilityResult cp_extension_feasible(const SpaceMap& phi, double tol, int max_iters) {
    const OperatorSpace& s = phi.domain;
    if (!s.is_unital())
        throw ContractViolation("cp_extension_feasible: system must be unital");
    const Eigen::Index p = s.ambient_dim, q = phi.codomain_dim;
    for (size_t r = 0; r < s.basis.size(); ++r) {
        const CMatrix adj = s.basis[r].adjoint();
        if (s.span_distance(adj) > 1e-8)
            throw ContractViolation("cp_extension_feasible: system is not *-closed");
        const CMatrix expect = phi.images[r].adjoint();
        if ((phi.apply(adj) - expect).norm() > 1e-8 * std::max(1.0, expect.norm()))
            throw ContractViolation("cp_extension_feasible: map is not *-compatible");
    }

    MatchingSet aff{&s, phi.images, p, q};
    const double scale = std::max(1.0, stack_norm(aff.rhs));
    const double crisp = 0.05 * tol * scale;
    const double gn_target = 0.02 * tol * scale;

    CMatrix x = aff.adjoint(aff.rhs);  // min-norm matching point
    CMatrix corr = CMatrix::Zero(p * q, p * q);

    FeasibilityResult out;
    double best_residual = std::numeric_limits<double>::infinity();
    double window_best = best_residual;
    int next_polish = 60;
    int it = 0;
    for (; it < max_iters; ++it) {
        const CMatrix y = matcore::psd_project(x + corr);
        corr = x + corr - y;
        x = aff.project(y);
        const double residual = (y - x).norm();
        best_residual = std::min(best_residual, residual);

        if (residual <= crisp) {
            out.feasible = true;
            out.residual = residual;
            out.iterations = it + 1;
            return out;
        }

        if (it + 1 == next_polish) {
            next_polish = next_polish * 2 + 50;
            if (residual < 1e-2 * scale) {
                CMatrix g = psd_factor(y, 1);
                if (gn_polish(aff, g, gn_target, 60)) {
                    std::vector<CMatrix> f;
                    const CMatrix c = g * g.adjoint();
                    out.feasible = true;
                    out.residual = aff.defect(c, &f);
                    out.iterations = it + 1;
                    return out;
                }
                // One retry with extra factor columns for tangential faces.
                CMatrix g2 = psd_factor(y, std::min<Eigen::Index>(g.cols() + 3, p * q));
                if (gn_polish(aff, g2, gn_target, 60)) {
                    const CMatrix c = g2 * g2.adjoint();
                    out.feasible = true;
                    out.residual = aff.defect(c);
                    out.iterations = it + 1;
                    return out;
                }
            }
        }

        // Plateau: no meaningful progress over a window of 400 iterations
        // after the polish has had at least two chances.
        if ((it + 1) % 400 == 0) {
            if (best_residual > window_best * 0.99 && it > 400) break;
            window_best = best_residual;
        }
    }

    out.feasible = best_residual <= tol * scale;
    out.residual = best_residual;
    out.iterations = it;
    return out;
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

CbCertificate is_completely_contractive(const SpaceMap& t, double tol) {
    CbCertificate cert;
    const int n = t.domain.ambient_dim, m = t.codomain_dim;
    const int sufficiency = std::min(n, m);

    // Cheap ascent pre-filter: catches clear violations with a witness
    // before running the convex solve.
    for (int k = 1; k <= std::min(sufficiency, 2); ++k) {
        LevelNormBound lb = level_norm_lower_bound(t, k, 4, kDefaultSeed + k);
        if (lb.bound > 1.0 + tol) {
            cert.verdict = CbVerdict::Violated;
            cert.level_checked = k;
            cert.witness = lb.witness;
            cert.witness_ratio = lb.bound;
            return cert;
        }
    }

    const FeasibilityResult feas = cp_extension_feasible(paulsen_map(t), tol, 20000);
    cert.feasibility_residual = feas.residual;
    cert.level_checked = sufficiency;
    if (feas.feasible) {
        cert.verdict = CbVerdict::CompletelyContractive;
        return cert;
    }
    const double scale = 1.0;  // residual band is relative to tol
    if (feas.residual <= 100.0 * tol * scale) {
        cert.verdict = CbVerdict::Indeterminate;
        return cert;
    }
    cert.verdict = CbVerdict::Violated;
    // Deeper witness search, capped at the classical sufficiency level.
    for (int k = 1; k <= std::min(sufficiency, 4); ++k) {
        LevelNormBound lb = level_norm_lower_bound(t, k, 24, kDefaultSeed + 17 * k);
        if (lb.bound > 1.0 + tol) {
            cert.level_checked = k;
            cert.witness = lb.witness;
            cert.witness_ratio = lb.bound;
            break;
        }
    }
    return cert;
}

IsometryCheck is_complete_isometry(const SpaceMap& t, double tol) {
    IsometryCheck check;

    CMatrix stacked(static_cast<Eigen::Index>(t.codomain_dim) * t.codomain_dim,
                    static_cast<Eigen::Index>(t.images.size()));
    for (size_t i = 0; i < t.images.size(); ++i)
        stacked.col(static_cast<Eigen::Index>(i)) =
            Eigen::Map<const Eigen::VectorXcd>(t.images[i].data(), t.images[i].size());
    Eigen::JacobiSVD<CMatrix> svd(stacked);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > 1e-8 * std::max(1.0, sv(0))) ++rank;
    check.injective = rank == t.domain.dim();
    if (!check.injective) return check;  // certificates left not-run

    check.forward = is_completely_contractive(t, tol);
    if (check.forward.verdict != CbVerdict::CompletelyContractive) return check;
    check.inverse = is_completely_contractive(inverse_on_range(t), tol);
    check.complete_isometry =
        check.inverse.verdict == CbVerdict::CompletelyContractive;
    return check;
}

}  // namespace cstar::opspace
