#pragma once

#include <cstdint>
#include <random>

#include "cstar/matrix.hpp"

namespace cstar {

inline constexpr std::uint64_t kDefaultSeed = 0xC0FFEE;

/// Seeded sampler for the randomized routines. All consumers take a
/// sampler (or a seed) explicitly, so identical inputs give identical
/// outputs regardless of call order elsewhere.
class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : gen_(seed) {}

    double normal() { return normal_(gen_); }
    double uniform() { return uniform_(gen_); }

    Complex cnormal() { return Complex(normal_(gen_), normal_(gen_)) / std::sqrt(2.0); }

    CMatrix gaussian(Eigen::Index rows, Eigen::Index cols) {
        CMatrix m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = cnormal();
        return m;
    }

    CMatrix hermitian_gaussian(Eigen::Index n) {
        const CMatrix g = gaussian(n, n);
        return 0.5 * (g + g.adjoint());
    }

    /// Haar-ish random unitary via QR of a complex Gaussian with the
    /// phase of R's diagonal absorbed into Q.
    CMatrix unitary(Eigen::Index n) {
        const CMatrix g = gaussian(n, n);
        Eigen::HouseholderQR<CMatrix> qr(g);
        CMatrix q = qr.householderQ();
        const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (Eigen::Index j = 0; j < n; ++j) {
            const Complex d = r(j, j);
            const double a = std::abs(d);
            q.col(j) *= (a > 0.0) ? d / a : Complex(1.0, 0.0);
        }
        return q;
    }

    std::uint64_t raw() { return gen_(); }

    /// Integer in [0, bound).
    std::size_t index(std::size_t bound) {
        std::uniform_int_distribution<std::size_t> dist(0, bound - 1);
        return dist(gen_);
    }

private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace cstar
