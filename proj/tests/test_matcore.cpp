#include <doctest.h>

#include <nlohmann/json.hpp>

#include "cstar/json_io.hpp"
#include "cstar/matrix.hpp"
#include "cstar/random.hpp"

using namespace cstar;
using matcore::identity;

namespace {

CMatrix unit_matrix(int n, int i, int j) {
    CMatrix m = CMatrix::Zero(n, n);
    m(i, j) = 1.0;
    return m;
}

}  // namespace

TEST_CASE("opnorm basic values") {
    CHECK(matcore::opnorm(identity(2)) == doctest::Approx(1.0).epsilon(1e-12));

    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = 0.5;
    CHECK(matcore::opnorm(d) == doctest::Approx(1.0).epsilon(1e-12));

    // [[0,2],[0,0]]: M* M = diag(0, 4), so the top singular value is 2.
    CMatrix n = CMatrix::Zero(2, 2);
    n(0, 1) = 2.0;
    CHECK(matcore::opnorm(n) == doctest::Approx(2.0).epsilon(1e-12));

    CHECK(matcore::opnorm(CMatrix::Zero(3, 3)) == 0.0);
    CHECK_THROWS_AS(matcore::opnorm(CMatrix(0, 0)), DimensionError);
}

TEST_CASE("opnorm agrees across the two internal routes") {
    Sampler s(11);
    const CMatrix big = s.gaussian(60, 60);
    const CMatrix small_block = big.topLeftCorner(40, 40);
    // 60x60 goes through the eigenvalue route, the 40x40 copy embedded in
    // a padded matrix goes through the SVD route at size <= 48.
    CMatrix padded = CMatrix::Zero(48, 48);
    padded.topLeftCorner(40, 40) = small_block;
    CMatrix wide = CMatrix::Zero(80, 80);
    wide.topLeftCorner(40, 40) = small_block;
    CHECK(matcore::opnorm(padded) ==
          doctest::Approx(matcore::opnorm(wide)).epsilon(1e-10));
}

TEST_CASE("herm_eig") {
    SUBCASE("diagonal") {
        CMatrix h = CMatrix::Zero(2, 2);
        h(0, 0) = 3.0;
        h(1, 1) = 1.0;
        const auto eig = matcore::herm_eig(h);
        CHECK(eig.values(0) == doctest::Approx(3.0).epsilon(1e-12));
        CHECK(eig.values(1) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((eig.frame.adjoint() * eig.frame - identity(2)).norm() < 1e-10);
        CHECK((eig.frame * eig.values.asDiagonal() * eig.frame.adjoint() - h).norm() < 1e-9);
    }
    SUBCASE("off-diagonal symmetric: roots of lambda^2 - 1") {
        CMatrix h = CMatrix::Zero(2, 2);
        h(0, 1) = 1.0;
        h(1, 0) = 1.0;
        const auto eig = matcore::herm_eig(h);
        CHECK(eig.values(0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(eig.values(1) == doctest::Approx(-1.0).epsilon(1e-12));
    }
    SUBCASE("zero matrix") {
        const auto eig = matcore::herm_eig(CMatrix::Zero(3, 3));
        CHECK(eig.values.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("non-Hermitian rejected") {
        CHECK_THROWS_AS(matcore::herm_eig(unit_matrix(2, 0, 1)), ContractViolation);
    }
    SUBCASE("reconstruction residual on random Hermitian") {
        Sampler s(5);
        for (int trial = 0; trial < 20; ++trial) {
            const CMatrix h = s.hermitian_gaussian(6);
            const auto eig = matcore::herm_eig(h);
            CHECK((eig.frame * eig.values.asDiagonal() * eig.frame.adjoint() - h).norm() <=
                  1e-9 * std::max(1.0, h.norm()));
            CHECK((eig.frame.adjoint() * eig.frame - identity(6)).norm() < 1e-10);
            for (int i = 0; i + 1 < 6; ++i) CHECK(eig.values(i) >= eig.values(i + 1));
        }
    }
}

TEST_CASE("kron") {
    CHECK((matcore::kron(identity(2), identity(2)) - identity(4)).norm() == 0.0);

    // kron(E12, I2) has the identity in the (0,1) block.
    const CMatrix k = matcore::kron(unit_matrix(2, 0, 1), identity(2));
    CMatrix expected = CMatrix::Zero(4, 4);
    expected.block(0, 2, 2, 2) = identity(2);
    CHECK((k - expected).norm() == 0.0);

    SUBCASE("associativity is exact on integer matrices") {
        Sampler s(7);
        CMatrix a(2, 2), b(2, 2), c(2, 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                a(i, j) = Complex(std::floor(3 * s.uniform()) - 1, 0);
                b(i, j) = Complex(std::floor(3 * s.uniform()) - 1, 0);
                c(i, j) = Complex(0, std::floor(3 * s.uniform()) - 1);
            }
        CHECK((matcore::kron(a, matcore::kron(b, c)) -
               matcore::kron(matcore::kron(a, b), c))
                  .norm() == 0.0);
    }

    SUBCASE("opnorm is multiplicative under kron") {
        Sampler s(13);
        for (int trial = 0; trial < 10; ++trial) {
            const CMatrix a = s.gaussian(3, 3), b = s.gaussian(4, 4);
            CHECK(matcore::opnorm(matcore::kron(a, b)) ==
                  doctest::Approx(matcore::opnorm(a) * matcore::opnorm(b)).epsilon(1e-9));
        }
    }
}

TEST_CASE("psd_project") {
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = -1.0;
    CMatrix expected = CMatrix::Zero(2, 2);
    expected(0, 0) = 1.0;
    CHECK((matcore::psd_project(d) - expected).norm() < 1e-12);

    CHECK(matcore::psd_project(-identity(3)).norm() < 1e-12);

    Sampler s(17);
    SUBCASE("PSD inputs are fixed points") {
        for (int trial = 0; trial < 10; ++trial) {
            const CMatrix g = s.gaussian(4, 4);
            const CMatrix psd = g * g.adjoint();
            CHECK((matcore::psd_project(psd) - psd).norm() <= 1e-10 * std::max(1.0, psd.norm()));
        }
    }
    SUBCASE("output min eigenvalue >= -1e-12") {
        for (int trial = 0; trial < 10; ++trial) {
            const CMatrix h = s.hermitian_gaussian(5);
            const auto eig = matcore::herm_eig(matcore::psd_project(h));
            CHECK(eig.values.minCoeff() >= -1e-12);
        }
    }
}

TEST_CASE("polarization identity") {
    // a* b = (1/4) sum_k i^{-k} (a + i^k b)* (a + i^k b); the i^{-k}
    // weight is what makes the cross terms survive.
    Sampler s(23);
    for (int trial = 0; trial < 100; ++trial) {
        const CMatrix a = s.gaussian(4, 4), b = s.gaussian(4, 4);
        CMatrix sum = CMatrix::Zero(4, 4);
        Complex ik(1.0, 0.0);
        for (int k = 0; k < 4; ++k) {
            const CMatrix z = a + ik * b;
            sum += (z.adjoint() * z) / ik;
            ik *= Complex(0.0, 1.0);
        }
        const double scale = matcore::opnorm(a) + matcore::opnorm(b);
        CHECK(matcore::opnorm(a.adjoint() * b - 0.25 * sum) <= 1e-10 * scale * scale);
    }
}

TEST_CASE("opnorm is a C*-norm: ||M* M|| = ||M||^2") {
    Sampler s(29);
    for (int trial = 0; trial < 20; ++trial) {
        const CMatrix m = s.gaussian(5, 5);
        CHECK(matcore::opnorm(m.adjoint() * m) ==
              doctest::Approx(std::pow(matcore::opnorm(m), 2)).epsilon(1e-9));
    }
}

TEST_CASE("adjoint is an exact involution") {
    Sampler s(31);
    const CMatrix m = s.gaussian(4, 6);
    CHECK((CMatrix(CMatrix(m.adjoint()).adjoint()) - m).norm() == 0.0);
}

TEST_CASE("matrix JSON round-trip is bit exact") {
    Sampler s(37);
    CMatrix m = s.gaussian(3, 5);
    // Mix in extreme magnitudes, including subnormals.
    m(0, 0) = Complex(1e-308, -1e308);
    m(1, 2) = Complex(4.9e-324, 0.1 + 0.2);
    m(2, 4) = Complex(-0.0, 1.0 / 3.0);
    const nlohmann::json j = matrix_to_json(m);
    const CMatrix back = matrix_from_json(nlohmann::json::parse(j.dump()));
    REQUIRE(back.rows() == m.rows());
    REQUIRE(back.cols() == m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index jj = 0; jj < m.cols(); ++jj) {
            CHECK(back(i, jj).real() == m(i, jj).real());
            CHECK(back(i, jj).imag() == m(i, jj).imag());
        }
}

TEST_CASE("matrix JSON rejects malformed input") {
    using nlohmann::json;
    CHECK_THROWS_AS(matrix_from_json(json{{"rows", 2}, {"cols", 2}, {"data", {1, 2, 3}}}),
                    DimensionError);
    CHECK_THROWS_AS(matrix_from_json(json{{"rows", 2}, {"data", json::array()}}),
                    DimensionError);
}
