#include <cmath>

#include "coc/numerics.hpp"
#include "coc/rng.hpp"
#include "doctest.h"
#include "support/helpers.hpp"

using coc::Matrix;
using coc::Vector;

TEST_CASE("sym_eigen solves a frozen 2x2 problem") {
    Matrix a(2, 2);
    a << 2.0, 1.0, 1.0, 2.0;
    const auto eig = coc::sym_eigen(a);
    REQUIRE(eig.values.size() == 2);
    CHECK(eig.values(0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(eig.values(1) == doctest::Approx(1.0).epsilon(1e-12));
    // Columns are orthonormal and reconstruct the input.
    const Matrix vtv = eig.vectors.transpose() * eig.vectors;
    CHECK((vtv - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
    const Matrix rec = eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
    CHECK((rec - a).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sym_eigen handles the 1x1 case") {
    const auto eig = coc::sym_eigen(Matrix::Constant(1, 1, 5.0));
    CHECK(eig.values(0) == doctest::Approx(5.0));
    CHECK(std::abs(std::abs(eig.vectors(0, 0)) - 1.0) < 1e-14);
}

TEST_CASE("sym_eigen property: reconstruction on random symmetric matrices") {
    coc::RngStream rng(coc::derive_key(31, coc::stream::kOracle, 1));
    for (int trial = 0; trial < 200; ++trial) {
        const int dim = 1 + static_cast<int>(rng.next_below(12));
        const Matrix a = testsupport::random_symmetric(rng, dim);
        const auto eig = coc::sym_eigen(a);
        const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
        const Matrix rec =
            eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose();
        REQUIRE((rec - a).cwiseAbs().maxCoeff() < 1e-9 * scale);
        const Matrix vtv = eig.vectors.transpose() * eig.vectors;
        REQUIRE((vtv - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff() < 1e-10);
        for (int i = 1; i < dim; ++i) REQUIRE(eig.values(i - 1) >= eig.values(i));
    }
}

TEST_CASE("spd_inverse matches the closed form for a 2x2 matrix") {
    Matrix a(2, 2);
    a << 2.0, 1.0, 1.0, 2.0;
    const Matrix inv = coc::spd_inverse(a);
    Matrix expected(2, 2);
    expected << 2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0;
    CHECK((inv - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("spd_inverse property: M times inverse is the identity") {
    coc::RngStream rng(coc::derive_key(31, coc::stream::kOracle, 2));
    for (int trial = 0; trial < 100; ++trial) {
        const int dim = 1 + static_cast<int>(rng.next_below(10));
        const Matrix m = testsupport::random_spd(rng, dim);
        const Matrix prod = m * coc::spd_inverse(m);
        REQUIRE((prod - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("spd_inverse rejects an indefinite matrix") {
    Matrix a(2, 2);
    a << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
    CHECK_THROWS_AS(coc::spd_inverse(a), coc::SingularityError);
}

TEST_CASE("spd_solve agrees with explicit inverse application") {
    coc::RngStream rng(coc::derive_key(31, coc::stream::kOracle, 3));
    const Matrix m = testsupport::random_spd(rng, 4);
    Vector b(4);
    for (int i = 0; i < 4; ++i) b(i) = rng.next_gaussian();
    const Vector x = coc::spd_solve(m, b);
    CHECK((m * x - b).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("psd_sqrt squares back to the input") {
    coc::RngStream rng(coc::derive_key(31, coc::stream::kOracle, 4));
    for (int trial = 0; trial < 300; ++trial) {
        const int dim = 1 + static_cast<int>(rng.next_below(10));
        Matrix m = testsupport::random_spd(rng, dim, 0.0);  // PSD, may be near-singular
        const Matrix r = coc::psd_sqrt(m);
        const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
        REQUIRE((r * r - m).cwiseAbs().maxCoeff() < 1e-8 * scale);
        REQUIRE((r - r.transpose()).cwiseAbs().maxCoeff() < 1e-10 * scale);
    }
}

TEST_CASE("psd_sqrt rejects clearly negative eigenvalues") {
    CHECK_THROWS_AS(coc::psd_sqrt(Matrix::Constant(1, 1, -0.5)), coc::ValidationError);
}

TEST_CASE("symmetrize rejects matrices that are far from symmetric") {
    Matrix a(2, 2);
    a << 1.0, 0.5, -0.5, 1.0;
    CHECK_THROWS_AS(coc::symmetrize(a), coc::ValidationError);
    Matrix b(2, 2);
    b << 1.0, 0.5, 0.5 + 1e-13, 1.0;
    const Matrix s = coc::symmetrize(b);
    CHECK(s(0, 1) == s(1, 0));
}
