#include "doctest.h"

#include <cmath>
#include <random>

#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>

#include "ems/errors.hpp"
#include "ems/numerics.hpp"

using namespace ems;

namespace {

Matrix random_matrix(std::mt19937_64& rng, int n, int m) {
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Matrix a(n, m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            a(i, j) = d(rng);
        }
    }
    return a;
}

Matrix random_stable(std::mt19937_64& rng, int n) {
    Matrix a = random_matrix(rng, n, n);
    const double shift = spectral_abscissa(a) + 0.5;
    return a - shift * Matrix::Identity(n, n);
}

// Independent oracle: (I ⊗ Aᵀ + Aᵀ ⊗ I) vec(X) = -vec(Q).
Matrix kron_lyapunov(const Matrix& a, const Matrix& q) {
    const Eigen::Index n = a.rows();
    const Matrix id = Matrix::Identity(n, n);
    const Matrix big = Eigen::kroneckerProduct(id, a.transpose()) +
                       Eigen::kroneckerProduct(a.transpose(), id);
    const Vector rhs = -Eigen::Map<const Vector>(q.data(), n * n);
    const Vector x = big.fullPivLu().solve(rhs);
    return Eigen::Map<const Matrix>(x.data(), n, n);
}

} // namespace

TEST_CASE("eig: identity, rotation and the reference cubic") {
    const Spectrum id = eig(Matrix::Identity(3, 3));
    REQUIRE(id.size() == 3);
    for (const Complex& l : id) {
        CHECK(std::abs(l - Complex(1.0, 0.0)) < 1e-12);
    }

    Matrix rot(2, 2);
    rot << 0, -1, 1, 0;
    const Spectrum r = eig(rot);
    REQUIRE(r.size() == 2);
    CHECK(std::abs(r[0] - Complex(0.0, -1.0)) < 1e-12);
    CHECK(std::abs(r[1] - Complex(0.0, 1.0)) < 1e-12);

    Matrix comp(3, 3);
    comp << -50, -0.1375, -6.874, 1, 0, 0, 0, 1, 0;
    const Spectrum c = eig(comp);
    REQUIRE(c.size() == 3);
    CHECK(std::abs(c[0] - Complex(-50.0, 0.0)) < 1e-4);
    CHECK(std::abs(c[1].real()) < 1e-4);
    CHECK(std::abs(std::abs(c[1].imag()) - 0.37078) < 1e-4);
    CHECK(std::abs(c[2] - std::conj(c[1])) < 1e-12);
    for (const Complex& l : c) {
        const Complex p = ((l + 50.0) * l + 0.1375) * l + 6.874;
        CHECK(std::abs(p) < 1e-9 * std::max(1.0, std::pow(std::abs(l), 3)));
    }
}

TEST_CASE("eig: non-square and non-finite input") {
    CHECK_THROWS_AS(eig(Matrix::Zero(2, 3)), DimensionError);
    Matrix bad = Matrix::Identity(2, 2);
    bad(0, 1) = std::nan("");
    CHECK_THROWS_AS(eig(bad), DomainError);
}

TEST_CASE("eig: every eigenvalue makes A - lambda I numerically singular") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + trial % 7;
        const Matrix a = random_matrix(rng, n, n);
        const Spectrum s = eig(a);
        REQUIRE(s.size() == static_cast<std::size_t>(n));
        const double norm = std::max(1.0, a.norm());
        for (const Complex& l : s) {
            const Eigen::MatrixXcd shifted =
                a.cast<Complex>() - l * Eigen::MatrixXcd::Identity(n, n);
            Eigen::JacobiSVD<Eigen::MatrixXcd> svd(shifted);
            CHECK(svd.singularValues()(n - 1) < 1e-7 * norm);
        }
    }
}

TEST_CASE("eig: conjugate symmetry, trace and determinant") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + trial % 6;
        const Matrix a = random_matrix(rng, n, n);
        const Spectrum s = eig(a);
        Complex sum = 0.0;
        Complex prod = 1.0;
        for (const Complex& l : s) {
            sum += l;
            prod *= l;
            double best = 1e300;
            for (const Complex& m : s) {
                best = std::min(best, std::abs(m - std::conj(l)));
            }
            CHECK(best < 1e-9);
        }
        CHECK(std::abs(sum - a.trace()) < 1e-9 * std::max(1.0, a.norm()));
        CHECK(std::abs(prod - a.determinant()) < 1e-8 * std::max(1.0, std::abs(a.determinant())));
    }
}

TEST_CASE("solve_lyapunov: worked examples") {
    const Matrix x1 = solve_lyapunov(Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, 2.0));
    CHECK(x1(0, 0) == doctest::Approx(1.0).epsilon(1e-14));

    Matrix stable(2, 2);
    stable << -1, 0.3, 0, -2;
    CHECK(solve_lyapunov(stable, Matrix::Zero(2, 2)).norm() == 0.0);

    Matrix diag = Matrix::Zero(2, 2);
    diag(0, 0) = -1.0;
    diag(1, 1) = -2.0;
    const Matrix x3 = solve_lyapunov(diag, Matrix::Identity(2, 2));
    CHECK(x3(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(x3(1, 1) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(std::abs(x3(0, 1)) < 1e-15);
    CHECK(std::abs(x3(1, 0)) < 1e-15);
}

TEST_CASE("solve_lyapunov: singular and malformed equations") {
    Matrix rot(2, 2);
    rot << 0, -1, 1, 0;
    CHECK_THROWS_AS(solve_lyapunov(rot, Matrix::Identity(2, 2)), SingularEquation);
    CHECK_THROWS_AS(solve_lyapunov(Matrix::Identity(2, 2) * -1.0, Matrix::Identity(3, 3)),
                    DimensionError);
}

TEST_CASE("solve_lyapunov: residual bound and agreement with the Kronecker solve") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + trial % 6;
        const Matrix a = random_stable(rng, n);
        const Matrix g = random_matrix(rng, n, n);
        const Matrix q = g * g.transpose();
        const Matrix x = solve_lyapunov(a, q);
        const Matrix res = a.transpose() * x + x * a + q;
        CHECK(res.norm() <= 1e-10 * std::max(1.0, q.norm()) * std::max(1.0, a.norm()) *
                                std::max(1.0, x.norm()));
        CHECK((x - kron_lyapunov(a, q)).norm() <= 1e-8 * std::max(1.0, x.norm()));
        CHECK(is_symmetric(x, 1e-9 * std::max(1.0, x.norm())));
        CHECK(min_symmetric_eigenvalue(x) > -1e-10 * std::max(1.0, x.norm()));
    }
}

TEST_CASE("solve_care: worked examples") {
    const Matrix one = Matrix::Identity(1, 1);
    const Matrix zero1 = Matrix::Zero(1, 1);
    const Matrix p = solve_care(zero1, one, one, one, zero1);
    CHECK(p(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

    // Unstable scalar plant with no state weight still needs P = 2.
    const Matrix p2 = solve_care(one, one, zero1, one, zero1);
    CHECK(p2(0, 0) == doctest::Approx(2.0).epsilon(1e-12));

    Matrix stable(2, 2);
    stable << -1, 1, 0, -3;
    const Matrix b = Matrix::Identity(2, 1);
    const Matrix p3 = solve_care(stable, b, Matrix::Zero(2, 2), one, Matrix::Zero(2, 1));
    CHECK(p3.norm() < 1e-12);
}

TEST_CASE("solve_care: reference plant in companion form") {
    Matrix a(3, 3);
    a << -50, -0.1375, -6.874, 1, 0, 0, 0, 1, 0;
    const Matrix b = Matrix::Identity(3, 1);
    const Matrix q = 5.0 * Matrix::Identity(3, 3);
    const Matrix r = Matrix::Constant(1, 1, 10.0);
    const Matrix n = Matrix::Zero(3, 1);
    const Matrix p = solve_care(a, b, q, r, n);
    CHECK(care_residual(a, b, q, r, n, p) <= 1e-8 * q.norm());
    CHECK(is_symmetric(p, 1e-9));
    CHECK(min_symmetric_eigenvalue(p) > 0.0);
    const Matrix k = r.inverse() * b.transpose() * p;
    CHECK(is_hurwitz(a - b * k));
}

TEST_CASE("solve_care: cross term on random systems") {
    std::mt19937_64 rng(14);
    int solved = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + trial % 4;
        const Matrix a = random_matrix(rng, n, n);
        const Matrix b = random_matrix(rng, n, 1);
        const Matrix g = random_matrix(rng, n, n);
        const Matrix r = Matrix::Constant(1, 1, 1.0 + std::abs(g(0, 0)));
        const Matrix nn = 0.1 * random_matrix(rng, n, 1);
        const Matrix q = g * g.transpose() + nn * r.inverse() * nn.transpose() +
                         1e-3 * Matrix::Identity(n, n);
        if (!is_stabilizable(a, b, 1e-6)) {
            continue;
        }
        const Matrix p = solve_care(a, b, q, r, nn);
        ++solved;
        CHECK(care_residual(a, b, q, r, nn, p) <= 1e-8 * std::max(1.0, q.norm()) *
                                                      std::max(1.0, p.norm()));
        const Matrix k = r.inverse() * (b.transpose() * p + nn.transpose());
        CHECK(is_hurwitz(a - b * k));
    }
    CHECK(solved > 30);
}

TEST_CASE("solve_care: error paths") {
    Matrix a = Matrix::Identity(2, 2);
    Matrix b(2, 1);
    b << 1, 0;
    const Matrix q = Matrix::Identity(2, 2);
    const Matrix r = Matrix::Identity(1, 1);
    CHECK_THROWS_AS(solve_care(a, b, q, r, Matrix::Zero(2, 1)), SynthesisError);
    CHECK_THROWS_AS(solve_care(-a, b, q, Matrix::Zero(1, 1), Matrix::Zero(2, 1)), WeightError);
    CHECK_THROWS_AS(solve_care(-a, b, q, r, Matrix::Zero(3, 1)), DimensionError);
}

TEST_CASE("stabilizability and detectability") {
    Matrix a(2, 2);
    a << 1, 0, 0, -1;
    Matrix b_good(2, 1);
    b_good << 1, 0;
    Matrix b_bad(2, 1);
    b_bad << 0, 1;
    CHECK(is_stabilizable(a, b_good));
    CHECK_FALSE(is_stabilizable(a, b_bad));
    CHECK(is_detectable(a, b_good.transpose()));
    CHECK_FALSE(is_detectable(a, b_bad.transpose()));
}

TEST_CASE("spectrum_distance pairs multisets") {
    const Spectrum a{Complex(-1, 0), Complex(-2, 1), Complex(-2, -1)};
    const Spectrum b{Complex(-2, -1), Complex(-1, 0), Complex(-2, 1.0 + 1e-6)};
    CHECK(spectrum_distance(a, b) == doctest::Approx(1e-6).epsilon(1e-6));
    CHECK(std::isinf(spectrum_distance(a, Spectrum{Complex(-1, 0)})));
}
