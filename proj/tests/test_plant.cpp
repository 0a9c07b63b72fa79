#include "doctest.h"

#include <cmath>
#include <random>

#include "ems/errors.hpp"
#include "ems/plant.hpp"

using namespace ems;

namespace {

Matrix reference_companion_a() {
    Matrix a(3, 3);
    a << -50, -0.1375, -6.874, 1, 0, 0, 0, 1, 0;
    return a;
}

// Jacobian of z2' = g - (k / 2m)(z3 / z1)^2 written out by hand.
Matrix exact_nonlinear_jacobian(const PlantParams& p) {
    Matrix j = Matrix::Zero(3, 3);
    j(0, 1) = 1.0;
    j(1, 0) = p.k_em * p.i0 * p.i0 / (p.m * std::pow(p.x0, 3));
    j(1, 2) = -p.k_em * p.i0 / (p.m * p.x0 * p.x0);
    j(2, 2) = -p.R_coil / p.L_coil;
    return j;
}

} // namespace

TEST_CASE("electromagnet_force") {
    CHECK(electromagnet_force(0.03, 0.8, 2.9e-6) == doctest::Approx(1.0311e-3).epsilon(1e-4));
    CHECK(electromagnet_force(0.03, 0.0, 2.9e-6) == 0.0);
    CHECK_THROWS_AS(electromagnet_force(0.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(electromagnet_force(-0.01, 1.0, 1.0), DomainError);

    // Homogeneous of degree zero in (x, i) and linear in k.
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> pos(0.01, 2.0);
    for (int i = 0; i < 100; ++i) {
        const double x = pos(rng);
        const double cur = pos(rng);
        const double k = pos(rng);
        const double s = pos(rng);
        const double f = electromagnet_force(x, cur, k);
        CHECK(electromagnet_force(s * x, s * cur, k) == doctest::Approx(f).epsilon(1e-12));
        CHECK(electromagnet_force(x, cur, s * k) == doctest::Approx(s * f).epsilon(1e-12));
    }
}

TEST_CASE("nonlinear_derivative") {
    const PlantParams p;
    const PlantState free_fall = nonlinear_derivative({0.03, 0.0, 0.0}, 0.0, p);
    CHECK(free_fall[0] == 0.0);
    CHECK(free_fall[1] == doctest::Approx(9.81));
    CHECK(free_fall[2] == 0.0);

    // The coil current holds when the voltage equals R i.
    const PlantState hold = nonlinear_derivative({0.03, 0.2, 0.8}, p.R_coil * 0.8, p);
    CHECK(hold[0] == 0.2);
    CHECK(std::abs(hold[2]) < 1e-15);

    // At the nominal operating point the magnet barely offsets gravity.
    const PlantState op = nonlinear_derivative({0.03, 0.0, 0.8}, p.R_coil * 0.8, p);
    CHECK(op[1] == doctest::Approx(9.808969).epsilon(1e-6));
    CHECK(equilibrium_residual(p) == doctest::Approx(9.808969).epsilon(1e-6));

    CHECK_THROWS_AS(nonlinear_derivative({0.0, 0.0, 0.8}, 0.0, p), DomainError);
}

TEST_CASE("linearize: reference values") {
    const StateSpace ss = linearize(PlantParams{});
    CHECK(ss.A(0, 1) == 1.0);
    CHECK(ss.A(1, 0) == doctest::Approx(-0.137481).epsilon(1e-5));
    CHECK(ss.A(1, 2) == doctest::Approx(5.1556e-3).epsilon(1e-4));
    CHECK(ss.A(2, 2) == doctest::Approx(-50.0).epsilon(1e-14));
    CHECK(ss.B(2, 0) == doctest::Approx(192.3077).epsilon(1e-6));
    CHECK(ss.C(0, 0) == 1.0);
    CHECK(ss.D(0, 0) == 0.0);
    CHECK(ss.state_labels == std::vector<std::string>{"gap", "velocity", "current"});
    CHECK(ss.realization == Realization::physical);

    const Spectrum s = eig(ss.A);
    CHECK(std::abs(s[0] - Complex(-50.0, 0.0)) < 1e-4);
    CHECK(std::abs(s[1].real()) < 1e-4);
    CHECK(std::abs(std::abs(s[1].imag()) - 0.37078) < 1e-4);
}

TEST_CASE("linearize: mass scaling and zero bias current") {
    PlantParams heavy;
    heavy.m = 2.0;
    const StateSpace a1 = linearize(PlantParams{});
    const StateSpace a2 = linearize(heavy);
    CHECK(a2.A(1, 0) == doctest::Approx(a1.A(1, 0) / 2.0));
    CHECK(a2.A(1, 2) == doctest::Approx(a1.A(1, 2) / 2.0));
    CHECK(a2.A(2, 2) == a1.A(2, 2));
    CHECK(a2.B(2, 0) == a1.B(2, 0));

    PlantParams off;
    off.i0 = 0.0;
    const StateSpace z = linearize(off);
    CHECK(z.A(1, 0) == 0.0);
    CHECK(z.A(1, 2) == 0.0);

    PlantParams bad;
    bad.L_coil = -0.2;
    CHECK_THROWS_AS(linearize(bad), DomainError);
}

TEST_CASE("PlantParams: coil geometry must agree with k_em") {
    PlantParams p;
    p.mu0 = 4e-7 * M_PI;
    p.N_turns = 100.0;
    p.A_pole = 2.0 * p.k_em / (*p.mu0 * 100.0 * 100.0);
    CHECK_NOTHROW(p.validate());
    p.A_pole = *p.A_pole * 1.01;
    CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("finite_difference_jacobian") {
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Matrix m(3, 3);
    for (int i = 0; i < 9; ++i) {
        m(i / 3, i % 3) = d(rng);
    }
    const Matrix j = finite_difference_jacobian([&](const Vector& z) { return Vector(m * z); },
                                                Vector::Zero(3), 1e-3);
    CHECK((j - m).cwiseAbs().maxCoeff() < 1e-12);

    const PlantParams p;
    const PlantState op{p.x0, 0.0, p.i0};
    const Matrix fd = finite_difference_jacobian(op, p.R_coil * p.i0, p, 1e-6);
    CHECK(fd(0, 1) == doctest::Approx(1.0).epsilon(1e-9));
    const Matrix exact = exact_nonlinear_jacobian(p);
    CHECK((fd - exact).cwiseAbs().maxCoeff() < 1e-5);

    // The published linearization doubles the magnetic terms and flips
    // their sign relative to the exact Jacobian of the nonlinear model.
    const StateSpace lin = linearize(p);
    CHECK(lin.A(1, 0) == doctest::Approx(-2.0 * exact(1, 0)).epsilon(1e-12));
    CHECK(lin.A(1, 2) == doctest::Approx(-2.0 * exact(1, 2)).epsilon(1e-12));
    CHECK(lin.A(2, 2) == doctest::Approx(fd(2, 2)).epsilon(1e-8));

    CHECK_THROWS_AS(finite_difference_jacobian(op, 0.0, p, 0.0), DomainError);
    CHECK_THROWS_AS(finite_difference_jacobian(PlantState{1e-7, 0.0, 0.8}, 0.0, p, 1e-6),
                    DomainError);
}

TEST_CASE("char_poly") {
    const std::vector<double> c = char_poly(linearize(PlantParams{}).A);
    REQUIRE(c.size() == 4);
    CHECK(c[0] == 1.0);
    CHECK(c[1] == doctest::Approx(50.0).epsilon(1e-3));
    CHECK(c[2] == doctest::Approx(0.1375).epsilon(1e-3));
    CHECK(c[3] == doctest::Approx(6.874).epsilon(1e-3));

    const std::vector<double> id = char_poly(Matrix::Identity(2, 2));
    CHECK(id == std::vector<double>{1.0, -2.0, 1.0});
    const std::vector<double> z = char_poly(Matrix::Zero(3, 3));
    CHECK(z == std::vector<double>{1.0, 0.0, 0.0, 0.0});

    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2 + trial % 4;
        Matrix a(n, n);
        Matrix t(n, n);
        for (int i = 0; i < n * n; ++i) {
            a(i / n, i % n) = d(rng);
            t(i / n, i % n) = d(rng);
        }
        t += 2.0 * Matrix::Identity(n, n);
        const std::vector<double> ca = char_poly(a);
        const std::vector<double> ct = char_poly(t * a * t.inverse());
        for (std::size_t k = 0; k < ca.size(); ++k) {
            CHECK(ct[k] == doctest::Approx(ca[k]).epsilon(1e-8).scale(1.0));
        }
    }
}

TEST_CASE("to_companion") {
    const StateSpace ss = to_companion({{1.0}, {1.0, 50.0, 0.1375, 6.874}});
    CHECK(ss.A == reference_companion_a());
    CHECK(ss.B == Matrix::Identity(3, 1));
    Matrix c(1, 3);
    c << 0, 0, 1;
    CHECK(ss.C == c);
    CHECK(ss.D(0, 0) == 0.0);
    CHECK(ss.realization == Realization::companion);
    CHECK(ss.state_labels == std::vector<std::string>{"x1", "x2", "x3"});

    const StateSpace first = to_companion({{1.0}, {1.0, 1.0}});
    CHECK(first.A(0, 0) == -1.0);
    CHECK(first.B(0, 0) == 1.0);
    CHECK(first.C(0, 0) == 1.0);

    CHECK_THROWS_AS(to_companion({{1.0, 0.0}, {1.0, 1.0}}), DomainError);
    CHECK_THROWS_AS(to_companion({{1.0}, {2.0, 1.0}}), DomainError);
}

TEST_CASE("ss_to_tf") {
    const TransferFunction phys = ss_to_tf(linearize(PlantParams{}));
    REQUIRE(phys.num.size() == 1);
    CHECK(phys.num[0] == doctest::Approx(0.99146).epsilon(1e-4));
    REQUIRE(phys.den.size() == 4);
    CHECK(phys.den[3] == doctest::Approx(6.874).epsilon(1e-3));

    const TransferFunction comp = ss_to_tf(companion_plant(PlantParams{}));
    REQUIRE(comp.num.size() == 1);
    CHECK(comp.num[0] == doctest::Approx(1.0).epsilon(1e-12));

    StateSpace mimo = linearize(PlantParams{});
    mimo.B = Matrix::Identity(3, 2);
    mimo.D = Matrix::Zero(1, 2);
    CHECK_THROWS_AS(ss_to_tf(mimo), DimensionError);
}

TEST_CASE("ss_to_tf inverts to_companion and matches the frequency response") {
    std::mt19937_64 rng(24);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(trial) % 5;
        TransferFunction tf;
        tf.den.push_back(1.0);
        for (std::size_t k = 0; k < n; ++k) {
            tf.den.push_back(d(rng));
        }
        tf.num.push_back(1.0 + std::abs(d(rng)));
        for (std::size_t k = 1; k < n; ++k) {
            tf.num.push_back(d(rng));
        }
        const StateSpace ss = to_companion(tf);
        const TransferFunction back = ss_to_tf(ss);
        REQUIRE(back.den.size() == tf.den.size());
        for (std::size_t k = 0; k < tf.den.size(); ++k) {
            CHECK(back.den[k] == doctest::Approx(tf.den[k]).epsilon(1e-8).scale(1.0));
        }
        for (int s = 0; s < 10; ++s) {
            const Complex pt(d(rng), 3.0 + d(rng));
            const Eigen::MatrixXcd resolvent =
                (pt * Eigen::MatrixXcd::Identity(ss.states(), ss.states()) - ss.A.cast<Complex>())
                    .inverse();
            const Complex direct = (ss.C.cast<Complex>() * resolvent * ss.B.cast<Complex>())(0, 0);
            CHECK(std::abs(back.evaluate(pt) - direct) < 1e-8 * std::max(1.0, std::abs(direct)));
            CHECK(std::abs(tf.evaluate(pt) - direct) < 1e-8 * std::max(1.0, std::abs(direct)));
        }
    }
}

TEST_CASE("ss_to_tf with direct feedthrough is biproper") {
    StateSpace ss = to_companion({{1.0}, {1.0, 1.0}});
    ss.D(0, 0) = 2.0;
    const TransferFunction tf = ss_to_tf(ss);
    REQUIRE(tf.num.size() == 2);
    CHECK(tf.num[0] == doctest::Approx(2.0));
    CHECK(tf.num[1] == doctest::Approx(3.0));
}

TEST_CASE("design_plant picks the realization") {
    const PlantParams p;
    CHECK(design_plant(p, Realization::physical).state_labels[0] == "gap");
    const StateSpace c = design_plant(p, Realization::companion);
    CHECK(c.realization == Realization::companion);
    CHECK(spectrum_distance(eig(c.A), eig(linearize(p).A)) < 1e-9);
}
