// SPDX-License-Identifier: Apache-2.0

#include "wavegc/chebyshev.hpp"
#include "wavegc/spectrum.hpp"
#include "helpers.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace wavegc;
using Catch::Approx;

TEST_CASE("recurrence matches the cosine closed form") {
    for (int k = 0; k <= 20; ++k)
        for (int t = 0; t <= 50; ++t) {
            double theta = M_PI * t / 50.0;
            CHECK(chebyshev_t(k, std::cos(theta)) == Approx(std::cos(k * theta)).margin(1e-10));
        }
}

TEST_CASE("transformed term fixed points") {
    // order 0 transforms to the zero function
    CHECK(transformed_term(0, 0.0) == 0.0);
    CHECK(transformed_term(0, 1.3) == 0.0);
    // order 1 is the line 1 - lambda/2
    CHECK(transformed_term(1, 0.0) == Approx(1.0));
    CHECK(transformed_term(1, 2.0) == Approx(0.0).margin(1e-15));
    // order 2 is 1 - (lambda-1)^2
    CHECK(transformed_term(2, 1.0) == Approx(1.0));
    CHECK(transformed_term(2, 0.0) == Approx(0.0).margin(1e-15));
    CHECK_THROWS_AS(transformed_term(3, 2.5), std::domain_error);
    CHECK_THROWS_AS(transformed_term(3, -0.5), std::domain_error);
}

TEST_CASE("transformed terms stay in [0,1] on the spectral interval") {
    for (int rho = 1; rho <= 10; ++rho)
        for (int k = 0; k <= 2 * rho; ++k)
            for (int t = 0; t <= 400; ++t) {
                double lam = 2.0 * t / 400.0;
                double v = transformed_term(k, lam);
                CHECK(v >= -1e-12);
                CHECK(v <= 1.0 + 1e-12);
            }
}

TEST_CASE("basis tables hit the stated endpoint values") {
    Eigen::VectorXd one(1);
    one << 1.0;
    ChebBasisTable even1 = basis_table(Parity::even, 1, one);
    CHECK(even1.values(0, 0) == Approx(1.0));  // order-2 term at lambda=1

    Eigen::VectorXd zero(1);
    zero << 0.0;
    ChebBasisTable odd2 = basis_table(Parity::odd, 2, zero);
    CHECK(odd2.values(0, 0) == Approx(1.0));
    CHECK(odd2.values(1, 0) == Approx(1.0));

    Eigen::VectorXd two(1);
    two << 2.0;
    ChebBasisTable even2 = basis_table(Parity::even, 2, two);
    CHECK(even2.values(0, 0) == Approx(0.0).margin(1e-14));
    CHECK(even2.values(1, 0) == Approx(0.0).margin(1e-14));

    CHECK_THROWS_AS(basis_table(Parity::odd, 0, one), std::invalid_argument);
}

TEST_CASE("odd rows are 1 at 0 and 0 at 2; even rows vanish at both ends") {
    Eigen::VectorXd ends(2);
    ends << 0.0, 2.0;
    ChebBasisTable odd = basis_table(Parity::odd, 5, ends);
    ChebBasisTable even = basis_table(Parity::even, 5, ends);
    for (int i = 0; i < 5; ++i) {
        CHECK(odd.values(i, 0) == Approx(1.0));
        CHECK(odd.values(i, 1) == Approx(0.0).margin(1e-12));
        CHECK(even.values(i, 0) == Approx(0.0).margin(1e-12));
        CHECK(even.values(i, 1) == Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("apply_poly_operator with zero coefficients is the zero map") {
    Graph g = generate_graph(GraphKind::cycle, {6});
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(6, 3);
    Eigen::MatrixXd y = apply_poly_operator(Parity::even, {0.0, 0.0}, g, x);
    CHECK(y.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("K2 even order-2 term annihilates every signal") {
    // eigenvalues are {0,2} and the order-2 transformed term vanishes at both
    Graph g = generate_graph(GraphKind::path, {2});
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(2, 4);
    Eigen::MatrixXd y = apply_poly_operator(Parity::even, {1.0}, g, x);
    CHECK(y.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("K2 odd order-1 term keeps only the DC projector") {
    Graph g = generate_graph(GraphKind::path, {2});
    Eigen::MatrixXd x(2, 1);
    x << 1.0, 0.0;
    Eigen::MatrixXd y = apply_poly_operator(Parity::odd, {1.0}, g, x);
    CHECK(y(0, 0) == Approx(0.5));
    CHECK(y(1, 0) == Approx(0.5));
}

TEST_CASE("operator recurrence agrees with the spectral evaluation") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 6; ++t) {
        int n = 5 + static_cast<int>(rng() % 26);
        Graph g = testutil::random_connected_graph(rng, n);
        Spectrum s = spectrum(g);
        Eigen::MatrixXd x = testutil::random_matrix(rng, n, 3);
        for (Parity parity : {Parity::odd, Parity::even}) {
            std::vector<double> coeffs = {0.7, -0.3, 0.5};
            Eigen::VectorXd filt = Eigen::VectorXd::Zero(n);
            for (int i = 0; i < n; ++i)
                for (int k = 1; k <= 3; ++k)
                    filt(i) += coeffs[static_cast<std::size_t>(k - 1)] *
                               transformed_term(term_order(parity, k), s.eigenvalues(i));
            Eigen::MatrixXd want =
                s.eigenvectors * filt.asDiagonal() * s.eigenvectors.transpose() * x;
            Eigen::MatrixXd got = apply_poly_operator(parity, coeffs, g, x);
            CHECK((want - got).cwiseAbs().maxCoeff() < 1e-8);
        }
    }
}

TEST_CASE("apply_poly_operator validates dimensions") {
    Graph g = generate_graph(GraphKind::path, {4});
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(3, 2);
    CHECK_THROWS_AS(apply_poly_operator(Parity::odd, {1.0}, g, x), std::invalid_argument);
}

TEST_CASE("operator application count equals the series degree") {
    Graph g = generate_graph(GraphKind::cycle, {8});
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(8, 2);
    std::size_t count = 0;
    apply_poly_operator(Parity::even, {1.0, 1.0, 1.0}, g, x, &count);
    CHECK(count == 6);  // max order 2*rho
    apply_poly_operator(Parity::odd, {1.0, 1.0, 1.0}, g, x, &count);
    CHECK(count == 5);  // max order 2*rho - 1
}

TEST_CASE("chebyshev series product and interpolation are exact on polynomials") {
    std::mt19937_64 rng(12);
    ChebSeries a{{0.3, -0.2, 0.5}};
    ChebSeries b{{1.0, 0.7, 0.0, -0.4}};
    ChebSeries prod = cheb_mul(a, b);
    for (int t = 0; t <= 20; ++t) {
        double lam = 2.0 * t / 20.0;
        CHECK(prod.eval(lam) == Approx(a.eval(lam) * b.eval(lam)).margin(1e-12));
    }
    ChebSeries fit = cheb_interpolate([](double lam) { return lam * lam * lam - 2.0 * lam; }, 3);
    for (int t = 0; t <= 20; ++t) {
        double lam = 2.0 * t / 20.0;
        CHECK(fit.eval(lam) == Approx(lam * lam * lam - 2.0 * lam).margin(1e-12));
    }
}
