#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "epnoz/eigenbasis.hpp"

using namespace epnoz;

TEST_CASE("full sphere eigenvalues are k(k+1)") {
    EigenBasis b = build_basis(std::numbers::pi, 10);
    REQUIRE(int(b.omega.size()) == 11);
    CHECK(std::abs(b.omega[0]) < 1e-10);
    for (int k = 1; k <= 10; ++k)
        CHECK(b.omega[k] == doctest::Approx(double(k) * (k + 1)).epsilon(1e-8));
}

TEST_CASE("half sphere eigenvalues are 2n(2n+1)") {
    EigenBasis b = build_basis(std::numbers::pi / 2.0, 5);
    CHECK(std::abs(b.omega[0]) < 1e-10);
    for (int n = 1; n <= 5; ++n)
        CHECK(b.omega[n] == doctest::Approx(2.0 * n * (2 * n + 1)).epsilon(1e-7));
}

TEST_CASE("orthonormality and derivative-family defects") {
    for (double phi0 : {std::numbers::pi, std::numbers::pi / 2.0, 0.5}) {
        EigenBasis b = build_basis(phi0, 8);
        CHECK(b.gram_defect() < 1e-10);
        CHECK(b.derivative_gram_defect() < 1e-8);
    }
}

TEST_CASE("Neumann conditions at both ends") {
    EigenBasis b = build_basis(0.5, 8);
    for (int k = 0; k <= 8; ++k) {
        CHECK(std::abs(b.dxi(k, 0.0)) < 1e-8);
        CHECK(std::abs(b.dxi(k, 0.5)) < 1e-6);
    }
}

TEST_CASE("Galerkin identity: <xi_j'' + cot(phi) xi_j', xi_k> = -omega_j delta_jk") {
    // Integration by parts against the weight sin(phi); this is the backbone
    // of the angular reduction of the second-order operators.
    EigenBasis b = build_basis(0.5, 6);
    for (int j = 0; j <= 6; ++j)
        for (int k = 0; k <= 6; ++k) {
            double acc = 0.0;
            for (int q = 0; q < b.nq(); ++q) {
                double cot = std::cos(b.phi_q[q]) / std::sin(b.phi_q[q]);
                acc += b.w_q[q] * (b.ddxi_q[j][q] + cot * b.dxi_q[j][q]) * b.xi_q[k][q];
            }
            double expect = (j == k) ? -b.omega[j] : 0.0;
            CHECK(acc == doctest::Approx(expect).epsilon(1e-7).scale(std::max(1.0, b.omega[j])));
        }
}

TEST_CASE("projection round trip") {
    EigenBasis b = build_basis(0.5, 6);
    std::vector<double> c = {0.7, -0.3, 0.11, 0.0, 0.05, -0.02, 0.008};
    auto f = [&](double phi) { return b.evaluate(c, phi); };
    std::vector<double> got = b.project(f);
    REQUIRE(got.size() == c.size());
    for (std::size_t k = 0; k < c.size(); ++k)
        CHECK(got[k] == doctest::Approx(c[k]).epsilon(1e-10).scale(1.0));
    // pointwise reconstruction at off-node angles
    for (double phi : {0.05, 0.2, 0.37, 0.5})
        CHECK(b.evaluate(got, phi) == doctest::Approx(f(phi)).epsilon(1e-10));
}

TEST_CASE("full sphere modes are normalized Legendre polynomials of cos(phi)") {
    EigenBasis b = build_basis(std::numbers::pi, 4);
    // xi_1 is proportional to cos(phi): the ratio at two angles must match.
    double r1 = b.xi(1, 0.3) / std::cos(0.3);
    double r2 = b.xi(1, 1.0) / std::cos(1.0);
    CHECK(r1 == doctest::Approx(r2).epsilon(1e-9));
    // mode 0 is the constant 1/||1||, positive by sign convention
    CHECK(b.xi(0, 0.1) == doctest::Approx(b.xi(0, 2.0)).epsilon(1e-10));
    CHECK(b.xi(0, 0.1) > 0.0);
}

TEST_CASE("quadrature tables are self-consistent") {
    EigenBasis b = build_basis(0.5, 5);
    REQUIRE(int(b.xi_q.size()) == 6);
    REQUIRE(int(b.xi_q[0].size()) == b.nq());
    // tabulated values match the evaluators
    for (int k = 0; k <= 5; ++k)
        for (int q = 0; q < b.nq(); q += 7) {
            CHECK(b.xi_q[k][q] == doctest::Approx(b.xi(k, b.phi_q[q])).epsilon(1e-12));
            CHECK(b.dxi_q[k][q] == doctest::Approx(b.dxi(k, b.phi_q[q])).epsilon(1e-10));
        }
    // the weights integrate sin(phi) exactly: sum w = 1 - cos(phi0)
    double tot = 0.0;
    for (int q = 0; q < b.nq(); ++q) tot += b.w_q[q];
    CHECK(tot == doctest::Approx(1.0 - std::cos(0.5)).epsilon(1e-12));
}
