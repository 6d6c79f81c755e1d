#include "doctest.h"

#include <cmath>
#include <numbers>

#include "epnoz/verify_report.hpp"

using namespace epnoz;

namespace {

Grid make_grid(int nr, int nphi) {
    Grid g;
    g.r_en = 1.5;
    g.r_ex = 2.5;
    g.phi0 = 0.5;
    g.nr = nr;
    g.nphi = nphi;
    return g;
}

} // namespace

TEST_CASE("derived primitives reproduce the radial background") {
    BackgroundParams bp;
    RadialBackground bg = integrate_background(bp);
    Grid g = make_grid(64, 16);
    FlowFields f = FlowFields::background_init(g, bp.gas.S0);
    PrimitiveFields p = derive_primitives(g, bg, f);
    double e_u = 0.0, e_rho = 0.0, e_M = 0.0, e_Phi = 0.0, e_t = 0.0;
    for (int i = 0; i < g.nr; ++i) {
        const double r = g.r(i);
        for (int j = 0; j < g.nphi; ++j) {
            e_u = std::max(e_u, std::abs(p.vel.ur(i, j) - bg.u(r)));
            e_t = std::max(e_t, std::abs(p.vel.uphi(i, j)));
            e_t = std::max(e_t, std::abs(p.vel.utheta(i, j)));
            e_rho = std::max(e_rho, std::abs(p.rho(i, j) - bg.rho(r)));
            e_M = std::max(e_M, std::abs(p.M(i, j) - std::sqrt(bg.Msq(r))));
            e_Phi = std::max(e_Phi, std::abs(p.Phi(i, j) - bg.Phi(r)));
        }
    }
    CHECK(e_u < 1e-10);
    CHECK(e_t < 1e-12);
    CHECK(e_rho < 1e-10);
    CHECK(e_M < 1e-10);
    CHECK(e_Phi < 1e-10);
}

TEST_CASE("equation residuals at the background and their sensitivity") {
    BackgroundParams bp;
    RadialBackground bg = integrate_background(bp);
    Grid g = make_grid(64, 16);
    FlowFields f = FlowFields::background_init(g, bp.gas.S0);
    PrimitiveFields p = derive_primitives(g, bg, f);
    Field doping(g, bp.b0);
    ResidualReport rr = residual_euler_poisson(g, bp.gas, p, f.S, doping);
    // r^2 rho u == m0 exactly along the ODE solution, so the conservative
    // mass stencil sees a constant; Poisson keeps the stencil truncation
    // error of the sampled potential.
    CHECK(rr.mass < 1e-10);
    CHECK(rr.mom_phi < 1e-9);
    CHECK(rr.entropy < 1e-12);
    CHECK(rr.angular < 1e-12);
    CHECK(rr.poisson < 2e-6);
    CHECK(rr.total < 3e-6);
    CHECK(rr.nr == 64);
    CHECK(rr.nphi == 16);

    // the diagnostic must actually see the fields it grades
    PrimitiveFields bad = p;
    bad.rho(g.nr / 2, g.nphi / 2) += 1e-3;
    ResidualReport rb = residual_euler_poisson(g, bp.gas, bad, f.S, doping);
    CHECK(rb.mass > 1e-5);
    CHECK(rb.mass > 1e3 * rr.mass);
}

TEST_CASE("conservation report on closed-form fields") {
    Grid g = make_grid(65, 17);
    GasLaw gas{2.0, 1.0};
    PrimitiveFields p;
    p.vel.ur = Field(g);
    p.vel.uphi = Field(g);
    p.vel.utheta = Field(g);
    p.rho = Field(g, 1.0);
    p.M = Field(g, 2.0);
    p.Phi = Field(g);
    for (int i = 0; i < g.nr; ++i) {
        const double r = g.r(i);
        for (int j = 0; j < g.nphi; ++j) {
            p.vel.ur(i, j) = 1.0 / (r * r);
            // B = |u|^2/2 + gamma/(gamma-1) S rho^{gamma-1} with S = rho = 1
            p.Phi(i, j) = 0.5 / (r * r * r * r) + 2.0;
        }
    }
    Field S(g, 1.0);
    ConservationReport cr = conservation_report(g, gas, p, S);
    const double flux = 2.0 * std::numbers::pi * (1.0 - std::cos(0.5));
    // the phi quadrature carries trapezoid-level truncation on sin(phi)
    CHECK(cr.mass_flux_mean == doctest::Approx(flux).epsilon(1e-6));
    CHECK(cr.mass_flux_spread < 1e-13);
    CHECK(cr.K_defect < 1e-12);
    CHECK(cr.S_transport < 1e-12);
    CHECK(cr.Lambda_transport < 1e-12);
    CHECK(cr.S_min == doctest::Approx(1.0));
    CHECK(cr.S_max == doctest::Approx(1.0));
}

TEST_CASE("Sobolev norms against closed forms for f = r") {
    Grid g = make_grid(129, 33);
    Field f(g);
    for (int i = 0; i < g.nr; ++i)
        for (int j = 0; j < g.nphi; ++j) f(i, j) = g.r(i);
    const double C = 2.0 * std::numbers::pi * (1.0 - std::cos(0.5));
    const double I4 = (std::pow(2.5, 5) - std::pow(1.5, 5)) / 5.0;
    const double I2 = (std::pow(2.5, 3) - std::pow(1.5, 3)) / 3.0;
    const double N0 = std::sqrt(C * I4); // ||r||
    const double N1 = std::sqrt(C * I2); // ||1||
    CHECK(hk_star_norm(g, f, 1) == doctest::Approx(N0 + N1).epsilon(1e-3));
    CHECK(hk_star_norm(g, f, 2) ==
          doctest::Approx(std::sqrt(N0 * N0 + N1 * N1) + N1).epsilon(1e-3));
}

TEST_CASE("norm guards") {
    Grid small = make_grid(4, 9);
    Field f(small);
    CHECK_THROWS_AS(hk_star_norm(small, f, 1), InsufficientGridError);
    Grid g = make_grid(17, 9);
    Field h(g);
    CHECK_THROWS_AS(hk_star_norm(g, h, 5), InsufficientGridError);
    CHECK_THROWS_AS(hk_star_norm(g, h, 0), InsufficientGridError);
}

TEST_CASE("supersonic margin reports the minimizing node") {
    Grid g = make_grid(17, 9);
    PrimitiveFields p;
    p.vel.ur = Field(g);
    p.vel.uphi = Field(g);
    p.vel.utheta = Field(g);
    p.rho = Field(g, 1.0);
    p.Phi = Field(g);
    p.M = Field(g, 2.0);
    p.M(3, 2) = 1.25;
    MachMargin mm = supersonic_margin(g, p);
    CHECK(mm.margin == doctest::Approx(0.25));
    CHECK(mm.r == doctest::Approx(g.r(3)));
    CHECK(mm.phi == doctest::Approx(g.phi(2)));
}
