#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "epnoz/core_model.hpp"
#include "epnoz/errors.hpp"
#include "epnoz/linear_subsystem.hpp"

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

AngularProfile const_profile(double v) {
    AngularProfile p;
    p.f = [v](double) { return v; };
    p.d1 = [](double) { return 0.0; };
    p.d2 = [](double) { return 0.0; };
    return p;
}

AngularProfile cos_profile(double amp, double phi0) {
    double a = std::numbers::pi / phi0;
    AngularProfile p;
    p.f = [=](double phi) { return amp * std::cos(a * phi); };
    p.d1 = [=](double phi) { return -amp * a * std::sin(a * phi); };
    p.d2 = [=](double phi) { return -amp * a * a * std::cos(a * phi); };
    return p;
}

} // namespace

TEST_CASE("background linearization weights match difference Jacobians") {
    BackgroundParams prm;
    RadialBackground bg = integrate_background(prm);
    Grid g = make_grid(17, 5);
    BackgroundOnGrid bgg = BackgroundOnGrid::make(bg, g);
    const double gamma = prm.gas.gamma;

    // F2(z, p1, q1) with the entrance gradient fixed at the local ubar
    auto c2of = [&](double z, double q1) { return (gamma - 1.0) * (z - 0.5 * q1 * q1); };
    for (int i : {0, 7, 16}) {
        double r = g.r(i);
        double ub = bgg.u[i], z0 = bgg.Phi[i], p0 = bgg.E[i];
        auto F2 = [&](double z, double p1, double q1) {
            double c2 = c2of(z, q1);
            double den = q1 * q1 - c2;
            double a1 = -2.0 * c2 / (r * den);
            return p1 * q1 / den - a1 * ub;
        };
        double h = 1e-6;
        double alpha_fd = (F2(z0, p0, ub + h) - F2(z0, p0, ub - h)) / (2.0 * h);
        double b1_fd = (F2(z0, p0 + h, ub) - F2(z0, p0 - h, ub)) / (2.0 * h);
        double c_fd = (F2(z0 + h, p0, ub) - F2(z0 - h, p0, ub)) / (2.0 * h);
        CHECK(bgg.alpha1[i] == doctest::Approx(alpha_fd).epsilon(2e-5));
        CHECK(bgg.b1[i] == doctest::Approx(b1_fd).epsilon(2e-5));
        CHECK(bgg.ccoef[i] == doctest::Approx(c_fd).epsilon(2e-5));

        // Poisson weights: g0 = d rho / d z and h1 = d rho / d q1 at the
        // background, straight off the density closure.
        auto rho_of = [&](double z, double q1) {
            return density_closure(gamma, prm.gas.S0, z, q1 * q1);
        };
        double g0_fd = (rho_of(z0 + h, ub) - rho_of(z0 - h, ub)) / (2.0 * h);
        double h1_fd = (rho_of(z0, ub + h) - rho_of(z0, ub - h)) / (2.0 * h);
        CHECK(bgg.g0[i] == doctest::Approx(g0_fd).epsilon(2e-5));
        CHECK(bgg.h1[i] == doctest::Approx(h1_fd).epsilon(2e-5));
        // closed forms
        CHECK(bgg.g0[i] == doctest::Approx(std::pow(bgg.rho[i], 2.0 - gamma) /
                                           (gamma * prm.gas.S0))
                               .epsilon(1e-10));
        CHECK(bgg.h1[i] == doctest::Approx(-bgg.g0[i] * ub).epsilon(1e-10));
    }
}

TEST_CASE("boundary lifting carries exactly the prescribed data") {
    Grid g = make_grid(65, 17);
    AngularProfile C = cos_profile(0.002, g.phi0);
    AngularProfile dE = cos_profile(0.001, g.phi0);
    AngularProfile dP = cos_profile(-0.0015, g.phi0);
    Lifting L = lift_boundary(g, C, dE, dP);

    for (int j = 0; j < g.nphi; ++j) {
        double p = g.phi(j);
        // entrance potential trace, flat radial blend at both ends
        CHECK(L.chi(0, j) == doctest::Approx(C.f(p)).epsilon(1e-13));
        CHECK(std::abs(L.chi(g.nr - 1, j)) < 1e-15);
        CHECK(std::abs(L.chi_r(0, j)) < 1e-15);
        CHECK(std::abs(L.chi_r(g.nr - 1, j)) < 1e-15);
        CHECK(std::abs(L.chi_rr(0, j)) < 1e-13);
        CHECK(std::abs(L.chi_rr(g.nr - 1, j)) < 1e-13);
        // radial-gradient data at the two ends
        CHECK(L.Psi_r(0, j) == doctest::Approx(dE.f(p)).epsilon(1e-13).scale(1e-3));
        CHECK(L.Psi_r(g.nr - 1, j) == doctest::Approx(dP.f(p)).epsilon(1e-13).scale(1e-3));
    }

    // stored analytic derivatives agree with high-order differences of the
    // stored values
    auto fd_r = [&](const Field& f, int i, int j) {
        return (-f(i + 2, j) + 8.0 * f(i + 1, j) - 8.0 * f(i - 1, j) + f(i - 2, j)) /
               (12.0 * g.hr());
    };
    auto fd_p = [&](const Field& f, int i, int j) {
        return (-f(i, j + 2) + 8.0 * f(i, j + 1) - 8.0 * f(i, j - 1) + f(i, j - 2)) /
               (12.0 * g.hphi());
    };
    double err = 0.0;
    for (int i = 4; i < g.nr - 4; i += 3)
        for (int j = 4; j < g.nphi - 4; j += 2) {
            err = std::max(err, std::abs(fd_r(L.chi, i, j) - L.chi_r(i, j)));
            err = std::max(err, std::abs(fd_p(L.chi, i, j) - L.chi_p(i, j)));
            err = std::max(err, std::abs(fd_r(L.chi_r, i, j) - L.chi_rr(i, j)));
            err = std::max(err, std::abs(fd_p(L.chi_r, i, j) - L.chi_rp(i, j)));
            err = std::max(err, std::abs(fd_p(L.chi_p, i, j) - L.chi_pp(i, j)));
            err = std::max(err, std::abs(fd_r(L.Psi, i, j) - L.Psi_r(i, j)));
            err = std::max(err, std::abs(fd_p(L.Psi, i, j) - L.Psi_p(i, j)));
            err = std::max(err, std::abs(fd_r(L.Psi_r, i, j) - L.Psi_rr(i, j)));
            err = std::max(err, std::abs(fd_p(L.Psi_r, i, j) - L.Psi_rp(i, j)));
            err = std::max(err, std::abs(fd_p(L.Psi_p, i, j) - L.Psi_pp(i, j)));
        }
    // bound is the 4th-order stencil truncation at this spacing
    CHECK(err < 2e-5);
}

TEST_CASE("the background is an exact zero of the homogenized right-hand sides") {
    BackgroundParams prm;
    RadialBackground bg = integrate_background(prm);
    Grid g = make_grid(33, 9);
    BackgroundOnGrid bgg = BackgroundOnGrid::make(bg, g);
    FlowFields state = FlowFields::background_init(g, prm.gas.S0);
    Field doping(g, prm.b0);
    AngularProfile z = AngularProfile::zero();
    Lifting lift = lift_boundary(g, z, z, z);

    LinearSystemFields sys =
        assemble_coefficients(g, prm.gas, bgg, state, doping, prm.b0, 1e-10, lift);
    double errF = 0.0, errf = 0.0, a12max = 0.0;
    for (int i = 0; i < g.nr; ++i)
        for (int j = 0; j < g.nphi; ++j) {
            errF = std::max(errF, std::abs(sys.F(i, j)));
            errf = std::max(errf, std::abs(sys.f(i, j)));
            a12max = std::max(a12max, std::abs(sys.a12(i, j)));
        }
    CHECK(errF < 1e-10);
    CHECK(errf < 1e-10);
    CHECK(a12max < 1e-12);
    CHECK(sys.min_sup_margin > 0.0);
    CHECK(sys.min_sub_margin > 0.0);

    // coefficient spot checks against the background formulas
    for (int i : {0, 16, 32}) {
        double r = g.r(i);
        double den = bgg.u[i] * bgg.u[i] - bgg.c2[i];
        CHECK(sys.a22(i, 3) ==
              doctest::Approx(-bgg.c2[i] / (r * r * den)).epsilon(1e-10));
        CHECK(sys.a1m(i, 3) ==
              doctest::Approx(-2.0 * bgg.c2[i] / (r * den) - bgg.alpha1[i]).epsilon(1e-10));
    }
}

TEST_CASE("state guards fire with located errors") {
    BackgroundParams prm;
    RadialBackground bg = integrate_background(prm);
    Grid g = make_grid(17, 5);
    BackgroundOnGrid bgg = BackgroundOnGrid::make(bg, g);
    Field doping(g, prm.b0);
    AngularProfile z = AngularProfile::zero();
    Lifting lift = lift_boundary(g, z, z, z);

    SUBCASE("sonic approach when the radial speed drops toward c") {
        FlowFields state = FlowFields::background_init(g, prm.gas.S0);
        for (int i = 0; i < g.nr; ++i)
            for (int j = 0; j < g.nphi; ++j)
                state.chi(i, j) = -4.1 * (g.r(i) - g.r_en); // q1 ~ ubar - 4.1
        CHECK_THROWS_AS(
            assemble_coefficients(g, prm.gas, bgg, state, doping, prm.b0, 1e-10, lift),
            SonicApproachError);
    }
    SUBCASE("cavitation when the head closes") {
        FlowFields state = FlowFields::background_init(g, prm.gas.S0);
        for (auto& v : state.Psi.v) v = -2.0;
        CHECK_THROWS_AS(
            assemble_coefficients(g, prm.gas, bgg, state, doping, prm.b0, 1e-10, lift),
            CavitationError);
    }
}

TEST_CASE("Galerkin reduction at the background is diagonal") {
    BackgroundParams prm;
    RadialBackground bg = integrate_background(prm);
    Grid g = make_grid(17, 17);
    BackgroundOnGrid bgg = BackgroundOnGrid::make(bg, g);
    EigenBasis basis = build_basis(g.phi0, 5);
    FlowFields state = FlowFields::background_init(g, prm.gas.S0);
    Field doping(g, prm.b0);
    AngularProfile z = AngularProfile::zero();
    Lifting lift = lift_boundary(g, z, z, z);
    LinearSystemFields sys =
        assemble_coefficients(g, prm.gas, bgg, state, doping, prm.b0, 1e-10, lift);

    ModalSystem ms = galerkin_reduce(g, basis, sys, bgg, const_profile(0.1));
    REQUIRE(ms.m == 5);
    REQUIRE(ms.nr == g.nr);

    // entrance Neumann data: a constant profile projects onto mode 0 only,
    // with <1, xi_0> = sqrt(1 - cos(phi0))
    CHECK(ms.gmode[0] ==
          doctest::Approx(0.1 * std::sqrt(1.0 - std::cos(g.phi0))).epsilon(1e-9));
    for (int k = 1; k <= 5; ++k) CHECK(std::abs(ms.gmode[k]) < 1e-9);

    for (int i : {0, 8, 16}) {
        double r = g.r(i);
        double den = bgg.u[i] * bgg.u[i] - bgg.c2[i];
        double a2cot = -bgg.c2[i] / (r * r * den);
        double a1m = -2.0 * bgg.c2[i] / (r * den) - bgg.alpha1[i];
        for (int j = 0; j <= 5; ++j)
            for (int k = 0; k <= 5; ++k) {
                double scale = 1.0 + basis.omega[j];
                CHECK(std::abs(ms.Mrp[i](j, k)) < 1e-9 * scale);
                double mp2 = (j == k) ? -a2cot * basis.omega[j] : 0.0;
                CHECK(ms.Mp2[i](j, k) == doctest::Approx(mp2).epsilon(1e-7).scale(scale));
                double m1 = (j == k) ? a1m : 0.0;
                CHECK(ms.M1[i](j, k) == doctest::Approx(m1).epsilon(1e-8).scale(1.0));
            }
    }
}

TEST_CASE("modal solve reproduces decoupled closed forms") {
    int nr = 65;
    ModalSystem ms;
    ms.m = 1;
    ms.nr = nr;
    ms.r = linspace(1.5, 2.5, nr);
    ms.hr = (2.5 - 1.5) / (nr - 1);
    ms.omega = {0.0, 2.0};
    ms.Mrp.assign(nr, Eigen::MatrixXd::Zero(2, 2));
    ms.Mp2.assign(nr, Eigen::MatrixXd::Zero(2, 2));
    ms.M1.assign(nr, Eigen::MatrixXd::Zero(2, 2));
    ms.b1.assign(nr, 0.0);
    ms.ccoef.assign(nr, 0.0);
    ms.h1.assign(nr, 0.0);
    ms.F = Eigen::MatrixXd::Zero(nr, 2);
    ms.f = Eigen::MatrixXd::Zero(nr, 2);
    ms.gmode = {0.0, 0.0};

    SUBCASE("quadratic potential modes: v'' = F with v(r_en)=0, v'(r_en)=g") {
        ms.g0.assign(nr, 0.7);
        double Fk[2] = {0.4, -0.9}, gk[2] = {0.25, -0.1};
        for (int i = 0; i < nr; ++i) {
            ms.F(i, 0) = Fk[0];
            ms.F(i, 1) = Fk[1];
        }
        ms.gmode = {gk[0], gk[1]};
        ModalSolution sol = solve_modal_system(ms);
        double err = 0.0;
        for (int i = 0; i < nr; ++i) {
            double x = ms.r[i] - 1.5;
            for (int k = 0; k < 2; ++k) {
                double exact = 0.5 * Fk[k] * x * x + gk[k] * x;
                err = std::max(err, std::abs(sol.v(i, k) - exact));
                err = std::max(err, std::abs(sol.w(i, k)));
            }
        }
        CHECK(err < 1e-8);
    }

    SUBCASE("constant electric mode: w = -f0/g0 under double Neumann") {
        ms.g0.assign(nr, 0.7);
        for (int i = 0; i < nr; ++i) ms.f(i, 0) = 0.21;
        ModalSolution sol = solve_modal_system(ms);
        double err = 0.0;
        for (int i = 0; i < nr; ++i) {
            err = std::max(err, std::abs(sol.w(i, 0) + 0.3));
            err = std::max(err, std::abs(sol.w(i, 1)));
            err = std::max(err, std::abs(sol.v(i, 0)));
        }
        CHECK(err < 1e-9);
    }
}

TEST_CASE("modal solve converges at second order on a manufactured solution") {
    using std::numbers::pi;
    const double r_en = 1.5, L = 1.0;

    // exact modal profiles satisfying all four boundary conditions
    auto v_ex = [&](int k, double r) {
        double x = r - r_en;
        return k == 0 ? 0.8 * std::sin(0.5 * pi * x) : 0.3 * std::sin(0.75 * pi * x);
    };
    auto dv_ex = [&](int k, double r) {
        double x = r - r_en;
        return k == 0 ? 0.8 * 0.5 * pi * std::cos(0.5 * pi * x)
                      : 0.3 * 0.75 * pi * std::cos(0.75 * pi * x);
    };
    auto ddv_ex = [&](int k, double r) {
        double x = r - r_en;
        return k == 0 ? -0.8 * 0.25 * pi * pi * std::sin(0.5 * pi * x)
                      : -0.3 * 0.5625 * pi * pi * std::sin(0.75 * pi * x);
    };
    auto w_ex = [&](int k, double r) {
        double x = r - r_en;
        return k == 0 ? 0.6 + 0.4 * std::cos(pi * x / L) : -0.2 + 0.1 * std::cos(pi * x / L);
    };
    auto dw_ex = [&](int k, double r) {
        double x = r - r_en;
        return k == 0 ? -0.4 * pi / L * std::sin(pi * x / L)
                      : -0.1 * pi / L * std::sin(pi * x / L);
    };
    auto ddw_ex = [&](int k, double r) {
        double x = r - r_en;
        return k == 0 ? -0.4 * pi * pi / (L * L) * std::cos(pi * x / L)
                      : -0.1 * pi * pi / (L * L) * std::cos(pi * x / L);
    };

    // smooth symmetric coupling matrices and radial weights
    auto Mrp_of = [&](double r) -> Eigen::MatrixXd {
        Eigen::MatrixXd M(2, 2);
        M << 1.0, 0.3, 0.3, 0.8;
        return (0.1 * std::sin(r)) * M;
    };
    auto M1_of = [&](double r) -> Eigen::MatrixXd {
        Eigen::MatrixXd M(2, 2);
        M << 0.5, 0.1, 0.1, 0.4;
        return (0.05 * std::cos(r)) * M;
    };
    auto Mp2_of = [&](double r) -> Eigen::MatrixXd {
        Eigen::MatrixXd M(2, 2);
        M << 1.0, 0.2, 0.2, 0.6;
        return (0.2 + 0.1 * (r - 2.0) * (r - 2.0)) * M;
    };
    auto b1_of = [](double r) { return 0.3 + 0.1 * r; };
    auto c_of = [](double r) { return 0.2 * r; };
    auto g0_of = [](double r) { return 0.5 + 0.2 * (r - 2.0) * (r - 2.0); };
    auto h1_of = [](double r) { return -0.4 + 0.05 * r; };
    const double omega[2] = {0.0, 2.0};

    auto solve_at = [&](int nr) {
        ModalSystem ms;
        ms.m = 1;
        ms.nr = nr;
        ms.r = linspace(r_en, r_en + L, nr);
        ms.hr = L / (nr - 1);
        ms.omega = {omega[0], omega[1]};
        ms.Mrp.resize(nr);
        ms.Mp2.resize(nr);
        ms.M1.resize(nr);
        ms.b1.resize(nr);
        ms.ccoef.resize(nr);
        ms.g0.resize(nr);
        ms.h1.resize(nr);
        ms.F = Eigen::MatrixXd::Zero(nr, 2);
        ms.f = Eigen::MatrixXd::Zero(nr, 2);
        for (int i = 0; i < nr; ++i) {
            double r = ms.r[i];
            ms.Mrp[i] = Mrp_of(r);
            ms.Mp2[i] = Mp2_of(r);
            ms.M1[i] = M1_of(r);
            ms.b1[i] = b1_of(r);
            ms.ccoef[i] = c_of(r);
            ms.g0[i] = g0_of(r);
            ms.h1[i] = h1_of(r);
            Eigen::MatrixXd Mr = ms.Mrp[i] + ms.M1[i];
            for (int k = 0; k < 2; ++k) {
                double acc = ddv_ex(k, r) - ms.b1[i] * dw_ex(k, r) - ms.ccoef[i] * w_ex(k, r);
                for (int j = 0; j < 2; ++j)
                    acc += Mr(k, j) * dv_ex(j, r) + ms.Mp2[i](k, j) * v_ex(j, r);
                ms.F(i, k) = acc;
                ms.f(i, k) = ddw_ex(k, r) + 2.0 / r * dw_ex(k, r) -
                             omega[k] / (r * r) * w_ex(k, r) - ms.g0[i] * w_ex(k, r) -
                             ms.h1[i] * dv_ex(k, r);
            }
        }
        ms.gmode = {dv_ex(0, r_en), dv_ex(1, r_en)};
        ModalSolution sol = solve_modal_system(ms);
        double err = 0.0;
        for (int i = 0; i < nr; ++i)
            for (int k = 0; k < 2; ++k) {
                err = std::max(err, std::abs(sol.v(i, k) - v_ex(k, ms.r[i])));
                err = std::max(err, std::abs(sol.w(i, k) - w_ex(k, ms.r[i])));
            }
        return err;
    };

    std::vector<int> sizes = {65, 129, 257, 513};
    std::vector<double> errs;
    for (int nr : sizes) errs.push_back(solve_at(nr));
    // least-squares slope of log2(err) against refinement level
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = int(errs.size());
    for (int i = 0; i < n; ++i) {
        double x = i, y = std::log2(errs[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double slope = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
    INFO("errors ", errs[0], " ", errs[1], " ", errs[2], " ", errs[3]);
    CHECK(slope >= 1.9);
    CHECK(std::log2(errs[2] / errs[3]) >= 1.8);
}

TEST_CASE("field reconstruction sums modes over the basis plus the lifting") {
    Grid g = make_grid(9, 17);
    EigenBasis basis = build_basis(g.phi0, 4);
    AngularProfile z = AngularProfile::zero();
    Lifting lift = lift_boundary(g, z, z, z);
    ModalSolution sol;
    sol.v = Eigen::MatrixXd::Zero(g.nr, 5);
    sol.w = Eigen::MatrixXd::Zero(g.nr, 5);
    for (int i = 0; i < g.nr; ++i)
        for (int k = 0; k <= 4; ++k) {
            sol.v(i, k) = 0.1 * (k + 1) * std::sin(1.0 + i + k);
            sol.w(i, k) = 0.05 * std::cos(2.0 + i - k);
        }
    Field chi, Psi;
    reconstruct_fields(g, basis, sol, lift, chi, Psi);
    double err = 0.0;
    for (int i = 0; i < g.nr; ++i)
        for (int j = 0; j < g.nphi; ++j) {
            double cexp = 0.0, pexp = 0.0;
            for (int k = 0; k <= 4; ++k) {
                cexp += sol.v(i, k) * basis.xi(k, g.phi(j));
                pexp += sol.w(i, k) * basis.xi(k, g.phi(j));
            }
            err = std::max(err, std::abs(chi(i, j) - cexp));
            err = std::max(err, std::abs(Psi(i, j) - pexp));
        }
    CHECK(err < 1e-12);
}
