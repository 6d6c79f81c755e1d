#include "epnoz/radial_background.hpp"

#include <cmath>
#include <functional>
#include <sstream>

namespace epnoz {

namespace {

// Dormand-Prince 5(4) step with standard coefficients; the error estimate
// uses the embedded 4th-order weights.
using StateFn =
    std::function<void(double, const std::vector<double>&, std::vector<double>&)>;

struct Dopri5 {
    StateFn f;
    double rtol, atol;

    // One attempted step from (r, y) with size h; returns scaled error norm,
    // fills y5.  Exceptions from f propagate to the caller.
    double step(double r, const std::vector<double>& y, double h,
                std::vector<double>& y5) const {
        const std::size_t n = y.size();
        std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n);
        auto stage = [&](double c, std::initializer_list<std::pair<const std::vector<double>*, double>> terms,
                         std::vector<double>& k) {
            for (std::size_t i = 0; i < n; ++i) {
                double acc = y[i];
                for (auto& [kv, a] : terms) acc += h * a * (*kv)[i];
                tmp[i] = acc;
            }
            f(r + c * h, tmp, k);
        };
        f(r, y, k1);
        stage(1.0 / 5, {{&k1, 1.0 / 5}}, k2);
        stage(3.0 / 10, {{&k1, 3.0 / 40}, {&k2, 9.0 / 40}}, k3);
        stage(4.0 / 5, {{&k1, 44.0 / 45}, {&k2, -56.0 / 15}, {&k3, 32.0 / 9}}, k4);
        stage(8.0 / 9,
              {{&k1, 19372.0 / 6561}, {&k2, -25360.0 / 2187}, {&k3, 64448.0 / 6561}, {&k4, -212.0 / 729}},
              k5);
        stage(1.0,
              {{&k1, 9017.0 / 3168}, {&k2, -355.0 / 33}, {&k3, 46732.0 / 5247}, {&k4, 49.0 / 176}, {&k5, -5103.0 / 18656}},
              k6);
        y5.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            y5[i] = y[i] + h * (35.0 / 384 * k1[i] + 500.0 / 1113 * k3[i] + 125.0 / 192 * k4[i] -
                                2187.0 / 6784 * k5[i] + 11.0 / 84 * k6[i]);
        f(r + h, y5, k7);
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = h * (71.0 / 57600 * k1[i] - 71.0 / 16695 * k3[i] + 71.0 / 1920 * k4[i] -
                                  17253.0 / 339200 * k5[i] + 22.0 / 525 * k6[i] - 1.0 / 40 * k7[i]);
            const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
            err = std::max(err, std::abs(e) / sc);
        }
        return err;
    }

    // Advance y from r0 toward r1.  Returns the radius actually reached;
    // a guard exception from f shrinks the step, and step-size underflow
    // stops the march just short of the offending point.
    double advance(double r0, std::vector<double>& y, double r1, double hmin) const {
        double r = r0;
        double h = (r1 - r0) * 0.5;
        std::vector<double> y5;
        while (r < r1) {
            h = std::min(h, r1 - r);
            if (h < hmin) return r;
            double err;
            try {
                err = step(r, y, h, y5);
            } catch (const SonicSingularityError&) {
                h *= 0.5;
                continue;
            } catch (const CavitationError&) {
                h *= 0.5;
                continue;
            }
            if (std::isfinite(err) && err <= 1.0) {
                r += h;
                y = y5;
                h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-16), -0.2)));
            } else {
                h *= std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.5;
            }
        }
        return r1;
    }
};

} // namespace

std::pair<double, double> rhs_rho_E(const GasLaw& gas, double m0, double b,
                                    double r, double rho, double E) {
    if (!(rho > 0.0))
        throw CavitationError("rhs_rho_E: density not positive");
    const double g = gas.gamma;
    const double t_c = r * r * g * gas.S0 * std::pow(rho, g - 1.0);
    const double t_u = m0 * m0 / (r * r * rho * rho);
    // Supersonic branch: u^2 > c^2, so the sonic denominator t_c - t_u must
    // stay strictly negative; reject sonic and subsonic states alike.
    const double denom = t_c - t_u;
    if (t_u - t_c <= 1e-14 * (t_c + t_u))
        throw SonicSingularityError("rhs_rho_E: flow not strictly supersonic");
    const double g1 = (r * r * rho * E + 2.0 * m0 * m0 / (r * r * r * rho)) / denom;
    const double g2 = (rho - b) - 2.0 * E / r;
    return {g1, g2};
}

std::pair<double, double> rhs_mach_E(const GasLaw& gas, double m0, double b,
                                     double r, double Msq, double r2E) {
    if (!(Msq > 0.0) || Msq - 1.0 <= 1e-14 * Msq)
        throw SonicSingularityError("rhs_mach_E: M^2 at or below the sonic value");
    const double g = gas.gamma;
    const double kappa0 = std::pow(m0 * m0 / (g * gas.S0), 1.0 / (g + 1.0));
    const double E = r2E / (r * r);
    const double h1 =
        Msq / (Msq - 1.0) *
        (2.0 / r * (2.0 + (g - 1.0) * Msq) +
         (g + 1.0) * kappa0 * kappa0 * std::pow(r * r * r * r * Msq, (g - 1.0) / (g + 1.0)) * E /
             (m0 * m0));
    const double h2 = r * r * (kappa0 * std::pow(r * r * r * r * Msq, -1.0 / (g + 1.0)) - b);
    return {h1, h2};
}

double RadialBackground::rho_sonic(double r) const {
    const double g = prm.gas.gamma;
    return std::pow(prm.m0 * prm.m0 / (g * prm.gas.S0 * std::pow(r, 4.0)), 1.0 / (g + 1.0));
}

namespace {
double interp_bg(const std::vector<double>& s, double r_en, double h, double r) {
    return interp_cubic(s, r_en, h, r);
}
} // namespace

double RadialBackground::rho(double r) const { return interp_bg(rho_s, prm.r_en, h(), r); }
double RadialBackground::E(double r) const { return interp_bg(E_s, prm.r_en, h(), r); }
double RadialBackground::phibar(double r) const { return interp_bg(phibar_s, prm.r_en, h(), r); }
double RadialBackground::u(double r) const { return prm.m0 / (r * r * rho(r)); }
double RadialBackground::c2(double r) const {
    return prm.gas.gamma * prm.gas.S0 * std::pow(rho(r), prm.gas.gamma - 1.0);
}
double RadialBackground::Msq(double r) const {
    const double uu = u(r);
    return uu * uu / c2(r);
}
double RadialBackground::Phi(double r) const {
    // potential offset pinned to the Bernoulli head: B - Phi vanishes exactly
    const double uu = u(r);
    return 0.5 * uu * uu +
           prm.gas.gamma / (prm.gas.gamma - 1.0) * prm.gas.S0 *
               std::pow(rho(r), prm.gas.gamma - 1.0);
}
double RadialBackground::drho(double r) const {
    return rhs_rho_E(prm.gas, prm.m0, prm.b0, r, rho(r), E(r)).first;
}
double RadialBackground::dE(double r) const {
    return rhs_rho_E(prm.gas, prm.m0, prm.b0, r, rho(r), E(r)).second;
}
double RadialBackground::du(double r) const {
    // u = m0/(r^2 rho):  u' = -u (2/r + rho'/rho)
    return -u(r) * (2.0 / r + drho(r) / rho(r));
}
double RadialBackground::dc2(double r) const {
    const double g = prm.gas.gamma;
    return g * (g - 1.0) * prm.gas.S0 * std::pow(rho(r), g - 2.0) * drho(r);
}
double RadialBackground::potential_defect() const {
    double worst = 0.0;
    for (int k = 0; k < nsamp(); ++k) {
        const double r = r_s[k];
        const double uu = prm.m0 / (r * r * rho_s[k]);
        const double B = 0.5 * uu * uu +
                         prm.gas.gamma / (prm.gas.gamma - 1.0) * prm.gas.S0 *
                             std::pow(rho_s[k], prm.gas.gamma - 1.0);
        worst = std::max(worst, std::abs(phiint_s[k] - B));
    }
    return worst;
}

RadialBackground integrate_background(const BackgroundParams& prm) {
    const double g = prm.gas.gamma;
    if (!(g > 1.0) || !(prm.gas.S0 > 0.0) || !(prm.m0 > 0.0))
        throw AdmissibilityError("integrate_background: need gamma > 1, S0 > 0, m0 > 0");
    if (!(prm.r_en > 0.0) || !(prm.r_ex > prm.r_en))
        throw AdmissibilityError("integrate_background: need 0 < r_en < r_ex");

    const double kappa0 = std::pow(prm.m0 * prm.m0 / (g * prm.gas.S0), 1.0 / (g + 1.0));
    const double rho_sonic_en = kappa0 * std::pow(prm.r_en, -4.0 / (g + 1.0));
    if (!(prm.rho0 > 0.0) || !(prm.rho0 < rho_sonic_en)) {
        std::ostringstream os;
        os << "integrate_background: rho0 = " << prm.rho0
           << " outside the admissible band (0, " << rho_sonic_en << ")";
        throw AdmissibilityError(os.str());
    }
    const double u0 = prm.m0 / (prm.r_en * prm.r_en * prm.rho0);
    const double c20 = g * prm.gas.S0 * std::pow(prm.rho0, g - 1.0);
    const double M0sq = u0 * u0 / c20;
    if (!(M0sq > 1.0 + prm.sonic_guard))
        throw AdmissibilityError("integrate_background: entrance Mach number is not supersonic");
    const double b_cap = kappa0 * std::pow(prm.r_ex * prm.r_ex * prm.r_ex * prm.r_ex * M0sq,
                                           -1.0 / (g + 1.0));
    if (!(prm.b0 > 0.0) || !(prm.b0 < b_cap)) {
        std::ostringstream os;
        os << "integrate_background: doping b0 = " << prm.b0
           << " outside the admissible band (0, " << b_cap << ")";
        throw AdmissibilityError(os.str());
    }

    // State: (rho, E, phibar, integral of E).  The guard keeps M^2 above
    // 1 + sonic_guard; crossing it means the sonic horizon sits inside the
    // nozzle and the case is rejected with its location.
    Dopri5 ode;
    ode.rtol = prm.rtol;
    ode.atol = prm.atol;
    ode.f = [&](double r, const std::vector<double>& y, std::vector<double>& dy) {
        const double rho = y[0], E = y[1];
        if (rho > 0.0) {
            const double Msq = prm.m0 * prm.m0 / (g * prm.gas.S0 * std::pow(r, 4.0) *
                                                  std::pow(rho, g + 1.0));
            if (!(Msq > 1.0 + prm.sonic_guard))
                throw SonicSingularityError("integrate_background: sonic guard tripped");
        }
        auto [g1, g2] = rhs_rho_E(prm.gas, prm.m0, prm.b0, r, rho, E);
        dy.assign(4, 0.0);
        dy[0] = g1;
        dy[1] = g2;
        dy[2] = prm.m0 / (r * r * rho);
        dy[3] = E;
    };

    RadialBackground bg;
    bg.prm = prm;
    const int n = prm.nsamp;
    bg.r_s = linspace(prm.r_en, prm.r_ex, n);
    bg.rho_s.resize(n);
    bg.E_s.resize(n);
    bg.phibar_s.resize(n);
    bg.phiint_s.resize(n);

    const double B0 = 0.5 * u0 * u0 + g / (g - 1.0) * prm.gas.S0 * std::pow(prm.rho0, g - 1.0);
    std::vector<double> y = {prm.rho0, prm.E0, prm.m0 / (prm.r_en * prm.r_en * prm.rho0), B0};
    const double hmin = 1e-11 * (prm.r_ex - prm.r_en);

    for (int k = 0; k < n; ++k) {
        if (k > 0) {
            const double reached = ode.advance(bg.r_s[k - 1], y, bg.r_s[k], hmin);
            if (reached < bg.r_s[k]) {
                std::ostringstream os;
                os << "integrate_background: sonic horizon at r_star = " << reached
                   << " before the exit r_ex = " << prm.r_ex;
                throw HorizonBeforeExitError(os.str());
            }
        }
        bg.rho_s[k] = y[0];
        bg.E_s[k] = y[1];
        bg.phibar_s[k] = y[2];
        bg.phiint_s[k] = y[3];
    }
    return bg;
}

double crossform_check(const RadialBackground& bg) {
    const BackgroundParams& prm = bg.prm;
    const double g = prm.gas.gamma;
    Dopri5 ode;
    ode.rtol = prm.rtol;
    ode.atol = prm.atol;
    ode.f = [&](double r, const std::vector<double>& y, std::vector<double>& dy) {
        auto [h1, h2] = rhs_mach_E(prm.gas, prm.m0, prm.b0, r, y[0], y[1]);
        dy.assign(2, 0.0);
        dy[0] = h1;
        dy[1] = h2;
    };

    const double u0 = prm.m0 / (prm.r_en * prm.r_en * prm.rho0);
    const double M0sq = u0 * u0 / (g * prm.gas.S0 * std::pow(prm.rho0, g - 1.0));
    std::vector<double> y = {M0sq, prm.r_en * prm.r_en * prm.E0};
    const double hmin = 1e-11 * (prm.r_ex - prm.r_en);

    double worst = 0.0;
    for (int k = 0; k < bg.nsamp(); ++k) {
        if (k > 0) {
            const double reached = ode.advance(bg.r_s[k - 1], y, bg.r_s[k], hmin);
            if (reached < bg.r_s[k])
                throw SonicSingularityError("crossform_check: Mach-form integration stalled");
        }
        const double r = bg.r_s[k];
        const double uu = prm.m0 / (r * r * bg.rho_s[k]);
        const double Msq_re = uu * uu / (g * prm.gas.S0 * std::pow(bg.rho_s[k], g - 1.0));
        worst = std::max(worst, std::abs(Msq_re - y[0]) / Msq_re);
    }
    return worst;
}

} // namespace epnoz
