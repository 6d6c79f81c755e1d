// Radial background flow: the sheer (phi-independent) supersonic solution of
// the Euler-Poisson system on [r_en, r_ex], obtained by integrating the
// density/field ODE system
//   rho' = (r^2 rho E + 2 m0^2/(r^3 rho)) / (r^2 gamma S0 rho^{gamma-1} - m0^2/(r^2 rho^2))
//   E'   = (rho - b) - 2 E / r
// with admissible entrance data (rho0, E0), plus the equivalent Mach-form
// cross-check in (M^2, r^2 E).  The electric potential is pinned so the
// pseudo-Bernoulli invariant B - Phi vanishes identically.
#pragma once

#include <utility>
#include <vector>

#include "epnoz/core_model.hpp"

namespace epnoz {

struct BackgroundParams {
    GasLaw gas;
    double r_en = 1.5, r_ex = 2.5;
    double m0 = 1.0;   // radial mass-flux density constant, r^2 rho u = m0
    double rho0 = 0.1; // entrance density
    double E0 = 0.0;   // entrance radial field strength
    double b0 = 0.05;  // doping level (constant background charge)

    double rtol = 1e-12, atol = 1e-14; // integrator tolerances
    double sonic_guard = 1e-6;         // stop when M^2 - 1 <= this
    int nsamp = 4097;                  // dense uniform output samples
};

// Dense background solution.  Pointwise values interpolate the sample table
// (local cubic on a fine grid, ~1e-15); all r-derivatives are analytic via
// the ODE right-hand sides, never finite differences.
struct RadialBackground {
    BackgroundParams prm;
    std::vector<double> r_s, rho_s, E_s, phibar_s, phiint_s;

    double h() const { return (prm.r_ex - prm.r_en) / (nsamp() - 1); }
    int nsamp() const { return int(r_s.size()); }

    double rho(double r) const;
    double E(double r) const;
    double u(double r) const;      // m0 / (r^2 rho)
    double c2(double r) const;     // gamma S0 rho^{gamma-1}
    double Msq(double r) const;    // u^2 / c^2
    double Phi(double r) const;    // electric potential == Bernoulli head B(r)
    double phibar(double r) const; // velocity potential, phibar(r_en) = m0/(r_en^2 rho0)

    double drho(double r) const; // ODE right-hand sides, exact
    double dE(double r) const;
    double du(double r) const;
    double dPhi(double r) const { return E(r); }
    double dc2(double r) const;

    // sonic density at radius r: rho_s(r) = (m0^2/(gamma r^4 S0))^{1/(gamma+1)}
    double rho_sonic(double r) const;

    // max over samples of |integral of E - B|: how far the integrated
    // potential drifts from the Bernoulli head (ODE consistency diagnostic).
    double potential_defect() const;
};

// Right-hand side of the density/field form; throws SonicSingularityError
// unless the state is strictly supersonic (the sonic denominator
// r^2 gamma S0 rho^{gamma-1} - m0^2/(r^2 rho^2) must be strictly negative).
std::pair<double, double> rhs_rho_E(const GasLaw& gas, double m0, double b,
                                    double r, double rho, double E);

// Right-hand side of the Mach/field form in (M^2, r^2 E); throws
// SonicSingularityError when M^2 <= 1.
std::pair<double, double> rhs_mach_E(const GasLaw& gas, double m0, double b,
                                     double r, double Msq, double r2E);

// Checks the admissibility inequalities and integrates the density/field
// form with the sonic guard.  If the guard trips before r_ex, the sonic
// horizon is bisected to 1e-10 and HorizonBeforeExitError names it.
RadialBackground integrate_background(const BackgroundParams& prm);

// Re-integrates the same case in the Mach/field form and returns the
// maximum relative M^2 discrepancy over the shared sample grid.
double crossform_check(const RadialBackground& bg);

} // namespace epnoz
