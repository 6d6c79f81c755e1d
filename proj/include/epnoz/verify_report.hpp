// A-posteriori verification: plugs derived primitive fields back into the
// original axisymmetric Euler-Poisson system and the conservation laws, and
// evaluates the weighted Sobolev norms.  Everything here differentiates and
// integrates with its own stencil/weight tables, independent of the solver
// kernels, so agreement is evidence rather than tautology.
#pragma once

#include <utility>

#include "epnoz/core_model.hpp"
#include "epnoz/radial_background.hpp"

namespace epnoz {

// Primitive variables derived from the iteration unknowns (chi, Psi, psi,
// S, V) and the radial background; rho comes from the Bernoulli closure.
struct PrimitiveFields {
    VelocityTriple vel;
    Field rho; // density from the closure
    Field M;   // Mach number |u| / c
    Field Phi; // absolute electric potential Phibar + Psi
};

PrimitiveFields derive_primitives(const Grid& g, const RadialBackground& bg,
                                  const FlowFields& f);

// Weighted L2 residuals (volume element 2 pi r^2 sin phi) of the five
// equations: mass, phi-momentum, entropy transport, angular momentum
// transport, Poisson.  The mass and the two transport equations are
// evaluated in their conservative sin(phi)-multiplied forms, so the axis
// row carries no weight.  Diagnostics never throw on large values.
struct ResidualReport {
    double mass = 0.0;
    double mom_phi = 0.0;
    double entropy = 0.0;
    double angular = 0.0;
    double poisson = 0.0;
    double total = 0.0; // sqrt of the summed squares
    int nr = 0, nphi = 0;
};

ResidualReport residual_euler_poisson(const Grid& g, const GasLaw& gas,
                                      const PrimitiveFields& p, const Field& S,
                                      const Field& doping);

struct ConservationReport {
    double mass_flux_mean = 0.0;   // mean over stations of m(r)
    double mass_flux_spread = 0.0; // (max - min) / |mean|
    double K_defect = 0.0;         // max |B - Phi| (pseudo-Bernoulli pin)
    double S_transport = 0.0;      // ||rho q . grad S||
    double Lambda_transport = 0.0; // ||rho q . grad Lambda||
    double S_min = 0.0, S_max = 0.0;
};

ConservationReport conservation_report(const Grid& g, const GasLaw& gas,
                                       const PrimitiveFields& p, const Field& S);

// || f ||_{H^{k-1}} + || d_r f ||_{H^{k-1}} with frame derivatives
// (d_r, (1/r) d_phi) and the 2 pi r^2 sin phi element; k in {1,..,4}.
// Throws InsufficientGridError when the stencils do not fit.
double hk_star_norm(const Grid& g, const Field& f, int k);

struct MachMargin {
    double margin = 0.0; // min over grid of M - 1
    double r = 0.0, phi = 0.0;
};

MachMargin supersonic_margin(const Grid& g, const PrimitiveFields& p);

} // namespace epnoz
