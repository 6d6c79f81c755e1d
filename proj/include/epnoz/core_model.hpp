// Shared state types and the pointwise closures of the axisymmetric
// Euler-Poisson flow model: polytropic density/sound-speed laws, the
// meridional curl of the stream potential, velocity composition, and the
// source feeding the stream-potential equation.
//
// Nondimensional polytropic gas: p = S rho^gamma.  Velocity is split as
//   u = grad(chi + phibar) + curl(psi e_theta) + V e_theta,
// all fields axisymmetric on the wedge 0 <= phi <= phi0, r_en <= r <= r_ex.
#pragma once

#include <vector>

#include "epnoz/grid.hpp"

namespace epnoz {

struct GasLaw {
    double gamma = 2.0; // adiabatic exponent, > 1
    double S0 = 1.0;    // background entropy, > 0
};

struct NozzleGeometry {
    double r_en = 1.5;
    double r_ex = 2.5;
    double phi0 = 0.5; // wedge half-angle in (0, pi]
};

// Primary unknowns of the iteration, sampled on the tensor grid.
// chi  : potential deviation  phi_pot - phibar            (even in phi)
// Psi  : electric potential deviation  Phi - Phibar       (even)
// psi  : meridional stream potential                      (odd, 0 on axis)
// S    : entropy                                          (even)
// V    : swirl velocity u_theta = Lambda / (r sin phi)    (odd, 0 on axis)
struct FlowFields {
    Grid grid;
    Field chi, Psi, psi, S, V;

    static FlowFields background_init(const Grid& g, double S0) {
        FlowFields f;
        f.grid = g;
        f.chi = Field(g);
        f.Psi = Field(g);
        f.psi = Field(g);
        f.S = Field(g, S0);
        f.V = Field(g);
        return f;
    }
};

struct VelocityTriple {
    Field ur, uphi, utheta;
};

// rho(eta, z, p) = [ (gamma-1)/(gamma eta) (z - |p|^2/2) ]^{1/(gamma-1)}.
// Throws CavitationError when z - |p|^2/2 <= 0.
double density_closure(double gamma, double eta, double z, double p_sq);

// c^2(Phi, q) = (gamma-1)(Phi - |q|^2/2); coincides with gamma S rho^{gamma-1}
// along the flow because the pseudo-Bernoulli invariant vanishes.
inline double sound_speed_sq(double gamma, double Phi, double q_sq) {
    return (gamma - 1.0) * (Phi - 0.5 * q_sq);
}

// Meridional components of curl(psi e_theta):
//   t_r = (1 / (r sin phi)) d_phi(psi sin phi),   t_phi = -(1/r) d_r(r psi).
// On the axis t_r is the removable limit 2 d_phi(psi) / r.
void curl_theta(const Grid& g, const Field& psi, Field& t_r, Field& t_phi);

// u = grad(chi + phibar) + curl(psi e_theta) + V e_theta; ubar holds the
// analytic background radial velocity at the r-nodes, so the background
// part carries no differencing error.
VelocityTriple compose_velocity(const Grid& g, const std::vector<double>& ubar,
                                const Field& chi, const Field& psi, const Field& V);

// Source of the stream-potential problem,
//   G = (1/(r q_r)) [ d_phi(S) rho^{gamma-1}/(gamma-1) + V^2 cot(phi) + V d_phi(V) ],
// with the swirl part written in the axis-regular V form (the raw
// Lambda d_phi(Lambda) / (r sin phi)^2 expression is identical for
// Lambda = r sin(phi) V).  q is the full composed velocity.
// Throws BackflowError when q_r loses positivity.
Field swirl_source(const Grid& g, double gamma, const Field& S, const Field& V,
                   const Field& Phi, const VelocityTriple& q);

} // namespace epnoz
