// Linearized potential/Poisson subsystem around the radial background.
// Writing the flow potential deviation chi and the electric potential
// deviation Psi, the continuity equation becomes
//   L1(chi, Psi) = d_rr chi + 2 a12 d_rphi chi + a22 d_phiphi chi
//                + (a1 - alpha1) d_r chi + a2 d_phi chi - b1 d_r Psi - c Psi
// and the Poisson equation
//   L2(chi, Psi) = d_rr Psi + (1/r^2) d_phiphi Psi + (2/r) d_r Psi
//                + (cot phi / r^2) d_phi Psi - g0 Psi - h1 d_r chi,
// both driven by right-hand sides frozen at the previous iterate.  The
// coefficients a.. carry the frozen state; alpha1, b1, c, g0, h1 are the
// background linearization weights.  Boundary data are lifted off by an
// explicit (chi_bd, Psi_bd) pair, and the homogeneous remainder is reduced
// onto the Neumann eigenbasis, giving one block-tridiagonal system in the
// modal profiles (v_k, w_k)(r) that is solved monolithically.
#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "epnoz/core_model.hpp"
#include "epnoz/eigenbasis.hpp"
#include "epnoz/radial_background.hpp"

namespace epnoz {

// Background quantities tabulated at the r-nodes of a grid; derivatives come
// from the ODE right-hand sides, not differencing.
struct BackgroundOnGrid {
    std::vector<double> rho, E, u, du, c2, Phi, phibar;
    std::vector<double> alpha1, b1, ccoef, g0, h1; // linearization weights

    static BackgroundOnGrid make(const RadialBackground& bg, const Grid& g);
};

// Angular profile with two derivatives (analytic for the case families).
struct AngularProfile {
    std::function<double(double)> f, d1, d2;
    static AngularProfile zero();
};

// Boundary lifting (chi_bd, Psi_bd) and all derivatives the operators need;
// everything analytic.  chi_bd = eta(r) C(phi) with a quintic blend eta
// (eta(r_en)=1, eta(r_ex)=0, eta'=eta''=0 at both ends) and C the entrance
// potential trace; Psi_bd is the linear/quadratic radial blend matching
// d_r Psi_bd = dE_en at the entrance and dPhi_ex at the exit.
struct Lifting {
    Field chi, chi_r, chi_p, chi_rr, chi_rp, chi_pp;
    Field Psi, Psi_r, Psi_p, Psi_rr, Psi_rp, Psi_pp;
};

Lifting lift_boundary(const Grid& g, const AngularProfile& chi_trace,
                      const AngularProfile& dE_en, const AngularProfile& dPhi_ex);

// Coefficients of L1 at the frozen state plus homogenized right-hand sides.
// a2 is stored split as a2 = a2reg + a2cot * cot(phi) so every Galerkin
// integrand stays bounded up to the axis.
struct LinearSystemFields {
    Field a12, a22, a1m; // a1m = a1 - alpha1
    Field a2reg, a2cot;
    Field F, f;               // homogeneous RHS of L1 = F, L2 = f
    std::vector<double> tr_en; // curl radial component along the entrance
    double min_sup_margin = 0.0; // min over grid of q1^2 - c^2
    double min_sub_margin = 0.0; // min over grid of c^2 - q2^2
};

// Evaluates all coefficients and right-hand sides at the frozen state
// (chi*, Psi*, psi*, S*, V*), subtracting L1/L2 of the lifting.  Throws
// SonicApproachError (with location) when q1^2 - c^2 or c^2 - q2^2 falls
// below `margin`, and CavitationError through the density closure.
LinearSystemFields assemble_coefficients(const Grid& g, const GasLaw& gas,
                                         const BackgroundOnGrid& bgg,
                                         const FlowFields& state, const Field& doping,
                                         double b0, double margin,
                                         const Lifting& lift);

// Modal reduction of the homogeneous problem: full (m+1)^2 coupling matrices
// per r-station for the chi-block, diagonal Laplace-Beltrami action for the
// Psi-block, modal right-hand sides, and the entrance Neumann data
// g_k = <du_en - t_r(r_en,.), xi_k>.
struct ModalSystem {
    int m = 0, nr = 0;
    double hr = 0.0;
    std::vector<double> r;                   // r-nodes
    std::vector<Eigen::MatrixXd> Mrp, Mp2, M1; // per station: 2<a12 xi_j', xi_k>, <a22 xi_j'' + a2 xi_j', xi_k>, <a1m xi_j, xi_k>
    std::vector<double> b1, ccoef, g0, h1;   // r-only profiles
    std::vector<double> omega;
    Eigen::MatrixXd F, f; // (nr) x (m+1) modal right-hand sides
    std::vector<double> gmode; // entrance Neumann data per mode
};

ModalSystem galerkin_reduce(const Grid& g, const EigenBasis& basis,
                            const LinearSystemFields& fields, const BackgroundOnGrid& bgg,
                            const AngularProfile& du_en);

// Monolithic sparse solve of the coupled modal system:
//   v_k'' + sum_j [Mrp v_j' + Mp2 v_j + M1 v_j'] - b1 w_k' - c w_k = F_k
//   w_k'' + (2/r) w_k' - (omega_k/r^2) w_k - g0 w_k - h1 v_k'      = f_k
// with v_k(r_en) = 0, v_k'(r_en) = g_k, w_k'(r_en) = w_k'(r_ex) = 0;
// second-order differences; one global LU.  Throws SingularSystemError.
struct ModalSolution {
    Eigen::MatrixXd v, w; // (nr) x (m+1)
};

ModalSolution solve_modal_system(const ModalSystem& ms);

// chi = sum_k v_k xi_k + chi_bd and Psi likewise.
void reconstruct_fields(const Grid& g, const EigenBasis& basis, const ModalSolution& sol,
                        const Lifting& lift, Field& chi, Field& Psi);

} // namespace epnoz
