// Neumann eigenbasis of the polar Laplace-Beltrami operator on (0, phi0):
//   -(sin(phi) xi')' = omega sin(phi) xi,   xi'(0) = xi'(phi0) = 0,
// orthonormal in the sin(phi)-weighted inner product.  The substitution
// s = cos(phi) turns the operator into the Legendre form -((1-s^2) xi_s)_s,
// which is solved by spectral Galerkin in a mapped Legendre polynomial basis;
// for phi0 = pi or pi/2 the exact eigenpairs (omega = k(k+1), resp.
// 2n(2n+1)) lie inside the trial space, so they come out to round-off.
#pragma once

#include <functional>
#include <vector>

#include "epnoz/errors.hpp"

namespace epnoz {

struct EigenBasis {
    double phi0 = 0.0;
    int m = 0; // highest retained mode index

    std::vector<double> omega; // m+1 ascending eigenvalues, omega[0] = 0

    // xi_k(phi) = sum_i leg[k][i] P_i(tau(cos phi)) with tau the affine map
    // of [cos phi0, 1] onto [-1, 1]; signs fixed so xi_k(0) > 0.
    std::vector<std::vector<double>> leg;

    // Gauss rule for the weighted product: <f,g> ~ sum_q w[q] f(phi_q) g(phi_q).
    std::vector<double> phi_q, s_q, w_q;

    // Cached basis tables at the quadrature nodes: value, d/dphi, d2/dphi2.
    std::vector<std::vector<double>> xi_q, dxi_q, ddxi_q;

    int nq() const { return int(phi_q.size()); }

    double xi(int k, double phi) const;
    double dxi(int k, double phi) const;
    double ddxi(int k, double phi) const;

    // Modal coefficients <f, xi_k> of a profile given at the quadrature nodes
    // (or as a callable).
    std::vector<double> project(const std::vector<double>& f_at_q) const;
    std::vector<double> project(const std::function<double(double)>& f) const;

    // sum_k c_k xi_k(phi)
    double evaluate(const std::vector<double>& c, double phi) const;

    // max |<xi_j, xi_k> - delta_jk| over the stored rule.
    double gram_defect() const;

    // max |<xi_j'/sqrt(omega_j), xi_k'/sqrt(omega_k)> - delta_jk|, j,k >= 1:
    // integration by parts makes the scaled derivative family orthonormal.
    double derivative_gram_defect() const;
};

// Builds the basis with modes 0..m.  The polynomial degree is raised until
// the top eigenvalue is converged to 1e-8 relative (ResolutionError if that
// never happens); n_q = 0 picks a quadrature exact for basis products.
EigenBasis build_basis(double phi0, int m, int n_q = 0);

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

} // namespace epnoz
