#include "epnoz/core_model.hpp"

#include <cmath>
#include <string>

namespace epnoz {

double density_closure(double gamma, double eta, double z, double p_sq) {
    const double head = z - 0.5 * p_sq;
    if (!(head > 0.0))
        throw CavitationError("density_closure: z - |p|^2/2 = " + std::to_string(head) +
                              " is not positive");
    if (!(eta > 0.0))
        throw CavitationError("density_closure: entropy " + std::to_string(eta) +
                              " is not positive");
    return std::pow((gamma - 1.0) / (gamma * eta) * head, 1.0 / (gamma - 1.0));
}

void curl_theta(const Grid& g, const Field& psi, Field& t_r, Field& t_phi) {
    require_match(g, psi, "curl_theta");
    // t_r = d_phi(psi sin phi) / (r sin phi); psi sin phi is even in phi.
    Field psin(g);
    for (int i = 0; i < g.nr; ++i)
        for (int j = 0; j < g.nphi; ++j)
            psin(i, j) = psi(i, j) * std::sin(g.phi(j));
    Field dps = d_phi(g, psin, Parity::Even);
    Field dpsi = d_phi(g, psi, Parity::Odd); // for the axis limit

    // r psi is odd in phi like psi; its r-derivative needs no ghosts.
    Field rpsi(g);
    for (int i = 0; i < g.nr; ++i)
        for (int j = 0; j < g.nphi; ++j)
            rpsi(i, j) = g.r(i) * psi(i, j);
    Field drp = d_r(g, rpsi);

    t_r = Field(g);
    t_phi = Field(g);
    for (int i = 0; i < g.nr; ++i) {
        const double r = g.r(i);
        t_r(i, 0) = 2.0 * dpsi(i, 0) / r; // L'Hopital limit on the axis
        for (int j = 1; j < g.nphi; ++j)
            t_r(i, j) = dps(i, j) / (r * std::sin(g.phi(j)));
        for (int j = 0; j < g.nphi; ++j)
            t_phi(i, j) = -drp(i, j) / r;
    }
}

VelocityTriple compose_velocity(const Grid& g, const std::vector<double>& ubar,
                                const Field& chi, const Field& psi, const Field& V) {
    require_match(g, chi, "compose_velocity");
    require_match(g, psi, "compose_velocity");
    require_match(g, V, "compose_velocity");
    if (int(ubar.size()) != g.nr)
        throw GridMismatchError("compose_velocity: ubar profile length mismatch");

    Field t_r, t_phi;
    curl_theta(g, psi, t_r, t_phi);
    Field chir = d_r(g, chi);
    Field chip = d_phi(g, chi, Parity::Even);

    VelocityTriple u;
    u.ur = Field(g);
    u.uphi = Field(g);
    u.utheta = V;
    for (int i = 0; i < g.nr; ++i) {
        const double r = g.r(i);
        for (int j = 0; j < g.nphi; ++j) {
            u.ur(i, j) = ubar[i] + chir(i, j) + t_r(i, j);
            u.uphi(i, j) = chip(i, j) / r + t_phi(i, j);
        }
    }
    return u;
}

Field swirl_source(const Grid& g, double gamma, const Field& S, const Field& V,
                   const Field& Phi, const VelocityTriple& q) {
    require_match(g, S, "swirl_source");
    require_match(g, V, "swirl_source");
    require_match(g, Phi, "swirl_source");

    Field dS = d_phi(g, S, Parity::Even);
    Field dV = d_phi(g, V, Parity::Odd);
    Field G(g);
    for (int i = 0; i < g.nr; ++i) {
        const double r = g.r(i);
        for (int j = 0; j < g.nphi; ++j) {
            const double qr = q.ur(i, j);
            if (!(qr > 0.0))
                throw BackflowError("swirl_source: q_r = " + std::to_string(qr) +
                                        " not positive",
                                    r, g.phi(j));
            const double qsq = qr * qr + q.uphi(i, j) * q.uphi(i, j) +
                               q.utheta(i, j) * q.utheta(i, j);
            // rho^{gamma-1}/(gamma-1) = (Phi - |q|^2/2)/(gamma S)
            const double head = Phi(i, j) - 0.5 * qsq;
            if (!(head > 0.0))
                throw CavitationError("swirl_source: Bernoulli head not positive");
            const double entro = dS(i, j) * head / (gamma * S(i, j));
            double swirl = 0.0;
            if (j > 0) {
                const double vv = V(i, j);
                swirl = vv * vv / std::tan(g.phi(j)) + vv * dV(i, j);
            } // axis: V = 0 makes both terms vanish
            G(i, j) = (entro + swirl) / (r * qr);
        }
    }
    return G;
}

} // namespace epnoz
