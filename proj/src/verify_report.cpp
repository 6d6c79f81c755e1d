#include "epnoz/verify_report.hpp"

#include <algorithm>
#include <cmath>

namespace epnoz {

namespace {

// Independent 4th-order differentiation table (5-point): central interior,
// fully one-sided at both edges of every line.  Deliberately not the solver
// stencils (those are 4th-order central with 3rd-order one-sided closures
// and parity ghosts).
double diff5(const double* f, int n, std::ptrdiff_t stride, int i, double h) {
    auto at = [&](int k) { return f[std::ptrdiff_t(k) * stride]; };
    if (n < 5) throw InsufficientGridError("verify: need at least 5 nodes per line");
    if (i >= 2 && i <= n - 3)
        return (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) / (12.0 * h);
    if (i == 0)
        return (-25.0 * at(0) + 48.0 * at(1) - 36.0 * at(2) + 16.0 * at(3) -
                3.0 * at(4)) /
               (12.0 * h);
    if (i == 1)
        return (-3.0 * at(0) - 10.0 * at(1) + 18.0 * at(2) - 6.0 * at(3) + at(4)) /
               (12.0 * h);
    if (i == n - 2)
        return (3.0 * at(n - 1) + 10.0 * at(n - 2) - 18.0 * at(n - 3) +
                6.0 * at(n - 4) - at(n - 5)) /
               (12.0 * h);
    return (25.0 * at(n - 1) - 48.0 * at(n - 2) + 36.0 * at(n - 3) -
            16.0 * at(n - 4) + 3.0 * at(n - 5)) /
           (12.0 * h);
}

Field vdiff_r(const Grid& g, const Field& f) {
    Field out(g);
    for (int j = 0; j < g.nphi; ++j)
        for (int i = 0; i < g.nr; ++i)
            out(i, j) = diff5(&f.v[j], g.nr, g.nphi, i, g.hr());
    return out;
}

Field vdiff_phi(const Grid& g, const Field& f) {
    Field out(g);
    for (int i = 0; i < g.nr; ++i)
        for (int j = 0; j < g.nphi; ++j)
            out(i, j) = diff5(&f.v[g.idx(i, 0)], g.nphi, 1, j, g.hphi());
    return out;
}

// Composite Simpson weights with a 3/8 tail when the interval count is odd;
// the verification quadrature, independent of the solver's integrate_row.
std::vector<double> simpson_weights(int n, double h) {
    std::vector<double> w(n, 0.0);
    if (n < 2) return w;
    if (n == 2) {
        w[0] = w[1] = h / 2.0;
        return w;
    }
    int stop = n - 1; // Simpson panels cover nodes 0..stop
    const bool tail = ((n - 1) % 2 != 0);
    if (tail) stop = n - 4; // reserve the last three intervals for 3/8
    for (int i = 0; i + 2 <= stop; i += 2) {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
    }
    if (tail) {
        w[n - 4] += 3.0 * h / 8.0;
        w[n - 3] += 9.0 * h / 8.0;
        w[n - 2] += 9.0 * h / 8.0;
        w[n - 1] += 3.0 * h / 8.0;
    }
    return w;
}

// sqrt( 2 pi sum_ij wr_i wp_j q(i,j) r^2 sin phi ) for a nonnegative field q
double weighted_l2(const Grid& g, const Field& qsq) {
    const std::vector<double> wr = simpson_weights(g.nr, g.hr());
    const std::vector<double> wp = simpson_weights(g.nphi, g.hphi());
    double acc = 0.0;
    for (int i = 0; i < g.nr; ++i) {
        const double r2 = g.r(i) * g.r(i);
        for (int j = 0; j < g.nphi; ++j)
            acc += wr[i] * wp[j] * qsq(i, j) * r2 * std::sin(g.phi(j));
    }
    return std::sqrt(std::max(0.0, 2.0 * M_PI * acc));
}

Field squared(const Field& f) {
    Field s;
    s.nr = f.nr;
    s.nphi = f.nphi;
    s.v.resize(f.v.size());
    for (std::size_t k = 0; k < s.v.size(); ++k) s.v[k] = f.v[k] * f.v[k];
    return s;
}

// discrete H^m with frame derivatives (d_r, (1/r) d_phi), m = k - 1
double h_frame_norm(const Grid& g, const Field& f, int m) {
    std::vector<Field> level{f};
    double acc = 0.0;
    for (int ord = 0;; ++ord) {
        for (const Field& d : level) {
            const double nrm = weighted_l2(g, squared(d));
            acc += nrm * nrm;
        }
        if (ord == m) break;
        std::vector<Field> next;
        next.reserve(level.size() * 2);
        for (const Field& d : level) {
            next.push_back(vdiff_r(g, d));
            Field dp = vdiff_phi(g, d);
            for (int i = 0; i < g.nr; ++i)
                for (int j = 0; j < g.nphi; ++j) dp(i, j) /= g.r(i);
            next.push_back(std::move(dp));
        }
        level = std::move(next);
    }
    return std::sqrt(acc);
}

} // namespace

PrimitiveFields derive_primitives(const Grid& g, const RadialBackground& bg,
                                  const FlowFields& f) {
    const double gamma = bg.prm.gas.gamma;
    std::vector<double> ubar(g.nr);
    for (int i = 0; i < g.nr; ++i) ubar[i] = bg.u(g.r(i));
    PrimitiveFields p;
    p.vel = compose_velocity(g, ubar, f.chi, f.psi, f.V);
    p.rho = Field(g);
    p.M = Field(g);
    p.Phi = Field(g);
    for (int i = 0; i < g.nr; ++i) {
        const double Phib = bg.Phi(g.r(i));
        for (int j = 0; j < g.nphi; ++j) {
            const double q1 = p.vel.ur(i, j), q2 = p.vel.uphi(i, j),
                         q3 = p.vel.utheta(i, j);
            const double qsq = q1 * q1 + q2 * q2 + q3 * q3;
            const double Phi = Phib + f.Psi(i, j);
            p.Phi(i, j) = Phi;
            p.rho(i, j) = density_closure(gamma, f.S(i, j), Phi, qsq);
            const double c2 = sound_speed_sq(gamma, Phi, qsq);
            p.M(i, j) = std::sqrt(qsq / c2);
        }
    }
    return p;
}

ResidualReport residual_euler_poisson(const Grid& g, const GasLaw& gas,
                                      const PrimitiveFields& p, const Field& S,
                                      const Field& doping) {
    const double gamma = gas.gamma;
    Field mflux_r(g), mflux_p(g), pres(g), Lam(g);
    for (int i = 0; i < g.nr; ++i) {
        const double r = g.r(i);
        for (int j = 0; j < g.nphi; ++j) {
            const double sp = std::sin(g.phi(j));
            mflux_r(i, j) = r * r * sp * p.rho(i, j) * p.vel.ur(i, j);
            mflux_p(i, j) = r * sp * p.rho(i, j) * p.vel.uphi(i, j);
            pres(i, j) = S(i, j) * std::pow(p.rho(i, j), gamma);
            Lam(i, j) = r * sp * p.vel.utheta(i, j);
        }
    }
    const Field dmr = vdiff_r(g, mflux_r), dmp = vdiff_phi(g, mflux_p);
    const Field dup_r = vdiff_r(g, p.vel.uphi), dup_p = vdiff_phi(g, p.vel.uphi);
    const Field dpres_p = vdiff_phi(g, pres);
    const Field dS_r = vdiff_r(g, S), dS_p = vdiff_phi(g, S);
    const Field dL_r = vdiff_r(g, Lam), dL_p = vdiff_phi(g, Lam);
    const Field dPhi_r = vdiff_r(g, p.Phi), dPhi_p = vdiff_phi(g, p.Phi);
    const Field dPhi_rr = vdiff_r(g, dPhi_r), dPhi_pp = vdiff_phi(g, dPhi_p);

    Field r1(g), r2(g), r3(g), r4(g), r5(g);
    for (int i = 0; i < g.nr; ++i) {
        const double r = g.r(i);
        for (int j = 0; j < g.nphi; ++j) {
            const double phi = g.phi(j);
            const double rho = p.rho(i, j), ur = p.vel.ur(i, j),
                         up = p.vel.uphi(i, j), ut = p.vel.utheta(i, j);
            r1(i, j) = dmr(i, j) + dmp(i, j);
            const double swirlterm =
                (j == 0) ? 0.0 : rho / r * ut * ut / std::tan(phi);
            r2(i, j) = rho * ur * dup_r(i, j) + rho * up * dup_p(i, j) / r +
                       dpres_p(i, j) / r + rho * ur * up / r - swirlterm -
                       rho * dPhi_p(i, j) / r;
            r3(i, j) = mflux_r(i, j) * dS_r(i, j) + mflux_p(i, j) * dS_p(i, j);
            r4(i, j) = mflux_r(i, j) * dL_r(i, j) + mflux_p(i, j) * dL_p(i, j);
            // Poisson; on the axis cot(phi) dPhi_p has the limit dPhi_pp
            const double ang =
                (j == 0) ? 2.0 * dPhi_pp(i, j)
                         : dPhi_pp(i, j) + dPhi_p(i, j) / std::tan(phi);
            r5(i, j) = dPhi_rr(i, j) + 2.0 * dPhi_r(i, j) / r + ang / (r * r) -
                       (rho - doping(i, j));
        }
    }
    ResidualReport rep;
    rep.mass = weighted_l2(g, squared(r1));
    rep.mom_phi = weighted_l2(g, squared(r2));
    rep.entropy = weighted_l2(g, squared(r3));
    rep.angular = weighted_l2(g, squared(r4));
    rep.poisson = weighted_l2(g, squared(r5));
    rep.total = std::sqrt(rep.mass * rep.mass + rep.mom_phi * rep.mom_phi +
                          rep.entropy * rep.entropy + rep.angular * rep.angular +
                          rep.poisson * rep.poisson);
    rep.nr = g.nr;
    rep.nphi = g.nphi;
    return rep;
}

ConservationReport conservation_report(const Grid& g, const GasLaw& gas,
                                       const PrimitiveFields& p, const Field& S) {
    const double gamma = gas.gamma;
    ConservationReport rep;

    const std::vector<double> wp = simpson_weights(g.nphi, g.hphi());
    double mmin = 1e300, mmax = -1e300, msum = 0.0;
    for (int i = 0; i < g.nr; ++i) {
        const double r2 = g.r(i) * g.r(i);
        double m = 0.0;
        for (int j = 0; j < g.nphi; ++j)
            m += wp[j] * p.rho(i, j) * p.vel.ur(i, j) * r2 * std::sin(g.phi(j));
        m *= 2.0 * M_PI;
        mmin = std::min(mmin, m);
        mmax = std::max(mmax, m);
        msum += m;
    }
    rep.mass_flux_mean = msum / g.nr;
    rep.mass_flux_spread = (mmax - mmin) / std::abs(rep.mass_flux_mean);

    double kmax = 0.0;
    for (int i = 0; i < g.nr; ++i)
        for (int j = 0; j < g.nphi; ++j) {
            const double q1 = p.vel.ur(i, j), q2 = p.vel.uphi(i, j),
                         q3 = p.vel.utheta(i, j);
            const double B = 0.5 * (q1 * q1 + q2 * q2 + q3 * q3) +
                             gamma / (gamma - 1.0) * S(i, j) *
                                 std::pow(p.rho(i, j), gamma - 1.0);
            kmax = std::max(kmax, std::abs(B - p.Phi(i, j)));
        }
    rep.K_defect = kmax;

    Field Lam(g);
    for (int i = 0; i < g.nr; ++i)
        for (int j = 0; j < g.nphi; ++j)
            Lam(i, j) = g.r(i) * std::sin(g.phi(j)) * p.vel.utheta(i, j);
    const Field dS_r = vdiff_r(g, S), dS_p = vdiff_phi(g, S);
    const Field dL_r = vdiff_r(g, Lam), dL_p = vdiff_phi(g, Lam);
    Field qs(g), ql(g);
    for (int i = 0; i < g.nr; ++i) {
        const double r = g.r(i);
        for (int j = 0; j < g.nphi; ++j) {
            const double adv_s = p.rho(i, j) * (p.vel.ur(i, j) * dS_r(i, j) +
                                                p.vel.uphi(i, j) * dS_p(i, j) / r);
            const double adv_l = p.rho(i, j) * (p.vel.ur(i, j) * dL_r(i, j) +
                                                p.vel.uphi(i, j) * dL_p(i, j) / r);
            qs(i, j) = adv_s * adv_s;
            ql(i, j) = adv_l * adv_l;
        }
    }
    rep.S_transport = weighted_l2(g, qs);
    rep.Lambda_transport = weighted_l2(g, ql);
    rep.S_min = *std::min_element(S.v.begin(), S.v.end());
    rep.S_max = *std::max_element(S.v.begin(), S.v.end());
    return rep;
}

double hk_star_norm(const Grid& g, const Field& f, int k) {
    if (k < 1 || k > 4) throw InsufficientGridError("hk_star_norm: k must be 1..4");
    if (g.nr < 5 || g.nphi < 5)
        throw InsufficientGridError("hk_star_norm: need at least 5 nodes per direction");
    require_match(g, f, "hk_star_norm");
    return h_frame_norm(g, f, k - 1) + h_frame_norm(g, vdiff_r(g, f), k - 1);
}

MachMargin supersonic_margin(const Grid& g, const PrimitiveFields& p) {
    MachMargin mm;
    mm.margin = 1e300;
    for (int i = 0; i < g.nr; ++i)
        for (int j = 0; j < g.nphi; ++j) {
            const double m = p.M(i, j) - 1.0;
            if (m < mm.margin) {
                mm.margin = m;
                mm.r = g.r(i);
                mm.phi = g.phi(j);
            }
        }
    return mm;
}

} // namespace epnoz
