#include "epnoz/linear_subsystem.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <sstream>

namespace epnoz {

BackgroundOnGrid BackgroundOnGrid::make(const RadialBackground& bg, const Grid& g) {
    const double gamma = bg.prm.gas.gamma;
    BackgroundOnGrid out;
    const int n = g.nr;
    out.rho.resize(n);
    out.E.resize(n);
    out.u.resize(n);
    out.du.resize(n);
    out.c2.resize(n);
    out.Phi.resize(n);
    out.phibar.resize(n);
    out.alpha1.resize(n);
    out.b1.resize(n);
    out.ccoef.resize(n);
    out.g0.resize(n);
    out.h1.resize(n);
    for (int i = 0; i < n; ++i) {
        const double r = g.r(i);
        const double rho = bg.rho(r), E = bg.E(r), u = bg.u(r), c2 = bg.c2(r);
        out.rho[i] = rho;
        out.E[i] = E;
        out.u[i] = u;
        out.du[i] = bg.du(r);
        out.c2[i] = c2;
        out.Phi[i] = bg.Phi(r);
        out.phibar[i] = bg.phibar(r);
        const double den = u * u - c2;
        // alpha1 = d(F2)/dq1 and ccoef = d(F2)/dz at the background point
        out.alpha1[i] = -(E * (gamma * u * u + c2) +
                          2.0 * u * u / r * ((gamma - 1.0) * u * u + 2.0 * c2)) /
                        (den * den);
        out.b1[i] = u / den;
        out.ccoef[i] = (gamma - 1.0) * (E * u + 2.0 * u * u * u / r) / (den * den);
        out.g0[i] = std::pow(rho, 2.0 - gamma) / (gamma * bg.prm.gas.S0);
        out.h1[i] = -out.g0[i] * u;
    }
    return out;
}

AngularProfile AngularProfile::zero() {
    auto z = [](double) { return 0.0; };
    return {z, z, z};
}

namespace {
// quintic blend: eta(0)=1, eta(1)=0, eta'=eta''=0 at both ends (of x in [0,1])
inline void quintic(double x, double& e, double& e1, double& e2) {
    e = 1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
    e1 = -30.0 * x * x * (1.0 - x) * (1.0 - x);
    e2 = -60.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
}
} // namespace

Lifting lift_boundary(const Grid& g, const AngularProfile& chi_trace,
                      const AngularProfile& dE_en, const AngularProfile& dPhi_ex) {
    Lifting L;
    for (Field* f : {&L.chi, &L.chi_r, &L.chi_p, &L.chi_rr, &L.chi_rp, &L.chi_pp,
                     &L.Psi, &L.Psi_r, &L.Psi_p, &L.Psi_rr, &L.Psi_rp, &L.Psi_pp})
        *f = Field(g);

    const double len = g.r_ex - g.r_en;
    for (int j = 0; j < g.nphi; ++j) {
        const double phi = g.phi(j);
        const double C = chi_trace.f(phi), C1 = chi_trace.d1(phi), C2 = chi_trace.d2(phi);
        const double dE = dE_en.f(phi), dE1 = dE_en.d1(phi), dE2 = dE_en.d2(phi);
        const double dX = dPhi_ex.f(phi), dX1 = dPhi_ex.d1(phi), dX2 = dPhi_ex.d2(phi);
        // Psi_bd = r A + r^2/2 B gives d_r Psi_bd(r_en) = dE_en, d_r Psi_bd(r_ex) = dPhi_ex
        const double A = (g.r_ex * dE - g.r_en * dX) / len, B = (dX - dE) / len;
        const double A1 = (g.r_ex * dE1 - g.r_en * dX1) / len, B1 = (dX1 - dE1) / len;
        const double A2 = (g.r_ex * dE2 - g.r_en * dX2) / len, B2 = (dX2 - dE2) / len;
        for (int i = 0; i < g.nr; ++i) {
            const double r = g.r(i);
            double e, e1, e2;
            quintic((r - g.r_en) / len, e, e1, e2);
            e1 /= len;
            e2 /= len * len;
            L.chi(i, j) = e * C;
            L.chi_r(i, j) = e1 * C;
            L.chi_p(i, j) = e * C1;
            L.chi_rr(i, j) = e2 * C;
            L.chi_rp(i, j) = e1 * C1;
            L.chi_pp(i, j) = e * C2;
            L.Psi(i, j) = r * A + 0.5 * r * r * B;
            L.Psi_r(i, j) = A + r * B;
            L.Psi_p(i, j) = r * A1 + 0.5 * r * r * B1;
            L.Psi_rr(i, j) = B;
            L.Psi_rp(i, j) = A1 + r * B1;
            L.Psi_pp(i, j) = r * A2 + 0.5 * r * r * B2;
        }
    }
    return L;
}

LinearSystemFields assemble_coefficients(const Grid& g, const GasLaw& gas,
                                         const BackgroundOnGrid& bgg,
                                         const FlowFields& state, const Field& doping,
                                         double b0, double margin,
                                         const Lifting& lift) {
    require_match(g, state.chi, "assemble_coefficients");
    require_match(g, doping, "assemble_coefficients");
    const double gamma = gas.gamma;

    Field tr, tp;
    curl_theta(g, state.psi, tr, tp);
    const Field chi_r = d_r(g, state.chi), chi_p = d_phi(g, state.chi, Parity::Even);
    const Field Psi_r = d_r(g, state.Psi), Psi_p = d_phi(g, state.Psi, Parity::Even);
    const Field S_r = d_r(g, state.S), S_p = d_phi(g, state.S, Parity::Even);
    const Field V_r = d_r(g, state.V), V_p = d_phi(g, state.V, Parity::Odd);
    const Field tr_r = d_r(g, tr), tr_p = d_phi(g, tr, Parity::Even);
    const Field tp_r = d_r(g, tp), tp_p = d_phi(g, tp, Parity::Odd);

    LinearSystemFields out;
    for (Field* f : {&out.a12, &out.a22, &out.a1m, &out.a2reg, &out.a2cot, &out.F, &out.f})
        *f = Field(g);
    out.tr_en.assign(g.nphi, 0.0);
    for (int j = 0; j < g.nphi; ++j) out.tr_en[j] = tr(0, j);

    double min_sup = 1e300, min_sub = 1e300;
    for (int i = 0; i < g.nr; ++i) {
        const double r = g.r(i);
        const double ub = bgg.u[i], Eb = bgg.E[i], c2b = bgg.c2[i];
        const double denb = ub * ub - c2b;
        const double a1bar = -2.0 * c2b / (r * denb);
        for (int j = 0; j < g.nphi; ++j) {
            const double phi = g.phi(j);
            const double q1 = ub + chi_r(i, j) + tr(i, j);
            const double q2 = chi_p(i, j) / r + tp(i, j);
            const double q3 = state.V(i, j);
            const double qsq = q1 * q1 + q2 * q2 + q3 * q3;
            const double Phit = state.Psi(i, j) + bgg.Phi[i];
            const double head = Phit - 0.5 * qsq;
            if (!(head > 0.0))
                throw CavitationError("assemble_coefficients: Bernoulli head not positive");
            const double c2v = (gamma - 1.0) * head;
            const double den = q1 * q1 - c2v;
            min_sup = std::min(min_sup, den);
            min_sub = std::min(min_sub, c2v - q2 * q2);
            if (den < margin) {
                std::ostringstream os;
                os << "assemble_coefficients: q1^2 - c^2 = " << den << " under margin "
                   << margin << " at (r, phi) = (" << r << ", " << phi << ")";
                throw SonicApproachError(os.str(), r, phi);
            }
            if (c2v - q2 * q2 < margin) {
                std::ostringstream os;
                os << "assemble_coefficients: c^2 - q2^2 = " << c2v - q2 * q2
                   << " under margin " << margin << " at (r, phi) = (" << r << ", " << phi
                   << ")";
                throw SonicApproachError(os.str(), r, phi);
            }

            const double a12 = q1 * q2 / (r * den);
            const double a22 = (q2 * q2 - c2v) / (r * r * den);
            const double a1 = -2.0 * c2v / (r * den);
            const double a2reg = -q1 * q2 / (r * r * den);
            const double a2cot = -c2v / (r * r * den);
            out.a12(i, j) = a12;
            out.a22(i, j) = a22;
            out.a1m(i, j) = a1 - bgg.alpha1[i];
            out.a2reg(i, j) = a2reg;
            out.a2cot(i, j) = a2cot;

            // F1: entropy transport, curl advection, and curl divergence parts.
            // The advection term contracts the componentwise derivative matrix of
            // t = curl(psi e_theta) + V e_theta: it stems from the gradient of the
            // scalar |q|^2/2, so no curvature terms appear here (the cot phi and
            // 1/r pieces of the full covariant derivative live in a_i and div t).
            const double DSq = S_r(i, j) * q1 + S_p(i, j) * q2 / r;
            const bool axis = (j == 0);
            const double cotp = axis ? 0.0 : 1.0 / std::tan(phi);
            const double tpcot = axis ? tp_p(i, j) : tp(i, j) * cotp;
            const double qqDt =
                q1 * (q1 * tr_r(i, j) + q2 * tp_r(i, j) + q3 * V_r(i, j)) +
                q2 / r * (q1 * tr_p(i, j) + q2 * tp_p(i, j) + q3 * V_p(i, j));
            const double divt = tr_r(i, j) + 2.0 * tr(i, j) / r + (tp_p(i, j) + tpcot) / r;
            const double F1 = -head * DSq / (state.S(i, j) * den) - qqDt / den +
                              c2v * divt / den;

            // F2 at the perturbed state minus F2 at the background point
            const double F2p =
                ((Eb + Psi_r(i, j)) * q1 + Psi_p(i, j) * q2 / r) / den - a1 * ub;
            const double F2b = ub * Eb / denb - a1bar * ub;

            const double Fcal = F1 + F2p - F2b - bgg.alpha1[i] * chi_r(i, j) -
                                bgg.b1[i] * Psi_r(i, j) - bgg.ccoef[i] * state.Psi(i, j);

            const double rho_pert = density_closure(gamma, state.S(i, j), Phit, qsq);
            const double fpois = rho_pert - bgg.rho[i] - (doping(i, j) - b0) -
                                 bgg.g0[i] * state.Psi(i, j) - bgg.h1[i] * chi_r(i, j);

            // homogenize: subtract L1/L2 of the lifting (analytic derivatives)
            const double cot_chi_p = axis ? lift.chi_pp(i, j) : cotp * lift.chi_p(i, j);
            const double cot_Psi_p = axis ? lift.Psi_pp(i, j) : cotp * lift.Psi_p(i, j);
            const double L1l = lift.chi_rr(i, j) + 2.0 * a12 * lift.chi_rp(i, j) +
                               a22 * lift.chi_pp(i, j) + out.a1m(i, j) * lift.chi_r(i, j) +
                               a2reg * lift.chi_p(i, j) + a2cot * cot_chi_p -
                               bgg.b1[i] * lift.Psi_r(i, j) - bgg.ccoef[i] * lift.Psi(i, j);
            const double L2l = lift.Psi_rr(i, j) + lift.Psi_pp(i, j) / (r * r) +
                               2.0 * lift.Psi_r(i, j) / r + cot_Psi_p / (r * r) -
                               bgg.g0[i] * lift.Psi(i, j) - bgg.h1[i] * lift.chi_r(i, j);

            out.F(i, j) = Fcal - L1l;
            out.f(i, j) = fpois - L2l;
        }
    }
    out.min_sup_margin = min_sup;
    out.min_sub_margin = min_sub;
    return out;
}

namespace {
void interp_row_to_quad(const Field& f, int i, const Grid& g,
                        const std::vector<double>& phi_q, std::vector<double>& out) {
    out.resize(phi_q.size());
    const double* row = &f.v[g.idx(i, 0)];
    for (std::size_t q = 0; q < phi_q.size(); ++q)
        out[q] = interp_cubic(row, g.nphi, 0.0, g.hphi(), phi_q[q]);
}
} // namespace

ModalSystem galerkin_reduce(const Grid& g, const EigenBasis& basis,
                            const LinearSystemFields& fields, const BackgroundOnGrid& bgg,
                            const AngularProfile& du_en) {
    const int mp = basis.m + 1, nq = basis.nq();
    ModalSystem ms;
    ms.m = basis.m;
    ms.nr = g.nr;
    ms.hr = g.hr();
    ms.r.resize(g.nr);
    for (int i = 0; i < g.nr; ++i) ms.r[i] = g.r(i);
    ms.b1 = bgg.b1;
    ms.ccoef = bgg.ccoef;
    ms.g0 = bgg.g0;
    ms.h1 = bgg.h1;
    ms.omega = basis.omega;
    ms.F = Eigen::MatrixXd::Zero(g.nr, mp);
    ms.f = Eigen::MatrixXd::Zero(g.nr, mp);
    ms.Mrp.assign(g.nr, Eigen::MatrixXd::Zero(mp, mp));
    ms.Mp2.assign(g.nr, Eigen::MatrixXd::Zero(mp, mp));
    ms.M1.assign(g.nr, Eigen::MatrixXd::Zero(mp, mp));

    std::vector<double> cot_q(nq);
    for (int q = 0; q < nq; ++q) cot_q[q] = 1.0 / std::tan(basis.phi_q[q]);

    std::vector<double> a12q, a22q, a1mq, a2rq, a2cq, Fq, fq;
    for (int i = 0; i < g.nr; ++i) {
        interp_row_to_quad(fields.a12, i, g, basis.phi_q, a12q);
        interp_row_to_quad(fields.a22, i, g, basis.phi_q, a22q);
        interp_row_to_quad(fields.a1m, i, g, basis.phi_q, a1mq);
        interp_row_to_quad(fields.a2reg, i, g, basis.phi_q, a2rq);
        interp_row_to_quad(fields.a2cot, i, g, basis.phi_q, a2cq);
        interp_row_to_quad(fields.F, i, g, basis.phi_q, Fq);
        interp_row_to_quad(fields.f, i, g, basis.phi_q, fq);
        for (int k = 0; k < mp; ++k) {
            double accF = 0.0, accf = 0.0;
            for (int q = 0; q < nq; ++q) {
                accF += basis.w_q[q] * Fq[q] * basis.xi_q[k][q];
                accf += basis.w_q[q] * fq[q] * basis.xi_q[k][q];
            }
            ms.F(i, k) = accF;
            ms.f(i, k) = accf;
            for (int j = 0; j < mp; ++j) {
                double mrp = 0.0, mp2 = 0.0, m1 = 0.0;
                for (int q = 0; q < nq; ++q) {
                    const double w = basis.w_q[q];
                    const double xk = basis.xi_q[k][q];
                    mrp += w * 2.0 * a12q[q] * basis.dxi_q[j][q] * xk;
                    mp2 += w * (a22q[q] * basis.ddxi_q[j][q] +
                                (a2rq[q] + a2cq[q] * cot_q[q]) * basis.dxi_q[j][q]) *
                           xk;
                    m1 += w * a1mq[q] * basis.xi_q[j][q] * xk;
                }
                ms.Mrp[i](j, k) = mrp;
                ms.Mp2[i](j, k) = mp2;
                ms.M1[i](j, k) = m1;
            }
        }
    }

    ms.gmode.assign(mp, 0.0);
    for (int k = 0; k < mp; ++k) {
        double acc = 0.0;
        for (int q = 0; q < nq; ++q) {
            const double tr_q =
                interp_cubic(fields.tr_en, 0.0, g.hphi(), basis.phi_q[q]);
            acc += basis.w_q[q] * (du_en.f(basis.phi_q[q]) - tr_q) * basis.xi_q[k][q];
        }
        ms.gmode[k] = acc;
    }
    return ms;
}

ModalSolution solve_modal_system(const ModalSystem& ms) {
    const int mp = ms.m + 1, nr = ms.nr;
    const double h = ms.hr, h2 = h * h;
    const int n = 2 * mp * nr;
    auto iv = [&](int i, int k) { return i * 2 * mp + k; };
    auto iw = [&](int i, int k) { return i * 2 * mp + mp + k; };

    std::vector<Eigen::Triplet<double>> T;
    T.reserve(std::size_t(n) * (6 * mp + 8));
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    int row = 0;

    for (int k = 0; k < mp; ++k) {
        // chi-block entrance: Dirichlet and prescribed slope
        T.emplace_back(row, iv(0, k), 1.0);
        rhs(row++) = 0.0;
        T.emplace_back(row, iv(0, k), -3.0 / (2.0 * h));
        T.emplace_back(row, iv(1, k), 4.0 / (2.0 * h));
        T.emplace_back(row, iv(2, k), -1.0 / (2.0 * h));
        rhs(row++) = ms.gmode[k];
        // Psi-block Neumann at both ends
        T.emplace_back(row, iw(0, k), -3.0 / (2.0 * h));
        T.emplace_back(row, iw(1, k), 4.0 / (2.0 * h));
        T.emplace_back(row, iw(2, k), -1.0 / (2.0 * h));
        rhs(row++) = 0.0;
        T.emplace_back(row, iw(nr - 1, k), 3.0 / (2.0 * h));
        T.emplace_back(row, iw(nr - 2, k), -4.0 / (2.0 * h));
        T.emplace_back(row, iw(nr - 3, k), 1.0 / (2.0 * h));
        rhs(row++) = 0.0;
    }

    for (int i = 1; i < nr - 1; ++i) {
        const double r = ms.r[i];
        for (int k = 0; k < mp; ++k) {
            // v-equation
            T.emplace_back(row, iv(i - 1, k), 1.0 / h2);
            T.emplace_back(row, iv(i, k), -2.0 / h2);
            T.emplace_back(row, iv(i + 1, k), 1.0 / h2);
            for (int j = 0; j < mp; ++j) {
                const double cfirst = ms.Mrp[i](j, k) + ms.M1[i](j, k);
                if (cfirst != 0.0) {
                    T.emplace_back(row, iv(i + 1, j), cfirst / (2.0 * h));
                    T.emplace_back(row, iv(i - 1, j), -cfirst / (2.0 * h));
                }
                if (ms.Mp2[i](j, k) != 0.0)
                    T.emplace_back(row, iv(i, j), ms.Mp2[i](j, k));
            }
            T.emplace_back(row, iw(i + 1, k), -ms.b1[i] / (2.0 * h));
            T.emplace_back(row, iw(i - 1, k), ms.b1[i] / (2.0 * h));
            T.emplace_back(row, iw(i, k), -ms.ccoef[i]);
            rhs(row++) = ms.F(i, k);

            // w-equation
            T.emplace_back(row, iw(i - 1, k), 1.0 / h2 - 2.0 / (r * 2.0 * h));
            T.emplace_back(row, iw(i, k), -2.0 / h2 - ms.omega[k] / (r * r) - ms.g0[i]);
            T.emplace_back(row, iw(i + 1, k), 1.0 / h2 + 2.0 / (r * 2.0 * h));
            T.emplace_back(row, iv(i + 1, k), -ms.h1[i] / (2.0 * h));
            T.emplace_back(row, iv(i - 1, k), ms.h1[i] / (2.0 * h));
            rhs(row++) = ms.f(i, k);
        }
    }

    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(T.begin(), T.end());
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success)
        throw SingularSystemError("solve_modal_system: sparse LU factorization failed");
    Eigen::VectorXd x = lu.solve(rhs);
    if (lu.info() != Eigen::Success)
        throw SingularSystemError("solve_modal_system: sparse LU solve failed");

    ModalSolution sol;
    sol.v = Eigen::MatrixXd(nr, mp);
    sol.w = Eigen::MatrixXd(nr, mp);
    for (int i = 0; i < nr; ++i)
        for (int k = 0; k < mp; ++k) {
            sol.v(i, k) = x(iv(i, k));
            sol.w(i, k) = x(iw(i, k));
        }
    return sol;
}

void reconstruct_fields(const Grid& g, const EigenBasis& basis, const ModalSolution& sol,
                        const Lifting& lift, Field& chi, Field& Psi) {
    const int mp = basis.m + 1;
    std::vector<std::vector<double>> xg(mp, std::vector<double>(g.nphi));
    for (int k = 0; k < mp; ++k)
        for (int j = 0; j < g.nphi; ++j) xg[k][j] = basis.xi(k, g.phi(j));
    chi = Field(g);
    Psi = Field(g);
    for (int i = 0; i < g.nr; ++i)
        for (int j = 0; j < g.nphi; ++j) {
            double sv = 0.0, sw = 0.0;
            for (int k = 0; k < mp; ++k) {
                sv += sol.v(i, k) * xg[k][j];
                sw += sol.w(i, k) * xg[k][j];
            }
            chi(i, j) = sv + lift.chi(i, j);
            Psi(i, j) = sw + lift.Psi(i, j);
        }
}

} // namespace epnoz
