#include "epnoz/eigenbasis.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace epnoz {

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const int mhalf = (n + 1) / 2;
    for (int i = 0; i < mhalf; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
}

namespace {

// Legendre values and first two derivatives at tau, orders 0..N.
void legendre_all(double tau, int N, std::vector<double>& P, std::vector<double>& dP,
                  std::vector<double>& ddP) {
    P.assign(N + 1, 0.0);
    dP.assign(N + 1, 0.0);
    ddP.assign(N + 1, 0.0);
    P[0] = 1.0;
    if (N >= 1) {
        P[1] = tau;
        dP[1] = 1.0;
    }
    for (int k = 1; k < N; ++k) {
        P[k + 1] = ((2.0 * k + 1.0) * tau * P[k] - k * P[k - 1]) / (k + 1.0);
        dP[k + 1] = ((2.0 * k + 1.0) * (P[k] + tau * dP[k]) - k * dP[k - 1]) / (k + 1.0);
        ddP[k + 1] = ((2.0 * k + 1.0) * (2.0 * dP[k] + tau * ddP[k]) - k * ddP[k - 1]) / (k + 1.0);
    }
}

struct Spectrum {
    std::vector<double> omega;
    std::vector<std::vector<double>> coef; // Legendre coefficients per mode
};

// Rayleigh-Ritz in mapped Legendre polynomials of degree <= N.
Spectrum solve_degree(double s0, int m, int N) {
    // stiffness K_ij = int (1-s^2) p_i' p_j' ds, mass diag (1-s0)/(2i+1)
    const double a = 2.0 / (1.0 - s0); // dtau/ds
    std::vector<double> gx, gw;
    gauss_legendre(N + 2, gx, gw);

    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N + 1, N + 1);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N + 1, N + 1);
    std::vector<double> P, dP, ddP;
    for (std::size_t q = 0; q < gx.size(); ++q) {
        const double tau = gx[q];
        const double s = s0 + (tau + 1.0) / a;
        const double wds = gw[q] / a; // ds = dtau / a
        legendre_all(tau, N, P, dP, ddP);
        const double fac = (1.0 - s * s) * a * a * wds;
        for (int i = 0; i <= N; ++i)
            for (int j = i; j <= N; ++j)
                K(i, j) += fac * dP[i] * dP[j];
    }
    for (int i = 0; i <= N; ++i) {
        for (int j = 0; j < i; ++j) K(i, j) = K(j, i);
        M(i, i) = (1.0 - s0) / (2.0 * i + 1.0);
    }

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(K, M);
    if (es.info() != Eigen::Success)
        throw ResolutionError("build_basis: eigensolver failed");

    Spectrum sp;
    sp.omega.resize(m + 1);
    sp.coef.assign(m + 1, std::vector<double>(N + 1, 0.0));
    for (int k = 0; k <= m; ++k) {
        sp.omega[k] = std::max(es.eigenvalues()(k), 0.0);
        double at_axis = 0.0; // xi(phi=0) = p(tau=1) = sum of coefficients
        for (int i = 0; i <= N; ++i) at_axis += es.eigenvectors()(i, k);
        const double sgn = at_axis >= 0.0 ? 1.0 : -1.0;
        for (int i = 0; i <= N; ++i) sp.coef[k][i] = sgn * es.eigenvectors()(i, k);
    }
    return sp;
}

} // namespace

EigenBasis build_basis(double phi0, int m, int n_q) {
    if (!(phi0 > 0.0) || phi0 > M_PI)
        throw ResolutionError("build_basis: phi0 must lie in (0, pi]");
    if (m < 0) throw ResolutionError("build_basis: m must be nonnegative");

    const double s0 = std::cos(phi0);
    int N = std::max(48, 4 * (m + 1));
    Spectrum sp = solve_degree(s0, m, N);
    bool converged = false;
    while (N <= 1024) {
        Spectrum fine = solve_degree(s0, m, 2 * N);
        const double ref = std::max(std::abs(fine.omega[m]), 1.0);
        if (std::abs(fine.omega[m] - sp.omega[m]) <= 1e-8 * ref) {
            sp = fine; // keep the better approximation
            N *= 2;
            converged = true;
            break;
        }
        sp = fine;
        N *= 2;
    }
    if (!converged)
        throw ResolutionError("build_basis: top eigenvalue not converged under refinement");

    EigenBasis b;
    b.phi0 = phi0;
    b.m = m;
    b.omega = sp.omega;
    b.leg = sp.coef;

    const int deg = int(sp.coef[0].size()) - 1;
    int nq = (n_q > 0) ? std::max(n_q, deg + 1) : std::max(64, deg + 1);
    std::vector<double> gx, gw;
    gauss_legendre(nq, gx, gw);
    const double A = 2.0 / (1.0 - s0);
    b.phi_q.resize(nq);
    b.s_q.resize(nq);
    b.w_q.resize(nq);
    // reverse so phi_q ascends from the axis toward the wall
    for (int q = 0; q < nq; ++q) {
        const double tau = gx[nq - 1 - q];
        const double s = s0 + (tau + 1.0) / A;
        b.s_q[q] = s;
        b.phi_q[q] = std::acos(std::min(1.0, std::max(-1.0, s)));
        b.w_q[q] = gw[nq - 1 - q] / A;
    }

    b.xi_q.assign(m + 1, std::vector<double>(nq));
    b.dxi_q.assign(m + 1, std::vector<double>(nq));
    b.ddxi_q.assign(m + 1, std::vector<double>(nq));
    for (int q = 0; q < nq; ++q)
        for (int k = 0; k <= m; ++k) {
            b.xi_q[k][q] = b.xi(k, b.phi_q[q]);
            b.dxi_q[k][q] = b.dxi(k, b.phi_q[q]);
            b.ddxi_q[k][q] = b.ddxi(k, b.phi_q[q]);
        }
    return b;
}

namespace {
// common evaluation kernel: p(tau), p'(tau), p''(tau) for mode k
void eval_poly(const std::vector<double>& c, double tau, double& p, double& dp, double& ddp) {
    const int N = int(c.size()) - 1;
    std::vector<double> P, dP, ddP;
    legendre_all(tau, N, P, dP, ddP);
    p = dp = ddp = 0.0;
    for (int i = 0; i <= N; ++i) {
        p += c[i] * P[i];
        dp += c[i] * dP[i];
        ddp += c[i] * ddP[i];
    }
}
} // namespace

double EigenBasis::xi(int k, double phi) const {
    const double s0 = std::cos(phi0);
    const double tau = (2.0 * std::cos(phi) - (1.0 + s0)) / (1.0 - s0);
    double p, dp, ddp;
    eval_poly(leg[k], tau, p, dp, ddp);
    return p;
}

double EigenBasis::dxi(int k, double phi) const {
    const double s0 = std::cos(phi0);
    const double a = 2.0 / (1.0 - s0);
    const double tau = a * (std::cos(phi) - s0) - 1.0;
    double p, dp, ddp;
    eval_poly(leg[k], tau, p, dp, ddp);
    return -std::sin(phi) * a * dp;
}

double EigenBasis::ddxi(int k, double phi) const {
    const double s0 = std::cos(phi0);
    const double a = 2.0 / (1.0 - s0);
    const double tau = a * (std::cos(phi) - s0) - 1.0;
    double p, dp, ddp;
    eval_poly(leg[k], tau, p, dp, ddp);
    const double sp = std::sin(phi);
    return -std::cos(phi) * a * dp + sp * sp * a * a * ddp;
}

std::vector<double> EigenBasis::project(const std::vector<double>& f_at_q) const {
    if (int(f_at_q.size()) != nq())
        throw GridMismatchError("EigenBasis::project: sample count != quadrature size");
    std::vector<double> c(m + 1, 0.0);
    for (int k = 0; k <= m; ++k) {
        double acc = 0.0;
        for (int q = 0; q < nq(); ++q) acc += w_q[q] * f_at_q[q] * xi_q[k][q];
        c[k] = acc;
    }
    return c;
}

std::vector<double> EigenBasis::project(const std::function<double(double)>& f) const {
    std::vector<double> s(nq());
    for (int q = 0; q < nq(); ++q) s[q] = f(phi_q[q]);
    return project(s);
}

double EigenBasis::evaluate(const std::vector<double>& c, double phi) const {
    double acc = 0.0;
    for (int k = 0; k < int(c.size()) && k <= m; ++k) acc += c[k] * xi(k, phi);
    return acc;
}

double EigenBasis::gram_defect() const {
    double worst = 0.0;
    for (int j = 0; j <= m; ++j)
        for (int k = j; k <= m; ++k) {
            double acc = 0.0;
            for (int q = 0; q < nq(); ++q) acc += w_q[q] * xi_q[j][q] * xi_q[k][q];
            worst = std::max(worst, std::abs(acc - (j == k ? 1.0 : 0.0)));
        }
    return worst;
}

double EigenBasis::derivative_gram_defect() const {
    double worst = 0.0;
    for (int j = 1; j <= m; ++j)
        for (int k = j; k <= m; ++k) {
            double acc = 0.0;
            for (int q = 0; q < nq(); ++q) acc += w_q[q] * dxi_q[j][q] * dxi_q[k][q];
            acc /= std::sqrt(omega[j] * omega[k]);
            worst = std::max(worst, std::abs(acc - (j == k ? 1.0 : 0.0)));
        }
    return worst;
}

} // namespace epnoz
