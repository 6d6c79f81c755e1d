#include "epnoz/vorticity_transport.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace epnoz {

Field solve_psi(const Grid& g, const Field& G_sharp,
                const std::vector<double>& robin_en) {
    require_match(g, G_sharp, "solve_psi");
    if (g.nr < 4 || g.nphi < 3)
        throw ResolutionError("solve_psi: grid too coarse for the entrance stencil");
    if (!robin_en.empty() && int(robin_en.size()) != g.nphi)
        throw GridMismatchError("solve_psi: robin_en length != nphi");

    const int n = int(g.size());
    const double hr = g.hr(), hp = g.hphi();
    const double hr2 = hr * hr, hp2 = hp * hp;
    std::vector<Eigen::Triplet<double>> T;
    T.reserve(std::size_t(n) * 5);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

    for (int i = 0; i < g.nr; ++i) {
        for (int j = 0; j < g.nphi; ++j) {
            const int row = int(g.idx(i, j));
            if (j == 0 || j == g.nphi - 1 || i == g.nr - 1) {
                T.emplace_back(row, row, 1.0); // Dirichlet: axis, wall, exit
                continue;
            }
            if (i == 0) {
                // d_r(r psi) = psi + r d_r psi, one-sided second order
                const double r = g.r_en;
                T.emplace_back(row, int(g.idx(0, j)), 1.0 - 3.0 * r / (2.0 * hr));
                T.emplace_back(row, int(g.idx(1, j)), 4.0 * r / (2.0 * hr));
                T.emplace_back(row, int(g.idx(2, j)), -r / (2.0 * hr));
                rhs(row) = robin_en.empty() ? 0.0 : robin_en[j];
                continue;
            }
            const double r = g.r(i), phi = g.phi(j);
            const double sp = std::sin(phi), cot = std::cos(phi) / sp;
            const double r2 = r * r;
            // assemble -(L psi) = G# so the diagonal is positive
            T.emplace_back(row, int(g.idx(i - 1, j)), -(1.0 / hr2 - 1.0 / (r * hr)));
            T.emplace_back(row, int(g.idx(i + 1, j)), -(1.0 / hr2 + 1.0 / (r * hr)));
            T.emplace_back(row, int(g.idx(i, j - 1)),
                           -(1.0 / (r2 * hp2) - cot / (2.0 * r2 * hp)));
            T.emplace_back(row, int(g.idx(i, j + 1)),
                           -(1.0 / (r2 * hp2) + cot / (2.0 * r2 * hp)));
            T.emplace_back(row, row,
                           2.0 / hr2 + 2.0 / (r2 * hp2) + 1.0 / (r2 * sp * sp));
            rhs(row) = G_sharp(i, j);
        }
    }

    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(T.begin(), T.end());
    A.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success)
        throw SingularSystemError("solve_psi: sparse LU factorization failed");
    Eigen::VectorXd x = lu.solve(rhs);
    if (lu.info() != Eigen::Success)
        throw SingularSystemError("solve_psi: sparse LU solve failed");

    Field psi(g);
    for (int k = 0; k < n; ++k) psi.v[k] = x(k);
    return psi;
}

namespace {

struct SlopeSampler {
    const Grid& g;
    const Field& ur;
    const Field& uphi;

    double operator()(double r, double phi) const {
        const double u = interp_field(g, ur, r, phi);
        if (u <= 0.0) {
            std::ostringstream os;
            os << "trace_streamline: u_r = " << u << " <= 0 at (r, phi) = (" << r
               << ", " << phi << ")";
            throw BackflowError(os.str(), r, phi);
        }
        return interp_field(g, uphi, r, phi) / (r * u);
    }
};

double rk4_step(const SlopeSampler& f, double r, double phi, double h) {
    const double k1 = f(r, phi);
    const double k2 = f(r + 0.5 * h, phi + 0.5 * h * k1);
    const double k3 = f(r + 0.5 * h, phi + 0.5 * h * k2);
    const double k4 = f(r + h, phi + h * k3);
    return phi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

} // namespace

double trace_streamline(const Grid& g, const Field& ur, const Field& uphi,
                        double r0, double phi_start, FootStatus& status,
                        double rtol) {
    status = FootStatus::Interior;
    // axis and wall are exact streamlines; nodes on them stay on them
    if (phi_start <= 0.0) {
        status = FootStatus::Axis;
        return 0.0;
    }
    if (phi_start >= g.phi0) {
        status = FootStatus::Wall;
        return g.phi0;
    }
    const double span = r0 - g.r_en;
    if (span <= 0.0) return phi_start;

    const SlopeSampler f{g, ur, uphi};
    double r = r0, phi = phi_start;
    double h = -span / 16.0;
    const double hmin = span * 1e-12;

    while (r > g.r_en + hmin) {
        if (r + h < g.r_en) h = g.r_en - r;
        const double p_full = rk4_step(f, r, phi, h);
        double p_half = rk4_step(f, r, phi, 0.5 * h);
        p_half = rk4_step(f, r + 0.5 * h, p_half, 0.5 * h);
        const double err = std::abs(p_half - p_full) / 15.0;
        const double tol = rtol * (1.0 + std::abs(phi));
        if (err <= tol || std::abs(h) <= hmin) {
            phi = p_half + (p_half - p_full) / 15.0; // local extrapolation
            r += h;
            if (phi <= 0.0) {
                status = FootStatus::Axis;
                return 0.0;
            }
            if (phi >= g.phi0) {
                status = FootStatus::Wall;
                return g.phi0;
            }
            if (err > 0.0)
                h *= std::min(4.0, 0.9 * std::pow(tol / err, 0.2));
            else
                h *= 4.0;
            if (std::abs(h) < hmin) h = (h < 0.0 ? -hmin : hmin);
        } else {
            h *= std::max(0.1, 0.9 * std::pow(tol / err, 0.2));
        }
    }
    return std::clamp(phi, 0.0, g.phi0);
}

StreamlineFeet trace_streamlines(const Grid& g, const Field& ur, const Field& uphi,
                                 double rtol) {
    require_match(g, ur, "trace_streamlines");
    require_match(g, uphi, "trace_streamlines");
    StreamlineFeet out;
    out.foot = Field(g);
    out.status.assign(g.size(), FootStatus::Interior);
    for (int i = 0; i < g.nr; ++i)
        for (int j = 0; j < g.nphi; ++j) {
            FootStatus st;
            out.foot(i, j) = trace_streamline(g, ur, uphi, g.r(i), g.phi(j), st, rtol);
            out.status[g.idx(i, j)] = st;
        }
    return out;
}

void transport_scalars(const Grid& g, const StreamlineFeet& feet,
                       const std::function<double(double)>& S_en,
                       const std::function<double(double)>& w_en, Field& S, Field& V) {
    require_match(g, feet.foot, "transport_scalars");
    if (std::abs(w_en(0.0)) > 1e-12)
        throw CompatibilityError(
            "transport_scalars: w_en(0) != 0, swirl has no axis limit");
    S = Field(g);
    V = Field(g);
    for (int i = 0; i < g.nr; ++i) {
        const double r = g.r(i);
        for (int j = 0; j < g.nphi; ++j) {
            const double ft = feet.foot(i, j);
            S(i, j) = S_en(ft);
            if (j == 0)
                V(i, j) = 0.0; // Lambda ~ sin(foot) w_en(foot) -> 0 on the axis
            else
                V(i, j) = g.r_en * std::sin(ft) * w_en(ft) / (r * std::sin(g.phi(j)));
        }
    }
}

} // namespace epnoz
