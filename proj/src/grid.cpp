#include "epnoz/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace epnoz {

void require_match(const Grid& g, const Field& f, const char* who) {
    if (!f.matches(g))
        throw GridMismatchError(std::string(who) + ": field is " +
                                std::to_string(f.nr) + "x" + std::to_string(f.nphi) +
                                ", grid is " + std::to_string(g.nr) + "x" +
                                std::to_string(g.nphi));
}

namespace {

// One-sided 4-point first-derivative weights (3rd order), node position 0..3.
constexpr double kOneSided[4][4] = {
    {-11.0 / 6.0, 3.0, -1.5, 1.0 / 3.0},
    {-1.0 / 3.0, -0.5, 1.0, -1.0 / 6.0},
    {1.0 / 6.0, -1.0, 0.5, 1.0 / 3.0},
    {-1.0 / 3.0, 1.5, -3.0, 11.0 / 6.0},
};

inline double one_sided(const double* f, int node, double h) {
    const double* w = kOneSided[node];
    return (w[0] * f[0] + w[1] * f[1] + w[2] * f[2] + w[3] * f[3]) / h;
}

inline double central4(double fm2, double fm1, double fp1, double fp2, double h) {
    return (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
}

void d_line(const double* f, double* out, int n, double h) {
    if (n < 5) throw InsufficientGridError("d_line: need at least 5 nodes for 4th-order stencils");
    out[0] = one_sided(f, 0, h);
    out[1] = one_sided(f, 1, h);
    for (int i = 2; i < n - 2; ++i)
        out[i] = central4(f[i - 2], f[i - 1], f[i + 1], f[i + 2], h);
    out[n - 2] = one_sided(f + (n - 4), 2, h);
    out[n - 1] = one_sided(f + (n - 4), 3, h);
}

} // namespace

Field d_r(const Grid& g, const Field& f) {
    require_match(g, f, "d_r");
    Field out(g);
    const int nr = g.nr, np = g.nphi;
    const double h = g.hr();
    std::vector<double> col(nr), dcol(nr);
    for (int j = 0; j < np; ++j) {
        for (int i = 0; i < nr; ++i) col[i] = f(i, j);
        d_line(col.data(), dcol.data(), nr, h);
        for (int i = 0; i < nr; ++i) out(i, j) = dcol[i];
    }
    return out;
}

Field d_phi(const Grid& g, const Field& f, Parity parity) {
    require_match(g, f, "d_phi");
    if (g.nphi < 5)
        throw InsufficientGridError("d_phi: need at least 5 angular nodes");
    Field out(g);
    const int np = g.nphi;
    const double h = g.hphi();
    const double sgn = (parity == Parity::Even) ? 1.0 : -1.0;
    for (int i = 0; i < g.nr; ++i) {
        const double* row = &f.v[g.idx(i, 0)];
        auto at = [&](int j) { return j >= 0 ? row[j] : sgn * row[-j]; };
        // reflection ghosts across phi = 0 keep 4th order up to the axis
        for (int j = 0; j < np - 2; ++j)
            out(i, j) = central4(at(j - 2), at(j - 1), at(j + 1), at(j + 2), h);
        out(i, np - 2) = one_sided(row + (np - 4), 2, h);
        out(i, np - 1) = one_sided(row + (np - 4), 3, h);
    }
    return out;
}

std::vector<double> d_profile(const std::vector<double>& f, double h) {
    std::vector<double> out(f.size());
    d_line(f.data(), out.data(), int(f.size()), h);
    return out;
}

double interp_cubic(const double* f, int n, double x0, double h, double x) {
    if (n < 4) throw InsufficientGridError("interp_cubic: need at least 4 nodes");
    double s = (x - x0) / h;
    int k = int(std::floor(s)) - 1; // window [k, k+3] centered on the cell
    k = std::clamp(k, 0, n - 4);
    const double t = s - k;
    // Lagrange basis on offsets 0,1,2,3
    const double l0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
    const double l1 = t * (t - 2.0) * (t - 3.0) / 2.0;
    const double l2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
    const double l3 = t * (t - 1.0) * (t - 2.0) / 6.0;
    return l0 * f[k] + l1 * f[k + 1] + l2 * f[k + 2] + l3 * f[k + 3];
}

double interp_cubic(const std::vector<double>& f, double x0, double h, double x) {
    return interp_cubic(f.data(), int(f.size()), x0, h, x);
}

double interp_field(const Grid& g, const Field& f, double r, double phi) {
    require_match(g, f, "interp_field");
    r = std::clamp(r, g.r_en, g.r_ex);
    phi = std::clamp(phi, 0.0, g.phi0);
    const double hr = g.hr();
    int k = int(std::floor((r - g.r_en) / hr)) - 1;
    k = std::clamp(k, 0, g.nr - 4);
    double rowvals[4];
    for (int a = 0; a < 4; ++a)
        rowvals[a] = interp_cubic(&f.v[g.idx(k + a, 0)], g.nphi, 0.0, g.hphi(), phi);
    return interp_cubic(rowvals, 4, g.r_en + k * hr, hr, r);
}

double integrate_row(const std::vector<double>& f, double h) {
    const int n = int(f.size());
    if (n < 4) throw InsufficientGridError("integrate_row: need at least 4 nodes");
    const int m = n - 1; // interval count
    double acc = 0.0;
    int stop = m;        // intervals handled by Simpson
    if (m % 2 != 0) stop = m - 3;
    for (int i = 0; i + 2 <= stop; i += 2)
        acc += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
    if (m % 2 != 0) {
        const int i = stop;
        acc += 3.0 * h / 8.0 * (f[i] + 3.0 * f[i + 1] + 3.0 * f[i + 2] + f[i + 3]);
    }
    return acc;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = a + (b - a) * i / (n - 1);
    if (n > 1) x[n - 1] = b;
    return x;
}

} // namespace epnoz
