// Tensor-product (r, phi) grid on the wedge [r_en, r_ex] x [0, phi0],
// flat field storage (r-outer), 4th-order differentiation with parity
// ghosts across the symmetry axis, and local-cubic interpolation.
#pragma once

#include <cstddef>
#include <vector>

#include "epnoz/errors.hpp"

namespace epnoz {

// Scalar parity under reflection phi -> -phi.  Axisymmetric regularity makes
// chi, Psi, S, u_r even and psi, V (swirl), u_phi odd; the ghost-node
// reflection below encodes exactly that.
enum class Parity { Even, Odd };

struct Grid {
    double r_en = 1.5, r_ex = 2.5, phi0 = 0.5;
    int nr = 0, nphi = 0;

    double hr() const { return (r_ex - r_en) / (nr - 1); }
    double hphi() const { return phi0 / (nphi - 1); }
    double r(int i) const { return r_en + i * hr(); }
    double phi(int j) const { return j * hphi(); }
    std::size_t size() const { return std::size_t(nr) * nphi; }
    std::size_t idx(int i, int j) const { return std::size_t(i) * nphi + j; }
};

// Scalar field sampled on a Grid; row-major with r varying slowest.
struct Field {
    int nr = 0, nphi = 0;
    std::vector<double> v;

    Field() = default;
    Field(int nr_, int nphi_, double fill = 0.0)
        : nr(nr_), nphi(nphi_), v(std::size_t(nr_) * nphi_, fill) {}
    explicit Field(const Grid& g, double fill = 0.0) : Field(g.nr, g.nphi, fill) {}

    double& operator()(int i, int j) { return v[std::size_t(i) * nphi + j]; }
    double operator()(int i, int j) const { return v[std::size_t(i) * nphi + j]; }
    bool matches(const Grid& g) const { return nr == g.nr && nphi == g.nphi; }
};

void require_match(const Grid& g, const Field& f, const char* who);

// First derivatives, 4th-order centered interior, 3rd-order one-sided at
// boundaries.  d_phi uses reflection ghosts across phi = 0 with the stated
// parity and one-sided stencils at the wall.
Field d_r(const Grid& g, const Field& f);
Field d_phi(const Grid& g, const Field& f, Parity parity);

// Same stencils applied to a 1-D profile (uniform spacing h).
std::vector<double> d_profile(const std::vector<double>& f, double h);

// Local cubic Lagrange interpolation of a uniformly sampled row
// (x_k = x0 + k h) at point x; window shifts inward near the ends.
double interp_cubic(const std::vector<double>& f, double x0, double h, double x);
double interp_cubic(const double* f, int n, double x0, double h, double x);

// Tensor local-cubic interpolation of a field at (r, phi); arguments are
// clamped to the grid box (callers handle genuine out-of-domain events).
double interp_field(const Grid& g, const Field& f, double r, double phi);

// Composite 4th-order quadrature of a sampled row over its full uniform
// span: Simpson, with a 3/8 tail when the interval count is odd.
double integrate_row(const std::vector<double>& f, double h);

std::vector<double> linspace(double a, double b, int n);

} // namespace epnoz
