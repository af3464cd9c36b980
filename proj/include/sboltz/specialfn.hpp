#pragma once

#include <array>
#include <complex>
#include <vector>

#include "sboltz/mode_index.hpp"

namespace sboltz {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;

// Harmonic conventions used throughout the library:
//  * the polar axis is e1, so a unit vector is (cos t, sin t cos p, sin t sin p);
//  * P_l^m carries no Condon-Shortley sign, hence conj(Y_l^m) == Y_l^{-m}.
// Most libraries (and std::assoc_legendre) include (-1)^m; do not mix them.

double legendre_p(int l, double x);
double assoc_legendre(int l, int mm, double x);
double laguerre(int n, double alpha, double x);

cplx sph_harm(int l, int m, double theta, double phi);

// Y_l^m at a unit vector, polar axis e1.
cplx sph_harm(int l, int m, const Vec3& u);

// Y_l^m for all m = -l..l at a unit vector; out[m + l].
void sph_harm_row(int l, const Vec3& u, cplx* out);

double ln_gamma(double x);
double beta_fn(double x, double y);

// Radial and full eigenfunctions of the linearized operator.
double phi_radial(int n, int l, double r);
cplx phi_eigenfunction(const ModeIndex& mode, const Vec3& v);

// Fourier transform (kernel e^{-i v.xi}) of sqrt(mu) * phi_{n,l,m}.
cplx fourier_image(const ModeIndex& mode, const Vec3& xi);

// sqrt(mu(v)) with mu the standard Maxwellian.
double sqrt_maxwellian(const Vec3& v);

}  // namespace sboltz
