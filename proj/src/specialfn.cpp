#include "sboltz/specialfn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sboltz/errors.hpp"

namespace sboltz {

namespace {

constexpr double kPi = std::numbers::pi;

double checked_unit(double x, const char* who) {
    if (!(std::abs(x) <= 1.0 + 1e-12))
        throw DomainError(std::string(who) + ": argument " + std::to_string(x) + " outside [-1,1]");
    return std::clamp(x, -1.0, 1.0);
}

void check_lm(int l, int m) {
    if (l < 0 || std::abs(m) > l)
        throw IndexError("spherical harmonic index (l=" + std::to_string(l) + ", m=" +
                         std::to_string(m) + ") requires |m| <= l");
}

// N_{l,mm} * d^mm P_l / dx^mm, i.e. the normalized associated function with the
// (1-x^2)^{mm/2} factor stripped. Forward recurrence in l at fixed mm.
double reduced_normalized_legendre(int l, int mm, double x) {
    double pmm = 1.0 / std::sqrt(4.0 * kPi);
    for (int k = 1; k <= mm; ++k) pmm *= std::sqrt((2.0 * k + 1.0) / (2.0 * k));
    if (l == mm) return pmm;
    double p1 = std::sqrt(2.0 * mm + 3.0) * x * pmm;
    double p0 = pmm;
    for (int k = mm + 2; k <= l; ++k) {
        double kk = k, m2 = double(mm) * mm;
        double a = std::sqrt((4.0 * kk * kk - 1.0) / (kk * kk - m2));
        double b = std::sqrt(((kk - 1) * (kk - 1) - m2) / (4.0 * (kk - 1) * (kk - 1) - 1.0));
        double p2 = a * (x * p1 - b * p0);
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

cplx int_pow(cplx z, int k) {
    cplx r(1.0, 0.0);
    for (int i = 0; i < k; ++i) r *= z;
    return r;
}

}  // namespace

double legendre_p(int l, double x) {
    if (l < 0) throw IndexError("legendre_p: negative degree");
    x = checked_unit(x, "legendre_p");
    if (l == 0) return 1.0;
    double p0 = 1.0, p1 = x;
    for (int k = 1; k < l; ++k) {
        double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

double assoc_legendre(int l, int mm, double x) {
    if (mm < 0 || mm > l) throw IndexError("assoc_legendre: need 0 <= mm <= l");
    x = checked_unit(x, "assoc_legendre");
    double s = std::sqrt((1.0 - x) * (1.0 + x));
    double pmm = 1.0;
    for (int k = 1; k <= mm; ++k) pmm *= (2.0 * k - 1.0) * s;
    if (l == mm) return pmm;
    double p0 = pmm, p1 = x * (2.0 * mm + 1.0) * pmm;
    for (int k = mm + 2; k <= l; ++k) {
        double p2 = (x * (2.0 * k - 1.0) * p1 - (k + mm - 1.0) * p0) / (k - mm);
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

double laguerre(int n, double alpha, double x) {
    if (n < 0) throw IndexError("laguerre: negative degree");
    if (n == 0) return 1.0;
    double l0 = 1.0, l1 = 1.0 + alpha - x;
    for (int k = 1; k < n; ++k) {
        double l2 = ((2.0 * k + 1.0 + alpha - x) * l1 - (k + alpha) * l0) / (k + 1.0);
        l0 = l1;
        l1 = l2;
    }
    return l1;
}

cplx sph_harm(int l, int m, double theta, double phi) {
    check_lm(l, m);
    int am = std::abs(m);
    double x = std::cos(theta);
    double s = std::sin(theta);
    double mag = reduced_normalized_legendre(l, am, x) * std::pow(s, am);
    cplx e(std::cos(am * phi), std::sin(am * phi));
    cplx y = mag * e;
    return m < 0 ? std::conj(y) : y;
}

cplx sph_harm(int l, int m, const Vec3& u) {
    check_lm(l, m);
    int am = std::abs(m);
    cplx y = reduced_normalized_legendre(l, am, u[0]) * int_pow(cplx(u[1], u[2]), am);
    return m < 0 ? std::conj(y) : y;
}

void sph_harm_row(int l, const Vec3& u, cplx* out) {
    cplx z(u[1], u[2]);
    cplx zk(1.0, 0.0);
    for (int am = 0; am <= l; ++am) {
        cplx y = reduced_normalized_legendre(l, am, u[0]) * zk;
        out[l + am] = y;
        out[l - am] = std::conj(y);
        zk *= z;
    }
}

double ln_gamma(double x) {
    if (!(x > 0.0)) throw DomainError("ln_gamma: argument must be positive, got " + std::to_string(x));
#if defined(__GLIBC__)
    int sign = 0;
    return ::lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

double beta_fn(double x, double y) {
    if (!(x > 0.0) || !(y > 0.0)) throw DomainError("beta_fn: arguments must be positive");
    return std::exp(ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y));
}

double phi_radial(int n, int l, double r) {
    double lognorm = 0.5 * (ln_gamma(n + 1.0) - 0.5 * std::log(2.0) - ln_gamma(n + l + 1.5));
    double rho = r / std::sqrt(2.0);
    return std::exp(lognorm) * std::pow(rho, l) * std::exp(-0.25 * r * r) * laguerre(n, l + 0.5, 0.5 * r * r);
}

cplx phi_eigenfunction(const ModeIndex& mode, const Vec3& v) {
    check_lm(mode.l, mode.m);
    double r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (r == 0.0) {
        if (mode.l > 0) return 0.0;
        return phi_radial(mode.n, 0, 0.0) / std::sqrt(4.0 * kPi);
    }
    Vec3 u{v[0] / r, v[1] / r, v[2] / r};
    return phi_radial(mode.n, mode.l, r) * sph_harm(mode.l, mode.m, u);
}

cplx fourier_image(const ModeIndex& mode, const Vec3& xi) {
    check_lm(mode.l, mode.m);
    const int n = mode.n, l = mode.l;
    double r = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
    if (r == 0.0) return (n == 0 && l == 0) ? 1.0 : 0.0;
    double logamp = 0.75 * std::log(2.0 * kPi) -
                    0.5 * (0.5 * std::log(2.0) + ln_gamma(n + 1.0) + ln_gamma(n + l + 1.5));
    static const cplx minus_i_pow[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
    double radial = std::exp(logamp) * std::pow(r / std::sqrt(2.0), 2 * n + l) * std::exp(-0.5 * r * r);
    Vec3 u{xi[0] / r, xi[1] / r, xi[2] / r};
    return minus_i_pow[l % 4] * radial * sph_harm(l, mode.m, u);
}

double sqrt_maxwellian(const Vec3& v) {
    double r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    return std::pow(2.0 * kPi, -0.75) * std::exp(-0.25 * r2);
}

}  // namespace sboltz
