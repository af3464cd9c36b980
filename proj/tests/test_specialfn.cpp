#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sboltz/errors.hpp"
#include "sboltz/quadrature.hpp"
#include "sboltz/specialfn.hpp"

using namespace sboltz;
using std::numbers::pi;

namespace {

// Explicit finite series in long double.
long double laguerre_series(int n, long double alpha, long double x) {
    long double acc = 0.0L;
    for (int k = 0; k <= n; ++k) {
        long double binom = std::tgamma(n + alpha + 1.0L) / (std::tgamma(n - k + 1.0L) * std::tgamma(alpha + k + 1.0L));
        acc += ((k % 2) ? -1.0L : 1.0L) * binom * std::pow(x, k) / std::tgamma(k + 1.0L);
    }
    return acc;
}

// Radial Gauss-Legendre rule on [0, rmax].
struct RadialRule {
    std::vector<double> r, w;
};
RadialRule radial_rule(int n, double rmax) {
    const GaussRule& g = gauss_legendre(n);
    RadialRule rr;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        rr.r.push_back(0.5 * rmax * (g.nodes[i] + 1.0));
        rr.w.push_back(0.5 * rmax * g.weights[i]);
    }
    return rr;
}

}  // namespace

TEST_SUITE("specialfn") {
    TEST_CASE("laguerre matches the explicit series") {
        for (int n = 0; n <= 10; ++n)
            for (double alpha : {0.5, 1.5, 4.5, 8.5})
                for (double x : {0.0, 0.1, 1.0, 5.0, 12.0}) {
                    long double ref = laguerre_series(n, alpha, x);
                    long double scale = 0.0L;
                    for (int k = 0; k <= n; ++k) scale += std::abs(laguerre_series(k, alpha, x));
                    CHECK(std::abs(laguerre(n, alpha, x) - double(ref)) <= 1e-13 * double(scale) + 1e-300);
                }
    }

    TEST_CASE("associated Legendre closed forms, no Condon-Shortley sign") {
        for (double x : {-0.9, -0.3, 0.0, 0.4, 0.95}) {
            double s = std::sqrt(1 - x * x);
            CHECK(assoc_legendre(1, 1, x) == doctest::Approx(s).epsilon(1e-14));
            CHECK(assoc_legendre(2, 1, x) == doctest::Approx(3 * x * s).epsilon(1e-14));
            CHECK(assoc_legendre(2, 2, x) == doctest::Approx(3 * (1 - x * x)).epsilon(1e-14));
            CHECK(assoc_legendre(3, 3, x) == doctest::Approx(15 * s * s * s).epsilon(1e-13));
            CHECK(assoc_legendre(4, 2, x) == doctest::Approx(7.5 * (7 * x * x - 1) * (1 - x * x)).epsilon(1e-13).scale(1));
            CHECK(legendre_p(3, x) == doctest::Approx(0.5 * (5 * x * x * x - 3 * x)).epsilon(1e-14).scale(1));
        }
        CHECK_THROWS_AS(assoc_legendre(2, 3, 0.1), IndexError);
        CHECK_THROWS_AS(legendre_p(2, 1.5), DomainError);
    }

    TEST_CASE("spherical harmonics: explicit values, polar axis e1") {
        const double th = 0.7, ph = -1.1;
        CHECK(std::abs(sph_harm(0, 0, th, ph) - cplx(1 / std::sqrt(4 * pi))) < 1e-15);
        cplx y11 = std::sqrt(3 / (8 * pi)) * std::sin(th) * std::polar(1.0, ph);
        CHECK(std::abs(sph_harm(1, 1, th, ph) - y11) < 1e-15);
        CHECK(std::abs(sph_harm(2, 0, th, ph) - cplx(std::sqrt(5 / (16 * pi)) * (3 * std::cos(th) * std::cos(th) - 1))) <
              1e-15);
        Vec3 u{std::cos(th), std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph)};
        for (int l = 0; l <= 6; ++l)
            for (int m = -l; m <= l; ++m) {
                CHECK(std::abs(sph_harm(l, m, u) - sph_harm(l, m, th, ph)) < 1e-14);
                CHECK(std::abs(sph_harm(l, -m, u) - std::conj(sph_harm(l, m, u))) < 1e-15);
            }
    }

    TEST_CASE("spherical harmonics are orthonormal under the sphere rule") {
        const int lmax = 8;
        const SphereRule& rule = sphere_quadrature(2 * lmax);
        double worst = 0.0;
        for (int l1 = 0; l1 <= lmax; ++l1)
            for (int m1 = -l1; m1 <= l1; ++m1)
                for (int l2 = 0; l2 <= lmax; ++l2)
                    for (int m2 = -l2; m2 <= l2; ++m2) {
                        cplx acc = 0.0;
                        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
                            acc += rule.weights[i] * sph_harm(l1, m1, rule.nodes[i]) * std::conj(sph_harm(l2, m2, rule.nodes[i]));
                        double expect = (l1 == l2 && m1 == m2) ? 1.0 : 0.0;
                        worst = std::max(worst, std::abs(acc - expect));
                    }
        CHECK(worst < 1e-13);
    }

    TEST_CASE("addition theorem") {
        Vec3 u{0.6, 0.0, 0.8}, w{-0.36, 0.48, 0.8};
        double cosg = u[0] * w[0] + u[1] * w[1] + u[2] * w[2];
        for (int l = 0; l <= 10; ++l) {
            cplx acc = 0.0;
            for (int m = -l; m <= l; ++m) acc += sph_harm(l, m, u) * std::conj(sph_harm(l, m, w));
            CHECK(std::abs(acc - (2 * l + 1) / (4 * pi) * legendre_p(l, cosg)) < 1e-13);
        }
    }

    TEST_CASE("eigenfunctions are orthonormal in L2(R^3)") {
        RadialRule rr = radial_rule(160, 16.0);
        const SphereRule& sph = sphere_quadrature(14);
        std::vector<ModeIndex> modes;
        for (const ModeIndex& m : modes_up_to(6))
            if (m.m >= -1 && m.m <= 2) modes.push_back(m);
        const std::size_t nm = modes.size();
        std::vector<cplx> gram(nm * nm, 0.0), vals(nm);
        for (std::size_t i = 0; i < rr.r.size(); ++i)
            for (std::size_t j = 0; j < sph.nodes.size(); ++j) {
                const Vec3& u = sph.nodes[j];
                Vec3 v{rr.r[i] * u[0], rr.r[i] * u[1], rr.r[i] * u[2]};
                double w = rr.w[i] * rr.r[i] * rr.r[i] * sph.weights[j];
                for (std::size_t a = 0; a < nm; ++a) vals[a] = phi_eigenfunction(modes[a], v);
                for (std::size_t a = 0; a < nm; ++a)
                    for (std::size_t b = 0; b < nm; ++b) gram[a * nm + b] += w * vals[a] * std::conj(vals[b]);
            }
        double worst = 0.0;
        for (std::size_t a = 0; a < nm; ++a)
            for (std::size_t b = 0; b < nm; ++b) worst = std::max(worst, std::abs(gram[a * nm + b] - (a == b ? 1.0 : 0.0)));
        CHECK(worst < 1e-12);
    }

    TEST_CASE("eigenfunctions solve the harmonic oscillator equation (finite differences)") {
        const double h = 2e-3;
        const Vec3 points[] = {{0.3, -0.8, 0.5}, {1.2, 0.4, -0.9}, {-0.7, 1.5, 0.2}};
        for (const ModeIndex& mode : modes_up_to(5))
            for (const Vec3& v : points) {
                cplx lap = 0.0;
                for (int c = 0; c < 3; ++c) {
                    auto at = [&](double d) {
                        Vec3 w = v;
                        w[c] += d;
                        return phi_eigenfunction(mode, w);
                    };
                    lap += (-at(2 * h) + 16.0 * at(h) - 30.0 * at(0) + 16.0 * at(-h) - at(-2 * h)) / (12 * h * h);
                }
                double r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                cplx phi = phi_eigenfunction(mode, v);
                cplx H = -lap + 0.25 * r2 * phi;
                CHECK(std::abs(H - (mode.energy() + 1.5) * phi) < 2e-7);
            }
    }

    TEST_CASE("Fourier image matches direct quadrature of exp(-i v.xi) sqrt(mu) phi") {
        RadialRule rr = radial_rule(140, 13.0);
        const SphereRule& sph = sphere_quadrature(56);
        const ModeIndex modes[] = {{1, 0, 0}, {0, 1, 1}, {0, 2, 0}, {1, 2, -1}, {0, 3, 2}};
        const Vec3 xis[] = {{0.3, 0.7, -0.4}, {-1.1, 0.2, 0.5}};
        for (const Vec3& xi : xis) {
            std::vector<cplx> direct(std::size(modes), 0.0);
            for (std::size_t i = 0; i < rr.r.size(); ++i)
                for (std::size_t j = 0; j < sph.nodes.size(); ++j) {
                    const Vec3& u = sph.nodes[j];
                    Vec3 v{rr.r[i] * u[0], rr.r[i] * u[1], rr.r[i] * u[2]};
                    double w = rr.w[i] * rr.r[i] * rr.r[i] * sph.weights[j];
                    cplx phase = std::polar(1.0, -(v[0] * xi[0] + v[1] * xi[1] + v[2] * xi[2]));
                    for (std::size_t a = 0; a < std::size(modes); ++a)
                        direct[a] += w * phase * sqrt_maxwellian(v) * phi_eigenfunction(modes[a], v);
                }
            for (std::size_t a = 0; a < std::size(modes); ++a) {
                INFO("mode " << modes[a]);
                CHECK(std::abs(direct[a] - fourier_image(modes[a], xi)) < 1e-11);
            }
        }
        CHECK(fourier_image({0, 0, 0}, Vec3{0, 0, 0}) == cplx(1.0));
        CHECK(fourier_image({0, 2, 1}, Vec3{0, 0, 0}) == cplx(0.0));
    }

    TEST_CASE("Maxwellian normalization and the lowest eigenfunction") {
        Vec3 zero{0, 0, 0}, v{0.4, -1.0, 0.3};
        CHECK(sqrt_maxwellian(zero) * sqrt_maxwellian(zero) == doctest::Approx(std::pow(2 * pi, -1.5)).epsilon(1e-15));
        // phi_{0,0,0} is sqrt(mu) itself.
        CHECK(std::abs(phi_eigenfunction({0, 0, 0}, v) - sqrt_maxwellian(v)) < 1e-15);
        CHECK(phi_eigenfunction({0, 2, 1}, zero) == cplx(0.0));
    }

    TEST_CASE("gamma helpers") {
        CHECK(ln_gamma(5.0) == doctest::Approx(std::log(24.0)).epsilon(1e-15));
        CHECK(beta_fn(2.5, 1.5) == doctest::Approx(std::tgamma(2.5) * std::tgamma(1.5) / std::tgamma(4.0)).epsilon(1e-14));
    }
}
