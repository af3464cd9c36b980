#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <vector>

#include "sboltz/specialfn.hpp"

namespace sboltz {

enum class KernelModel { power_law };

// beta(theta) = kappa_beta * |theta|^{-1-2s} on 0 < |theta| <= pi/4, zero beyond.
struct KernelParams {
    double s = 0.5;
    double kappa_beta = 1.0;
    KernelModel model = KernelModel::power_law;

    double beta(double theta) const;
    void validate() const;
};

struct QuadratureSpec {
    double rel_tol = 1e-10;
    int max_levels = 40;
    double grading_ratio = 0.5;
    int panel_order = 16;
    int sphere_degree_margin = 2;

    void validate() const;
};

inline constexpr double kQuarterPi = 0.78539816339744830962;
inline constexpr double kVanishesIdentically = std::numeric_limits<double>::infinity();

struct GaussRule {
    std::vector<double> nodes;  // on [-1, 1], ascending
    std::vector<double> weights;
};

// Cached; the returned reference stays valid for the process lifetime.
const GaussRule& gauss_legendre(int n);

// int_0^{pi/4} beta(theta) f(theta) dtheta. The caller certifies f = O(theta^p) at 0
// with p > 2s. p == kVanishesIdentically means f is identically zero (checked on a
// few samples); the result is then exactly 0.
double integrate_beta_moment(const std::function<double(double)>& f, double vanish_order,
                             const KernelParams& params, const QuadratureSpec& spec = {});

std::complex<double> integrate_beta_moment_complex(const std::function<std::complex<double>(double)>& f,
                                                   double vanish_order, const KernelParams& params,
                                                   const QuadratureSpec& spec = {});

// Same integrand over |theta| <= pi/4 for an even f: exactly twice the half-range value.
double integrate_beta_symmetric(const std::function<double(double)>& f, double vanish_order,
                                const KernelParams& params, const QuadratureSpec& spec = {});

struct SphereRule {
    std::vector<Vec3> nodes;
    std::vector<double> weights;
};

// Gauss in the e1 component times a uniform azimuthal rule; exact for spherical
// polynomials of total degree <= degree.
const SphereRule& sphere_quadrature(int degree);

// (1/2pi) int_0^{2pi} g, exact for trigonometric polynomials of degree <= d.
std::complex<double> azimuthal_average(const std::function<std::complex<double>(double)>& g, int d);

}  // namespace sboltz
