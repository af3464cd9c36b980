// Linear and radial coupling coefficients.
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "sboltz/coefficients.hpp"
#include "sboltz/errors.hpp"

namespace sboltz {

namespace {

using i128 = __int128;

i128 checked_mul(i128 a, i128 b) {
    i128 r;
    if (__builtin_mul_overflow(a, b, &r)) throw DomainError("exact Legendre expansion overflow; degree too high");
    return r;
}

i128 checked_add(i128 a, i128 b) {
    i128 r;
    if (__builtin_add_overflow(a, b, &r)) throw DomainError("exact Legendre expansion overflow; degree too high");
    return r;
}

i128 binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    i128 r = 1;
    for (int i = 1; i <= k; ++i) r = checked_mul(r, n - k + i) / i;
    return r;
}

// x^E P_l(x), E = 2n + l, is a polynomial R in w = x^2 of degree (E + l)/2.
// Returns 2^l R exactly (integer coefficients, ascending powers of w).
std::vector<i128> scaled_even_poly(int n, int l) {
    const int E = 2 * n + l;
    const int deg = (E + l) / 2;
    std::vector<i128> r(deg + 1, 0);
    for (int k = 0; 2 * k <= l; ++k) {
        i128 c = checked_mul(binom(l, k), binom(2 * l - 2 * k, l));
        if (k % 2) c = -c;
        r[deg - k] = checked_add(r[deg - k], c);
    }
    return r;
}

// The loss part 1 - R(cos^2) and the gain part delta - R(sin^2), both written as
// polynomials in u = sin^2(theta). Scaled by 2^l, so exact.
struct SplitPolys {
    std::vector<i128> loss;  // 2^l (1 - R(1-u))
    std::vector<i128> gain;  // 2^l (delta - R(u))
    int l = 0;
};

SplitPolys split_polys(int n, int l) {
    std::vector<i128> r = scaled_even_poly(n, l);
    const i128 one = i128(1) << l;
    SplitPolys out;
    out.l = l;
    out.loss.assign(r.size(), 0);
    out.gain.assign(r.size(), 0);
    out.loss[0] = one;
    for (std::size_t j = 0; j < r.size(); ++j)
        for (std::size_t i = 0; i <= j; ++i) {
            i128 c = checked_mul(r[j], binom(int(j), int(i)));
            out.loss[i] = checked_add(out.loss[i], (i % 2) ? c : -c);
        }
    out.gain[0] = (n == 0 && l == 0) ? one : 0;
    for (std::size_t j = 0; j < r.size(); ++j) out.gain[j] = checked_add(out.gain[j], -r[j]);
    return out;
}

std::vector<double> to_double(const std::vector<i128>& c, int l) {
    std::vector<double> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = std::ldexp(double(c[i]), -l);
    return out;
}

// Smallest power of u with a nonzero coefficient; -1 when identically zero.
int lowest_power(const std::vector<i128>& c) {
    for (std::size_t i = 0; i < c.size(); ++i)
        if (c[i] != 0) return int(i);
    return -1;
}

double horner(const std::vector<double>& c, double u) {
    double acc = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) acc = acc * u + c[i];
    return acc;
}

constexpr double kSeriesSwitch = 0.05;  // use the u-polynomial below this sin^2

enum class Part { total, loss, gain };

// int_{|theta|<=pi/4} beta(theta) * integrand, where the integrand is the selected
// combination of loss and gain. Evaluated in cancellation-free form near theta = 0.
double linear_integral(int n, int l, Part part, const KernelParams& params, const QuadratureSpec& spec) {
    if (n < 0 || l < 0) throw IndexError("linear coefficient index must be nonnegative");
    SplitPolys sp = split_polys(n, l);
    std::vector<i128> poly(sp.loss.size());
    for (std::size_t i = 0; i < poly.size(); ++i) {
        switch (part) {
            case Part::total: poly[i] = checked_add(sp.loss[i], sp.gain[i]); break;
            case Part::loss: poly[i] = sp.loss[i]; break;
            case Part::gain: poly[i] = sp.gain[i]; break;
        }
    }
    int low = lowest_power(poly);
    if (low < 0) return 0.0;
    std::vector<double> coeffs = to_double(poly, l);
    const int E = 2 * n + l;
    const double delta = (n == 0 && l == 0) ? 1.0 : 0.0;
    auto f = [&](double th) {
        double sn = std::sin(th), cs = std::cos(th);
        double u = sn * sn;
        if (u < kSeriesSwitch) return horner(coeffs, u);
        double loss = 1.0 - std::pow(cs, E) * legendre_p(l, cs);
        double gain = delta - std::pow(sn, E) * legendre_p(l, sn);
        switch (part) {
            case Part::loss: return loss;
            case Part::gain: return gain;
            default: return loss + gain;
        }
    };
    return integrate_beta_symmetric(f, 2.0 * low, params, spec);
}

void check_prefactor(double logpref, const char* who) {
    if (!(logpref < 700.0)) throw OverflowError(std::string(who) + ": Gamma-ratio prefactor overflows");
}

}  // namespace

double lambda_linear(int n, int l, const KernelParams& params, const QuadratureSpec& spec) {
    return linear_integral(n, l, Part::total, params, spec);
}

// The loss and gain parts enter the eigenvalue with a minus sign.
double lambda1(int n, int l, const KernelParams& params, const QuadratureSpec& spec) {
    double v = linear_integral(n, l, Part::loss, params, spec);
    return v == 0.0 ? 0.0 : -v;
}

double lambda2(int n, int l, const KernelParams& params, const QuadratureSpec& spec) {
    double v = linear_integral(n, l, Part::gain, params, spec);
    return v == 0.0 ? 0.0 : -v;
}

double lambda_rad1(int n, int nt, int lt, const KernelParams& params, const QuadratureSpec& spec) {
    if (n < 1) throw PreconditionError("lambda_rad1 requires n >= 1");
    if (nt < 0 || lt < 0) throw IndexError("lambda_rad1: negative index");
    constexpr double pi = std::numbers::pi;
    double logpref = 0.5 * (std::log(2.0) + 1.5 * std::log(pi) + ln_gamma(n + nt + 1.0) +
                            ln_gamma(n + nt + lt + 1.5) - ln_gamma(nt + 1.0) - ln_gamma(nt + lt + 1.5) -
                            ln_gamma(n + 1.0) - ln_gamma(n + 1.5)) -
                     0.5 * std::log(4.0 * pi);
    check_prefactor(logpref, "lambda_rad1");
    const int b = 2 * nt + lt;
    auto f = [&](double th) {
        double cs = std::cos(th);
        return std::pow(std::sin(th), 2 * n) * std::pow(cs, b) * legendre_p(lt, cs);
    };
    return std::exp(logpref) * integrate_beta_symmetric(f, 2.0 * n, params, spec);
}

double lambda_rad2(int n, int nt, int l, const KernelParams& params, const QuadratureSpec& spec) {
    if (n < 0 || nt < 0 || l < 0) throw IndexError("lambda_rad2: negative index");
    constexpr double pi = std::numbers::pi;
    double logpref = 0.5 * (std::log(2.0) + 1.5 * std::log(pi) + ln_gamma(n + nt + 1.0) +
                            ln_gamma(n + nt + l + 1.5) - ln_gamma(nt + 1.0) - ln_gamma(nt + 1.5) -
                            ln_gamma(n + 1.0) - ln_gamma(n + l + 1.5)) -
                     0.5 * std::log(4.0 * pi);
    check_prefactor(logpref, "lambda_rad2");
    const int a = 2 * n + l;
    // P_l has the parity of l, so odd l contributes one extra power of sin.
    const double order = a + (l % 2);
    auto f = [&](double th) {
        double sn = std::sin(th);
        return std::pow(sn, a) * legendre_p(l, sn) * std::pow(std::cos(th), 2 * nt);
    };
    return std::exp(logpref) * integrate_beta_symmetric(f, order, params, spec);
}

}  // namespace sboltz
