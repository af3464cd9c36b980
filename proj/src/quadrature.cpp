#include "sboltz/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <string>

#include "sboltz/errors.hpp"

namespace sboltz {

namespace {

constexpr double kPi = std::numbers::pi;

// Read-mostly memo table keyed by an integer; entries are never erased, so
// references handed out stay valid.
template <class V>
class RuleCache {
public:
    template <class Make>
    const V& get(int key, Make&& make) {
        {
            std::shared_lock lock(mutex_);
            auto it = table_.find(key);
            if (it != table_.end()) return *it->second;
        }
        auto fresh = std::make_unique<V>(make(key));
        std::unique_lock lock(mutex_);
        auto [it, inserted] = table_.try_emplace(key, std::move(fresh));
        return *it->second;
    }

private:
    std::shared_mutex mutex_;
    std::map<int, std::unique_ptr<V>> table_;
};

GaussRule make_gauss(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        long double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        long double dp = 0;
        for (int it = 0; it < 100; ++it) {
            long double p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k) {
                long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1);
            long double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-19L) break;
        }
        {
            long double p0 = 1, p1 = x;
            for (int k = 2; k <= n; ++k) {
                long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1);
        }
        long double w = 2 / ((1 - x * x) * dp * dp);
        rule.nodes[i] = -double(x);
        rule.nodes[n - 1 - i] = double(x);
        rule.weights[i] = rule.weights[n - 1 - i] = double(w);
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

SphereRule make_sphere(int degree) {
    int nt = (degree + 2) / 2;  // ceil((degree+1)/2)
    int np = degree + 1;
    const GaussRule& g = gauss_legendre(nt);
    SphereRule rule;
    rule.nodes.reserve(std::size_t(nt) * np);
    rule.weights.reserve(std::size_t(nt) * np);
    for (int i = 0; i < nt; ++i) {
        double x = g.nodes[i];
        double sx = std::sqrt((1.0 - x) * (1.0 + x));
        for (int j = 0; j < np; ++j) {
            double ph = 2.0 * kPi * j / np;
            rule.nodes.push_back({x, sx * std::cos(ph), sx * std::sin(ph)});
            rule.weights.push_back(g.weights[i] * 2.0 * kPi / np);
        }
    }
    return rule;
}

double magnitude(double v) { return std::abs(v); }
double magnitude(std::complex<double> v) { return std::abs(v); }

// Projection of c onto the direction of prev, divided by |prev|^2: the observed
// level-to-level ratio, real in both the real and the complex case.
double observed_ratio(double c, double prev) { return c / prev; }
double observed_ratio(std::complex<double> c, std::complex<double> prev) {
    return std::real(c * std::conj(prev)) / std::norm(prev);
}

template <class T, class F>
T graded_integral(const F& f, double p, const KernelParams& params, const QuadratureSpec& spec) {
    params.validate();
    spec.validate();
    if (std::isinf(p) && p > 0) {
        for (double th : {kQuarterPi, 0.5, 0.3, 0.1, 1e-3}) {
            if (magnitude(f(th)) > 1e-13)
                throw PreconditionError("integrand declared identically zero is " +
                                        std::to_string(magnitude(f(th))) + " at theta=" + std::to_string(th));
        }
        return T(0);
    }
    if (!(p > 2.0 * params.s))
        throw PreconditionError("vanish order " + std::to_string(p) + " does not exceed 2s = " +
                                std::to_string(2.0 * params.s) + "; beta-moment not integrable");

    const GaussRule& rule = gauss_legendre(spec.panel_order);
    const double r = spec.grading_ratio;
    T sum(0), prev_c(0), prev_est(0), prev2_est(0);
    double hi = kQuarterPi;
    for (int k = 0; k < spec.max_levels; ++k) {
        double lo = hi * r;
        double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
        T c(0);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            double th = mid + half * rule.nodes[i];
            c += (rule.weights[i] * half * params.beta(th)) * f(th);
        }
        sum += c;
        // Below the finest panel the integrand behaves like theta^q, so the
        // per-level contributions shrink geometrically; close the tail with the
        // observed ratio.
        T est = sum;
        if (k >= 1 && magnitude(prev_c) > 0) {
            double rho = observed_ratio(c, prev_c);
            if (rho > 0.0 && rho < 0.999) est = sum + c * (rho / (1.0 - rho));
        }
        if (k >= 3) {
            double scale = std::max(magnitude(est), 1e-300);
            if (magnitude(est - prev_est) <= spec.rel_tol * scale &&
                magnitude(prev_est - prev2_est) <= spec.rel_tol * scale)
                return est;
            if (magnitude(c) == 0.0 && magnitude(prev_c) == 0.0) return est;
        }
        prev2_est = prev_est;
        prev_est = est;
        prev_c = c;
        hi = lo;
    }
    throw NonConvergenceError("graded beta quadrature did not converge in " + std::to_string(spec.max_levels) +
                              " levels (vanish order " + std::to_string(p) + ")");
}

RuleCache<GaussRule>& gauss_cache() {
    static RuleCache<GaussRule> cache;
    return cache;
}

RuleCache<SphereRule>& sphere_cache() {
    static RuleCache<SphereRule> cache;
    return cache;
}

}  // namespace

double KernelParams::beta(double theta) const {
    double a = std::abs(theta);
    if (a == 0.0 || a > kQuarterPi) return 0.0;
    return kappa_beta * std::pow(a, -1.0 - 2.0 * s);
}

void KernelParams::validate() const {
    if (!(s > 0.0 && s < 1.0)) throw DomainError("kernel exponent s must lie in (0,1), got " + std::to_string(s));
    if (!(kappa_beta > 0.0)) throw DomainError("kernel normalization must be positive");
}

void QuadratureSpec::validate() const {
    if (!(rel_tol > 0.0)) throw DomainError("quadrature rel_tol must be positive");
    if (panel_order < 4) throw DomainError("quadrature panel_order must be >= 4");
    if (!(grading_ratio > 0.0 && grading_ratio < 1.0)) throw DomainError("grading_ratio must lie in (0,1)");
    if (max_levels < 4) throw DomainError("max_levels must be >= 4");
    if (sphere_degree_margin < 0) throw DomainError("sphere_degree_margin must be >= 0");
}

const GaussRule& gauss_legendre(int n) {
    if (n < 1 || n > 4096) throw DomainError("gauss_legendre: order out of range");
    return gauss_cache().get(n, make_gauss);
}

double integrate_beta_moment(const std::function<double(double)>& f, double vanish_order,
                             const KernelParams& params, const QuadratureSpec& spec) {
    return graded_integral<double>(f, vanish_order, params, spec);
}

std::complex<double> integrate_beta_moment_complex(const std::function<std::complex<double>(double)>& f,
                                                   double vanish_order, const KernelParams& params,
                                                   const QuadratureSpec& spec) {
    return graded_integral<std::complex<double>>(f, vanish_order, params, spec);
}

double integrate_beta_symmetric(const std::function<double(double)>& f, double vanish_order,
                                const KernelParams& params, const QuadratureSpec& spec) {
    return 2.0 * integrate_beta_moment(f, vanish_order, params, spec);
}

const SphereRule& sphere_quadrature(int degree) {
    if (degree < 0 || degree > 256) throw DomainError("sphere_quadrature: degree must be in [0,256]");
    return sphere_cache().get(degree, make_sphere);
}

std::complex<double> azimuthal_average(const std::function<std::complex<double>(double)>& g, int d) {
    if (d < 0) throw DomainError("azimuthal_average: negative degree");
    const int np = d + 1;
    std::complex<double> acc(0);
    for (int j = 0; j < np; ++j) acc += g(2.0 * kPi * j / np);
    return acc / double(np);
}

}  // namespace sboltz
