#pragma once

#include <complex>
#include <vector>

namespace sboltz {

// One term c * t^p * exp(-a t).
struct ExpTerm {
    double rate = 0.0;
    int power = 0;
    std::complex<double> coeff;
};

inline constexpr double kDefaultResonanceTol = 1e-12;

// Finite sum of ExpTerms in canonical form: sorted by (rate, power), no repeated
// (rate, power), no zero coefficient. Rates closer than merge_tol * max(1, rate)
// are treated as equal and merged onto the smaller one.
class ExpPoly {
public:
    ExpPoly() = default;
    explicit ExpPoly(std::vector<ExpTerm> terms, double merge_tol = kDefaultResonanceTol);

    static ExpPoly exponential(std::complex<double> c, double rate, int power = 0);

    const std::vector<ExpTerm>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }
    std::complex<double> value(double t) const;
    int max_power() const;

    ExpPoly conj() const;

    friend bool operator==(const ExpPoly&, const ExpPoly&) = default;

private:
    std::vector<ExpTerm> terms_;
};

ExpPoly exppoly_add(const ExpPoly& f, const ExpPoly& g, double merge_tol = kDefaultResonanceTol);
ExpPoly exppoly_scale(const ExpPoly& f, std::complex<double> c);
ExpPoly exppoly_mul(const ExpPoly& f, const ExpPoly& g, double merge_tol = kDefaultResonanceTol);

// Largest coefficient gap between two canonical forms with matching structure,
// or infinity when rates/powers differ.
double exppoly_distance(const ExpPoly& f, const ExpPoly& g, double rate_tol = 1e-12);

// Unique solution of y' + lambda y = forcing, y(0) = y0.
ExpPoly solve_linear_ode(double lambda, std::complex<double> y0, const ExpPoly& forcing,
                         double resonance_tol = kDefaultResonanceTol);

}  // namespace sboltz
