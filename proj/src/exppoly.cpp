#include "sboltz/exppoly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sboltz {

namespace {

bool same_rate(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::max(a, b)); }

}  // namespace

ExpPoly::ExpPoly(std::vector<ExpTerm> terms, double merge_tol) {
    std::sort(terms.begin(), terms.end(), [](const ExpTerm& x, const ExpTerm& y) {
        return x.rate != y.rate ? x.rate < y.rate : x.power < y.power;
    });
    // Snap each rate onto the first rate of its cluster, then combine equal
    // (rate, power) pairs.
    double anchor = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        if (i == 0 || !same_rate(anchor, terms[i].rate, merge_tol)) anchor = terms[i].rate;
        terms[i].rate = anchor;
    }
    std::stable_sort(terms.begin(), terms.end(), [](const ExpTerm& x, const ExpTerm& y) {
        return x.rate != y.rate ? x.rate < y.rate : x.power < y.power;
    });
    for (const ExpTerm& t : terms) {
        if (!terms_.empty() && terms_.back().rate == t.rate && terms_.back().power == t.power)
            terms_.back().coeff += t.coeff;
        else
            terms_.push_back(t);
    }
    std::erase_if(terms_, [](const ExpTerm& t) { return t.coeff == 0.0; });
}

ExpPoly ExpPoly::exponential(std::complex<double> c, double rate, int power) {
    return ExpPoly({ExpTerm{rate, power, c}});
}

std::complex<double> ExpPoly::value(double t) const {
    std::complex<double> acc = 0.0;
    for (const ExpTerm& x : terms_) acc += x.coeff * std::pow(t, x.power) * std::exp(-x.rate * t);
    return acc;
}

int ExpPoly::max_power() const {
    int p = 0;
    for (const ExpTerm& x : terms_) p = std::max(p, x.power);
    return p;
}

ExpPoly ExpPoly::conj() const {
    ExpPoly out = *this;
    for (ExpTerm& x : out.terms_) x.coeff = std::conj(x.coeff);
    return out;
}

ExpPoly exppoly_add(const ExpPoly& f, const ExpPoly& g, double merge_tol) {
    std::vector<ExpTerm> all = f.terms();
    all.insert(all.end(), g.terms().begin(), g.terms().end());
    return ExpPoly(std::move(all), merge_tol);
}

ExpPoly exppoly_scale(const ExpPoly& f, std::complex<double> c) {
    std::vector<ExpTerm> all = f.terms();
    for (ExpTerm& x : all) x.coeff *= c;
    return ExpPoly(std::move(all), 0.0);
}

ExpPoly exppoly_mul(const ExpPoly& f, const ExpPoly& g, double merge_tol) {
    std::vector<ExpTerm> all;
    all.reserve(f.terms().size() * g.terms().size());
    for (const ExpTerm& x : f.terms())
        for (const ExpTerm& y : g.terms()) all.push_back({x.rate + y.rate, x.power + y.power, x.coeff * y.coeff});
    return ExpPoly(std::move(all), merge_tol);
}

double exppoly_distance(const ExpPoly& f, const ExpPoly& g, double rate_tol) {
    const auto& a = f.terms();
    const auto& b = g.terms();
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].power != b[i].power || !same_rate(a[i].rate, b[i].rate, rate_tol))
            return std::numeric_limits<double>::infinity();
        d = std::max(d, std::abs(a[i].coeff - b[i].coeff));
    }
    return d;
}

ExpPoly solve_linear_ode(double lambda, std::complex<double> y0, const ExpPoly& forcing, double resonance_tol) {
    std::vector<ExpTerm> out;
    std::complex<double> hom = y0;
    for (const ExpTerm& f : forcing.terms()) {
        if (same_rate(f.rate, lambda, resonance_tol)) {
            out.push_back({lambda, f.power + 1, f.coeff / double(f.power + 1)});
            continue;
        }
        // e^{-a t} sum_j q_j t^j with (lambda - a) q_p = c, (lambda - a) q_j = -(j+1) q_{j+1}.
        const double d = lambda - f.rate;
        std::complex<double> q = f.coeff / d;
        for (int j = f.power; j >= 0; --j) {
            out.push_back({f.rate, j, q});
            if (j == 0) hom -= q;
            q = -double(j) * q / d;
        }
    }
    out.push_back({lambda, 0, hom});
    return ExpPoly(std::move(out), resonance_tol);
}

}  // namespace sboltz
