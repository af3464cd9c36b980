#include "sboltz/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "sboltz/errors.hpp"
#include "sboltz/galerkin.hpp"

namespace sboltz {

namespace {

bool outside(int n, int l) { return !ModeIndex{n, l, 0}.collision_invariant(); }

struct SourceGroup {
    int n, nt, l, lt;
};

// Groups (n, nt, l, lt) of mu with both sources outside the invariants, l, lt >= 1
// and combined energy <= cap.
std::vector<SourceGroup> mu_groups(int cap) {
    std::vector<SourceGroup> out;
    for (int n = 0; 2 * n + 1 <= cap; ++n)
        for (int l = 1; 2 * n + l <= cap; ++l) {
            if (!outside(n, l)) continue;
            for (int nt = 0; 2 * (n + nt) + l + 1 <= cap; ++nt)
                for (int lt = 1; 2 * (n + nt) + l + lt <= cap; ++lt)
                    if (outside(nt, lt)) out.push_back({n, nt, l, lt});
        }
    return out;
}

SuiteResult eigen_identity(const CoeffTable& t) {
    SuiteResult r{"eigen-identity", false, 0.0, 1e-9, "", 0.0};
    std::string worst;
    for (const auto& [key, lam] : t.linear) {
        double resid = std::abs(lam + t.lambda1(key[0], key[1]) + t.lambda2(key[0], key[1]));
        double rel = resid / std::max(std::abs(lam), 1e-300);
        if (lam == 0.0) rel = resid;
        if (rel > r.metric || worst.empty()) {
            r.metric = std::max(r.metric, rel);
            worst = "(" + std::to_string(key[0]) + "," + std::to_string(key[1]) + ")";
        }
    }
    r.passed = r.metric <= r.threshold;
    r.detail = "max relative residual of lambda + lambda1 + lambda2, worst at " + worst;
    return r;
}

SuiteResult orthogonality(const CoeffTable& t) {
    SuiteResult r{"orthogonality", false, 0.0, 1e-8, "", 0.0};
    int pairs = 0;
    std::string worst;
    for (const SourceGroup& g : mu_groups(t.n_max_energy)) {
        OrthogonalityReport rep = verify_orthogonality(g.n, g.nt, g.l, g.lt, t);
        pairs += rep.pairs_checked;
        if (rep.max_violation > r.metric) {
            r.metric = rep.max_violation;
            std::ostringstream os;
            os << "(" << g.n << "," << g.nt << "," << g.l << "," << g.lt << ") " << rep.worst;
            worst = os.str();
        }
    }
    r.passed = r.metric <= r.threshold;
    r.detail = std::to_string(pairs) + " row pairs" + (worst.empty() ? "" : ", worst " + worst);
    return r;
}

SuiteResult selection_rules(const CoeffTable& t) {
    SuiteResult r{"selection-rules", false, 0.0, 1e-12, "", 0.0};
    int bad_keys = 0, forbidden = 0, expansions = 0;
    for (const auto& [k, v] : t.mu) {
        if (std::abs(k.m) > k.l || std::abs(k.mt) > k.lt || k.k < 0 || k.k > k_max(k.l, k.lt, k.m + k.mt)) ++bad_keys;
    }
    // Forbidden target orders, evaluated numerically on the low groups.
    const int cap = std::min(t.n_max_energy, 6);
    for (const SourceGroup& g : mu_groups(cap)) {
        double scale = 0.0;
        for (const auto& [k, v] : t.mu)
            if (k.n == g.n && k.nt == g.nt && k.l == g.l && k.lt == g.lt) scale = std::max(scale, std::abs(v));
        if (scale == 0.0) continue;
        for (int k = 0; k <= std::min(g.l, g.lt); ++k) {
            const int L = g.l + g.lt - 2 * k;
            for (int m = -g.l; m <= g.l; ++m)
                for (int mt = -g.lt; mt <= g.lt; ++mt)
                    for (int ms : {m + mt - 1, m + mt + 1}) {
                        if (std::abs(ms) > L) continue;
                        cplx v = mu_coefficient(g.n, g.nt, g.l, g.lt, k, m, mt, ms, t.params, t.spec);
                        r.metric = std::max(r.metric, std::abs(v) / scale);
                        ++forbidden;
                    }
        }
    }
    // Energy additivity of every stored expansion (gamma_pair_expansion enforces it).
    std::vector<ModeIndex> sources;
    for (const ModeIndex& m : modes_up_to(t.n_max_energy - 2))
        if (!m.collision_invariant()) sources.push_back(m);
    for (const ModeIndex& a : sources)
        for (const ModeIndex& b : sources) {
            if (a.energy() + b.energy() > t.n_max_energy) continue;
            for (const auto& [target, w] : gamma_pair_expansion(a, b, t)) {
                if (target.energy() != a.energy() + b.energy()) ++bad_keys;
                ++expansions;
            }
        }
    r.passed = bad_keys == 0 && r.metric <= r.threshold;
    r.detail = std::to_string(forbidden) + " forbidden coefficients relative to group scale, " +
               std::to_string(expansions) + " expansion terms, " + std::to_string(bad_keys) + " index violations";
    return r;
}

SuiteResult spectral_bound(const CoeffTable& t) {
    SuiteResult r{"spectral-bound", false, 0.0, 50.0, "", 0.0};
    SpectralBand band = spectral_bound_audit(t.n_max_energy, t);
    r.metric = band.c_high / band.c_low;
    r.passed = band.c_low > 0.05 && r.metric < r.threshold;
    std::ostringstream os;
    os << "c_low=" << band.c_low << " c_high=" << band.c_high << " (need c_low > 0.05, ratio < 50)";
    r.detail = os.str();
    return r;
}

constexpr int kMusqSourceEnergy = 6;

SuiteResult musq_crosscheck(const CoeffTable& t) {
    SuiteResult r{"musq-crosscheck", false, 0.0, 1e-8, "", 0.0};
    int tuples = 0, vanishing = 0;
    for (const SourceGroup& g : mu_groups(t.n_max_energy)) {
        // The axis reduction cancels across q; beyond source energy 6 that
        // cancellation eats into the 1e-8 budget, so the check stops there.
        if (2 * g.n + g.l > kMusqSourceEnergy || 2 * g.nt + g.lt > kMusqSourceEnergy) continue;
        struct Row {
            int k, ms;
            double brute, reduced;
        };
        std::vector<Row> rows;
        double gmax = 0.0;
        for (int k = 0; k <= std::min(g.l, g.lt); ++k) {
            const int L = g.l + g.lt - 2 * k;
            for (int ms = 0; ms <= L; ++ms) {
                double brute = 0.0;
                for (int m = -g.l; m <= g.l; ++m) {
                    int mt = ms - m;
                    if (std::abs(mt) > g.lt) continue;
                    brute += std::norm(t.mu_value({g.n, g.nt, g.l, g.lt, k, m, mt}));
                }
                rows.push_back({k, ms, brute, musq_sum(g.n, g.nt, g.l, g.lt, k, ms, t.params, t.spec)});
                gmax = std::max(gmax, std::abs(rows.back().reduced));
            }
        }
        // Rows that vanish identically come back from the reduction as rounding
        // noise; there both sides only need to be negligible on the group scale.
        const double floor = 1e-12 * gmax;
        for (const Row& row : rows) {
            double rel = std::abs(row.reduced) <= floor
                             ? (row.brute <= floor ? 0.0 : std::numeric_limits<double>::infinity())
                             : std::abs(row.brute - row.reduced) / std::abs(row.reduced);
            if (std::abs(row.reduced) <= floor) ++vanishing;
            r.metric = std::max(r.metric, rel);
            ++tuples;
        }
    }
    r.passed = r.metric <= r.threshold;
    r.detail = std::to_string(tuples) + " tuples (" + std::to_string(vanishing) +
               " vanishing): stored |mu|^2 sums against the axis reduction";
    return r;
}

SuiteResult trilinear(const CoeffTable& t) {
    SuiteResult r{"trilinear", false, 0.0, 2.0, "", 0.0};
    std::vector<TrilinearFit> fits;
    std::ostringstream os;
    for (int N : {4, 6, 8}) {
        if (N > t.n_max_energy) continue;
        fits.push_back(trilinear_audit(t, N, 200, 20240601, 1.0));
        os << "N=" << N << ": plain " << fits.back().plain << ", weighted " << fits.back().weighted << "; ";
    }
    if (fits.empty()) {
        r.detail = "table too small (needs energy >= 4)";
        return r;
    }
    auto spread = [&](double TrilinearFit::*f) {
        double lo = fits[0].*f, hi = lo;
        for (const TrilinearFit& x : fits) lo = std::min(lo, x.*f), hi = std::max(hi, x.*f);
        return hi / lo;
    };
    r.metric = std::max(spread(&TrilinearFit::plain), spread(&TrilinearFit::weighted));
    r.passed = r.metric < r.threshold;
    r.detail = os.str() + "max/min across N";
    return r;
}

SuiteResult cr_bound(const CoeffTable& t) {
    SuiteResult r{"cr-bound", false, 0.0, 0.0, "", 0.0};
    BoundFit fits[4] = {audit_rad1_bound(t), audit_rad2_bound(t), audit_mu_sum_bound(t), audit_cr_bound(t)};
    const char* names[4] = {"rad1", "rad2", "mu-sum", "cr"};
    bool all_finite = true;
    std::ostringstream os;
    for (int i = 0; i < 4; ++i) {
        os << names[i] << " C=" << fits[i].constant << " (" << fits[i].samples << "); ";
        all_finite = all_finite && fits[i].finite();
    }
    // Uniform boundedness of the normalized mu sum: the top shell may not exceed
    // twice the largest value seen on the lower shells.
    const std::vector<double>& sh = fits[2].shell_max;
    double lower = 0.0;
    for (std::size_t e = 0; e + 1 < sh.size(); ++e) lower = std::max(lower, sh[e]);
    r.metric = sh.empty() || lower == 0.0 ? 0.0 : sh.back() / lower;
    r.threshold = 2.0;
    r.passed = all_finite && r.metric <= r.threshold;
    os << "top-shell growth " << r.metric;
    r.detail = os.str();
    return r;
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {"eigen-identity", "orthogonality", "selection-rules", "spectral-bound",
                                                   "musq-crosscheck", "trilinear", "cr-bound"};
    return names;
}

SuiteResult run_suite(const std::string& name, const CoeffTable& table) {
    auto t0 = std::chrono::steady_clock::now();
    SuiteResult r;
    if (name == "eigen-identity") r = eigen_identity(table);
    else if (name == "orthogonality") r = orthogonality(table);
    else if (name == "selection-rules") r = selection_rules(table);
    else if (name == "spectral-bound") r = spectral_bound(table);
    else if (name == "musq-crosscheck") r = musq_crosscheck(table);
    else if (name == "trilinear") r = trilinear(table);
    else if (name == "cr-bound") r = cr_bound(table);
    else throw DomainError("unknown verification suite '" + name + "'");
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

nlohmann::json suite_json(const SuiteResult& r) {
    return {{"name", r.name},       {"passed", r.passed}, {"metric", r.metric},
            {"threshold", r.threshold}, {"detail", r.detail}, {"seconds", r.seconds}};
}

}  // namespace sboltz
