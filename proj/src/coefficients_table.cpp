// Coefficient table construction, Gamma expansion and the bound audits.
#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sboltz/coefficients.hpp"
#include "sboltz/errors.hpp"

namespace sboltz {

namespace {

bool outside_invariants(int n, int l) { return n + l >= 2; }

[[noreturn]] void coverage_fail(const std::string& what, int energy, int cap) {
    throw CoverageError(what + " needs energy " + std::to_string(energy) + " but the table covers " +
                        std::to_string(cap));
}

std::string key_string(const MuKey& k) {
    std::ostringstream os;
    os << "(n=" << k.n << ",nt=" << k.nt << ",l=" << k.l << ",lt=" << k.lt << ",k=" << k.k << ",m=" << k.m
       << ",mt=" << k.mt << ")";
    return os.str();
}

// Runs tasks on a small pool. Each task writes only its own output slot, so the
// result never depends on scheduling.
void run_tasks(std::vector<std::function<void()>>& tasks, int threads) {
    if (threads <= 0) threads = int(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min<int>(threads, int(tasks.size()));
    std::vector<std::exception_ptr> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
            try {
                tasks[i]();
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace

double CoeffTable::lambda(int n, int l) const {
    auto it = linear.find({n, l});
    if (it == linear.end()) coverage_fail("lambda", 2 * n + l, n_max_energy);
    return it->second;
}

double CoeffTable::lambda1(int n, int l) const {
    auto it = lin1.find({n, l});
    if (it == lin1.end()) coverage_fail("lambda1", 2 * n + l, n_max_energy);
    return it->second;
}

double CoeffTable::lambda2(int n, int l) const {
    auto it = lin2.find({n, l});
    if (it == lin2.end()) coverage_fail("lambda2", 2 * n + l, n_max_energy);
    return it->second;
}

double CoeffTable::radial1(int n, int nt, int lt) const {
    auto it = rad1.find({n, nt, lt});
    if (it == rad1.end()) coverage_fail("rad1", 2 * (n + nt) + lt, n_max_energy);
    return it->second;
}

double CoeffTable::radial2(int n, int nt, int l) const {
    auto it = rad2.find({n, nt, l});
    if (it == rad2.end()) coverage_fail("rad2", 2 * (n + nt) + l, n_max_energy);
    return it->second;
}

cplx CoeffTable::mu_value(const MuKey& key) const {
    int e = 2 * key.n + key.l + 2 * key.nt + key.lt;
    if (e > n_max_energy) coverage_fail("mu" + key_string(key), e, n_max_energy);
    if (!outside_invariants(key.n, key.l) || !outside_invariants(key.nt, key.lt))
        throw CoverageError("mu" + key_string(key) + " has a collision-invariant source; not tabulated");
    auto it = mu.find(key);
    return it == mu.end() ? cplx(0.0) : it->second;
}

bool operator==(const CoeffTable& a, const CoeffTable& b) {
    return a.params.s == b.params.s && a.params.kappa_beta == b.params.kappa_beta &&
           a.params.model == b.params.model && a.spec.rel_tol == b.spec.rel_tol &&
           a.spec.max_levels == b.spec.max_levels && a.spec.grading_ratio == b.spec.grading_ratio &&
           a.spec.panel_order == b.spec.panel_order && a.spec.sphere_degree_margin == b.spec.sphere_degree_margin &&
           a.n_max_energy == b.n_max_energy && a.version == b.version && a.linear == b.linear &&
           a.lin1 == b.lin1 && a.lin2 == b.lin2 && a.rad1 == b.rad1 && a.rad2 == b.rad2 && a.mu == b.mu;
}

Expansion gamma_pair_expansion(const ModeIndex& a, const ModeIndex& b, const CoeffTable& table) {
    if (!a.valid() || !b.valid()) throw IndexError("gamma_pair_expansion: invalid mode");
    const int e = a.energy() + b.energy();
    if (e > table.n_max_energy) coverage_fail("gamma_pair_expansion", e, table.n_max_energy);
    Expansion out;
    auto push = [&](ModeIndex t, cplx w) {
        if (t.energy() != e) throw std::logic_error("energy additivity violated");
        if (w != 0.0) out.emplace_back(t, w);
    };
    const bool a_zero = a.n == 0 && a.l == 0, b_zero = b.n == 0 && b.l == 0;
    if (a_zero) {
        push(b, table.lambda1(b.n, b.l));
    } else if (b_zero) {
        push(a, table.lambda2(a.n, a.l));
    } else if (a.l == 0) {
        push({a.n + b.n, b.l, b.m}, table.radial1(a.n, b.n, b.l));
    } else if (b.l == 0) {
        push({a.n + b.n, a.l, a.m}, table.radial2(a.n, b.n, a.l));
    } else {
        const bool tabulated = outside_invariants(a.n, a.l) && outside_invariants(b.n, b.l);
        const int msum = a.m + b.m;
        for (int k = 0; k <= k_max(a.l, b.l, msum); ++k) {
            MuKey key{a.n, b.n, a.l, b.l, k, a.m, b.m};
            cplx w = tabulated ? table.mu_value(key)
                               : mu_coefficient(a.n, b.n, a.l, b.l, k, a.m, b.m, table.params, table.spec);
            push({a.n + b.n + k, a.l + b.l - 2 * k, msum}, w);
        }
    }
    return out;
}

OrthogonalityReport verify_orthogonality(int n, int nt, int l, int lt, const CoeffTable& table) {
    OrthogonalityReport rep;
    const int kmax = std::min(l, lt);
    struct Row {
        int k, ms;
        std::vector<cplx> v;  // over (m, mt)
        double diag;
    };
    std::vector<Row> rows;
    for (int k = 0; k <= kmax; ++k) {
        const int L = l + lt - 2 * k;
        for (int ms = -L; ms <= L; ++ms) {
            Row r{k, ms, std::vector<cplx>(std::size_t(2 * l + 1) * (2 * lt + 1), 0.0), 0.0};
            for (int m = -l; m <= l; ++m)
                for (int mt = -lt; mt <= lt; ++mt) {
                    if (m + mt != ms) continue;
                    cplx v = table.mu_value({n, nt, l, lt, k, m, mt});
                    r.v[std::size_t(m + l) * (2 * lt + 1) + (mt + lt)] = v;
                    r.diag += std::norm(v);
                }
            rows.push_back(std::move(r));
        }
    }
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = i + 1; j < rows.size(); ++j) {
            if (rows[i].diag == 0.0 || rows[j].diag == 0.0) continue;
            cplx cross = 0.0;
            for (std::size_t t = 0; t < rows[i].v.size(); ++t) cross += rows[i].v[t] * std::conj(rows[j].v[t]);
            double viol = std::abs(cross) / std::sqrt(rows[i].diag * rows[j].diag);
            ++rep.pairs_checked;
            if (viol > rep.max_violation) {
                rep.max_violation = viol;
                std::ostringstream os;
                os << "(k=" << rows[i].k << ",m*=" << rows[i].ms << ") vs (k=" << rows[j].k << ",m*=" << rows[j].ms
                   << ")";
                rep.worst = os.str();
            }
        }
    return rep;
}

SpectralBand spectral_bound_audit(int n_max_energy, const CoeffTable& table) {
    if (n_max_energy > table.n_max_energy) coverage_fail("spectral_bound_audit", n_max_energy, table.n_max_energy);
    const double s = table.params.s;
    SpectralBand band{std::numeric_limits<double>::infinity(), 0.0};
    for (int e = 2; e <= n_max_energy; ++e)
        for (int n = 0; 2 * n <= e; ++n) {
            int l = e - 2 * n;
            if (!outside_invariants(n, l)) continue;
            double ratio = table.lambda(n, l) / (std::pow(e + 1.5, s) + std::pow(double(l), 2.0 * s));
            band.c_low = std::min(band.c_low, ratio);
            band.c_high = std::max(band.c_high, ratio);
        }
    return band;
}

bool BoundFit::finite() const { return samples > 0 && std::isfinite(constant) && constant > 0.0; }

namespace {

void record(BoundFit& fit, double lhs, double rhs, const std::string& tag, int shell) {
    double r = lhs / rhs;
    if (fit.samples == 0 || r > fit.constant) {
        fit.constant = r;
        fit.worst = tag;
    }
    fit.min_ratio = fit.samples == 0 ? r : std::min(fit.min_ratio, r);
    ++fit.samples;
    if (shell >= 0) {
        if (int(fit.shell_max.size()) <= shell) fit.shell_max.resize(shell + 1, 0.0);
        fit.shell_max[shell] = std::max(fit.shell_max[shell], r);
    }
}

}  // namespace

BoundFit audit_rad1_bound(const CoeffTable& table) {
    const double s = table.params.s;
    BoundFit fit;
    for (const auto& [key, v] : table.rad1) {
        auto [n, nt, lt] = key;
        if (nt < 1) continue;  // the bound degenerates to 0 at nt = 0
        double rhs = std::pow(nt, s) * std::pow(nt + lt, s) * std::pow(n, -2.5 - 2.0 * s);
        record(fit, v * v, rhs, "rad1(" + std::to_string(n) + "," + std::to_string(nt) + "," + std::to_string(lt) + ")",
               2 * (n + nt) + lt);
    }
    return fit;
}

BoundFit audit_rad2_bound(const CoeffTable& table) {
    const double s = table.params.s;
    BoundFit fit;
    for (const auto& [key, v] : table.rad2) {
        auto [n, nt, l] = key;
        if (nt < 1 || n + l < 2) continue;
        double rhs = std::pow(nt, 2.0 * s) / (std::pow(n + 1.0, s) * std::pow(n + l, 2.5 + s));
        record(fit, v * v, rhs, "rad2(" + std::to_string(n) + "," + std::to_string(nt) + "," + std::to_string(l) + ")",
               2 * (n + nt) + l);
    }
    return fit;
}

BoundFit audit_mu_sum_bound(const CoeffTable& table) {
    // Accumulate sum |mu|^2 / lambda_{nt,lt} per target (n*, l*, m*).
    std::map<std::array<int, 3>, double> sums;
    for (const auto& [key, v] : table.mu) {
        const int ns = key.n + key.nt + key.k, ls = key.l + key.lt - 2 * key.k, ms = key.m + key.mt;
        sums[{ns, ls, ms}] += std::norm(v) / table.lambda(key.nt, key.lt);
    }
    BoundFit fit;
    for (const auto& [t, sum] : sums) {
        if (sum == 0.0) continue;
        auto [ns, ls, ms] = t;
        record(fit, sum, table.lambda(ns, ls),
               "target(" + std::to_string(ns) + "," + std::to_string(ls) + "," + std::to_string(ms) + ")",
               2 * ns + ls);
    }
    return fit;
}

BoundFit audit_cr_bound(const CoeffTable& table) {
    struct Group {
        int n, nt, l, lt, k;
        auto operator<=>(const Group&) const = default;
    };
    std::map<Group, double> sums;  // at target order 0
    for (const auto& [key, v] : table.mu)
        if (key.m + key.mt == 0) sums[{key.n, key.nt, key.l, key.lt, key.k}] += std::norm(v);
    BoundFit fit;
    for (const auto& [g, sum] : sums) {
        const int L = g.l + g.lt - 2 * g.k;
        double pref2 = std::exp(2.0 * mu_log_prefactor(g.n, g.nt, g.l, g.lt, g.k));
        double half = 0.5 * trig_moment(2 * g.n + g.l, 2 * g.nt + g.lt, table.params, table.spec);
        double rhs = g.lt * std::sqrt(double(g.l)) / (L + 1.0) * half * half;
        std::ostringstream os;
        os << "(" << g.n << "," << g.nt << "," << g.l << "," << g.lt << ",k=" << g.k << ")";
        record(fit, sum / pref2, rhs, os.str(), 2 * (g.n + g.nt) + g.l + g.lt);
    }
    return fit;
}

BoundFit audit_gamma_ratio(double a, double b, double x_min, double x_max, int samples) {
    BoundFit fit;
    for (int i = 0; i < samples; ++i) {
        double x = x_min * std::pow(x_max / x_min, double(i) / std::max(1, samples - 1));
        double lhs = std::exp(ln_gamma(x + a + 1.0) - ln_gamma(x + b + 1.0));
        record(fit, lhs, std::pow(x + a, a - b), "x=" + std::to_string(x), -1);
    }
    return fit;
}

CoeffTable build_table(int n_max_energy, const KernelParams& params, const QuadratureSpec& spec, int threads) {
    if (n_max_energy < 2) throw PreconditionError("build_table requires n_max_energy >= 2");
    params.validate();
    spec.validate();
    const int N = n_max_energy;
    CoeffTable t;
    t.params = params;
    t.spec = spec;
    t.n_max_energy = N;

    std::vector<std::function<void()>> tasks;

    std::vector<Key2> lin_keys;
    for (int e = 0; e <= N; ++e)
        for (int n = 0; 2 * n <= e; ++n) lin_keys.push_back({n, e - 2 * n});
    std::vector<std::array<double, 3>> lin_vals(lin_keys.size());
    for (std::size_t i = 0; i < lin_keys.size(); ++i)
        tasks.push_back([&, i] {
            auto [n, l] = lin_keys[i];
            lin_vals[i] = {lambda_linear(n, l, params, spec), lambda1(n, l, params, spec),
                           lambda2(n, l, params, spec)};
        });

    std::vector<Key3> r1_keys, r2_keys;
    for (int n = 1; 2 * n <= N; ++n)
        for (int nt = 0; 2 * (n + nt) <= N; ++nt)
            for (int lt = 0; 2 * (n + nt) + lt <= N; ++lt) r1_keys.push_back({n, nt, lt});
    for (int n = 0; 2 * n <= N; ++n)
        for (int nt = 1; 2 * (n + nt) <= N; ++nt)
            for (int l = 1; 2 * (n + nt) + l <= N; ++l) r2_keys.push_back({n, nt, l});
    std::vector<double> r1_vals(r1_keys.size()), r2_vals(r2_keys.size());
    for (std::size_t i = 0; i < r1_keys.size(); ++i)
        tasks.push_back([&, i] {
            auto [n, nt, lt] = r1_keys[i];
            r1_vals[i] = lambda_rad1(n, nt, lt, params, spec);
        });
    for (std::size_t i = 0; i < r2_keys.size(); ++i)
        tasks.push_back([&, i] {
            auto [n, nt, l] = r2_keys[i];
            r2_vals[i] = lambda_rad2(n, nt, l, params, spec);
        });

    // One task per source-degree group (n, nt, l, lt); entries are filtered
    // against the largest magnitude in the group.
    std::vector<std::array<int, 4>> groups;
    for (int n = 0; 2 * n <= N; ++n)
        for (int l = 1; 2 * n + l <= N; ++l) {
            if (!outside_invariants(n, l)) continue;
            for (int nt = 0; 2 * n + l + 2 * nt <= N; ++nt)
                for (int lt = 1; 2 * n + l + 2 * nt + lt <= N; ++lt)
                    if (outside_invariants(nt, lt)) groups.push_back({n, nt, l, lt});
        }
    std::vector<std::vector<std::pair<MuKey, cplx>>> mu_vals(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i)
        tasks.push_back([&, i] {
            auto [n, nt, l, lt] = groups[i];
            std::vector<std::pair<MuKey, cplx>> vals;
            double scale = 0.0;
            for (int m = -l; m <= l; ++m)
                for (int mt = -lt; mt <= lt; ++mt)
                    for (int k = 0; k <= k_max(l, lt, m + mt); ++k) {
                        cplx v;
                        try {
                            v = mu_coefficient(n, nt, l, lt, k, m, mt, params, spec);
                        } catch (const Error& e) {
                            throw NonConvergenceError(std::string(e.what()) + " at mu" +
                                                      key_string({n, nt, l, lt, k, m, mt}));
                        }
                        scale = std::max(scale, std::abs(v));
                        vals.push_back({{n, nt, l, lt, k, m, mt}, v});
                    }
            for (auto& kv : vals)
                if (std::abs(kv.second) >= 1e-14 * scale && kv.second != 0.0) mu_vals[i].push_back(kv);
        });

    run_tasks(tasks, threads);

    for (std::size_t i = 0; i < lin_keys.size(); ++i) {
        t.linear[lin_keys[i]] = lin_vals[i][0];
        t.lin1[lin_keys[i]] = lin_vals[i][1];
        t.lin2[lin_keys[i]] = lin_vals[i][2];
    }
    for (std::size_t i = 0; i < r1_keys.size(); ++i) t.rad1[r1_keys[i]] = r1_vals[i];
    for (std::size_t i = 0; i < r2_keys.size(); ++i) t.rad2[r2_keys[i]] = r2_vals[i];
    for (auto& g : mu_vals)
        for (auto& [k, v] : g) t.mu[k] = v;
    return t;
}

}  // namespace sboltz
