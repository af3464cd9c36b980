#include "sboltz/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "sboltz/errors.hpp"

namespace sboltz {

int QuadraticSystem::mode_index(const ModeIndex& m) const {
    auto it = index.find(m);
    if (it == index.end())
        throw SupportError("mode " + to_string(m) + " is outside the system (energy <= " +
                           std::to_string(n_max_energy) + ")");
    return it->second;
}

std::vector<cplx> QuadraticSystem::to_vector(const SpectralState& state) const {
    std::vector<cplx> v(modes.size(), 0.0);
    for (const auto& [mode, c] : state.coeffs) {
        if (c == 0.0 && !index.contains(mode)) continue;
        v[mode_index(mode)] = c;
    }
    return v;
}

SpectralState QuadraticSystem::to_state(const std::vector<cplx>& v, bool reality_flag) const {
    SpectralState st;
    st.reality_flag = reality_flag;
    for (std::size_t i = 0; i < modes.size(); ++i) st.coeffs[modes[i]] = v[i];
    return st;
}

void QuadraticSystem::gamma_into(const std::vector<cplx>& f, const std::vector<cplx>& g,
                                 std::vector<cplx>& out) const {
    out.assign(modes.size(), 0.0);
    for (const Triple& t : quad) out[t.target] += t.weight * f[t.a] * g[t.b];
}

QuadraticSystem assemble(const CoeffTable& table, int N) {
    if (N > table.n_max_energy)
        throw CoverageError("assemble: N=" + std::to_string(N) + " exceeds table coverage " +
                            std::to_string(table.n_max_energy));
    QuadraticSystem sys;
    sys.n_max_energy = N;
    sys.s = table.params.s;
    sys.lambda_20 = table.n_max_energy >= 4 ? table.lambda(2, 0) : lambda_linear(2, 0, table.params, table.spec);
    sys.modes = modes_up_to(N);
    for (std::size_t i = 0; i < sys.modes.size(); ++i) {
        sys.index[sys.modes[i]] = int(i);
        sys.linear.push_back(table.lambda(sys.modes[i].n, sys.modes[i].l));
    }
    for (const Coupling& c : collect_couplings(table, N))
        sys.quad.push_back({sys.index.at(c.a), sys.index.at(c.b), sys.index.at(c.target), c.weight});
    return sys;
}

SpectralState apply_L(const QuadraticSystem& sys, const SpectralState& state) {
    std::vector<cplx> v = sys.to_vector(state);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= sys.linear[i];
    return sys.to_state(v, state.reality_flag);
}

SpectralState apply_gamma(const QuadraticSystem& sys, const SpectralState& state) {
    return apply_gamma_bilinear(sys, state, state);
}

SpectralState apply_gamma_bilinear(const QuadraticSystem& sys, const SpectralState& f, const SpectralState& g) {
    std::vector<cplx> out;
    sys.gamma_into(sys.to_vector(f), sys.to_vector(g), out);
    return sys.to_state(out, f.reality_flag && g.reality_flag);
}

double weighted_norm(const SpectralState& state, double c, double s) {
    if (c < 0.0) throw DomainError("weighted_norm: c must be nonnegative");
    double acc = 0.0;
    for (const auto& [mode, v] : state.coeffs) {
        double expo = 2.0 * c * std::pow(mode.energy() + 1.5, s);
        if (expo > 700.0) throw OverflowError("weighted_norm: weight overflows at mode " + to_string(mode));
        if (v != 0.0) acc += std::exp(expo) * std::norm(v);
    }
    return std::sqrt(acc);
}

std::vector<double> decay_margin(const SolveReport& report, double lambda_20, double g0_norm, double c0) {
    (void)c0;  // the report already carries weighted norms for c0
    std::vector<double> out(report.times.size());
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = std::exp(-0.25 * lambda_20 * report.times[k]) * g0_norm - report.weighted_norm[k];
    return out;
}

std::vector<double> weighted_norm_series(const IntegrationResult& run, double c0, double s) {
    std::vector<double> out;
    for (std::size_t k = 0; k < run.trajectory.size(); ++k)
        out.push_back(weighted_norm(run.trajectory[k], 0.5 * c0 * run.report.times[k], s));
    return out;
}

namespace {

double vec_norm(const std::vector<cplx>& v) {
    double acc = 0.0;
    for (const cplx& x : v) acc += std::norm(x);
    return std::sqrt(acc);
}

double dissipation_rate(const QuadraticSystem& sys, const std::vector<cplx>& y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) acc += sys.linear[i] * std::norm(y[i]);
    return acc;
}

class Stepper {
public:
    explicit Stepper(const QuadraticSystem& sys) : sys_(sys) {}

    void rhs(const std::vector<cplx>& y, std::vector<cplx>& dy) {
        sys_.gamma_into(y, y, dy);
        for (std::size_t i = 0; i < y.size(); ++i) dy[i] -= sys_.linear[i] * y[i];
    }

    std::vector<cplx> rk4(const std::vector<cplx>& y, double h) {
        const std::size_t n = y.size();
        k1_.resize(n), k2_.resize(n), k3_.resize(n), k4_.resize(n), tmp_.resize(n);
        rhs(y, k1_);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * h * k1_[i];
        rhs(tmp_, k2_);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * h * k2_[i];
        rhs(tmp_, k3_);
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * k3_[i];
        rhs(tmp_, k4_);
        std::vector<cplx> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = y[i] + (h / 6.0) * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
        return out;
    }

private:
    const QuadraticSystem& sys_;
    std::vector<cplx> k1_, k2_, k3_, k4_, tmp_;
};

}  // namespace

IntegrationResult integrate(const QuadraticSystem& sys, const SpectralState& init, const IntegrateOptions& opt) {
    if (!(opt.t_end >= 0.0)) throw DomainError("integrate: t_end must be nonnegative");
    if (!(opt.rel_tol > 0.0)) throw DomainError("integrate: rel_tol must be positive");
    if (!(opt.dt_init > 0.0)) throw DomainError("integrate: dt_init must be positive");
    require_admissible(init);
    std::vector<double> times = opt.output_times;
    if (times.empty()) {
        int n = opt.t_end == 0.0 ? 1 : std::max(1, opt.n_outputs);
        for (int k = 0; k < n; ++k) times.push_back(n == 1 ? opt.t_end : opt.t_end * k / (n - 1));
    }
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] < 0.0 || times[k] > opt.t_end) throw DomainError("integrate: output time outside [0, t_end]");
        if (k > 0 && !(times[k] > times[k - 1])) throw DomainError("integrate: output times must increase strictly");
    }

    std::vector<cplx> y = sys.to_vector(init);
    const double g0 = vec_norm(y);
    IntegrationResult res;
    SolveReport& rep = res.report;
    rep.c0 = opt.c0;
    Stepper stepper(sys);

    double t = 0.0, h = opt.dt_init, diss = 0.0;
    double rate_now = dissipation_rate(sys, y);
    auto record = [&] {
        SpectralState st = sys.to_state(y, init.reality_flag);
        rep.times.push_back(t);
        rep.l2_norm.push_back(vec_norm(y));
        rep.dissipation_integral.push_back(diss);
        double w = weighted_norm(st, 0.5 * opt.c0 * t, sys.s);
        rep.weighted_norm.push_back(w);
        rep.decay_bound_margin.push_back(std::exp(-0.25 * sys.lambda_20 * t) * g0 - w);
        res.trajectory.push_back(std::move(st));
    };

    for (double target : times) {
        while (t < target) {
            const bool clipped = h >= target - t;
            const double step = clipped ? target - t : h;
            std::vector<cplx> full = stepper.rk4(y, step);
            std::vector<cplx> half = stepper.rk4(stepper.rk4(y, 0.5 * step), 0.5 * step);
            double err = 0.0;
            for (std::size_t i = 0; i < y.size(); ++i) err += std::norm(half[i] - full[i]);
            err = std::sqrt(err) / 15.0;
            const double scale = std::max(vec_norm(half), 1e-300);
            const double allowed = opt.rel_tol * scale;
            const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(allowed / err, 0.2), 0.2, 5.0);
            if (!std::isfinite(err)) throw StiffnessError("integrate: state became non-finite at t=" + std::to_string(t));
            if (err <= allowed) {
                for (std::size_t i = 0; i < y.size(); ++i) y[i] = half[i] + (half[i] - full[i]) / 15.0;
                double rate_next = dissipation_rate(sys, y);
                diss += 0.5 * step * (rate_now + rate_next);
                rate_now = rate_next;
                t = clipped ? target : t + step;
                ++rep.steps_accepted;
                if (!clipped || fac < 1.0) h = step * fac;
            } else {
                ++rep.steps_rejected;
                h = step * fac;
                if (h < 1e-13 * std::max(1.0, opt.t_end)) {
                    std::size_t worst = 0;
                    double wv = -1.0;
                    for (std::size_t i = 0; i < y.size(); ++i)
                        if (std::abs(half[i] - full[i]) > wv) wv = std::abs(half[i] - full[i]), worst = i;
                    throw StiffnessError("integrate: step size underflow at t=" + std::to_string(t) +
                                         ", limiting mode " + to_string(sys.modes[worst]));
                }
            }
        }
        record();
    }
    return res;
}

double linear_c0_bound(const QuadraticSystem& sys) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sys.modes.size(); ++i) {
        if (sys.modes[i].collision_invariant()) continue;
        double c = 2.0 * (sys.linear[i] - 0.25 * sys.lambda_20) / std::pow(sys.modes[i].energy() + 1.5, sys.s);
        best = std::min(best, c);
    }
    return best;
}

double measure_c0(const IntegrationResult& run, const QuadraticSystem& sys, double slack) {
    const double g0 = run.report.l2_norm.empty() ? 0.0 : run.report.l2_norm.front();
    auto holds = [&](double c) {
        std::vector<double> w = weighted_norm_series(run, c, sys.s);
        for (std::size_t k = 0; k < w.size(); ++k)
            if (w[k] > std::exp(-0.25 * sys.lambda_20 * run.report.times[k]) * g0 + slack) return false;
        return true;
    };
    if (!holds(0.0)) return 0.0;
    double lo = 0.0, hi = std::max(1e-3, 2.0 * linear_c0_bound(sys));
    const double t_end = run.report.times.empty() ? 0.0 : run.report.times.back();
    const double cap = 1300.0 / std::max(1e-12, t_end * std::pow(sys.n_max_energy + 1.5, sys.s));
    while (holds(hi) && hi < cap) {
        lo = hi;
        hi = std::min(2.0 * hi, cap);
    }
    if (holds(hi)) return hi;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        (holds(mid) ? lo : hi) = mid;
    }
    return lo;
}

Eps0Result measure_eps0(const QuadraticSystem& sys, const SpectralState& shape, double t_end, double lo, double hi,
                        int iterations, double rel_tol) {
    const double base = shape.norm();
    if (base == 0.0) throw DomainError("measure_eps0: shape must be nonzero");
    auto monotone = [&](double eps) {
        SpectralState init = shape;
        for (auto& [mode, c] : init.coeffs) c *= eps / base;
        IntegrateOptions opt;
        opt.t_end = t_end;
        opt.rel_tol = rel_tol;
        opt.n_outputs = 201;
        try {
            IntegrationResult r = integrate(sys, init, opt);
            for (std::size_t k = 1; k < r.report.l2_norm.size(); ++k)
                if (!(r.report.l2_norm[k] <= r.report.l2_norm[k - 1] * (1.0 + 1e-12))) return false;
            return true;
        } catch (const StiffnessError&) {
            return false;
        }
    };
    Eps0Result out;
    if (monotone(hi)) {
        out.eps0 = hi;
        out.saturated = true;
        return out;
    }
    if (!monotone(lo)) return out;
    double a = std::log(lo), b = std::log(hi);
    for (int it = 0; it < iterations; ++it) {
        double mid = 0.5 * (a + b);
        (monotone(std::exp(mid)) ? a : b) = mid;
    }
    out.eps0 = std::exp(a);
    return out;
}

SpectralState random_admissible_state(int max_energy, double norm, std::uint64_t seed, bool real) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    SpectralState st;
    st.reality_flag = real;
    for (const ModeIndex& m : modes_up_to(max_energy)) {
        if (m.collision_invariant()) continue;
        if (real && m.m < 0) continue;
        double re = gauss(rng), im = gauss(rng);
        if (real && m.m == 0) im = 0.0;
        st.coeffs[m] = {re, im};
        if (real && m.m > 0) st.coeffs[{m.n, m.l, -m.m}] = {re, -im};
    }
    double scale = norm / st.norm();
    for (auto& [m, c] : st.coeffs) c *= scale;
    return st;
}

namespace {

struct ScaledTriple {
    int a, b, t;
    cplx w;
};

// max |sum w f_a g_b conj(h_t)| over unit f, g, h: alternating maximization in
// each argument (each step is an exact maximization, so the value is monotone).
double trilinear_sup(const std::vector<ScaledTriple>& terms, std::size_t n, const std::vector<int>& support,
                     std::mt19937_64& rng, int iterations) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto normalize = [](std::vector<cplx>& v) {
        double nv = vec_norm(v);
        if (nv > 0.0)
            for (cplx& x : v) x /= nv;
        return nv;
    };
    std::vector<cplx> f(n, 0.0), g(n, 0.0), h(n, 0.0), c(n);
    for (int i : support) f[i] = {gauss(rng), gauss(rng)}, g[i] = {gauss(rng), gauss(rng)}, h[i] = {gauss(rng), gauss(rng)};
    normalize(f), normalize(g), normalize(h);
    double value = 0.0;
    for (int it = 0; it < iterations; ++it) {
        std::fill(c.begin(), c.end(), 0.0);
        for (const ScaledTriple& x : terms) c[x.a] += x.w * g[x.b] * std::conj(h[x.t]);
        for (std::size_t i = 0; i < n; ++i) f[i] = std::conj(c[i]);
        normalize(f);
        std::fill(c.begin(), c.end(), 0.0);
        for (const ScaledTriple& x : terms) c[x.b] += x.w * f[x.a] * std::conj(h[x.t]);
        for (std::size_t i = 0; i < n; ++i) g[i] = std::conj(c[i]);
        normalize(g);
        std::fill(c.begin(), c.end(), 0.0);
        for (const ScaledTriple& x : terms) c[x.t] += x.w * f[x.a] * g[x.b];
        h = c;
        double v = normalize(h);
        if (v <= value * (1.0 + 1e-10)) {
            value = std::max(value, v);
            break;
        }
        value = v;
    }
    return value;
}

}  // namespace

TrilinearFit trilinear_audit(const CoeffTable& table, int N, int trials, std::uint64_t seed, double c) {
    const QuadraticSystem sys = assemble(table, N);
    const std::size_t n = sys.modes.size();
    std::vector<int> support;
    std::vector<double> inv_sqrt_lam(n, 0.0), half_weight(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!sys.modes[i].collision_invariant()) {
            support.push_back(int(i));
            inv_sqrt_lam[i] = 1.0 / std::sqrt(sys.linear[i]);
        }
        half_weight[i] = std::exp(0.5 * c * std::pow(sys.modes[i].energy() + 1.5, sys.s));
    }
    // Substituting g = L^{-1/2} g', h = L^{-1/2} h' (and the weights) turns both
    // ratios into plain trilinear sups over unit vectors.
    std::vector<ScaledTriple> plain, weighted;
    for (const auto& q : sys.quad) {
        const double lb = inv_sqrt_lam[q.b], lt = inv_sqrt_lam[q.target];
        plain.push_back({q.a, q.b, q.target, q.weight * lb * lt});
        weighted.push_back({q.a, q.b, q.target,
                            q.weight * lb * lt * half_weight[q.target] / (half_weight[q.a] * half_weight[q.b])});
    }
    std::mt19937_64 rng(seed);
    TrilinearFit fit;
    for (int trial = 0; trial < trials; ++trial) {
        fit.plain = std::max(fit.plain, trilinear_sup(plain, n, support, rng, 200));
        fit.weighted = std::max(fit.weighted, trilinear_sup(weighted, n, support, rng, 200));
        ++fit.trials;
    }
    return fit;
}

}  // namespace sboltz
