#include "sboltz/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sboltz/errors.hpp"

namespace sboltz {

double SpectralState::norm() const {
    double acc = 0.0;
    for (const auto& [mode, c] : coeffs) acc += std::norm(c);
    return std::sqrt(acc);
}

int SpectralState::max_energy() const {
    int e = 0;
    for (const auto& [mode, c] : coeffs)
        if (c != 0.0) e = std::max(e, mode.energy());
    return e;
}

std::optional<ModeIndex> SpectralState::admissibility_violation() const {
    for (const auto& [mode, c] : coeffs)
        if (mode.collision_invariant() && c != 0.0) return mode;
    return std::nullopt;
}

double SpectralState::reality_defect() const {
    double d = 0.0;
    for (const auto& [mode, c] : coeffs) d = std::max(d, std::abs(get({mode.n, mode.l, -mode.m}) - std::conj(c)));
    return d;
}

void require_admissible(const SpectralState& state) {
    if (auto bad = state.admissibility_violation())
        throw AdmissibilityError("initial data has a nonzero coefficient on collision-invariant mode " +
                                 to_string(*bad));
    for (const auto& [mode, c] : state.coeffs)
        if (!mode.valid()) throw IndexError("state contains invalid mode " + to_string(mode));
}

std::vector<Coupling> collect_couplings(const CoeffTable& table, int max_energy) {
    if (max_energy > table.n_max_energy)
        throw CoverageError("couplings up to energy " + std::to_string(max_energy) + " need a larger table (covers " +
                            std::to_string(table.n_max_energy) + ")");
    std::vector<ModeIndex> sources;
    for (const ModeIndex& m : modes_up_to(max_energy - 2))
        if (!m.collision_invariant()) sources.push_back(m);
    std::vector<Coupling> out;
    for (const ModeIndex& a : sources)
        for (const ModeIndex& b : sources) {
            if (a.energy() + b.energy() > max_energy) continue;
            for (const auto& [target, w] : gamma_pair_expansion(a, b, table)) out.push_back({a, b, target, w});
        }
    std::sort(out.begin(), out.end(), [](const Coupling& x, const Coupling& y) {
        if (x.target != y.target) return x.target < y.target;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });
    return out;
}

CascadeSolution cascade_solve(const SpectralState& init, const CoeffTable& table, int energy_cap,
                              const CascadeOptions& options) {
    if (energy_cap > table.n_max_energy)
        throw CoverageError("cascade energy cap " + std::to_string(energy_cap) + " exceeds table coverage " +
                            std::to_string(table.n_max_energy));
    require_admissible(init);
    for (const auto& [mode, c] : init.coeffs)
        if (c != 0.0 && mode.energy() > energy_cap)
            throw SupportError("initial data has mode " + to_string(mode) + " above the energy cap");

    const std::vector<Coupling> couplings = collect_couplings(table, energy_cap);
    std::map<ModeIndex, std::vector<const Coupling*>> by_target;
    for (const Coupling& c : couplings) by_target[c.target].push_back(&c);

    std::vector<ModeIndex> order = modes_up_to(energy_cap);
    if (options.order == CascadeOrder::radial_major)
        std::stable_sort(order.begin(), order.end(), [](const ModeIndex& x, const ModeIndex& y) {
            if (x.n != y.n) return x.n < y.n;
            if (x.l != y.l) return x.l < y.l;
            return x.m < y.m;
        });

    CascadeSolution sol;
    sol.reality_flag = init.reality_flag;
    sol.energy_cap = energy_cap;
    for (const ModeIndex& mode : order) {
        if (mode.collision_invariant()) {
            sol.modes[mode] = ExpPoly();
            continue;
        }
        std::vector<ExpTerm> forcing;
        if (auto it = by_target.find(mode); it != by_target.end()) {
            for (const Coupling* c : it->second) {
                auto fa = sol.modes.find(c->a), fb = sol.modes.find(c->b);
                if (fa == sol.modes.end() || fb == sol.modes.end())
                    throw std::logic_error("cascade order visited " + to_string(mode) + " before its sources");
                if (fa->second.empty() || fb->second.empty()) continue;
                ExpPoly prod = exppoly_mul(fa->second, fb->second, options.resonance_tol);
                for (ExpTerm t : prod.terms()) {
                    t.coeff *= c->weight;
                    forcing.push_back(t);
                }
            }
        }
        ExpPoly rhs(std::move(forcing), options.resonance_tol);
        sol.modes[mode] = solve_linear_ode(table.lambda(mode.n, mode.l), init.get(mode), rhs, options.resonance_tol);
    }
    return sol;
}

SpectralState evaluate_solution(const CascadeSolution& sol, double t) {
    if (!(t >= 0.0)) throw DomainError("evaluate_solution: t must be nonnegative");
    SpectralState out;
    out.reality_flag = sol.reality_flag;
    for (const auto& [mode, f] : sol.modes) out.coeffs[mode] = f.value(t);
    return out;
}

}  // namespace sboltz
