#pragma once

#include <map>
#include <vector>

#include "sboltz/coefficients.hpp"
#include "sboltz/exppoly.hpp"
#include "sboltz/state.hpp"

namespace sboltz {

// One term of Gamma(g, g) restricted to a ball: w * g[a] * g[b] feeds target.
struct Coupling {
    ModeIndex a, b, target;
    cplx weight;
};

// Every coupling among modes outside the collision invariants with target energy
// <= max_energy, sorted by (target, a, b). Collision-invariant sources are left
// out: admissible states never populate them.
std::vector<Coupling> collect_couplings(const CoeffTable& table, int max_energy);

enum class CascadeOrder {
    radial_major,  // outer loop on n, inner on l
    energy_major,  // canonical (energy, n, l, m)
};

struct CascadeOptions {
    CascadeOrder order = CascadeOrder::radial_major;
    double resonance_tol = kDefaultResonanceTol;
};

struct CascadeSolution {
    std::map<ModeIndex, ExpPoly> modes;
    bool reality_flag = false;
    int energy_cap = 0;
};

// Exact solution on the ball {energy <= energy_cap}; the mass mode is held at 0.
CascadeSolution cascade_solve(const SpectralState& init, const CoeffTable& table, int energy_cap,
                              const CascadeOptions& options = {});

SpectralState evaluate_solution(const CascadeSolution& sol, double t);

}  // namespace sboltz
