#pragma once

#include <compare>
#include <cstdlib>
#include <ostream>
#include <string>
#include <vector>

namespace sboltz {

// Basis label (n, l, m) of phi_{n,l,m}. Ordering is (energy, n, l, m), the one
// canonical order used for states, CSV columns and serialized tables.
struct ModeIndex {
    int n = 0;
    int l = 0;
    int m = 0;

    constexpr int energy() const { return 2 * n + l; }
    constexpr bool valid() const { return n >= 0 && l >= 0 && std::abs(m) <= l; }
    // (n,l) in {(0,0),(1,0),(0,1)}: mass, energy and the three momenta.
    constexpr bool collision_invariant() const {
        return (n == 0 && l == 0) || (n == 1 && l == 0) || (n == 0 && l == 1);
    }

    friend constexpr std::strong_ordering operator<=>(const ModeIndex& a, const ModeIndex& b) {
        if (auto c = a.energy() <=> b.energy(); c != 0) return c;
        if (auto c = a.n <=> b.n; c != 0) return c;
        if (auto c = a.l <=> b.l; c != 0) return c;
        return a.m <=> b.m;
    }
    friend constexpr bool operator==(const ModeIndex&, const ModeIndex&) = default;
};

inline std::ostream& operator<<(std::ostream& os, const ModeIndex& x) {
    return os << '(' << x.n << ',' << x.l << ',' << x.m << ')';
}

inline std::string to_string(const ModeIndex& x) {
    return "(" + std::to_string(x.n) + "," + std::to_string(x.l) + "," + std::to_string(x.m) + ")";
}

// All modes with energy <= max_energy, in canonical order.
inline std::vector<ModeIndex> modes_up_to(int max_energy) {
    std::vector<ModeIndex> out;
    for (int e = 0; e <= max_energy; ++e)
        for (int n = 0; 2 * n <= e; ++n) {
            int l = e - 2 * n;
            for (int m = -l; m <= l; ++m) out.push_back({n, l, m});
        }
    return out;
}

}  // namespace sboltz
