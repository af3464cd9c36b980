#pragma once

#include <complex>
#include <map>
#include <optional>

#include "sboltz/mode_index.hpp"

namespace sboltz {

// Finite coefficient vector over the eigenbasis. reality_flag marks states of a
// real-valued perturbation, i.e. coeffs[(n,l,-m)] == conj(coeffs[(n,l,m)]).
struct SpectralState {
    std::map<ModeIndex, std::complex<double>> coeffs;
    bool reality_flag = false;

    std::complex<double> get(const ModeIndex& mode) const {
        auto it = coeffs.find(mode);
        return it == coeffs.end() ? std::complex<double>(0.0) : it->second;
    }
    double norm() const;
    int max_energy() const;

    // First collision-invariant mode carrying a nonzero coefficient, if any.
    std::optional<ModeIndex> admissibility_violation() const;
    bool admissible() const { return !admissibility_violation().has_value(); }
    // Largest |c(n,l,-m) - conj c(n,l,m)|.
    double reality_defect() const;
};

// Throws AdmissibilityError naming the offending mode.
void require_admissible(const SpectralState& state);

}  // namespace sboltz
