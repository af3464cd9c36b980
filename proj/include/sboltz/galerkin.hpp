#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "sboltz/cascade.hpp"
#include "sboltz/coefficients.hpp"
#include "sboltz/state.hpp"

namespace sboltz {

// Projection of the equation onto the modes of energy <= n_max_energy.
struct QuadraticSystem {
    struct Triple {
        int a, b, target;
        cplx weight;
    };

    int n_max_energy = 0;
    double s = 0.5;
    double lambda_20 = 0.0;  // spectral gap
    std::vector<ModeIndex> modes;  // canonical order
    std::map<ModeIndex, int> index;
    std::vector<double> linear;  // eigenvalue per mode; exactly 0 on collision invariants
    std::vector<Triple> quad;    // sorted by target

    int mode_index(const ModeIndex& m) const;
    std::vector<cplx> to_vector(const SpectralState& state) const;
    SpectralState to_state(const std::vector<cplx>& v, bool reality_flag) const;

    // Gamma(f, g) on coefficient vectors (bilinear; apply_gamma uses f == g).
    void gamma_into(const std::vector<cplx>& f, const std::vector<cplx>& g, std::vector<cplx>& out) const;
};

QuadraticSystem assemble(const CoeffTable& table, int N);

SpectralState apply_L(const QuadraticSystem& sys, const SpectralState& state);
SpectralState apply_gamma(const QuadraticSystem& sys, const SpectralState& state);
SpectralState apply_gamma_bilinear(const QuadraticSystem& sys, const SpectralState& f, const SpectralState& g);

struct SolveReport {
    std::vector<double> times;
    std::vector<double> l2_norm;
    std::vector<double> dissipation_integral;  // int_0^t sum lambda |g|^2
    std::vector<double> weighted_norm;         // weight exp((c0 t / 2) (E + 3/2)^s)
    std::vector<double> decay_bound_margin;
    double c0 = 0.0;
    int steps_accepted = 0;
    int steps_rejected = 0;
};

struct IntegrateOptions {
    double t_end = 1.0;
    double dt_init = 1e-2;
    double rel_tol = 1e-8;
    double c0 = 0.0;
    // Monitor/output times; when empty, n_outputs uniform samples on [0, t_end].
    std::vector<double> output_times;
    int n_outputs = 101;
};

struct IntegrationResult {
    SolveReport report;
    std::vector<SpectralState> trajectory;  // at report.times
};

// Classical RK4 with step doubling (local extrapolation), error measured
// relative to the current state norm.
IntegrationResult integrate(const QuadraticSystem& sys, const SpectralState& init, const IntegrateOptions& opt);

double weighted_norm(const SpectralState& state, double c, double s);
std::vector<double> decay_margin(const SolveReport& report, double lambda_20, double g0_norm, double c0);

// Weighted norms recomputed from a stored trajectory for another weight c0.
std::vector<double> weighted_norm_series(const IntegrationResult& run, double c0, double s);

// Estimated sup of |(Gamma(f,g),h)| / (|f| |L^1/2 g| |L^1/2 h|) over the ball, and
// of the variant with weight exp(c H^s) on h and exp(c H^s / 2) in the norms.
// Each trial is one seeded start of an alternating maximization.
struct TrilinearFit {
    double plain = 0.0;
    double weighted = 0.0;
    int trials = 0;
};
TrilinearFit trilinear_audit(const CoeffTable& table, int N, int trials, std::uint64_t seed, double c = 1.0);

// Seeded admissible state on the modes 2 <= energy <= max_energy with the given
// l2 norm; real (conjugation symmetric) when real is true.
SpectralState random_admissible_state(int max_energy, double norm, std::uint64_t seed, bool real = true);

// Largest weight c0 for which the weighted norm of run stays below the decay
// bound exp(-lambda_20 t / 4) |g0| at every monitor time (bisection on c0).
double measure_c0(const IntegrationResult& run, const QuadraticSystem& sys, double slack);
// Linear-theory upper bound min over modes of 2 (lambda - lambda_20/4) / (E + 3/2)^s.
double linear_c0_bound(const QuadraticSystem& sys);

struct Eps0Result {
    double eps0 = 0.0;
    bool saturated = false;  // monotone even at the upper end of the search
};
// Largest initial l2 norm (bisection in log scale on [lo, hi]) for which the norm
// of the run started from `shape` rescaled to that norm is non-increasing on [0, t_end].
Eps0Result measure_eps0(const QuadraticSystem& sys, const SpectralState& shape, double t_end, double lo, double hi,
                        int iterations, double rel_tol);

}  // namespace sboltz
