#pragma once

#include <array>
#include <compare>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sboltz/mode_index.hpp"
#include "sboltz/quadrature.hpp"
#include "sboltz/specialfn.hpp"

namespace sboltz {

inline constexpr const char* kTableFormatVersion = "sboltz-table/1";

// Key of one nonlinear coupling coefficient. The target order is m + mt; the
// target mode is (n + nt + k, l + lt - 2k, m + mt).
struct MuKey {
    int n = 0, nt = 0, l = 0, lt = 0, k = 0, m = 0, mt = 0;
    friend constexpr auto operator<=>(const MuKey&, const MuKey&) = default;
};

using Key2 = std::array<int, 2>;
using Key3 = std::array<int, 3>;

struct CoeffTable {
    KernelParams params;
    QuadratureSpec spec;
    int n_max_energy = 0;
    std::string version = kTableFormatVersion;

    std::map<Key2, double> linear;  // (n, l)   eigenvalue of the linearized operator
    std::map<Key2, double> lin1;    // (n, l)   loss part
    std::map<Key2, double> lin2;    // (n, l)   gain part
    std::map<Key3, double> rad1;    // (n, nt, lt), n >= 1
    std::map<Key3, double> rad2;    // (n, nt, l),  nt >= 1, l >= 1
    std::map<MuKey, cplx> mu;       // both sources outside the collision invariants

    double lambda(int n, int l) const;
    double lambda1(int n, int l) const;
    double lambda2(int n, int l) const;
    double radial1(int n, int nt, int lt) const;
    double radial2(int n, int nt, int l) const;
    // Zero when the key is absent but inside the covered range (dropped entry).
    cplx mu_value(const MuKey& key) const;

    friend bool operator==(const CoeffTable&, const CoeffTable&);
};

// Linear coefficients, each an integral of beta over |theta| <= pi/4.
double lambda_linear(int n, int l, const KernelParams& params, const QuadratureSpec& spec = {});
double lambda1(int n, int l, const KernelParams& params, const QuadratureSpec& spec = {});
double lambda2(int n, int l, const KernelParams& params, const QuadratureSpec& spec = {});
double lambda_rad1(int n, int nt, int lt, const KernelParams& params, const QuadratureSpec& spec = {});
double lambda_rad2(int n, int nt, int l, const KernelParams& params, const QuadratureSpec& spec = {});

// 2 * int_0^{pi/4} beta sin^a cos^b, a > 2s.
double trig_moment(int a, int b, const KernelParams& params, const QuadratureSpec& spec = {});

// Largest admissible k for the pair (l, lt) and combined order m + mt.
int k_max(int l, int lt, int msum);

// mu^{m,mt,mstar}_{n,nt,l,lt,k}. Returns 0 without quadrature when mstar is the
// natural target order m + mt and |m + mt| > l + lt - 2k. Other mstar values are
// evaluated numerically (they vanish up to rounding); |mstar| must not exceed
// l + lt - 2k.
cplx mu_coefficient(int n, int nt, int l, int lt, int k, int m, int mt, int mstar,
                    const KernelParams& params, const QuadratureSpec& spec = {});
inline cplx mu_coefficient(int n, int nt, int l, int lt, int k, int m, int mt, const KernelParams& params,
                           const QuadratureSpec& spec = {}) {
    return mu_coefficient(n, nt, l, lt, k, m, mt, m + mt, params, spec);
}

// The same coupling without the (-1)^k Gamma-ratio prefactor: the kappa-projection
// of the frame-averaged kernel integral onto conj(Y_{l+lt-2k}^{mstar}).
cplx mu_kernel_projection(int n, int nt, int l, int lt, int k, int m, int mt, int mstar,
                          const KernelParams& params, const QuadratureSpec& spec = {});

// log of the positive Gamma-ratio prefactor of mu (without the sign).
double mu_log_prefactor(int n, int nt, int l, int lt, int k);

// Sum over (m, mt) of |mu|^2 through the axis-factor reduction; independent of mstar.
double musq_sum(int n, int nt, int l, int lt, int k, int mstar, const KernelParams& params,
                const QuadratureSpec& spec = {});
// Same sum by brute force over all (m, mt).
double musq_bruteforce(int n, int nt, int l, int lt, int k, int mstar, const KernelParams& params,
                       const QuadratureSpec& spec = {});

using Expansion = std::vector<std::pair<ModeIndex, cplx>>;

// Gamma(phi_a, phi_b) expanded in the basis. Couplings with a source in the
// collision invariants that the table does not store are evaluated on demand.
Expansion gamma_pair_expansion(const ModeIndex& a, const ModeIndex& b, const CoeffTable& table);

struct OrthogonalityReport {
    double max_violation = 0.0;  // normalized by sqrt(diag1 * diag2)
    int pairs_checked = 0;
    std::string worst;
};
OrthogonalityReport verify_orthogonality(int n, int nt, int l, int lt, const CoeffTable& table);

struct SpectralBand {
    double c_low = 0.0;
    double c_high = 0.0;
};
SpectralBand spectral_bound_audit(int n_max_energy, const CoeffTable& table);

// Fitted constant of an inequality lhs <= C * rhs over a sample set.
struct BoundFit {
    double constant = 0.0;  // max lhs / rhs
    double min_ratio = 0.0;
    int samples = 0;
    std::string worst;
    std::vector<double> shell_max;  // max ratio per energy shell, when meaningful
    bool finite() const;
};

BoundFit audit_rad1_bound(const CoeffTable& table);
BoundFit audit_rad2_bound(const CoeffTable& table);
BoundFit audit_mu_sum_bound(const CoeffTable& table);
BoundFit audit_cr_bound(const CoeffTable& table);
BoundFit audit_gamma_ratio(double a, double b, double x_min, double x_max, int samples);

// Fills every coefficient whose sources and target have energy <= n_max_energy.
// threads <= 0 means hardware concurrency. Output does not depend on threads.
CoeffTable build_table(int n_max_energy, const KernelParams& params, const QuadratureSpec& spec = {},
                       int threads = 1);

}  // namespace sboltz
