// Nonlinear coupling coefficients.
//
// For fixed (l, lt) the frame-averaged kappa integral
//   J(theta) = avg_phi int dkappa Y_l^m(kappa sin - kperp cos) Y_lt^mt(kappa cos + kperp sin) conj Y_L^ms(kappa)
// is a homogeneous polynomial of degree D = l + lt in (sin theta, cos theta).
// We recover its coefficients exactly from D + 1 samples (a DFT over theta in
// [0, pi)), after which every coupling is a finite sum of one-dimensional moments
// int beta sin^a cos^b with explicit vanishing order a.
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <vector>

#include "sboltz/coefficients.hpp"
#include "sboltz/errors.hpp"

namespace sboltz {

namespace {

constexpr double kPi = std::numbers::pi;

struct AngularBlock {
    int l = 0, lt = 0, D = 0;
    // coeff[k] laid out as [ms + L][m + l][mt + lt][j], j = power of sin.
    std::vector<std::vector<cplx>> coeff;

    const cplx* at(int k, int ms, int m, int mt) const {
        const int L = D - 2 * k;
        std::size_t idx = ((std::size_t(ms + L) * (2 * l + 1) + (m + l)) * (2 * lt + 1) + (mt + lt)) * (D + 1);
        return coeff[k].data() + idx;
    }
};

void orthonormal_frame(const Vec3& k, Vec3& e1, Vec3& e2) {
    Vec3 ref = std::abs(k[2]) > 1.0 - 1e-6 ? Vec3{0.0, 1.0, 0.0} : Vec3{0.0, 0.0, 1.0};
    double d = ref[0] * k[0] + ref[1] * k[1] + ref[2] * k[2];
    Vec3 v{ref[0] - d * k[0], ref[1] - d * k[1], ref[2] - d * k[2]};
    double nv = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    e1 = {v[0] / nv, v[1] / nv, v[2] / nv};
    e2 = {k[1] * e1[2] - k[2] * e1[1], k[2] * e1[0] - k[0] * e1[2], k[0] * e1[1] - k[1] * e1[0]};
}

// Coefficients of S^j C^{D-j} in e^{i(D-2q)theta} = (C + iS)^{D-q} (C - iS)^q.
std::vector<std::vector<cplx>> fourier_to_monomial(int D) {
    std::vector<std::vector<double>> bin(D + 1, std::vector<double>(D + 1, 0.0));
    for (int a = 0; a <= D; ++a) {
        bin[a][0] = 1.0;
        for (int b = 1; b <= a; ++b) bin[a][b] = bin[a - 1][b - 1] + (b <= a - 1 ? bin[a - 1][b] : 0.0);
    }
    static const cplx ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    std::vector<std::vector<cplx>> T(D + 1, std::vector<cplx>(D + 1, 0.0));
    for (int q = 0; q <= D; ++q) {
        int a = D - q, b = q;
        for (int u = 0; u <= a; ++u)
            for (int v = 0; v <= b; ++v) T[q][u + v] += bin[a][u] * bin[b][v] * ipow[u % 4] * ipow[(3 * v) % 4];
    }
    return T;
}

AngularBlock compute_block(int l, int lt, int margin) {
    AngularBlock blk;
    blk.l = l;
    blk.lt = lt;
    const int D = blk.D = l + lt;
    const int kmax = std::min(l, lt);
    const int nm = 2 * l + 1, nmt = 2 * lt + 1;
    const SphereRule& sph = sphere_quadrature(2 * D + margin);
    const std::size_t nk = sph.nodes.size();

    // conj(Y_L^ms) at every kappa node, every admissible L.
    std::vector<std::vector<cplx>> ytarget(kmax + 1);
    for (int k = 0; k <= kmax; ++k) {
        const int L = D - 2 * k;
        ytarget[k].resize(nk * (2 * L + 1));
        for (std::size_t i = 0; i < nk; ++i) {
            sph_harm_row(L, sph.nodes[i], &ytarget[k][i * (2 * L + 1)]);
            for (int t = 0; t < 2 * L + 1; ++t) ytarget[k][i * (2 * L + 1) + t] = std::conj(ytarget[k][i * (2 * L + 1) + t]);
        }
    }
    std::vector<Vec3> frame1(nk), frame2(nk);
    for (std::size_t i = 0; i < nk; ++i) orthonormal_frame(sph.nodes[i], frame1[i], frame2[i]);

    const int nphi = D + 1;
    std::vector<double> cphi(nphi), sphi(nphi);
    for (int j = 0; j < nphi; ++j) {
        cphi[j] = std::cos(2.0 * kPi * j / nphi);
        sphi[j] = std::sin(2.0 * kPi * j / nphi);
    }

    // samples[k][(ms, m, mt)][q]
    std::vector<std::vector<cplx>> samples(kmax + 1);
    for (int k = 0; k <= kmax; ++k) samples[k].assign(std::size_t(2 * (D - 2 * k) + 1) * nm * nmt * (D + 1), 0.0);

    std::vector<cplx> y1(nm), y2(nmt), avg(std::size_t(nm) * nmt);
    for (int q = 0; q <= D; ++q) {
        const double th = kPi * q / (D + 1);
        const double sn = std::sin(th), cs = std::cos(th);
        for (std::size_t i = 0; i < nk; ++i) {
            const Vec3& kap = sph.nodes[i];
            std::fill(avg.begin(), avg.end(), cplx(0.0));
            for (int j = 0; j < nphi; ++j) {
                Vec3 kp;
                for (int c = 0; c < 3; ++c) kp[c] = cphi[j] * frame1[i][c] + sphi[j] * frame2[i][c];
                Vec3 a1, a2;
                for (int c = 0; c < 3; ++c) {
                    a1[c] = kap[c] * sn - kp[c] * cs;
                    a2[c] = kap[c] * cs + kp[c] * sn;
                }
                sph_harm_row(l, a1, y1.data());
                sph_harm_row(lt, a2, y2.data());
                for (int a = 0; a < nm; ++a)
                    for (int b = 0; b < nmt; ++b) avg[a * nmt + b] += y1[a] * y2[b];
            }
            const double w = sph.weights[i] / nphi;
            for (int k = 0; k <= kmax; ++k) {
                const int L = D - 2 * k;
                const cplx* yt = &ytarget[k][i * (2 * L + 1)];
                cplx* out = samples[k].data();
                for (int ms = 0; ms < 2 * L + 1; ++ms) {
                    const cplx wy = w * yt[ms];
                    for (int ab = 0; ab < nm * nmt; ++ab)
                        out[(std::size_t(ms) * nm * nmt + ab) * (D + 1) + q] += wy * avg[ab];
                }
            }
        }
    }

    // Samples -> Fourier coefficients in e^{i(D-2q)theta} -> monomial coefficients.
    const auto T = fourier_to_monomial(D);
    std::vector<cplx> shift(D + 1);
    for (int q = 0; q <= D; ++q) shift[q] = std::polar(1.0, -D * kPi * q / (D + 1));
    blk.coeff.resize(kmax + 1);
    std::vector<cplx> F(D + 1);
    for (int k = 0; k <= kmax; ++k) {
        const std::size_t nrow = samples[k].size() / (D + 1);
        blk.coeff[k].assign(samples[k].size(), 0.0);
        for (std::size_t row = 0; row < nrow; ++row) {
            const cplx* s = &samples[k][row * (D + 1)];
            for (int qq = 0; qq <= D; ++qq) {
                cplx acc = 0.0;
                for (int q = 0; q <= D; ++q)
                    acc += s[q] * shift[q] * std::polar(1.0, 2.0 * kPi * double(q) * qq / (D + 1));
                F[qq] = acc / double(D + 1);
            }
            cplx* c = &blk.coeff[k][row * (D + 1)];
            for (int j = 0; j <= D; ++j) {
                // Parity in theta: only powers of sin with the parity of l survive.
                if ((j - l) % 2 != 0) continue;
                cplx acc = 0.0;
                for (int qq = 0; qq <= D; ++qq) acc += F[qq] * T[qq][j];
                c[j] = acc;
            }
        }
    }
    return blk;
}

class BlockCache {
public:
    const AngularBlock& get(int l, int lt, int margin) {
        auto key = std::make_tuple(l, lt, margin);
        {
            std::shared_lock lock(mutex_);
            auto it = blocks_.find(key);
            if (it != blocks_.end()) return *it->second;
        }
        auto blk = std::make_unique<AngularBlock>(compute_block(l, lt, margin));
        std::unique_lock lock(mutex_);
        auto [it, inserted] = blocks_.try_emplace(key, std::move(blk));
        return *it->second;
    }

private:
    std::shared_mutex mutex_;
    std::map<std::tuple<int, int, int>, std::unique_ptr<AngularBlock>> blocks_;
};

BlockCache& block_cache() {
    static BlockCache cache;
    return cache;
}

using MomentKey = std::tuple<double, double, double, int, double, int, int, int>;

class MomentCache {
public:
    double get(int a, int b, const KernelParams& p, const QuadratureSpec& q) {
        MomentKey key{p.s, p.kappa_beta, q.rel_tol, q.max_levels, q.grading_ratio, q.panel_order, a, b};
        {
            std::shared_lock lock(mutex_);
            auto it = values_.find(key);
            if (it != values_.end()) return it->second;
        }
        auto f = [a, b](double th) { return std::pow(std::sin(th), a) * std::pow(std::cos(th), b); };
        double v = integrate_beta_symmetric(f, double(a), p, q);
        std::unique_lock lock(mutex_);
        values_.try_emplace(key, v);
        return v;
    }

private:
    std::shared_mutex mutex_;
    std::map<MomentKey, double> values_;
};

MomentCache& moment_cache() {
    static MomentCache cache;
    return cache;
}

void check_mu_index(int n, int nt, int l, int lt, int k, int m, int mt) {
    if (n < 0 || nt < 0) throw IndexError("mu: radial indices must be nonnegative");
    if (l < 1 || lt < 1) throw IndexError("mu: requires l >= 1 and lt >= 1");
    if (k < 0 || k > std::min(l, lt)) throw IndexError("mu: k must lie in [0, min(l, lt)]");
    if (std::abs(m) > l || std::abs(mt) > lt) throw IndexError("mu: |m| <= l and |mt| <= lt required");
}

}  // namespace

double trig_moment(int a, int b, const KernelParams& params, const QuadratureSpec& spec) {
    if (a < 0 || b < 0) throw IndexError("trig_moment: negative power");
    return moment_cache().get(a, b, params, spec);
}

int k_max(int l, int lt, int msum) {
    int t = l + lt - std::abs(msum);
    if (t < 0) return -1;
    return std::min({t / 2, l, lt});
}

double mu_log_prefactor(int n, int nt, int l, int lt, int k) {
    return 0.5 * (std::log(2.0) + 1.5 * std::log(kPi) + ln_gamma(n + nt + k + 1.0) +
                  ln_gamma(n + nt + l + lt - k + 1.5) - ln_gamma(nt + 1.0) - ln_gamma(nt + lt + 1.5) -
                  ln_gamma(n + 1.0) - ln_gamma(n + l + 1.5));
}

cplx mu_kernel_projection(int n, int nt, int l, int lt, int k, int m, int mt, int mstar,
                          const KernelParams& params, const QuadratureSpec& spec) {
    check_mu_index(n, nt, l, lt, k, m, mt);
    const int L = l + lt - 2 * k;
    if (std::abs(mstar) > L) throw IndexError("mu: |mstar| exceeds the target degree");
    params.validate();
    spec.validate();
    const AngularBlock& blk = block_cache().get(l, lt, spec.sphere_degree_margin);
    const cplx* c = blk.at(k, mstar, m, mt);
    const int D = blk.D;
    cplx acc = 0.0;
    for (int j = l % 2; j <= D; j += 2) {
        if (c[j] == 0.0) continue;
        acc += c[j] * trig_moment(2 * n + l + j, 2 * nt + lt + D - j, params, spec);
    }
    return acc;
}

cplx mu_coefficient(int n, int nt, int l, int lt, int k, int m, int mt, int mstar, const KernelParams& params,
                    const QuadratureSpec& spec) {
    check_mu_index(n, nt, l, lt, k, m, mt);
    const int L = l + lt - 2 * k;
    if (mstar == m + mt && std::abs(mstar) > L) return 0.0;
    double logpref = mu_log_prefactor(n, nt, l, lt, k);
    if (!(logpref < 700.0)) throw OverflowError("mu: Gamma-ratio prefactor overflows");
    cplx v = mu_kernel_projection(n, nt, l, lt, k, m, mt, mstar, params, spec);
    return (k % 2 ? -1.0 : 1.0) * std::exp(logpref) * v;
}

double musq_bruteforce(int n, int nt, int l, int lt, int k, int mstar, const KernelParams& params,
                       const QuadratureSpec& spec) {
    double acc = 0.0;
    for (int m = -l; m <= l; ++m)
        for (int mt = -lt; mt <= lt; ++mt) {
            if (m + mt != mstar) continue;
            acc += std::norm(mu_coefficient(n, nt, l, lt, k, m, mt, mstar, params, spec));
        }
    return acc;
}

double musq_sum(int n, int nt, int l, int lt, int k, int mstar, const KernelParams& params,
                const QuadratureSpec& spec) {
    check_mu_index(n, nt, l, lt, k, 0, 0);
    const int L = l + lt - 2 * k;
    if (std::abs(mstar) > L) throw IndexError("musq_sum: |mstar| exceeds the target degree");
    const double pref2 = std::exp(2.0 * mu_log_prefactor(n, nt, l, lt, k));
    const int a = 2 * n + l, b = 2 * nt + lt;
    double total = 0.0;
    for (int q = -std::min(l, lt); q <= std::min(l, lt); ++q) {
        const int aq = std::abs(q);
        // Axis value of the kernel integral: a one-dimensional beta moment of
        // the two associated Legendre functions.
        double lognorm = 0.5 * (ln_gamma(l - aq + 1.0) - ln_gamma(l + aq + 1.0) + ln_gamma(lt - aq + 1.0) -
                                ln_gamma(lt + aq + 1.0));
        double norm = std::sqrt((2.0 * l + 1.0) * (2.0 * lt + 1.0)) / (4.0 * kPi) * std::exp(lognorm);
        if (aq % 2) norm = -norm;
        // P_lt^q(cos) carries sin^q; P_l^q(sin) is odd when l - q is odd.
        double order = a + aq + ((l - aq) % 2);
        auto f = [&](double th) {
            double sn = std::sin(th), cs = std::cos(th);
            return std::pow(sn, a) * std::pow(cs, b) * assoc_legendre(l, aq, sn) * assoc_legendre(lt, aq, cs);
        };
        double axis = norm * integrate_beta_symmetric(f, order, params, spec);
        cplx proj = mu_kernel_projection(n, nt, l, lt, k, q, -q, 0, params, spec);
        total += std::sqrt(4.0 * kPi / (2.0 * L + 1.0)) * axis * proj.real();
    }
    return pref2 * total;
}

}  // namespace sboltz
