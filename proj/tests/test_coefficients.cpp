#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sboltz/coefficients.hpp"
#include "sboltz/errors.hpp"

using namespace sboltz;
using std::numbers::pi;

namespace {

struct LambdaRef {
    double s;
    int n, l;
    double value;
};

// tools/oracles/lambda_oracle.py (mpmath, 40 digits, direct integrand).
const LambdaRef kLambdaRefs[] = {
    {0.25, 0, 2, 1.9838513156183320311}, {0.25, 2, 0, 1.3225675437455546874}, {0.25, 1, 2, 2.314493201554720703},
    {0.25, 0, 5, 4.6608245487358150546}, {0.25, 3, 2, 3.0570339747883791853}, {0.25, 0, 8, 6.7993026434288807118},
    {0.25, 4, 0, 2.4666653119489874656}, {0.25, 2, 4, 4.1883016625203674164}, {0.5, 0, 2, 3.6459518388446544819},
    {0.5, 2, 0, 2.4306345592297696546},  {0.5, 1, 2, 4.2536104786520968955},  {0.5, 0, 5, 9.3846646392426027923},
    {0.5, 3, 2, 5.8616026141154393216},  {0.5, 0, 8, 15.410321485583222235},  {0.5, 4, 0, 4.6081483726852540081},
    {0.5, 2, 4, 8.4240203260343177777},  {0.75, 0, 2, 9.1691800351445551662}, {0.75, 2, 0, 6.1127866900939106025},
    {0.75, 1, 2, 10.697376707664343554}, {0.75, 0, 5, 26.46979569618659566},  {0.75, 3, 2, 15.593619607914175401},
    {0.75, 0, 8, 49.86582848430911473},  {0.75, 4, 0, 11.851252214081950818}, {0.75, 2, 4, 23.765999305293789798},
};

const CoeffTable& table_quarter() {
    static const CoeffTable t = build_table(6, KernelParams{0.25, 1.0});
    return t;
}

const CoeffTable& table_half() {
    static const CoeffTable t = build_table(6, KernelParams{0.5, 1.0});
    return t;
}

void frame(const Vec3& k, Vec3& e1, Vec3& e2) {
    Vec3 ref = std::abs(k[0]) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    double d = ref[0] * k[0] + ref[1] * k[1] + ref[2] * k[2];
    Vec3 v{ref[0] - d * k[0], ref[1] - d * k[1], ref[2] - d * k[2]};
    double nv = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    e1 = {v[0] / nv, v[1] / nv, v[2] / nv};
    e2 = {k[1] * e1[2] - k[2] * e1[1], k[2] * e1[0] - k[0] * e1[2], k[0] * e1[1] - k[1] * e1[0]};
}

// Fourier transform of Q(sqrt(mu) phi_a, sqrt(mu) phi_b) at xi, straight from the
// sigma-integral: int b(k.s) [F_a(xi-) F_b(xi+) - F_a(0) F_b(xi)] ds with
// xi+- = |xi|/2 (k +- s). Half-angle substitution theta = 2 t, t in [0, pi/4].
cplx collision_fourier(const ModeIndex& a, const ModeIndex& b, const Vec3& xi, const KernelParams& kp,
                       const QuadratureSpec& spec) {
    const double r = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
    const Vec3 k{xi[0] / r, xi[1] / r, xi[2] / r};
    Vec3 e1, e2;
    frame(k, e1, e2);
    const int M = 2 * (a.l + b.l) + 9;
    const cplx fa0 = fourier_image(a, Vec3{0, 0, 0});
    const cplx fbxi = fourier_image(b, xi);
    auto integrand = [&](double t) {
        const double c2 = std::cos(2 * t), s2 = std::sin(2 * t);
        cplx acc = 0.0;
        for (int j = 0; j < M; ++j) {
            const double psi = 2 * pi * j / M;
            Vec3 plus, minus;
            for (int c = 0; c < 3; ++c) {
                double sig = c2 * k[c] + s2 * (std::cos(psi) * e1[c] + std::sin(psi) * e2[c]);
                plus[c] = 0.5 * r * (k[c] + sig);
                minus[c] = 0.5 * r * (k[c] - sig);
            }
            acc += fourier_image(a, minus) * fourier_image(b, plus) - fa0 * fbxi;
        }
        return acc / double(M);
    };
    return 2.0 * integrate_beta_moment_complex(integrand, 2.0, kp, spec);
}

cplx expansion_fourier(const Expansion& e, const Vec3& xi) {
    cplx acc = 0.0;
    for (const auto& [mode, w] : e) acc += w * fourier_image(mode, xi);
    return acc;
}

}  // namespace

TEST_SUITE("coefficients") {
    TEST_CASE("collision invariants have zero eigenvalue") {
        for (double s : {0.25, 0.5, 0.75}) {
            KernelParams kp{s, 1.0};
            CHECK(std::abs(lambda_linear(0, 0, kp)) <= 1e-10);
            CHECK(std::abs(lambda_linear(1, 0, kp)) <= 1e-10);
            CHECK(std::abs(lambda_linear(0, 1, kp)) <= 1e-10);
        }
    }

    TEST_CASE("eigenvalues match high-precision references") {
        for (const LambdaRef& ref : kLambdaRefs) {
            INFO("s=" << ref.s << " (n,l)=(" << ref.n << "," << ref.l << ")");
            CHECK(lambda_linear(ref.n, ref.l, KernelParams{ref.s, 1.0}) == doctest::Approx(ref.value).epsilon(1e-10));
        }
        // Scales linearly in the kernel normalization.
        CHECK(lambda_linear(0, 2, KernelParams{0.5, 3.0}) == doctest::Approx(3 * 3.6459518388446544819).epsilon(1e-10));
    }

    TEST_CASE("eigenvalue equals minus the loss and gain parts") {
        for (double s : {0.25, 0.5, 0.75}) {
            KernelParams kp{s, 1.0};
            for (int e = 0; e <= 12; ++e)
                for (int n = 0; 2 * n <= e; ++n) {
                    const int l = e - 2 * n;
                    double lam = lambda_linear(n, l, kp);
                    double resid = std::abs(lam + lambda1(n, l, kp) + lambda2(n, l, kp));
                    CHECK(resid <= 1e-9 * std::max(1.0, std::abs(lam)));
                }
        }
    }

    TEST_CASE("trig moments") {
        CHECK(trig_moment(2, 2, KernelParams{0.5, 1.0}) == doctest::Approx(1.21531727961488482728551831667).epsilon(1e-10));
        CHECK_THROWS_AS(trig_moment(1, 4, KernelParams{0.75, 1.0}), PreconditionError);
    }

    TEST_CASE("k_max follows the target degree") {
        CHECK(k_max(2, 2, 0) == 2);
        CHECK(k_max(2, 2, 1) == 1);
        CHECK(k_max(2, 3, 5) == 0);
        CHECK(k_max(1, 4, 0) == 1);
    }

    TEST_CASE("selection rules: forbidden target orders vanish") {
        KernelParams kp{0.5, 1.0};
        for (int m = -2; m <= 2; ++m)
            for (int mt = -2; mt <= 2; ++mt) {
                // Natural order outside the target degree: exactly zero, no quadrature.
                if (std::abs(m + mt) > 2) CHECK(mu_coefficient(0, 0, 2, 2, 1, m, mt, kp) == cplx(0.0));
                for (int ms = -2; ms <= 2; ++ms) {
                    if (ms == m + mt) continue;
                    CHECK(std::abs(mu_coefficient(0, 0, 2, 2, 1, m, mt, ms, kp)) < 1e-14);
                }
            }
        CHECK_THROWS_AS(mu_coefficient(0, 0, 2, 2, 1, 0, 0, 3, kp), IndexError);
    }

    TEST_CASE("conjugation symmetry of the couplings") {
        KernelParams kp{0.5, 1.0};
        for (int m = -2; m <= 2; ++m)
            for (int mt = -3; mt <= 3; ++mt)
                for (int k = 0; k <= k_max(2, 3, m + mt); ++k) {
                    cplx a = mu_coefficient(1, 0, 2, 3, k, m, mt, kp);
                    cplx b = mu_coefficient(1, 0, 2, 3, k, -m, -mt, kp);
                    CHECK(std::abs(a - std::conj(b)) < 1e-12 * std::max(1.0, std::abs(a)));
                }
    }

    TEST_CASE("sum of |mu|^2 by reduction agrees with brute force") {
        KernelParams kp{0.5, 1.0};
        struct T {
            int n, nt, l, lt, k, ms;
        };
        for (T t : {T{0, 0, 2, 2, 0, 0}, T{0, 0, 2, 2, 1, 1}, T{1, 0, 1, 3, 1, 2}, T{0, 1, 3, 1, 0, 3}, T{1, 1, 2, 2, 2, 0},
                    T{0, 0, 4, 2, 1, -2}}) {
            double red = musq_sum(t.n, t.nt, t.l, t.lt, t.k, t.ms, kp);
            double bf = musq_bruteforce(t.n, t.nt, t.l, t.lt, t.k, t.ms, kp);
            CHECK(std::abs(red - bf) <= 1e-8 * bf);
        }
    }

    TEST_CASE("Gamma expansion reproduces the Fourier-side collision integral") {
        // s = 1/4 keeps the cancellation in the oracle's integrand harmless.
        const CoeffTable& t = table_quarter();
        QuadratureSpec spec;
        const std::pair<ModeIndex, ModeIndex> pairs[] = {
            {{0, 2, 0}, {0, 2, 0}},  {{0, 2, 1}, {0, 2, -2}}, {{1, 1, 1}, {0, 2, 0}}, {{0, 3, -1}, {1, 0, 0}},
            {{1, 0, 0}, {0, 3, 2}},  {{0, 1, 1}, {0, 2, 0}},  {{2, 0, 0}, {0, 2, 1}}, {{0, 0, 0}, {0, 2, 1}},
            {{1, 2, -1}, {0, 1, 0}}, {{0, 2, -1}, {0, 1, -1}}, {{0, 4, 3}, {0, 2, -2}}, {{1, 0, 0}, {1, 0, 0}},
        };
        const Vec3 xis[] = {{0.4, -0.9, 0.7}, {1.3, 0.2, -0.5}};
        for (const auto& [a, b] : pairs) {
            Expansion e = gamma_pair_expansion(a, b, t);
            for (const ModeIndex& target : [&] {
                     std::vector<ModeIndex> v;
                     for (const auto& [m, w] : e) v.push_back(m);
                     return v;
                 }())
                CHECK(target.energy() == a.energy() + b.energy());
            for (const Vec3& xi : xis) {
                cplx direct = collision_fourier(a, b, xi, t.params, spec);
                cplx series = expansion_fourier(e, xi);
                INFO("pair " << a << " x " << b << " direct " << direct << " series " << series);
                CHECK(std::abs(direct - series) <= 1e-8 * std::max(1e-3, std::abs(direct)));
            }
        }
    }

    TEST_CASE("Gamma expansion at s = 1/2 (looser: cancellation in the oracle)") {
        const CoeffTable& t = table_half();
        QuadratureSpec spec;
        spec.rel_tol = 1e-8;
        const std::pair<ModeIndex, ModeIndex> pairs[] = {{{0, 2, 0}, {0, 2, 0}}, {{1, 1, -1}, {0, 2, 2}}, {{0, 3, 1}, {1, 0, 0}}};
        for (const auto& [a, b] : pairs) {
            Vec3 xi{0.8, 0.3, -0.6};
            cplx direct = collision_fourier(a, b, xi, t.params, spec);
            cplx series = expansion_fourier(gamma_pair_expansion(a, b, t), xi);
            CHECK(std::abs(direct - series) <= 1e-6 * std::max(1e-3, std::abs(direct)));
        }
    }

    TEST_CASE("linear part: Gamma against the Maxwellian is minus L") {
        // Gamma(phi_000, f) + Gamma(f, phi_000) = -L f for the eigenbasis.
        const CoeffTable& t = table_half();
        for (const ModeIndex& f : {ModeIndex{0, 2, 1}, ModeIndex{2, 0, 0}, ModeIndex{1, 2, -2}, ModeIndex{0, 3, 0}}) {
            std::map<ModeIndex, cplx> sum;
            for (const auto& [m, w] : gamma_pair_expansion({0, 0, 0}, f, t)) sum[m] += w;
            for (const auto& [m, w] : gamma_pair_expansion(f, {0, 0, 0}, t)) sum[m] += w;
            for (const auto& [m, w] : sum) {
                cplx expect = m == f ? cplx(-t.lambda(f.n, f.l)) : cplx(0.0);
                CHECK(std::abs(w - expect) < 1e-10 * t.lambda(f.n, f.l));
            }
        }
    }

    TEST_CASE("table build is deterministic and independent of the worker count") {
        KernelParams kp{0.5, 1.0};
        CoeffTable a = build_table(5, kp, {}, 1), b = build_table(5, kp, {}, 3);
        CHECK(a == b);
        CHECK(a.mu.size() > 0);
        CHECK_THROWS_AS(build_table(1, kp), PreconditionError);
        CHECK_THROWS_AS(build_table(4, KernelParams{1.5, 1.0}), DomainError);
    }

    TEST_CASE("coverage is enforced") {
        const CoeffTable& t = table_half();
        CHECK_THROWS_AS(t.lambda(4, 0), CoverageError);
        CHECK_THROWS_AS(gamma_pair_expansion({0, 4, 0}, {0, 4, 0}, t), CoverageError);
        CHECK_THROWS_AS(t.mu_value({0, 0, 1, 2, 0, 0, 0}), CoverageError);  // collision-invariant source
        CHECK(t.mu_value({0, 0, 2, 2, 0, 2, 2}) == t.mu.at({0, 0, 2, 2, 0, 2, 2}));
    }

    TEST_CASE("orthogonality of coupling rows") {
        const CoeffTable& t = table_half();
        OrthogonalityReport r = verify_orthogonality(0, 0, 2, 2, t);
        CHECK(r.pairs_checked > 0);
        CHECK(r.max_violation < 1e-10);
    }

    TEST_CASE("spectral band and bound audits are finite") {
        const CoeffTable& t = table_half();
        SpectralBand band = spectral_bound_audit(6, t);
        CHECK(band.c_low > 0.05);
        CHECK(band.c_high / band.c_low < 50);
        CHECK(audit_rad1_bound(t).finite());
        CHECK(audit_rad2_bound(t).finite());
        CHECK(audit_mu_sum_bound(t).finite());
        CHECK(audit_cr_bound(t).finite());
        // Gamma(x + a + 1) / Gamma(x + b + 1) ~ x^(a - b).
        BoundFit g = audit_gamma_ratio(2.5, 1.0, 1.0, 1e6, 40);
        CHECK(g.constant < 2.0);
        CHECK(g.min_ratio > 0.5);
    }

    TEST_CASE("the full operator does not vanish on collision-invariant pairs") {
        // Gamma(phi_010, phi_010) != 0; only the admissible projection drops such sources.
        double largest = 0.0;
        for (const auto& [m, w] : gamma_pair_expansion({0, 1, 0}, {0, 1, 0}, table_half())) {
            CHECK(m.energy() == 2);
            largest = std::max(largest, std::abs(w));
        }
        CHECK(largest > 1e-3);
    }
}
