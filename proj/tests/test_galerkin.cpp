#include <doctest.h>

#include <cmath>

#include "sboltz/cascade.hpp"
#include "sboltz/errors.hpp"
#include "sboltz/galerkin.hpp"

using namespace sboltz;

namespace {

const CoeffTable& table8() {
    static const CoeffTable t = build_table(8, KernelParams{0.5, 1.0});
    return t;
}

double distance(const SpectralState& a, const SpectralState& b) {
    double acc = 0.0;
    for (const auto& [m, v] : a.coeffs) acc += std::norm(v - b.get(m));
    for (const auto& [m, v] : b.coeffs)
        if (!a.coeffs.contains(m)) acc += std::norm(v);
    return std::sqrt(acc);
}

}  // namespace

TEST_SUITE("galerkin") {
    TEST_CASE("assembled system") {
        QuadraticSystem sys = assemble(table8(), 6);
        CHECK(sys.modes == modes_up_to(6));
        CHECK(sys.lambda_20 == table8().lambda(2, 0));
        for (std::size_t i = 0; i < sys.modes.size(); ++i) {
            if (sys.modes[i].collision_invariant()) CHECK(sys.linear[i] == 0.0);
            else CHECK(sys.linear[i] > 0.0);
        }
        for (const auto& q : sys.quad)
            CHECK(sys.modes[q.target].energy() == sys.modes[q.a].energy() + sys.modes[q.b].energy());
        CHECK_THROWS_AS(assemble(table8(), 10), CoverageError);
        CHECK_THROWS_AS(sys.mode_index({0, 7, 0}), SupportError);
    }

    TEST_CASE("collision-invariant states produce no quadratic term") {
        QuadraticSystem sys = assemble(table8(), 8);
        SpectralState s;
        s.coeffs[{0, 1, 0}] = 0.3;
        s.coeffs[{1, 0, 0}] = -0.2;
        s.coeffs[{0, 0, 0}] = 0.1;
        SpectralState g = apply_gamma(sys, s);
        for (const auto& [m, v] : g.coeffs) CHECK(v == cplx(0.0));
        SpectralState l = apply_L(sys, s);
        for (const auto& [m, v] : l.coeffs) CHECK(v == cplx(0.0));
    }

    TEST_CASE("apply_gamma agrees with the pair expansions") {
        const CoeffTable& t = table8();
        QuadraticSystem sys = assemble(t, 8);
        SpectralState f, g;
        f.coeffs[{0, 2, 1}] = {0.4, 0.1};
        f.coeffs[{1, 1, 0}] = -0.3;
        g.coeffs[{2, 0, 0}] = 0.7;
        g.coeffs[{0, 3, -2}] = {0.0, 0.2};
        SpectralState out = apply_gamma_bilinear(sys, f, g);
        std::map<ModeIndex, cplx> expect;
        for (const auto& [a, ca] : f.coeffs)
            for (const auto& [b, cb] : g.coeffs) {
                if (a.energy() + b.energy() > 8) continue;
                for (const auto& [m, w] : gamma_pair_expansion(a, b, t)) expect[m] += w * ca * cb;
            }
        for (const auto& [m, v] : out.coeffs) CHECK(std::abs(v - expect[m]) < 1e-15);
    }

    TEST_CASE("a linear-only mode decays exactly") {
        QuadraticSystem sys = assemble(table8(), 8);
        SpectralState s;
        s.coeffs[{0, 5, 3}] = 1e-3;  // no quadratic feedback below energy 10
        IntegrateOptions opt;
        opt.t_end = 2.0;
        opt.rel_tol = 1e-10;
        opt.output_times = {0.5, 1.0, 2.0};
        IntegrationResult r = integrate(sys, s, opt);
        const double lam = table8().lambda(0, 5);
        for (std::size_t k = 0; k < r.report.times.size(); ++k) {
            double expect = 1e-3 * std::exp(-lam * r.report.times[k]);
            CHECK(std::abs(r.trajectory[k].get({0, 5, 3}) - expect) < 1e-8 * expect);
            // Dissipation integral: int lambda |g|^2 = (1 - e^{-2 lam t}) |g0|^2 / 2.
            double diss = 0.5 * 1e-6 * (1 - std::exp(-2 * lam * r.report.times[k]));
            CHECK(r.report.dissipation_integral[k] == doctest::Approx(diss).epsilon(1e-4));
        }
    }

    TEST_CASE("Galerkin and cascade agree") {
        const CoeffTable& t = table8();
        QuadraticSystem sys = assemble(t, 8);
        SpectralState init = random_admissible_state(6, 0.05, 7);
        CHECK(init.admissible());
        CHECK(init.reality_flag);
        CHECK(init.norm() == doctest::Approx(0.05).epsilon(1e-14));
        IntegrateOptions opt;
        opt.t_end = 2.0;
        opt.n_outputs = 5;
        IntegrationResult r = integrate(sys, init, opt);
        CascadeSolution sol = cascade_solve(init, t, 8);
        for (std::size_t k = 0; k < r.report.times.size(); ++k)
            CHECK(distance(r.trajectory[k], evaluate_solution(sol, r.report.times[k])) < 1e-7 * init.norm());
        CHECK(r.trajectory.back().reality_defect() < 1e-15);
    }

    TEST_CASE("t_end = 0 returns the initial state") {
        QuadraticSystem sys = assemble(table8(), 6);
        SpectralState init = random_admissible_state(4, 1e-2, 3);
        IntegrateOptions opt;
        opt.t_end = 0.0;
        IntegrationResult r = integrate(sys, init, opt);
        REQUIRE(r.report.times.size() == 1);
        CHECK(distance(r.trajectory[0], init) == 0.0);
    }

    TEST_CASE("input validation") {
        QuadraticSystem sys = assemble(table8(), 6);
        SpectralState bad;
        bad.coeffs[{1, 0, 0}] = 1.0;
        CHECK_THROWS_AS(integrate(sys, bad, {}), AdmissibilityError);
        SpectralState high;
        high.coeffs[{0, 7, 0}] = 1.0;
        CHECK_THROWS_AS(integrate(sys, high, {}), SupportError);
        IntegrateOptions opt;
        opt.output_times = {0.5, 0.2};
        CHECK_THROWS_AS(integrate(sys, random_admissible_state(4, 1e-3, 1), opt), DomainError);
    }

    TEST_CASE("overflowing data is reported") {
        // The energy cascade is triangular, so only overflow can stop the run.
        QuadraticSystem sys = assemble(table8(), 8);
        IntegrateOptions opt;
        opt.t_end = 1.0;
        CHECK_THROWS_AS(integrate(sys, random_admissible_state(4, 1e200, 5), opt), StiffnessError);
    }

    TEST_CASE("weighted norm") {
        SpectralState s;
        s.coeffs[{0, 2, 0}] = 0.5;
        s.coeffs[{1, 2, 1}] = {0.0, 0.25};
        double expect = std::sqrt(std::exp(2 * 0.3 * std::sqrt(3.5)) * 0.25 + std::exp(2 * 0.3 * std::sqrt(5.5)) * 0.0625);
        CHECK(weighted_norm(s, 0.3, 0.5) == doctest::Approx(expect).epsilon(1e-14));
        CHECK(weighted_norm(s, 0.0, 0.5) == doctest::Approx(s.norm()).epsilon(1e-15));
        CHECK_THROWS_AS(weighted_norm(s, 1e3, 0.5), OverflowError);
    }

    TEST_CASE("measured weight is sharp and above the linear bound") {
        QuadraticSystem sys = assemble(table8(), 8);
        IntegrateOptions opt;
        opt.t_end = 3.0;
        opt.n_outputs = 61;
        IntegrationResult run = integrate(sys, random_admissible_state(8, 1e-3, 11), opt);
        double c0 = measure_c0(run, sys, 0.0);
        double bound = linear_c0_bound(sys);
        // Every mode decaying at the linear bound is sufficient, not necessary.
        CHECK(c0 >= 0.99 * bound);
        const double g0 = run.report.l2_norm.front();
        auto holds = [&](double c) {
            std::vector<double> w = weighted_norm_series(run, c, sys.s);
            for (std::size_t k = 0; k < w.size(); ++k)
                if (w[k] > std::exp(-0.25 * sys.lambda_20 * run.report.times[k]) * g0) return false;
            return true;
        };
        CHECK(holds(c0));
        CHECK_FALSE(holds(1.01 * c0));
    }
}
