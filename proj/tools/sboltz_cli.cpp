#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>

#include "sboltz/cascade.hpp"
#include "sboltz/coefficients.hpp"
#include "sboltz/diagnostics_io.hpp"
#include "sboltz/errors.hpp"
#include "sboltz/galerkin.hpp"
#include "sboltz/verify.hpp"

namespace {

using namespace sboltz;
using nlohmann::json;
namespace fs = std::filesystem;

enum Exit : int { kOk = 0, kIo = 1, kNumeric = 2, kAdmissibility = 3, kVerifyFailed = 5, kUsage = 64 };

struct RunConfig {
    double s = 0.5;
    double kappa_beta = 1.0;
    int n_max_energy = 8;
    std::string method = "galerkin";
    double t_end = 1.0;
    double dt_init = 1e-2;
    double rel_tol = 1e-8;
    double c0 = 0.0;
    int n_outputs = 101;
    std::string init_path, table_path, out_path;
    std::string format = "binary";
    std::uint64_t seed = 1;
    int threads = 0;
    std::vector<std::string> suites;
    double extent = 8.0;
    int points = 64;
    double time = 0.0;
};

std::string table_dir() {
    const char* env = std::getenv("SBOLTZ_TABLE_DIR");
    return env && *env ? env : ".";
}

std::string default_table_path(const RunConfig& c) {
    return (fs::path(table_dir()) / ("table_s" + format_double(c.s) + "_N" + std::to_string(c.n_max_energy) + ".tbl"))
        .string();
}

int worker_count(const RunConfig& c) {
    return c.threads > 0 ? c.threads : int(std::max(1u, std::thread::hardware_concurrency()));
}

KernelParams kernel(const RunConfig& c) {
    KernelParams p;
    p.s = c.s;
    p.kappa_beta = c.kappa_beta;
    return p;
}

// --table if given; otherwise the default file in the table directory, built in
// memory when it does not exist.
CoeffTable obtain_table(const RunConfig& c) {
    if (!c.table_path.empty()) return read_table(c.table_path);
    std::string path = default_table_path(c);
    if (fs::exists(path)) return read_table(path);
    std::cerr << "note: " << path << " not found, building the table in memory\n";
    return build_table(c.n_max_energy, kernel(c), {}, worker_count(c));
}

int cmd_coeffs(const RunConfig& c) {
    CoeffTable t = build_table(c.n_max_energy, kernel(c), {}, worker_count(c));
    std::string out = c.out_path.empty() ? default_table_path(c) : c.out_path;
    write_table(t, out, c.format == "json" ? TableFormat::json : TableFormat::binary);
    SpectralBand band = spectral_bound_audit(t.n_max_energy, t);
    std::cout << "table: " << out << "\n"
              << "digest: " << table_digest(t) << "\n"
              << "s=" << t.params.s << " kappa_beta=" << t.params.kappa_beta << " N=" << t.n_max_energy << "\n"
              << "lambda(0,0)=" << t.lambda(0, 0) << " lambda(1,0)=" << t.lambda(1, 0)
              << " lambda(0,1)=" << t.lambda(0, 1) << "\n"
              << "spectral gap lambda(2,0)=" << format_double(t.lambda(2, 0)) << "\n"
              << "spectral band c_low=" << band.c_low << " c_high=" << band.c_high << "\n"
              << "entries: linear=" << t.linear.size() << " rad1=" << t.rad1.size() << " rad2=" << t.rad2.size()
              << " mu=" << t.mu.size() << "\n";
    return kOk;
}

std::vector<double> uniform_times(double t_end, int n) {
    if (t_end == 0.0 || n <= 1) return {t_end};
    std::vector<double> out;
    for (int k = 0; k < n; ++k) out.push_back(t_end * k / (n - 1));
    return out;
}

std::string with_suffix(const std::string& base, const std::string& suffix) {
    return base.empty() ? std::string() : base + suffix;
}

int cmd_solve(const RunConfig& c) {
    SpectralState init = read_init(c.init_path);  // admissibility gate
    CoeffTable table = obtain_table(c);
    const int N = std::min(c.n_max_energy, table.n_max_energy);
    if (init.max_energy() > N)
        throw SupportError("init data reaches energy " + std::to_string(init.max_energy()) + " above N=" +
                           std::to_string(N));
    const std::vector<double> times = uniform_times(c.t_end, c.n_outputs);
    const std::vector<ModeIndex> modes = modes_up_to(N);
    json report = {{"method", c.method}, {"n_max_energy", N}, {"t_end", c.t_end}, {"rel_tol", c.rel_tol},
                   {"table_digest", table_digest(table)}, {"init_norm", init.norm()}};

    std::vector<SpectralState> gal, cas;
    if (c.method == "galerkin" || c.method == "both") {
        QuadraticSystem sys = assemble(table, N);
        IntegrateOptions opt;
        opt.t_end = c.t_end;
        opt.dt_init = c.dt_init;
        opt.rel_tol = c.rel_tol;
        opt.c0 = c.c0;
        opt.output_times = times;
        IntegrationResult run = integrate(sys, init, opt);
        gal = run.trajectory;
        if (!c.out_path.empty()) write_series(series_from_run(run), modes, with_suffix(c.out_path, "_galerkin.csv"));
        const SolveReport& r = run.report;
        report["galerkin"] = {{"steps_accepted", r.steps_accepted},
                              {"steps_rejected", r.steps_rejected},
                              {"final_l2_norm", r.l2_norm.back()},
                              {"final_dissipation", r.dissipation_integral.back()},
                              {"min_decay_margin", *std::min_element(r.decay_bound_margin.begin(),
                                                                     r.decay_bound_margin.end())}};
    }
    if (c.method == "cascade" || c.method == "both") {
        CascadeSolution sol = cascade_solve(init, table, N);
        Series series;
        series.times = times;
        std::vector<double> norms;
        for (double t : times) {
            cas.push_back(evaluate_solution(sol, t));
            norms.push_back(cas.back().norm());
        }
        series.states = cas;
        series.monitors = {{"l2_norm", norms}};
        if (!c.out_path.empty()) write_series(series, modes, with_suffix(c.out_path, "_cascade.csv"));
        report["cascade"] = {{"final_l2_norm", norms.back()}};
    }
    if (c.method == "both") {
        double worst = 0.0, scale = std::max(init.norm(), 1e-300);
        for (std::size_t k = 0; k < times.size(); ++k) {
            double d = 0.0;
            for (const ModeIndex& m : modes) d += std::norm(gal[k].get(m) - cas[k].get(m));
            worst = std::max(worst, std::sqrt(d) / scale);
        }
        report["max_discrepancy"] = worst;
        std::cout << "max cascade/galerkin discrepancy (relative to |g0|): " << worst << "\n";
    }
    if (!c.out_path.empty()) write_report(report, with_suffix(c.out_path, "_report.json"));
    std::cout << report.dump(2) << "\n";
    return kOk;
}

int cmd_verify(const RunConfig& c) {
    for (const std::string& s : c.suites)
        if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end()) {
            std::cerr << "error: unknown suite '" << s << "'\n";
            return kUsage;
        }
    CoeffTable table = obtain_table(c);
    json verdict = {{"table_digest", table_digest(table)}, {"n_max_energy", table.n_max_energy}};
    json results = json::array();
    std::vector<std::string> failed;
    for (const std::string& s : c.suites) {
        SuiteResult r = run_suite(s, table);
        results.push_back(suite_json(r));
        if (!r.passed) failed.push_back(s);
    }
    verdict["suites"] = results;
    verdict["passed"] = failed.empty();
    verdict["failed"] = failed;
    std::cout << verdict.dump(2) << "\n";
    if (!c.out_path.empty()) write_report(verdict, c.out_path);
    if (!failed.empty()) {
        std::cerr << "verification failed:";
        for (const std::string& s : failed) std::cerr << ' ' << s;
        std::cerr << "\n";
        return kVerifyFailed;
    }
    return kOk;
}

int cmd_reconstruct(const RunConfig& c) {
    SpectralState state = read_init(c.init_path);
    if (c.time > 0.0) {
        CoeffTable table = obtain_table(c);
        const int N = std::min(c.n_max_energy, table.n_max_energy);
        state = evaluate_solution(cascade_solve(state, table, N), c.time);
    }
    VelocityGrid grid{c.extent, c.points};
    DensityField f = reconstruct_f(state, grid);
    double fmax = 0.0, fmin = f.values.empty() ? 0.0 : f.values[0];
    for (double v : f.values) fmax = std::max(fmax, std::abs(v)), fmin = std::min(fmin, v);
    json report = {{"t", c.time},
                   {"extent", c.extent},
                   {"points_per_axis", c.points},
                   {"mass", field_integral(f)},
                   {"max_abs_f", fmax},
                   {"min_f", fmin},
                   {"max_imag_residual", f.max_imag_residual}};
    std::cout << report.dump(2) << "\n";
    if (!c.out_path.empty()) write_report(report, c.out_path);
    return kOk;
}

void add_kernel_flags(CLI::App* cmd, RunConfig& c) {
    cmd->add_option("--s", c.s, "kernel singularity exponent, in (0,1)")
        ->check(CLI::Validator(
            [](std::string& v) {
                double x = std::stod(v);
                return x > 0.0 && x < 1.0 ? std::string() : std::string("s must lie in (0,1)");
            },
            "in (0,1)"));
    cmd->add_option("--kappa-beta", c.kappa_beta, "kernel normalization")->check(CLI::PositiveNumber);
    cmd->add_option("--nmax", c.n_max_energy, "largest energy 2n+l")->check(CLI::Range(2, 64));
    cmd->add_option("--threads", c.threads, "worker threads (0: available parallelism)")->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig c;
    CLI::App app{"Spectral solver for the homogeneous non-cutoff Boltzmann equation (Maxwellian molecules)"};
    app.require_subcommand(1);

    auto* coeffs = app.add_subcommand("coeffs", "build and write a coefficient table");
    add_kernel_flags(coeffs, c);
    coeffs->add_option("--out", c.out_path, "output table path");
    coeffs->add_option("--format", c.format, "table encoding")->check(CLI::IsMember({"binary", "json"}));

    auto* solve = app.add_subcommand("solve", "evolve initial data");
    add_kernel_flags(solve, c);
    solve->add_option("--init", c.init_path, "init JSON {\"n,l,m\": [re, im]}")->required();
    solve->add_option("--table", c.table_path, "coefficient table");
    solve->add_option("--method", c.method, "solver")->check(CLI::IsMember({"cascade", "galerkin", "both"}));
    solve->add_option("--t-end", c.t_end, "final time")->check(CLI::NonNegativeNumber);
    solve->add_option("--dt-init", c.dt_init, "initial step")->check(CLI::PositiveNumber);
    solve->add_option("--rel-tol", c.rel_tol, "integrator tolerance")->check(CLI::PositiveNumber);
    solve->add_option("--c0", c.c0, "weight rate for the decay monitor")->check(CLI::NonNegativeNumber);
    solve->add_option("--outputs", c.n_outputs, "number of output times")->check(CLI::Range(1, 1000000));
    solve->add_option("--out", c.out_path, "output prefix for CSV series and JSON report");
    solve->add_option("--seed", c.seed, "seed (recorded; solves are deterministic)");

    auto* verify = app.add_subcommand("verify", "run verification suites on a table");
    add_kernel_flags(verify, c);
    verify->add_option("--table", c.table_path, "coefficient table");
    c.suites = suite_names();
    verify->add_option("--suites", c.suites, "comma-separated suites")->delimiter(',')->expected(0, -1);
    verify->add_option("--out", c.out_path, "JSON verdict path");

    auto* recon = app.add_subcommand("reconstruct", "evaluate f = mu + sqrt(mu) g on a velocity grid");
    add_kernel_flags(recon, c);
    recon->add_option("--init", c.init_path, "state JSON")->required();
    recon->add_option("--table", c.table_path, "coefficient table (needed when --time > 0)");
    recon->add_option("--time", c.time, "evolve to this time first (cascade)")->check(CLI::NonNegativeNumber);
    recon->add_option("--extent", c.extent, "grid half-width")->check(CLI::PositiveNumber);
    recon->add_option("--points", c.points, "points per axis")->check(CLI::Range(2, 1024));
    recon->add_option("--out", c.out_path, "JSON summary path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*coeffs) return cmd_coeffs(c);
        if (*solve) return cmd_solve(c);
        if (*verify) {
            std::erase(c.suites, std::string());
            if (c.suites.empty()) {
                std::cerr << "error: empty suite list\n";
                return kUsage;
            }
            return cmd_verify(c);
        }
        if (*recon) return cmd_reconstruct(c);
    } catch (const AdmissibilityError& e) {
        std::cerr << "admissibility violation: " << e.what() << "\n";
        return kAdmissibility;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kIo;
    } catch (const Error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumeric;
    }
    return kUsage;
}
