#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <tuple>

#include "sboltz/cascade.hpp"
#include "sboltz/coefficients.hpp"
#include "sboltz/diagnostics_io.hpp"
#include "sboltz/errors.hpp"
#include "sboltz/galerkin.hpp"
#include "sboltz/verify.hpp"

namespace py = pybind11;
using namespace sboltz;

namespace {

using StateDict = std::map<std::tuple<int, int, int>, std::complex<double>>;

SpectralState to_state(const StateDict& d) {
    SpectralState s;
    for (const auto& [k, v] : d) s.coeffs[{std::get<0>(k), std::get<1>(k), std::get<2>(k)}] = v;
    s.reality_flag = s.reality_defect() == 0.0;
    return s;
}

StateDict to_dict(const SpectralState& s) {
    StateDict d;
    for (const auto& [m, v] : s.coeffs) d[{m.n, m.l, m.m}] = v;
    return d;
}

py::dict suite_dict(const SuiteResult& r) {
    py::dict d;
    d["name"] = r.name;
    d["passed"] = r.passed;
    d["metric"] = r.metric;
    d["threshold"] = r.threshold;
    d["detail"] = r.detail;
    d["seconds"] = r.seconds;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Spectral solver for the homogeneous non-cutoff Boltzmann equation with Maxwellian molecules";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<CoverageError>(m, "CoverageError", base.ptr());
    py::register_exception<AdmissibilityError>(m, "AdmissibilityError", base.ptr());
    py::register_exception<SupportError>(m, "SupportError", base.ptr());
    py::register_exception<StiffnessError>(m, "StiffnessError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());

    m.def("eigenvalue", [](int n, int l, double s, double kappa_beta) {
        return lambda_linear(n, l, KernelParams{s, kappa_beta});
    }, py::arg("n"), py::arg("l"), py::arg("s"), py::arg("kappa_beta") = 1.0);

    py::class_<CoeffTable>(m, "Table")
        .def_property_readonly("n_max_energy", [](const CoeffTable& t) { return t.n_max_energy; })
        .def_property_readonly("s", [](const CoeffTable& t) { return t.params.s; })
        .def_property_readonly("kappa_beta", [](const CoeffTable& t) { return t.params.kappa_beta; })
        .def_property_readonly("mu_entries", [](const CoeffTable& t) { return t.mu.size(); })
        .def_property_readonly("digest", [](const CoeffTable& t) { return table_digest(t); })
        .def("eigenvalue", &CoeffTable::lambda, py::arg("n"), py::arg("l"))
        .def("gamma_pair", [](const CoeffTable& t, std::tuple<int, int, int> a, std::tuple<int, int, int> b) {
            StateDict out;
            auto [an, al, am] = a;
            auto [bn, bl, bm] = b;
            for (const auto& [mode, w] : gamma_pair_expansion({an, al, am}, {bn, bl, bm}, t)) out[{mode.n, mode.l, mode.m}] += w;
            return out;
        }, py::arg("a"), py::arg("b"))
        .def("save", [](const CoeffTable& t, const std::string& path, const std::string& format) {
            if (format != "binary" && format != "json") throw DomainError("format must be 'binary' or 'json'");
            write_table(t, path, format == "json" ? TableFormat::json : TableFormat::binary);
        }, py::arg("path"), py::arg("format") = "binary")
        .def("__eq__", [](const CoeffTable& a, const CoeffTable& b) { return a == b; });

    m.def("build_table", [](int n_max_energy, double s, double kappa_beta, int threads) {
        py::gil_scoped_release release;
        return build_table(n_max_energy, KernelParams{s, kappa_beta}, {}, threads);
    }, py::arg("n_max_energy"), py::arg("s"), py::arg("kappa_beta") = 1.0, py::arg("threads") = 1);
    m.def("load_table", &read_table, py::arg("path"));

    m.def("parse_init", [](const std::string& text) { return to_dict(parse_init(text)); }, py::arg("text"));
    m.def("random_state", [](int max_energy, double norm, std::uint64_t seed) {
        return to_dict(random_admissible_state(max_energy, norm, seed));
    }, py::arg("max_energy"), py::arg("norm"), py::arg("seed"));

    m.def("solve_galerkin", [](const CoeffTable& t, const StateDict& init, double t_end, int n_outputs, double rel_tol,
                               int n_max_energy) {
        const int N = n_max_energy > 0 ? n_max_energy : t.n_max_energy;
        IntegrateOptions opt;
        opt.t_end = t_end;
        opt.n_outputs = n_outputs;
        opt.rel_tol = rel_tol;
        IntegrationResult run = integrate(assemble(t, N), to_state(init), opt);
        py::dict out;
        out["times"] = run.report.times;
        out["l2_norm"] = run.report.l2_norm;
        out["dissipation"] = run.report.dissipation_integral;
        std::vector<StateDict> states;
        for (const SpectralState& s : run.trajectory) states.push_back(to_dict(s));
        out["states"] = states;
        return out;
    }, py::arg("table"), py::arg("init"), py::arg("t_end"), py::arg("n_outputs") = 101, py::arg("rel_tol") = 1e-8,
       py::arg("n_max_energy") = 0);

    m.def("solve_cascade", [](const CoeffTable& t, const StateDict& init, const std::vector<double>& times,
                              int n_max_energy) {
        const int N = n_max_energy > 0 ? n_max_energy : t.n_max_energy;
        SpectralState st = to_state(init);
        require_admissible(st);
        CascadeSolution sol = cascade_solve(st, t, N);
        std::vector<StateDict> out;
        for (double time : times) out.push_back(to_dict(evaluate_solution(sol, time)));
        return out;
    }, py::arg("table"), py::arg("init"), py::arg("times"), py::arg("n_max_energy") = 0);

    m.def("reconstruct", [](const StateDict& state, double extent, int points) {
        DensityField f = reconstruct_f(to_state(state), VelocityGrid{extent, points});
        py::array_t<double> arr({points, points, points});
        std::copy(f.values.begin(), f.values.end(), arr.mutable_data());
        return arr;
    }, py::arg("state"), py::arg("extent") = 8.0, py::arg("points") = 64);

    m.def("suite_names", &suite_names);
    m.def("run_suite", [](const std::string& name, const CoeffTable& t) { return suite_dict(run_suite(name, t)); },
          py::arg("name"), py::arg("table"));
}
