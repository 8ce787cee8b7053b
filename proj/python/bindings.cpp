#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "nhrmt/analytic.hpp"
#include "nhrmt/archive.hpp"
#include "nhrmt/edgegap.hpp"
#include "nhrmt/eigensolve.hpp"
#include "nhrmt/ensembles.hpp"
#include "nhrmt/harness.hpp"
#include "nhrmt/neighbors.hpp"
#include "nhrmt/pentadiagonal.hpp"
#include "nhrmt/specfun.hpp"
#include "nhrmt/stats.hpp"

namespace py = pybind11;
using namespace nhrmt;
using cplx = std::complex<double>;

namespace {

py::array_t<cplx> to_array(const std::vector<cplx>& v) {
    py::array_t<cplx> a(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

std::vector<cplx> from_array(const py::array_t<cplx, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 1) throw py::value_error("expected a 1-D array of complex points");
    return {a.data(), a.data() + a.size()};
}

EnsembleSpec make_spec(const std::string& ensemble, int n, std::uint64_t seed, std::optional<double> tau,
                       std::uint64_t sample_index) {
    EnsembleSpec s;
    s.cls = parse_ensemble(ensemble);
    s.n = n;
    s.seed = seed;
    s.tau = tau;
    s.sample_index = sample_index;
    s.validate();
    return s;
}

py::dict moments_dict(const StatAccumulator& acc) {
    py::dict d;
    d["count"] = acc.ratio_count();
    if (acc.ratio_count() < 2) return d;
    const auto m = moments(acc);
    d["spectra"] = m.spectra;
    for (int k = 0; k < kMomentCount; ++k)
        d[moment_key(static_cast<Moment>(k))] = py::make_tuple(m.values[k].mean, m.values[k].stderr_);
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Spacing ratios and spacing statistics of non-Hermitian random matrices";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
    py::register_exception<InsufficientDataError>(m, "InsufficientDataError", base.ptr());
    auto io = py::register_exception<IoError>(m, "IoError", base.ptr());
    py::register_exception<CorruptArchiveError>(m, "CorruptArchiveError", io.ptr());

    // special functions
    m.def("regularized_gamma_q", py::vectorize(regularized_gamma_q), py::arg("a"), py::arg("x"));
    m.def("regularized_gamma_p", py::vectorize(regularized_gamma_p), py::arg("a"), py::arg("x"));
    m.def("erf_complex", [](cplx z) { return erf_complex(z); }, py::arg("z"));
    m.def("erfc_complex", [](cplx z) { return erfc_complex(z); }, py::arg("z"));
    m.def("kummer_1f1", [](double a, double b, double x) { return kummer_1f1(a, b, x); }, py::arg("a"),
          py::arg("b"), py::arg("x"));

    // ensembles and spectra
    m.def("sample_matrix",
          [](const std::string& ensemble, int n, std::uint64_t seed, std::optional<double> tau,
             std::uint64_t sample_index) { return sample_matrix(make_spec(ensemble, n, seed, tau, sample_index)); },
          py::arg("ensemble"), py::arg("n"), py::arg("seed") = 0, py::arg("tau") = py::none(),
          py::arg("sample_index") = 0);
    m.def("spectrum",
          [](const std::string& ensemble, int n, std::uint64_t seed, std::optional<double> tau,
             std::uint64_t sample_index) {
              const auto spec = make_spec(ensemble, n, seed, tau, sample_index);
              return to_array(produce_spectrum(spec, sample_index).eigenvalues);
          },
          "Eigenvalues on the unit-disc scale; class AII-dagger pairs collapsed.", py::arg("ensemble"), py::arg("n"),
          py::arg("seed") = 0, py::arg("tau") = py::none(), py::arg("sample_index") = 0);
    m.def("eigenvalues", [](const Eigen::MatrixXcd& a) { return to_array(eigenvalues(a).eigenvalues); },
          py::arg("matrix"));

    // neighbours
    m.def(
        "ratios",
        [](const py::array_t<cplx, py::array::c_style | py::array::forcecast>& pts, int n_effective) {
            const auto points = from_array(pts);
            const auto bounds = RegionBounds::defaults(n_effective > 0 ? n_effective : static_cast<int>(points.size()));
            const auto s = analyze_spectrum(points, bounds, nullptr, UnfoldPolicy::NONE, false);
            std::vector<cplx> lambda;
            std::vector<std::string> region;
            std::vector<double> nn, nnn;
            for (const auto& r : s.ratios) {
                lambda.push_back(r.lambda);
                region.push_back(to_string(r.region));
                nn.push_back(r.nn_dist);
                nnn.push_back(r.nnn_dist);
            }
            py::dict d;
            d["lambda"] = to_array(lambda);
            d["region"] = region;
            d["nn"] = py::array_t<double>(static_cast<py::ssize_t>(nn.size()), nn.data());
            d["nnn"] = py::array_t<double>(static_cast<py::ssize_t>(nnn.size()), nnn.data());
            return d;
        },
        "Complex spacing ratio, region and neighbour distances of every point.", py::arg("points"),
        py::arg("n_effective") = 0);

    // analytic curves
    m.def("density_ginue", py::vectorize(density_ginue), py::arg("r"), py::arg("n"));
    m.def("density_ai_dag", py::vectorize(density_ai_dag), py::arg("r"), py::arg("n"));
    m.def("ginibre_nn", py::vectorize(ginibre_nn), py::arg("s"), py::arg("n"));
    m.def("ginibre_nnn", py::vectorize(ginibre_nnn), py::arg("s"), py::arg("n"));
    m.def("ginibre_rescale_constant", &ginibre_rescale_constant, py::arg("n"));
    m.def("poisson_nn", py::vectorize(poisson_nn), py::arg("s"));
    m.def("poisson_nnn", py::vectorize(poisson_nnn), py::arg("s"));
    auto variant = [](bool conditional) {
        return conditional ? SurmiseVariant::CONDITIONAL : SurmiseVariant::UNCONDITIONAL;
    };
    m.def("surmise",
          [variant](py::array_t<double> x, py::array_t<double> y, double tau, bool conditional) {
              const SurmiseParams p{tau, variant(conditional)};
              p.validate();
              return py::vectorize([&p](double a, double b) { return surmise_eginue(a, b, p); })(x, y);
          },
          py::arg("x"), py::arg("y"), py::arg("tau") = 0.0, py::arg("conditional") = true);
    m.def("surmise_normalization",
          [variant](double tau, bool conditional) { return surmise_normalization({tau, variant(conditional)}); },
          py::arg("tau"), py::arg("conditional") = true);
    m.def("hermitian_limit_marginal",
          [variant](py::array_t<double> x, bool conditional) {
              const auto v = variant(conditional);
              return py::vectorize([v](double a) { return hermitian_limit_marginal(a, v); })(x);
          },
          py::arg("x"), py::arg("conditional") = true);
    m.def("finite_n_conditional_ratio",
          [](double x, double y, int n) { return finite_n_conditional_ratio(x, y, PentadiagonalSpec::gaussian(n)); },
          py::arg("x"), py::arg("y"), py::arg("n"));

    // edge
    m.def("conditional_kernel_finite", &conditional_kernel_finite, py::arg("z"), py::arg("u_bar"), py::arg("z0"),
          py::arg("n"));
    m.def("edge_kernel",
          [](cplx xi1, cplx xi2_bar, double d) {
              EdgeKernelParams p;
              p.d = d;
              return edge_kernel(xi1, xi2_bar, p);
          },
          py::arg("xi1"), py::arg("xi2_bar"), py::arg("d") = 0.0);
    m.def("gap_first_order",
          [](py::array_t<double> s, double d) {
              EdgeKernelParams p;
              p.d = d;
              return py::vectorize([&p](double v) { return gap_first_order(v, p); })(s);
          },
          py::arg("s"), py::arg("d") = 0.0);
    m.def("gap_small_s_coefficient", &gap_small_s_coefficient, py::arg("d"));

    // harness
    m.def(
        "run",
        [](const std::string& config_json, const std::string& output_dir) {
            const auto cfg = config_from_json(config_json);
            ExperimentResult r;
            {
                py::gil_scoped_release release;
                r = run(cfg);
                if (!output_dir.empty()) write_outputs(r, cfg, output_dir);
            }
            py::dict d;
            d["samples"] = r.samples;
            d["total_points"] = r.total_points;
            d["neither"] = r.neither;
            for (Region reg : {Region::BULK, Region::EDGE, Region::EDGE_EXT})
                d[to_string(reg).c_str()] = moments_dict(r.region(reg));
            return d;
        },
        "Run an experiment from a JSON config; returns moments per region as (mean, stderr).",
        py::arg("config_json"), py::arg("output_dir") = "");
    m.def(
        "load_archive",
        [](const std::filesystem::path& path) {
            py::list out;
            for (const auto& s : load_archive(path)) out.append(to_array(s.eigenvalues));
            return out;
        },
        py::arg("path"));
    m.def(
        "save_archive",
        [](const std::vector<py::array_t<cplx, py::array::c_style | py::array::forcecast>>& spectra,
           const std::filesystem::path& path) {
            std::vector<Spectrum> v;
            for (const auto& a : spectra) v.push_back({from_array(a), {}, false});
            save_archive(v, path);
        },
        py::arg("spectra"), py::arg("path"));
}
