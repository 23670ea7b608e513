#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "kswave/analysis.hpp"
#include "kswave/chemo.hpp"
#include "kswave/error.hpp"
#include "kswave/harness.hpp"
#include "kswave/model.hpp"
#include "kswave/spectral.hpp"
#include "kswave/stepper.hpp"

namespace py = pybind11;
using namespace kswave;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::array_t<double> to_numpy(const std::vector<double>& v)
{
    return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

std::vector<double> from_numpy(const Array& a)
{
    if (a.ndim() != 1) throw ValidationError("expected a 1-d array");
    return {a.data(), a.data() + a.size()};
}

GrowthProfile profile_from(const std::vector<std::pair<double, double>>& pts)
{
    std::vector<Breakpoint> bp;
    for (const auto& [x, r] : pts) bp.push_back({x, r});
    return GrowthProfile(std::move(bp));
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Keller-Segel forced waves in a shifting habitat";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    py::class_<SimParams>(m, "SimParams")
        .def(py::init([](double chi, double mu, double nu, double b, double c) {
                 return SimParams{chi, mu, nu, b, c};
             }),
             py::arg("chi") = 0.0, py::arg("mu") = 1.0, py::arg("nu") = 1.0, py::arg("b") = 1.0,
             py::arg("c") = 0.0)
        .def_readwrite("chi", &SimParams::chi)
        .def_readwrite("mu", &SimParams::mu)
        .def_readwrite("nu", &SimParams::nu)
        .def_readwrite("b", &SimParams::b)
        .def_readwrite("c", &SimParams::c)
        .def("validate", &SimParams::validate)
        .def("__repr__", [](const SimParams& p) {
            return "SimParams(chi=" + format_double(p.chi) + ", mu=" + format_double(p.mu) +
                   ", nu=" + format_double(p.nu) + ", b=" + format_double(p.b) + ", c=" + format_double(p.c) + ")";
        });

    py::class_<GrowthProfile>(m, "GrowthProfile")
        .def(py::init(&profile_from), py::arg("breakpoints"))
        .def_static("constant", &GrowthProfile::constant)
        .def("__call__", &GrowthProfile::operator())
        .def_property_readonly("left_limit", &GrowthProfile::left_limit)
        .def_property_readonly("right_limit", &GrowthProfile::right_limit)
        .def_property_readonly("r_star", &GrowthProfile::r_star)
        .def_property_readonly("r_lower", &GrowthProfile::r_lower);

    py::class_<Grid>(m, "Grid")
        .def(py::init<double, double>(), py::arg("L"), py::arg("h"))
        .def_property_readonly("L", &Grid::half_length)
        .def_property_readonly("h", &Grid::step)
        .def("__len__", &Grid::size)
        .def("nodes", [](const Grid& g) { return to_numpy(g.nodes()); });

    py::enum_<BoundaryCase>(m, "BoundaryCase")
        .value("Case1", BoundaryCase::Case1)
        .value("Case2", BoundaryCase::Case2);

    m.def("theta_root",
          [](double c, double r, bool backward) {
              return theta_root(c, r, backward ? RootOrientation::Backward : RootOrientation::Forward);
          },
          py::arg("c"), py::arg("r"), py::arg("backward") = false);
    m.def("classify_profile", [](const GrowthProfile& p) { return to_string(classify_profile(p)); });

    m.def("check_regime", [](const SimParams& p, const GrowthProfile& r) {
        const RegimeReport rep = check_regime(p, r);
        py::dict d;
        d["h1_holds"] = rep.h1_holds;
        d["h1_threshold"] = rep.h1_threshold;
        d["h2_damping_holds"] = rep.h2_damping_holds;
        d["c_star"] = rep.c_star;
        return d;
    });

    m.def("solve_chemical",
          [](const Array& u, const Grid& g, double nu, double mu, BoundaryCase bc) {
              const ChemicalField f = solve_chemical(from_numpy(u), g, nu, mu, bc);
              return py::make_tuple(to_numpy(f.v), to_numpy(f.vx));
          },
          py::arg("u"), py::arg("grid"), py::arg("nu"), py::arg("mu"), py::arg("bc"));
    m.def("greens_psi",
          [](const Array& u, const Grid& g, double nu, double mu) {
              const GreensField f = greens_field(from_numpy(u), g, nu, mu);
              return py::make_tuple(to_numpy(f.psi), to_numpy(f.psi_x));
          },
          py::arg("u"), py::arg("grid"), py::arg("nu"), py::arg("mu"));

    m.def("principal_eigenvalue",
          [](const GrowthProfile& r, double c, double L, double h) {
              return principal_eigenvalue(r, c, L, h).lambda;
          },
          py::arg("profile"), py::arg("c"), py::arg("L"), py::arg("h") = 0.01);
    m.def("lambda_infinity",
          [](const GrowthProfile& r, double c, double tol) {
              LambdaInfinityOptions o;
              o.tol = tol;
              const LambdaInfinity li = lambda_infinity(r, c, o);
              py::dict d;
              d["estimate"] = li.estimate;
              d["upper_bound"] = li.upper_bound;
              d["certified_sign"] = li.certified_sign;
              d["converged"] = li.converged;
              return d;
          },
          py::arg("profile"), py::arg("c"), py::arg("tol") = 1e-4);

    m.def("simulate",
          [](const SimParams& p, const GrowthProfile& r, const Array& u0, double L, double h, double tau,
             double T, BoundaryCase bc) {
              const Grid g(L, h);
              const RunConfig cfg = RunConfig::make(p, r, g, bc, tau, T);
              RunResult res;
              {
                  py::gil_scoped_release release;
                  res = run(cfg, from_numpy(u0));
              }
              py::dict d;
              d["outcome"] = to_string(res.outcome.tag);
              d["plateau"] = res.outcome.plateau;
              d["final_sup_diff"] = res.outcome.final_sup_diff;
              d["t"] = res.final_state.t;
              d["u"] = to_numpy(res.final_state.u);
              d["v"] = to_numpy(res.final_state.chem.v);
              d["fault"] = res.fault;
              return d;
          },
          py::arg("params"), py::arg("profile"), py::arg("u0"), py::arg("L"), py::arg("h") = 0.1,
          py::arg("tau") = 0.002, py::arg("T") = 10.0, py::arg("bc") = BoundaryCase::Case1);

    m.def("upper_envelope",
          [](const SimParams& p, const GrowthProfile& r, const Grid& g) {
              const Envelope e = classify_profile(r) == ProfileClass::Case2 ? build_upper_envelope_case2(p, r, g)
                                                                            : build_upper_envelope_case1(p, r, g);
              return py::make_tuple(to_numpy(e.values), e.constants);
          });
    m.def("ignition_wave",
          [](const SimParams& p, double r_star, double eps) {
              const IgnitionWave w = ignition_wave(p, r_star, eps);
              py::dict d;
              d["speed"] = w.speed;
              d["speed_bound"] = w.speed_bound;
              d["right_level"] = w.right_level;
              d["residual"] = w.boundary_residual;
              return d;
          },
          py::arg("params"), py::arg("r_star"), py::arg("epsilon"));

    m.def("parse_config", [](const std::string& text) { return render_config(parse_config(text)); },
          "Validate a config and return its canonical rendering.");
    m.def("run_experiment",
          [](const std::filesystem::path& cfg, const std::filesystem::path& out) {
              const RunSpec spec = load_config(cfg);
              ArtifactBundle b;
              {
                  py::gil_scoped_release release;
                  b = run_experiment(spec, out);
              }
              py::dict d;
              d["dir"] = b.dir;
              d["files"] = b.files;
              d["outcome"] = b.outcome ? py::cast(to_string(b.outcome->tag)) : py::none();
              d["checks_passed"] = b.checks_passed;
              d["summary"] = b.summary;
              return d;
          },
          py::arg("config"), py::arg("out"));
}
