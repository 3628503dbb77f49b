#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bubbleforge/pipeline.hpp"

namespace py = pybind11;
using namespace bubbleforge;

PYBIND11_MODULE(_core, m) {
    m.doc() = "two-peak construction toolkit for the critical biharmonic equation";

    py::class_<Dimension>(m, "Dimension")
        .def(py::init<int>(), py::arg("n"))
        .def_readonly("n", &Dimension::n)
        .def_readonly("two_star", &Dimension::twoStar)
        .def_readonly("c_n", &Dimension::cN);

    py::class_<Bubble>(m, "Bubble")
        .def(py::init<Vec, double>(), py::arg("y"), py::arg("lam"))
        .def_readonly("y", &Bubble::y)
        .def_readonly("lam", &Bubble::lambda);

    py::class_<KProfile>(m, "KProfile")
        .def(py::init<Vec, Vec, double, double, double, double>(), py::arg("z"), py::arg("a"),
             py::arg("beta"), py::arg("sigma"), py::arg("K0"), py::arg("r0"))
        .def("value", &KProfile::value)
        .def_property_readonly("beta", &KProfile::beta)
        .def_property_readonly("sum_a", &KProfile::sumA);

    py::class_<QuadratureSpec>(m, "QuadratureSpec")
        .def(py::init<>())
        .def_readwrite("radial_nodes", &QuadratureSpec::radialNodes)
        .def_readwrite("map_scale", &QuadratureSpec::mapScale)
        .def_readwrite("transverse_nodes", &QuadratureSpec::transverseNodes)
        .def_readwrite("mc_samples", &QuadratureSpec::mcSamples)
        .def_readwrite("seed", &QuadratureSpec::seed)
        .def_readwrite("rel_tol", &QuadratureSpec::relTol);

    m.def("bubble_value", &bubble_value);
    m.def("bubble_grad_scale", &bubble_grad_scale);
    m.def("bubble_grad_center", &bubble_grad_center);
    m.def("bubble_residual", &bubble_residual);
    m.def("sphere_moment", &sphere_moment);
    m.def("closed_form_A", &closed_form_A);
    m.def("theta", &theta);
    m.def("c_n_beta", &c_n_beta);
    m.def("d_n_beta", &d_n_beta);

    m.def("integrate_radial", [](const std::function<double(double)>& f, const Dimension& dim,
                                 const QuadratureSpec& spec) {
        const QuadResult r = integrate_radial(f, dim, spec);
        return py::make_tuple(r.value, r.converged);
    });

    py::class_<StructureConstants>(m, "StructureConstants")
        .def_readonly("A", &StructureConstants::A)
        .def_readonly("E", &StructureConstants::E)
        .def_readonly("F", &StructureConstants::F)
        .def_readonly("G", &StructureConstants::G);
    m.def("structure_constants", &structure_constants);

    py::class_<ScalingFit>(m, "ScalingFit")
        .def_readonly("exponent", &ScalingFit::exponent)
        .def_readonly("constant", &ScalingFit::constant)
        .def_readonly("max_rel_dev", &ScalingFit::maxRelDev);
    m.def("fit_power_law", &fit_power_law);

    m.def("l_eps", [](double eps, double b1, double b2, const Dimension& dim) {
        const LEpsResult r = l_eps(eps, b1, b2, dim);
        return py::make_tuple(r.value, r.exponent);
    });
    m.def("g_map", &g_map);
    m.def("jac_g", [](const std::array<double, 2>& t, const std::array<double, 2>& mk,
                      const std::array<double, 2>& beta, const Dimension& dim) {
        const JacG j = jac_g(t, mk, beta, dim);
        return py::make_tuple(j.J, j.det);
    });
    m.def("solve_reduced", [](const std::array<double, 2>& mk, const std::array<double, 2>& beta,
                              const Dimension& dim, const std::array<double, 2>& box) {
        const ReducedRoot r = solve_reduced(mk, beta, dim, box);
        return py::make_tuple(r.t, r.gNorm, r.jacDet);
    });
    m.def("brouwer_degree",
          [](const std::function<std::array<double, 2>(double, double)>& f,
             const std::array<double, 4>& box, int gridRes) {
              const DegreeResult r = brouwer_degree(f, box, gridRes);
              return py::make_tuple(r.degree, r.totalWinding, r.minBoundaryNorm);
          });

    py::class_<RunConfig>(m, "RunConfig")
        .def_static("defaults", &RunConfig::defaults, py::arg("n") = 6)
        .def_static("from_json_file", &RunConfig::fromJsonFile)
        .def_readwrite("eps_list", &RunConfig::epsList)
        .def_readwrite("out_dir", &RunConfig::outDir)
        .def_readwrite("seed", &RunConfig::seed)
        .def_readwrite("gradient_source", &RunConfig::gradientSource);
    m.def("run_pipeline", [](const RunConfig& cfg) {
        const RunReport rep = run_pipeline(cfg);
        return py::make_tuple(rep.allPass, rep.toJson().dump(2));
    });

    m.def("verify_lemma_b1", [](const Dimension& dim, const KProfile& p,
                                const std::vector<double>& lams, const QuadratureSpec& spec) {
        const LemmaVerdict v = verify_lemma_b1(dim, p, lams, spec);
        return py::make_tuple(v.pass, v.fits[0].exponent, v.fits[0].constant);
    });
    m.def("verify_lemma_b2", [](const Dimension& dim, double sep,
                                const std::vector<double>& lams, const QuadratureSpec& spec) {
        const LemmaVerdict v = verify_lemma_b2(dim, sep, lams, spec);
        return py::make_tuple(v.pass, v.fits[0].exponent, v.fits[1].exponent);
    });
}
