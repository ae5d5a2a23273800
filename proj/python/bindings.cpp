#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dbareit/phantom.hpp"
#include "dbareit/pipeline.hpp"

namespace py = pybind11;
using namespace dbareit;

namespace {

/// n x n array with row 0 at the bottom of the image (most negative Im z).
py::array_t<double> grid_array(const SquareGrid& g, const RealField& f) {
  py::array_t<double> a({g.n, g.n});
  auto v = a.mutable_unchecked<2>();
  for (int iy = 0; iy < g.n; ++iy) {
    for (int ix = 0; ix < g.n; ++ix) v(iy, ix) = f[g.index(ix, iy)];
  }
  return a;
}

}  // namespace

PYBIND11_MODULE(_dbareit, m) {
  m.doc() = "D-bar reconstruction of complex admittivity from EIT data";
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  py::class_<RunConfig>(m, "Config")
      .def(py::init<>())
      .def_static("load", &RunConfig::load, py::arg("path"),
                  py::arg("overrides") = std::vector<std::string>{})
      .def_static("from_overrides", &RunConfig::from_overrides, py::arg("overrides"))
      .def("validate", &RunConfig::validate)
      .def("to_ini", &RunConfig::to_ini, py::arg("with_output") = true)
      .def_readwrite("preset", &RunConfig::preset)
      .def_readwrite("phantom_file", &RunConfig::phantom_file)
      .def_readwrite("constant_value", &RunConfig::constant_value)
      .def_readwrite("radius", &RunConfig::radius)
      .def_readwrite("target_triangles", &RunConfig::target_triangles)
      .def_readwrite("eta", &RunConfig::eta)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("k_cutoff", &RunConfig::k_cutoff)
      .def_readwrite("k_points", &RunConfig::k_points)
      .def_readwrite("odd_m", &RunConfig::odd_m)
      .def_readwrite("nz", &RunConfig::nz)
      .def_readwrite("z_extent", &RunConfig::z_extent)
      .def_readwrite("workers", &RunConfig::workers)
      .def_readwrite("output", &RunConfig::output)
      .def_readwrite("background", &RunConfig::background)
      .def_property(
          "trace_rule", [](const RunConfig& c) { return std::string(trace_rule_name(c.trace_rule)); },
          [](RunConfig& c, const std::string& s) { c.trace_rule = parse_trace_rule(s); })
      .def_property(
          "g0_sign", [](const RunConfig& c) { return std::string(g0_sign_name(c.g0_sign)); },
          [](RunConfig& c, const std::string& s) { c.g0_sign = parse_g0_sign(s); })
      .def("__repr__", [](const RunConfig& c) { return c.to_ini(); });

  py::class_<SimulationOutput>(m, "Simulation")
      .def_property_readonly("dn_gamma", [](const SimulationOutput& s) { return s.dn_gamma.entries; })
      .def_property_readonly("dn_one", [](const SimulationOutput& s) { return s.dn_one.entries; })
      .def_property_readonly("currents", [](const SimulationOutput& s) { return s.currents; })
      .def_property_readonly("voltages_gamma",
                             [](const SimulationOutput& s) { return s.voltages_gamma; })
      .def_property_readonly("voltages_one", [](const SimulationOutput& s) { return s.voltages_one; })
      .def_property_readonly("triangles",
                             [](const SimulationOutput& s) { return s.mesh.triangle_count(); });

  py::class_<ReconstructionOutput>(m, "Reconstruction")
      .def_property_readonly("sigma",
                             [](const ReconstructionOutput& r) {
                               return grid_array(r.recon.grid, r.recon.sigma);
                             })
      .def_property_readonly("epsilon",
                             [](const ReconstructionOutput& r) {
                               return grid_array(r.recon.grid, r.recon.epsilon);
                             })
      .def_property_readonly("extent", [](const ReconstructionOutput& r) { return r.recon.grid.extent; })
      .def_property_readonly("background", [](const ReconstructionOutput& r) { return r.background; })
      .def_property_readonly("clamped_pixels",
                             [](const ReconstructionOutput& r) { return r.recon.clamped_pixels; })
      .def_property_readonly("max_iterations",
                             [](const ReconstructionOutput& r) { return r.dbar.max_iterations; });

  m.def(
      "simulate",
      [](const RunConfig& cfg, const std::filesystem::path& out) { return simulate(cfg, out); },
      py::arg("config"), py::arg("output") = std::filesystem::path(),
      py::call_guard<py::gil_scoped_release>(),
      "Forward problem; writes mesh, voltages and DN files when `output` is set.");
  m.def(
      "reconstruct",
      [](const RunConfig& cfg, const SimulationOutput& sim) {
        return reconstruct(cfg, sim.dn_gamma, sim.dn_one);
      },
      py::arg("config"), py::arg("simulation"), py::call_guard<py::gil_scoped_release>(),
      "D-bar reconstruction from simulated DN matrices.");
  m.def("write_reconstruction", &write_reconstruction, py::arg("config"),
        py::arg("reconstruction"), py::arg("output"));
  m.def("run_pipeline", &run_pipeline, py::arg("config"),
        py::call_guard<py::gil_scoped_release>(), "Full run; returns report.json text.");
  m.def("run_reconstruct", &run_reconstruct, py::arg("config"), py::arg("input"),
        py::call_guard<py::gil_scoped_release>(),
        "Reconstruction from dn_gamma.csv / dn_one.csv in `input`; returns report.json text.");
  m.def(
      "compare_runs",
      [](const std::filesystem::path& a, const std::filesystem::path& b) {
        py::list out;
        for (const auto& d : compare_runs(a, b)) {
          py::dict e;
          e["file"] = d.file;
          e["values"] = d.values;
          e["sup_norm"] = d.sup_norm;
          e["relative_l2"] = d.relative_l2;
          e["identical_bytes"] = d.identical_bytes;
          out.append(e);
        }
        return out;
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "radial_dn_eigenvalue",
      [](double inclusion_radius, Complex inner, Complex outer, int n) {
        return radial_dn_eigenvalue(RadialPhantom{inclusion_radius, inner, outer}, n);
      },
      py::arg("inclusion_radius"), py::arg("gamma_inner"), py::arg("gamma_outer"), py::arg("n"),
      "DN eigenvalue of e^{in theta} for a centered disk inclusion in the unit disk.");
}
