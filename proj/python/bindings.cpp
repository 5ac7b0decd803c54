#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "holomera/correlator.hpp"
#include "holomera/entropy.hpp"
#include "holomera/holography.hpp"
#include "holomera/mps.hpp"
#include "holomera/serialize.hpp"

namespace py = pybind11;
using namespace holomera;

namespace {

FlowCurve make_curve(const std::vector<double>& z, const std::vector<double>& value) {
  FlowCurve c;
  c.z = z;
  c.value = value;
  return c;
}

CapState cap_from(const std::string& kind, int chi) {
  return cap_kind_from_string(kind) == CapKind::product ? CapState::product(chi) : CapState::maximally_mixed();
}

py::object from_json(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "MERA networks, scaling operators, correlator flows, entropies and holographic geometry";
  m.attr("__version__") = kVersion;

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<ScaleInvariantMera>(m, "ScaleInvariantMera")
      .def_readonly("chi", &ScaleInvariantMera::chi)
      .def_readonly("b", &ScaleInvariantMera::b)
      .def_property_readonly("transitional_layers", [](const ScaleInvariantMera& n) { return n.transitional.size(); })
      .def("to_json", [](const ScaleInvariantMera& n) { return network_to_json(n).dump(); })
      .def_static("from_json", [](const std::string& s) { return scale_invariant_from_json(Json::parse(s)); });

  py::class_<FiniteRangeMera>(m, "FiniteRangeMera")
      .def_readonly("chi", &FiniteRangeMera::chi)
      .def_property_readonly("depth", &FiniteRangeMera::depth)
      .def_property_readonly("cap", [](const FiniteRangeMera& n) { return to_string(n.cap.kind); })
      .def("to_json", [](const FiniteRangeMera& n) { return network_to_json(n).dump(); })
      .def_static("from_json", [](const std::string& s) { return finite_range_from_json(Json::parse(s)); });

  m.def("random_scale_invariant", &build_scale_invariant, py::arg("chi"), py::arg("b") = 3, py::arg("seed") = 0);
  m.def(
      "finite_range",
      [](const ScaleInvariantMera& source, int depth, const std::string& cap) {
        return build_finite_range(source, depth, cap_from(cap, source.chi));
      },
      py::arg("source"), py::arg("depth"), py::arg("cap") = "product");
  m.def(
      "optimize_ising",
      [](int chi, int sweeps, std::uint64_t seed) {
        OptimizeOptions o;
        o.sweeps = sweeps;
        o.seed = seed;
        const OptimizationResult r = optimize(ising_critical_hamiltonian(), chi, o);
        return py::make_tuple(r.mera, r.report.energies);
      },
      py::arg("chi"), py::arg("sweeps") = 200, py::arg("seed") = 0,
      "Optimizes a ternary network for the critical transverse-field Ising chain; returns (network, energies).");
  m.def("ising_exact_energy", &ising_exact_energy, py::arg("g") = 1.0);

  m.def(
      "scaling_operators",
      [](const ScaleInvariantMera& net) {
        const ScalingOperatorSet s = spectral_decompose(build_scaling_superoperator(net));
        py::dict d;
        d["eigenvalues"] = Vector(s.eigenvalues);
        d["dimensions"] = s.dimensions;
        d["real"] = s.real;
        d["operators"] = s.operators;
        d["biorthonormality_residual"] = s.biorthonormality_residual;
        return d;
      },
      py::arg("network"));
  m.def("fixed_point_density", [](const ScaleInvariantMera& net) { return fixed_point_density(net).rho2; }, py::arg("network"));

  m.def("correlator_at_scale", &correlator_at_scale, py::arg("network"), py::arg("rho2"), py::arg("a"), py::arg("b"),
        py::arg("q"));
  m.def("connected_correlator", &connected_correlator, py::arg("network"), py::arg("a"), py::arg("b"), py::arg("x"),
        py::arg("y"));
  m.def("centre_site", &centre_site, py::arg("b"), py::arg("levels"));
  m.def(
      "cs_residual", [](const std::vector<double>& z, const std::vector<double>& c, double eta) {
        return cs_residual(make_curve(z, c), eta);
      },
      py::arg("z"), py::arg("value"), py::arg("eta"));
  m.def(
      "truncated_cs_residual",
      [](const std::vector<double>& z, const std::vector<double>& c, double eta, double z_star) {
        return truncated_cs_residual(make_curve(z, c), eta, z_star);
      },
      py::arg("z"), py::arg("value"), py::arg("eta"), py::arg("z_star"));
  m.def(
      "crossover_fit",
      [](const std::vector<double>& z, const std::vector<double>& c, double z_star) {
        return from_json(to_json(crossover_fit(make_curve(z, c), z_star)));
      },
      py::arg("z"), py::arg("value"), py::arg("z_star"));

  m.def(
      "to_mps",
      [](const FiniteRangeMera& net) {
        const MpsConversion conv = to_mps(net);
        py::dict d;
        d["bond_dimension"] = conv.mps.bond_dimension();
        d["bound"] = conv.bound;
        d["bound_satisfied"] = conv.bound_satisfied;
        d["schmidt"] = conv.mps.schmidt;
        d["transfer"] = from_json(to_json(transfer_spectrum(conv.mps)));
        return d;
      },
      py::arg("network"));

  m.def("dimension_from_mass", &dimension_from_mass, py::arg("m2"));
  m.def("radial_ode_residual", &radial_ode_residual, py::arg("m2"), py::arg("delta"), py::arg("grid"));
  m.def("holo_propagator", &holo_propagator, py::arg("z"), py::arg("z_star"), py::arg("eta"));
  m.def("geodesic_closed_form", &geodesic_closed_form, py::arg("z"), py::arg("z_star"));
  m.def(
      "geodesic_length",
      [](double z, double z_star, double cutoff) {
        const Geometry g = std::isinf(z_star) ? Geometry::pure_ads() : Geometry::btz(z_star);
        return geodesic_numeric(z, g, cutoff).length;
      },
      py::arg("z"), py::arg("z_star"), py::arg("cutoff"),
      "Numerically integrated geodesic length; z_star = inf selects pure AdS.");
  m.def(
      "fit_geodesic_form",
      [](const std::vector<double>& z, const std::vector<double>& length, double z_star) {
        return from_json(to_json(fit_geodesic_form(z, length, z_star)));
      },
      py::arg("z"), py::arg("length"), py::arg("z_star"));

  m.def(
      "block_entropy",
      [](const ScaleInvariantMera& net, const Matrix& rho2, long ell, long first) {
        return block_entropy(net, rho2, ell, first);
      },
      py::arg("network"), py::arg("rho2"), py::arg("ell"), py::arg("first") = 0);
  m.def(
      "block_entropy",
      [](const FiniteRangeMera& net, long ell, long first) { return block_entropy(net, ell, first); }, py::arg("network"),
      py::arg("ell"), py::arg("first") = 0);
  m.def(
      "cut_length",
      [](const ScaleInvariantMera& net, const std::vector<long>& block) { return cut_length(net, block).length; },
      py::arg("network"), py::arg("block"));
  m.def(
      "cut_length", [](const FiniteRangeMera& net, const std::vector<long>& block) { return cut_length(net, block).length; },
      py::arg("network"), py::arg("block"));
  m.def(
      "entropy_fit",
      [](const std::vector<long>& ell, const std::vector<double>& s, const std::string& model, double z_star) {
        EntropyCurve c;
        c.ell = ell;
        c.entropy = s;
        return from_json(to_json(entropy_scaling_fit(c, entropy_model_from_string(model), z_star)));
      },
      py::arg("ell"), py::arg("entropy"), py::arg("model") = "log", py::arg("z_star") = 0.0);
}
