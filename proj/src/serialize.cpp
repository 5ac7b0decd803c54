#include "holomera/serialize.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

namespace holomera {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

double parse_double(const Json& v) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string()) throw InvalidArgument("tensor record: values must be decimal strings");
  const std::string s = v.get<std::string>();
  double x = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || end != s.data() + s.size()) throw InvalidArgument("tensor record: bad value '" + s + "'");
  return x;
}

Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

}  // namespace

Json tensor_to_json(const Tensor& t) {
  const bool cplx = std::any_of(t.data().begin(), t.data().end(), [](const Complex& z) { return z.imag() != 0.0; });
  Json values = Json::array();
  for (const Complex& z : t.data()) {
    values.push_back(format_double(z.real()));
    if (cplx) values.push_back(format_double(z.imag()));
  }
  return Json{{"shape", t.shape()}, {"complex", cplx}, {"values", std::move(values)}};
}

Tensor tensor_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("shape") || !j.contains("complex") || !j.contains("values"))
    throw InvalidArgument("tensor record: expected fields shape, complex, values");
  const Shape shape = j.at("shape").get<Shape>();
  const bool cplx = j.at("complex").get<bool>();
  const Json& values = j.at("values");
  Tensor t(shape);
  if (values.size() != t.size() * (cplx ? 2 : 1)) throw InvalidArgument("tensor record: value count does not match shape");
  for (std::size_t i = 0; i < t.size(); ++i)
    t.data()[i] = cplx ? Complex(parse_double(values[2 * i]), parse_double(values[2 * i + 1])) : Complex(parse_double(values[i]), 0.0);
  return t;
}

Json matrix_to_json(const Matrix& m) { return tensor_to_json(Tensor::from_matrix(m)); }

Matrix matrix_from_json(const Json& j) {
  const Tensor t = tensor_from_json(j);
  if (t.rank() != 2) throw InvalidArgument("matrix record: expected rank 2");
  return t.as_matrix(1);
}

Json layer_to_json(const Layer& layer) { return Json{{"u", tensor_to_json(layer.u)}, {"w", tensor_to_json(layer.w)}}; }

Layer layer_from_json(const Json& j) {
  Layer l{tensor_from_json(j.at("u")), tensor_from_json(j.at("w"))};
  validate_layer(l, 1e-10);
  return l;
}

Json network_to_json(const ScaleInvariantMera& net) {
  Json layers = Json::array();
  for (const auto& l : net.transitional) layers.push_back(layer_to_json(l));
  layers.push_back(layer_to_json(net.layer));
  return Json{{"chi", net.chi},        {"b", net.b}, {"w_star", nullptr}, {"cap", nullptr},
              {"transitional", net.transitional.size()}, {"layers", std::move(layers)}};
}

Json network_to_json(const FiniteRangeMera& net) {
  Json layers = Json::array();
  for (const auto& l : net.layers) layers.push_back(layer_to_json(l));
  Json cap{{"kind", to_string(net.cap.kind)}};
  if (net.cap.kind == CapKind::product) cap["vector"] = matrix_to_json(Matrix(net.cap.vector));
  return Json{{"chi", net.chi}, {"b", net.b}, {"w_star", net.depth()}, {"cap", std::move(cap)}, {"layers", std::move(layers)}};
}

ScaleInvariantMera scale_invariant_from_json(const Json& j) {
  if (!j.at("w_star").is_null()) throw InvalidArgument("network: expected a scale-invariant network (w_star null)");
  const auto& layers = j.at("layers");
  if (layers.empty()) throw InvalidArgument("network: no layers");
  std::vector<Layer> trans;
  for (std::size_t k = 0; k + 1 < layers.size(); ++k) trans.push_back(layer_from_json(layers[k]));
  ScaleInvariantMera net = make_scale_invariant(layer_from_json(layers.back()), std::move(trans));
  if (net.chi != j.at("chi").get<int>() || net.b != j.at("b").get<int>()) throw InvalidArgument("network: chi or b disagree with tensors");
  return net;
}

FiniteRangeMera finite_range_from_json(const Json& j) {
  if (j.at("w_star").is_null()) throw InvalidArgument("network: expected a finite-range network");
  FiniteRangeMera net;
  net.chi = j.at("chi").get<int>();
  net.b = j.at("b").get<int>();
  for (const auto& l : j.at("layers")) net.layers.push_back(layer_from_json(l));
  if (net.depth() != j.at("w_star").get<int>()) throw InvalidArgument("network: w_star disagrees with layer count");
  const Json& cap = j.at("cap");
  net.cap.kind = cap_kind_from_string(cap.at("kind").get<std::string>());
  if (net.cap.kind == CapKind::product) net.cap.vector = matrix_from_json(cap.at("vector")).col(0);
  return net;
}

Json to_json(const ScalingOperatorSet& s, std::size_t max_rows) {
  Json rows = Json::array();
  const std::size_t n = max_rows ? std::min(max_rows, s.size()) : s.size();
  for (std::size_t a = 0; a < n; ++a)
    rows.push_back(Json{{"alpha", a},
                        {"re_lambda", number(s.eigenvalues(Eigen::Index(a)).real())},
                        {"im_lambda", number(s.eigenvalues(Eigen::Index(a)).imag())},
                        {"delta", number(s.dimensions[a])},
                        {"real", bool(s.real[a])},
                        {"operator", matrix_to_json(s.operators[a])}});
  return Json{{"b", s.b},
              {"defective", s.defective},
              {"biorthonormality_residual", number(s.biorthonormality_residual)},
              {"eigen_residual", number(s.eigen_residual)},
              {"operators", std::move(rows)}};
}

Json to_json(const Mps& m) {
  Json sites = Json::array();
  for (const auto& s : m.sites) sites.push_back(tensor_to_json(s));
  return Json{{"cell", m.cell()}, {"phys_dim", m.phys_dim()}, {"bond_dimension", m.bond_dimension()}, {"sites", std::move(sites)},
              {"schmidt", m.schmidt}};
}

Json to_json(const TransferSpectrum& t) {
  return Json{{"t1", {number(t.t1.real()), number(t.t1.imag())}},
              {"t2", {number(t.t2.real()), number(t.t2.imag())}},
              {"xi", number(t.xi)},
              {"degenerate", t.degenerate},
              {"cell", t.cell}};
}

Json to_json(const OptimizationReport& r) {
  Json e = Json::array();
  for (double x : r.energies) e.push_back(number(x));
  return Json{{"sweeps", r.sweeps}, {"converged", r.converged}, {"diverged", r.diverged}, {"message", r.message},
              {"final_energy", r.energies.empty() ? Json(nullptr) : number(r.energies.back())}, {"energies", std::move(e)}};
}

Json to_json(const LineFit& f) {
  return Json{{"slope", number(f.slope)}, {"intercept", number(f.intercept)}, {"r2", number(f.r2)}, {"rms", number(f.rms)},
              {"points", f.points}};
}

Json to_json(const CrossoverFit& f) {
  return Json{{"exponent", number(f.exponent)},
              {"power_amplitude", number(f.power_amplitude)},
              {"power_r2", number(f.power_r2)},
              {"power_rms", number(f.power_rms)},
              {"power_points", f.power_points},
              {"power_window_max", number(f.power_window_max)},
              {"power_poorly_conditioned", f.power_poorly_conditioned},
              {"rate", number(f.rate)},
              {"exp_amplitude", number(f.exp_amplitude)},
              {"exp_r2", number(f.exp_r2)},
              {"exp_rms", number(f.exp_rms)},
              {"exp_points", f.exp_points},
              {"exp_window_min", number(f.exp_window_min)},
              {"exp_poorly_conditioned", f.exp_poorly_conditioned},
              {"crossover_scale", number(f.crossover_scale)},
              {"diagnostics", f.diagnostics}};
}

Json to_json(const EntropyFit& f) {
  Json res = Json::array();
  for (double r : f.residuals) res.push_back(number(r));
  return Json{{"model", to_string(f.model)},
              {"slope", number(f.slope)},
              {"slope_error", number(f.slope_error)},
              {"offset", number(f.offset)},
              {"z_star", number(f.z_star)},
              {"extensive", number(f.extensive)},
              {"extensive_error", number(f.extensive_error)},
              {"r2", number(f.r2)},
              {"rms", number(f.rms)},
              {"aic", number(f.aic)},
              {"residuals", std::move(res)}};
}

Json to_json(const CutReport& c) {
  return Json{{"length", number(c.length)}, {"level", c.level}, {"by_level", c.by_level}, {"widths", c.widths},
              {"cell_weights", c.cell_weights}};
}

Json to_json(const GeodesicFormFit& f) {
  return Json{{"kappa", number(f.kappa)}, {"offset", number(f.offset)}, {"max_residual", number(f.max_residual)}, {"rms", number(f.rms)}};
}

}  // namespace holomera
