#include "experiments.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <locale>
#include <sstream>

#include "holomera/correlator.hpp"
#include "holomera/entropy.hpp"
#include "holomera/holography.hpp"
#include "holomera/mps.hpp"
#include "holomera/serialize.hpp"

namespace holomera::cli {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Context {
  const ExperimentConfig& c;
  std::string hash;
  std::vector<Artifact> out;

  std::string name(const std::string& role) const {
    if (c.outputs.contains(role)) return c.outputs.at(role).get<std::string>();
    for (const auto& [r, file] : artifact_roles(c.kind))
      if (r == role) return file;
    throw InvalidArgument("unknown artifact role '" + role + "'");
  }

  Json meta() const {
    Json m;
    m["version"] = kVersion;
    m["config_hash"] = hash;
    m["kind"] = c.kind;
    m["seed"] = c.seed;
    return m;
  }

  void json(const std::string& role, Json body) {
    Json doc;
    doc["meta"] = meta();
    for (auto& [k, v] : body.items()) doc[k] = std::move(v);
    out.push_back({name(role), doc.dump(2) + "\n"});
  }

  void csv(const std::string& role, const std::string& table) {
    std::string head = "# holomera " + std::string(kVersion) + " config_hash=" + hash + " kind=" + c.kind +
                       " seed=" + std::to_string(c.seed) + "\n";
    out.push_back({name(role), head + table});
  }
};

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("network: cannot open '" + path + "'");
  try {
    Json j = Json::parse(in);
    // Artifacts from `optimize` and its checkpoints wrap the record under "network".
    if (j.is_object() && j.contains("network") && j.contains("meta")) return j.at("network");
    return j;
  } catch (const Json::parse_error& e) {
    throw InvalidArgument("network: '" + path + "' is not valid JSON: " + e.what());
  }
}

bool is_finite_range_record(const Json& j) { return j.contains("w_star") && !j.at("w_star").is_null(); }

ScaleInvariantMera scale_invariant_source(const ExperimentConfig& c, std::string& id) {
  if (c.network) {
    const Json j = read_json_file(*c.network);
    if (is_finite_range_record(j)) throw InvalidArgument("network: '" + *c.network + "' holds a finite-range network");
    id = "file:" + *c.network;
    return scale_invariant_from_json(j);
  }
  if (c.source == "optimized") {
    OptimizeOptions o;
    o.sweeps = c.sweeps;
    o.seed = c.seed;
    id = "optimized-chi" + std::to_string(c.chi) + "-seed" + std::to_string(c.seed) + "-sweeps" + std::to_string(c.sweeps);
    return optimize(ising_critical_hamiltonian(), c.chi, o).mera;
  }
  id = "random-chi" + std::to_string(c.chi) + "-seed" + std::to_string(c.seed);
  return build_scale_invariant(c.chi, c.b, c.seed);
}

FiniteRangeMera finite_range_source(const ExperimentConfig& c, std::string& id) {
  if (c.network) {
    const Json j = read_json_file(*c.network);
    if (is_finite_range_record(j)) {
      FiniteRangeMera fr = finite_range_from_json(j);
      if (fr.depth() != *c.w_star)
        throw InvalidArgument("w_star: config says " + std::to_string(*c.w_star) + " but the network has depth " +
                              std::to_string(fr.depth()));
      id = "file:" + *c.network;
      return fr;
    }
  }
  const CapState cap = c.cap == "product" ? CapState::product(c.chi) : CapState::maximally_mixed();
  ScaleInvariantMera si = scale_invariant_source(c, id);
  if (!si.transitional.empty())
    throw InvalidArgument("network: finite-range networks need a scale-invariant source without transitional layers");
  id += "-wstar" + std::to_string(*c.w_star) + "-" + to_string(cap.kind);
  return build_finite_range(si, *c.w_star, cap);
}

struct OperatorPair {
  int alpha = 0, beta = 0;
  Matrix a, b;
  double eta = 0.0;
  Complex lambda_a, lambda_b;
};

OperatorPair pick_operators(const ScalingOperatorSet& ops, const ExperimentConfig& c) {
  const int n = int(ops.operators.size());
  OperatorPair p;
  if (c.alpha) {
    p.alpha = *c.alpha;
    p.beta = *c.beta;
    if (p.alpha >= n || p.beta >= n)
      throw InvalidArgument("alpha: the network has only " + std::to_string(n) + " scaling operators");
  } else {
    p.alpha = -1;
    for (int k = 1; k < n && p.alpha < 0; ++k)
      if (ops.real[std::size_t(k)] && ops.dimensions[std::size_t(k)] > 1e-9 && std::isfinite(ops.dimensions[std::size_t(k)]))
        p.alpha = k;
    if (p.alpha < 0) throw NumericalError("scaling-operators: no nontrivial real scaling operator");
    p.beta = p.alpha;
  }
  p.a = ops.operators[std::size_t(p.alpha)];
  p.b = ops.operators[std::size_t(p.beta)];
  p.eta = ops.dimensions[std::size_t(p.alpha)] + ops.dimensions[std::size_t(p.beta)];
  p.lambda_a = ops.eigenvalues(p.alpha);
  p.lambda_b = ops.eigenvalues(p.beta);
  return p;
}

double real_value(Complex v, const OperatorPair& p) {
  if (std::abs(v.imag()) > 1e-6 * std::abs(v) + 1e-15)
    throw NumericalError("correlator: operators " + std::to_string(p.alpha) + ", " + std::to_string(p.beta) +
                         " give a complex correlator; select real operators");
  return v.real();
}

/// Interior-sample column padded to the curve length.
std::vector<double> padded(const std::vector<double>& interior) {
  std::vector<double> col{kNaN};
  col.insert(col.end(), interior.begin(), interior.end());
  col.push_back(kNaN);
  return col;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::vector<double> default_separations(int w_star) {
  std::vector<double> r;
  const double top = std::pow(3.0, w_star + 2);
  for (int k = 0;; ++k) {
    const double z = std::round(std::pow(3.0, k / 4.0));
    if (z > top) break;
    if (r.empty() || z > r.back()) r.push_back(z);
  }
  return r;
}

/// Connected correlator of the pair between the cap-centre site and its right neighbours at r.
FlowCurve finite_range_curve(const FiniteRangeMera& fr, const OperatorPair& p, const std::vector<double>& rs,
                             const std::string& id) {
  FlowCurve curve;
  curve.eta = p.eta;
  curve.alpha = p.alpha;
  curve.beta = p.beta;
  curve.network_id = id;
  const long x0 = centre_site(fr.b, fr.depth());
  for (double r : rs) {
    curve.z.push_back(r);
    curve.value.push_back(real_value(connected_correlator(fr, p.a, p.b, x0, x0 + std::lround(r)), p));
  }
  return curve;
}

Json crossover_json(const FlowCurve& curve, double z_star) {
  try {
    return to_json(crossover_fit(curve, z_star));
  } catch (const InvalidArgument& e) {
    Json j;
    j["error"] = e.what();
    return j;
  }
}

void scaling_dims(Context& ctx) {
  std::string id;
  const ScaleInvariantMera net = scale_invariant_source(ctx.c, id);
  const ScalingOperatorSet ops = spectral_decompose(build_scaling_superoperator(net));
  Json body;
  body["network_id"] = id;
  body["operators"] = to_json(ops, std::size_t(ctx.c.count));
  ctx.json("table", body);

  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << "alpha,re_lambda,im_lambda,delta,real\n";
  for (std::size_t k = 0; k < ops.dimensions.size() && k < std::size_t(ctx.c.count); ++k)
    os << k << ',' << ops.eigenvalues(Eigen::Index(k)).real() << ',' << ops.eigenvalues(Eigen::Index(k)).imag() << ','
       << ops.dimensions[k] << ',' << (ops.real[k] ? 1 : 0) << '\n';
  ctx.csv("csv", os.str());
}

void flow(Context& ctx) {
  std::string id;
  const ScaleInvariantMera full = scale_invariant_source(ctx.c, id);
  // Correlators live on the lattice of the scale-invariant layer.
  const ScaleInvariantMera net = make_scale_invariant(full.layer);
  const ScalingOperatorSet ops = spectral_decompose(build_scaling_superoperator(net));
  const OperatorPair p = pick_operators(ops, ctx.c);
  const Matrix rho2 = fixed_point_density(net).rho2;

  FlowCurve curve;
  curve.eta = p.eta;
  curve.alpha = p.alpha;
  curve.beta = p.beta;
  curve.network_id = id;
  for (int q = 1; q <= ctx.c.levels; ++q) {
    curve.z.push_back(std::pow(3.0, q));
    curve.value.push_back(real_value(correlator_at_scale(net, rho2, p.a, p.b, q), p));
  }
  const std::vector<double> res = cs_residual(curve, p.eta);
  std::vector<double> holo = holographic_cs_residual(curve, p.eta / 2.0);
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    lx.push_back(std::log(curve.z[i]));
    ly.push_back(std::log(std::abs(curve.value[i])));
  }
  const LineFit slope = fit_line(lx, ly);
  const CovarianceReport cov = rescale_covariance(curve, std::log(3.0));

  ctx.csv("curve", to_csv(curve, {{"cs_residual", padded(res)}}));
  Json body;
  body["network_id"] = id;
  body["alpha"] = p.alpha;
  body["beta"] = p.beta;
  body["eta"] = p.eta;
  body["lambda_alpha"] = {p.lambda_a.real(), p.lambda_a.imag()};
  body["lambda_beta"] = {p.lambda_b.real(), p.lambda_b.imag()};
  body["max_cs_residual"] = max_abs(res);
  body["max_holographic_residual"] = max_abs(holo);
  body["loglog_fit"] = to_json(slope);
  body["covariance"] = {{"pairs", cov.pairs}, {"max_relative_deviation", cov.max_relative_deviation}};
  ctx.json("summary", body);
}

void crossover(Context& ctx) {
  std::string id;
  const FiniteRangeMera fr = finite_range_source(ctx.c, id);
  const ScalingOperatorSet ops = spectral_decompose(build_scaling_superoperator(fr.layers.back()));
  const OperatorPair p = pick_operators(ops, ctx.c);
  const double z_star = std::pow(3.0, fr.depth());
  const std::vector<double> rs = ctx.c.separations.empty() ? default_separations(fr.depth()) : ctx.c.separations;
  const FlowCurve curve = finite_range_curve(fr, p, rs, id);

  // e^{-eta z/z*} on the same grid is annihilated by the truncated flow operator.
  FlowCurve synthetic = curve;
  std::vector<double> sinh_column;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    synthetic.value[i] = std::exp(-p.eta * rs[i] / z_star);
    sinh_column.push_back(holo_propagator(rs[i], z_star, p.eta));
  }
  const std::vector<double> synth_res = truncated_cs_residual(synthetic, p.eta, z_star);
  const std::vector<double> res = truncated_cs_residual(curve, p.eta, z_star);

  ctx.csv("curve", to_csv(curve, {{"truncated_cs_residual", padded(res)}, {"sinh_propagator", sinh_column}}));
  Json body;
  body["network_id"] = id;
  body["alpha"] = p.alpha;
  body["beta"] = p.beta;
  body["eta"] = p.eta;
  body["z_star"] = z_star;
  body["fit"] = crossover_json(curve, z_star);
  body["synthetic_max_truncated_residual"] = max_abs(synth_res);
  if (fr.cap.kind == CapKind::product) {
    const MpsConversion conv = to_mps(fr);
    const TransferSpectrum ts = transfer_spectrum(conv.mps);
    Json t = to_json(ts);
    t["predicted_rate"] = ts.xi > 0.0 ? Json(1.0 / ts.xi) : Json(nullptr);
    t["bond_dimension"] = conv.mps.bond_dimension();
    body["transfer"] = t;
  } else {
    body["transfer"] = nullptr;
  }
  ctx.json("summary", body);
}

void holo_compare(Context& ctx) {
  const ExperimentConfig& c = ctx.c;
  const double z_star = c.w_star ? std::pow(3.0, *c.w_star) : *c.z_star;
  Json body;
  std::optional<FlowCurve> mera;
  double eta = c.eta.value_or(0.0);
  if (c.w_star) {
    std::string id;
    const FiniteRangeMera fr = finite_range_source(c, id);
    const ScalingOperatorSet ops = spectral_decompose(build_scaling_superoperator(fr.layers.back()));
    const OperatorPair p = pick_operators(ops, c);
    if (!c.eta) eta = p.eta;
    const std::vector<double> rs = c.separations.empty() ? default_separations(fr.depth()) : c.separations;
    FlowCurve curve = finite_range_curve(fr, p, rs, id);
    const double c0 = curve.value.front();
    if (c0 == 0.0) throw NumericalError("holo-compare: correlator vanishes at the first separation");
    for (double& v : curve.value) v /= c0;
    body["network_id"] = id;
    body["alpha"] = p.alpha;
    body["beta"] = p.beta;
    body["mera_eta"] = p.eta;
    mera = curve;
  }
  body["z_star"] = z_star;
  body["eta"] = eta;
  body["temperature"] = Geometry::btz(z_star).temperature();

  const Geometry btz = Geometry::btz(z_star);
  const double cutoff = 1e-6 * z_star;
  FlowCurve prop;
  prop.eta = eta;
  std::ostringstream geo;
  geo.imbue(std::locale::classic());
  geo << std::setprecision(17) << "z,propagator,geodesic_length,closed_form,regime,refinement_change\n";
  std::vector<double> fz, fl;
  for (double z : geometric_grid(1e-3 * z_star, 20.0 * z_star, 65)) {
    const GeodesicResult g = geodesic_numeric(z, btz, cutoff);
    const double h = holo_propagator(z, z_star, eta);
    prop.z.push_back(z);
    prop.value.push_back(h);
    geo << z << ',' << h << ',' << g.length << ',' << geodesic_closed_form(z, z_star) << ',' << to_string(g.regime) << ','
        << g.refinement_change << '\n';
    if (z >= 0.1 * z_star * (1 - 1e-12) && z <= 10.0 * z_star * (1 + 1e-12)) {
      fz.push_back(z);
      fl.push_back(g.length);
    }
  }
  ctx.csv("geometry", geo.str());
  body["geodesic_fit"] = to_json(fit_geodesic_form(fz, fl, z_star));
  body["propagator_fit"] = crossover_json(prop, z_star);

  Json masses = Json::array();
  const std::vector<double> grid = geometric_grid(1e-2, 1e2, 41);
  for (double m2 : c.m2) {
    const auto [hi, lo] = dimension_from_mass(m2);
    masses.push_back({{"m2", m2},
                      {"delta_plus", hi},
                      {"delta_minus", lo},
                      {"residual_plus", radial_ode_residual(m2, hi, grid)},
                      {"residual_minus", radial_ode_residual(m2, lo, grid)}});
  }
  body["mass_dimension"] = masses;

  if (mera) {
    std::vector<double> h;
    for (double z : mera->z) h.push_back(holo_propagator(z, z_star, eta) / holo_propagator(mera->z.front(), z_star, eta));
    ctx.csv("mera", to_csv(*mera, {{"sinh_propagator", h}}));
    body["mera_fit"] = crossover_json(*mera, z_star);
  }
  ctx.json("summary", body);
}

void entropy(Context& ctx) {
  const ExperimentConfig& c = ctx.c;
  std::string id;
  EntropyCurve curve;
  EntropyFit fit;
  std::ostringstream cuts;
  cuts.imbue(std::locale::classic());
  cuts << std::setprecision(17) << "ell,first,S,cut,level\n";
  bool bound = true;
  auto row = [&](long ell, double s, const CutReport& cut) {
    bound = bound && s <= cut.length + 1e-10;
    cuts << ell << ",0," << s << ',' << cut.length << ',' << cut.level << '\n';
  };
  auto block = [](long ell) {
    std::vector<long> b(static_cast<std::size_t>(ell));
    for (long i = 0; i < ell; ++i) b[std::size_t(i)] = i;
    return b;
  };
  if (c.w_star) {
    const FiniteRangeMera fr = finite_range_source(c, id);
    const long xi = std::lround(std::pow(3.0, fr.depth()));
    std::vector<long> ells = c.ells;
    if (ells.empty())
      for (long k = 3; k <= 9; ++k) ells.push_back(k * xi);
    curve = entropy_curve(fr, ells, c.offsets, id);
    fit = entropy_scaling_fit(curve, EntropyModel::linear_plus_log, double(xi));
    for (long ell : ells) row(ell, block_entropy(fr, ell, 0), cut_length(fr, block(ell)));
  } else {
    const ScaleInvariantMera net = scale_invariant_source(c, id);
    const Matrix rho2 = fixed_point_density(net).rho2;
    const std::vector<long> ells = c.ells.empty() ? std::vector<long>{2, 3, 4, 6, 8, 9, 12} : c.ells;
    curve = entropy_curve(net, rho2, ells, c.offsets, id);
    fit = entropy_scaling_fit(curve, EntropyModel::log);
    for (long ell : ells) row(ell, block_entropy(net, rho2, ell, 0), cut_length(net, block(ell)));
  }
  ctx.csv("curve", to_csv(curve));
  ctx.csv("cuts", cuts.str());
  Json body;
  body["network_id"] = id;
  body["cap"] = c.w_star ? Json(c.cap) : Json(nullptr);
  body["offsets"] = c.offsets;
  body["fit"] = to_json(fit);
  body["log_chi"] = std::log(double(c.chi));
  body["cut_bound_holds"] = bound;
  ctx.json("summary", body);
}

void mps_export(Context& ctx) {
  std::string id;
  const FiniteRangeMera fr = finite_range_source(ctx.c, id);
  const MpsConversion conv = to_mps(fr);
  const TransferSpectrum ts = transfer_spectrum(conv.mps);
  Json body;
  body["network_id"] = id;
  body["bond_dimension"] = conv.mps.bond_dimension();
  body["bound"] = conv.bound;
  body["bound_satisfied"] = conv.bound_satisfied;
  body["discarded"] = conv.discarded;
  body["transfer"] = to_json(ts);
  body["mps"] = to_json(conv.mps);
  ctx.json("mps", body);

  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << "bond,index,value\n";
  for (std::size_t k = 0; k < conv.mps.schmidt.size(); ++k)
    for (std::size_t i = 0; i < conv.mps.schmidt[k].size(); ++i) os << k << ',' << i << ',' << conv.mps.schmidt[k][i] << '\n';
  ctx.csv("schmidt", os.str());
}

void optimize_run(Context& ctx) {
  const ExperimentConfig& c = ctx.c;
  const LocalHamiltonian h = ising_critical_hamiltonian();
  const double exact = ising_exact_energy();
  OptimizeOptions o;
  o.sweeps = c.sweeps;
  o.seed = c.seed;
  o.checkpoint_every = c.checkpoint_every;
  o.checkpoint = [&](const ScaleInvariantMera& net, const OptimizationReport& r) {
    Json doc;
    doc["meta"] = ctx.meta();
    doc["sweep"] = r.sweeps;
    doc["network"] = network_to_json(net);
    doc["report"] = to_json(r);
    char name[64];
    std::snprintf(name, sizeof name, "checkpoint_%06d.json", r.sweeps);
    ctx.out.push_back({name, doc.dump(2) + "\n"});
  };
  const OptimizationResult res = optimize(h, c.chi, o);
  if (res.report.diverged) throw NumericalError("optimizer: " + res.report.message);

  Json net;
  net["network"] = network_to_json(res.mera);
  ctx.json("network", net);

  const ScalingOperatorSet ops = spectral_decompose(build_scaling_superoperator(res.mera));
  Json body;
  body["exact_energy"] = exact;
  body["energy"] = res.report.energies.empty() ? Json(nullptr) : Json(res.report.energies.back());
  body["energy_error"] =
      res.report.energies.empty() ? Json(nullptr) : Json(std::abs(res.report.energies.back() - exact));
  body["fixed_point"] = {{"iterations", res.fixed_point.iterations}, {"residual", res.fixed_point.residual}};
  body["report"] = to_json(res.report);
  body["operators"] = to_json(ops, std::size_t(c.count));
  ctx.json("report", body);

  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << "sweep,energy,error,isometry_residual\n";
  for (std::size_t i = 0; i < res.report.energies.size(); ++i) {
    os << i << ',' << res.report.energies[i] << ',' << std::abs(res.report.energies[i] - exact) << ',';
    if (i < res.report.isometry_residuals.size()) os << res.report.isometry_residuals[i];
    os << '\n';
  }
  ctx.csv("energies", os.str());
}

}  // namespace

std::vector<Artifact> run_experiment(const ExperimentConfig& config) {
  Context ctx{config, config_hash(config), {}};
  const std::string& k = config.kind;
  if (k == "scaling-dims") scaling_dims(ctx);
  else if (k == "flow") flow(ctx);
  else if (k == "crossover") crossover(ctx);
  else if (k == "holo-compare") holo_compare(ctx);
  else if (k == "entropy") entropy(ctx);
  else if (k == "mps-export") mps_export(ctx);
  else if (k == "optimize") optimize_run(ctx);
  else throw InvalidArgument("experiment: unknown kind '" + k + "'");
  return ctx.out;
}

}  // namespace holomera::cli
