#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <openssl/evp.h>

namespace holomera::cli {

namespace {

using nlohmann::json;

const std::set<std::string> kKeys{"experiment", "chi",   "b",       "w_star", "cap",     "z_star",  "eta",
                                  "alpha",      "beta",  "m2",      "seed",   "separations", "levels", "source",
                                  "network",    "sweeps", "ells",   "offsets", "checkpoint_every",
                                  "count",      "outputs"};

struct Checker {
  const json& doc;
  std::vector<std::string>& errors;

  bool has(const char* key) const { return doc.contains(key); }

  std::optional<long long> integer(const char* key, long long lo, long long hi) {
    if (!has(key)) return std::nullopt;
    const json& v = doc.at(key);
    if (!v.is_number_integer()) {
      errors.push_back(std::string(key) + ": expected an integer");
      return std::nullopt;
    }
    const long long x = v.get<long long>();
    if (x < lo || x > hi) {
      errors.push_back(std::string(key) + ": " + std::to_string(x) + " is outside [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "]");
      return std::nullopt;
    }
    return x;
  }

  std::optional<double> real(const char* key, double lo, double hi, bool open_lo) {
    if (!has(key)) return std::nullopt;
    const json& v = doc.at(key);
    if (!v.is_number()) {
      errors.push_back(std::string(key) + ": expected a number");
      return std::nullopt;
    }
    const double x = v.get<double>();
    if (!std::isfinite(x) || (open_lo ? x <= lo : x < lo) || x > hi) {
      errors.push_back(std::string(key) + ": " + v.dump() + " is outside " + (open_lo ? "(" : "[") + json(lo).dump() + ", " +
                       json(hi).dump() + "]");
      return std::nullopt;
    }
    return x;
  }

  std::optional<std::string> choice(const char* key, const std::set<std::string>& allowed) {
    if (!has(key)) return std::nullopt;
    const json& v = doc.at(key);
    if (!v.is_string() || !allowed.count(v.get<std::string>())) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      errors.push_back(std::string(key) + ": expected one of " + list);
      return std::nullopt;
    }
    return v.get<std::string>();
  }

  template <typename T>
  std::optional<std::vector<T>> array(const char* key, double lo, bool open_lo, bool integers, bool increasing) {
    if (!has(key)) return std::nullopt;
    const json& v = doc.at(key);
    if (!v.is_array() || v.empty()) {
      errors.push_back(std::string(key) + ": expected a non-empty array");
      return std::nullopt;
    }
    std::vector<T> out;
    for (const auto& e : v) {
      if (!(integers ? e.is_number_integer() : e.is_number())) {
        errors.push_back(std::string(key) + ": expected " + (integers ? "integers" : "numbers"));
        return std::nullopt;
      }
      const double x = e.get<double>();
      if (!std::isfinite(x) || (open_lo ? x <= lo : x < lo)) {
        errors.push_back(std::string(key) + ": entry " + e.dump() + " is below the allowed range");
        return std::nullopt;
      }
      if (increasing && !out.empty() && !(double(out.back()) < x)) {
        errors.push_back(std::string(key) + ": entries must be strictly increasing");
        return std::nullopt;
      }
      out.push_back(e.get<T>());
    }
    return out;
  }
};

}  // namespace

const std::vector<std::pair<std::string, std::string>>& artifact_roles(const std::string& kind) {
  static const std::map<std::string, std::vector<std::pair<std::string, std::string>>> table{
      {"scaling-dims", {{"table", "scaling_dims.json"}, {"csv", "scaling_dims.csv"}}},
      {"flow", {{"curve", "flow.csv"}, {"summary", "flow.json"}}},
      {"crossover", {{"curve", "crossover.csv"}, {"summary", "crossover.json"}}},
      {"holo-compare", {{"geometry", "holo_geometry.csv"}, {"summary", "holo_compare.json"}, {"mera", "holo_mera.csv"}}},
      {"entropy", {{"curve", "entropy.csv"}, {"cuts", "entropy_cuts.csv"}, {"summary", "entropy.json"}}},
      {"mps-export", {{"mps", "mps.json"}, {"schmidt", "schmidt.csv"}}},
      {"optimize", {{"network", "network.json"}, {"report", "optimize.json"}, {"energies", "energies.csv"}}},
  };
  static const std::vector<std::pair<std::string, std::string>> none;
  const auto it = table.find(kind);
  return it == table.end() ? none : it->second;
}

ValidationReport parse_config(const std::string& text, const std::string& kind, ExperimentConfig& config,
                              std::optional<std::uint64_t> seed_override) {
  ValidationReport report;
  auto& errors = report.errors;
  if (std::find(kKinds.begin(), kKinds.end(), kind) == kKinds.end()) errors.push_back("experiment: unknown kind '" + kind + "'");
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    errors.push_back(text.find_first_not_of(" \t\r\n") == std::string::npos ? "config: empty document"
                                                                            : std::string("config: ") + e.what());
    return report;
  }
  if (!doc.is_object()) {
    errors.push_back("config: top level must be a JSON object");
    return report;
  }
  for (const auto& [key, value] : doc.items())
    if (!kKeys.count(key)) errors.push_back(key + ": unknown key");

  ExperimentConfig c;
  c.kind = kind;
  Checker ck{doc, errors};
  if (auto e = ck.choice("experiment", {kKinds.begin(), kKinds.end()}); e && *e != kind)
    errors.push_back("experiment: config is for '" + *e + "' but '" + kind + "' was requested");
  if (auto v = ck.integer("chi", 2, 8)) c.chi = int(*v);
  if (auto v = ck.integer("b", 3, 3)) c.b = int(*v);
  if (auto v = ck.integer("w_star", 1, 6)) c.w_star = int(*v);
  if (auto v = ck.choice("cap", {"product", "maximally-mixed"})) c.cap = *v;
  if (auto v = ck.real("z_star", 0.0, 1e12, true)) c.z_star = *v;
  if (auto v = ck.real("eta", 0.0, 100.0, true)) c.eta = *v;
  if (auto v = ck.integer("alpha", 0, 4096)) c.alpha = int(*v);
  if (auto v = ck.integer("beta", 0, 4096)) c.beta = int(*v);
  if (ck.has("m2")) {
    if (auto v = ck.array<double>("m2", -1e300, false, false, false)) {
      for (double m : *v)
        if (m < -0.25) errors.push_back("m2: " + json(m).dump() + " violates the stability bound m2 >= -1/4");
      c.m2 = *v;
    }
  }
  if (auto v = ck.integer("seed", 0, std::numeric_limits<long long>::max())) c.seed = std::uint64_t(*v);
  if (seed_override) c.seed = *seed_override;
  if (auto v = ck.array<double>("separations", 0.0, true, false, true)) c.separations = *v;
  if (auto v = ck.integer("levels", 2, 8)) c.levels = int(*v);
  if (auto v = ck.choice("source", {"random", "optimized"})) c.source = *v;
  if (ck.has("network")) {
    if (!doc.at("network").is_string() || doc.at("network").get<std::string>().empty())
      errors.push_back("network: expected a file path");
    else
      c.network = doc.at("network").get<std::string>();
  }
  if (auto v = ck.integer("sweeps", 1, 100000)) c.sweeps = int(*v);
  if (auto v = ck.array<long>("ells", 1.0, false, true, true)) c.ells = *v;
  if (auto v = ck.integer("offsets", 1, 27)) c.offsets = int(*v);
  if (auto v = ck.integer("checkpoint_every", 0, 100000)) c.checkpoint_every = int(*v);
  if (auto v = ck.integer("count", 1, 4096)) c.count = int(*v);
  if (ck.has("outputs")) {
    const json& o = doc.at("outputs");
    if (!o.is_object()) {
      errors.push_back("outputs: expected an object of artifact names");
    } else {
      const auto& roles = artifact_roles(kind);
      for (const auto& [role, name] : o.items())
        if (std::none_of(roles.begin(), roles.end(), [&](const auto& r) { return r.first == role; }))
          errors.push_back("outputs." + role + ": " + kind + " has no such artifact");
        else if (!name.is_string() || name.get<std::string>().empty() || name.get<std::string>().find('/') != std::string::npos)
          errors.push_back("outputs." + role + ": expected a plain file name");
      c.outputs = o;
    }
  }

  // Kind-specific requirements.
  const bool finite = kind == "crossover" || kind == "mps-export";
  if (finite && !c.w_star) errors.push_back("w_star: required for " + kind);
  if (kind == "mps-export" && c.cap != "product") errors.push_back("cap: mps-export needs the product cap (a mixed cap is not a pure state)");
  if (kind == "holo-compare" && !c.z_star && !c.w_star) errors.push_back("z_star: required for holo-compare unless w_star is given");
  if (kind == "holo-compare" && c.z_star && c.w_star) errors.push_back("z_star: holo-compare takes z* from w_star when a network is compared");
  if (kind == "holo-compare" && !c.eta && !c.w_star) errors.push_back("eta: required for holo-compare unless w_star is given");
  if (c.source == "optimized" && c.w_star && c.chi != 2)
    errors.push_back("source: optimized finite-range networks need chi 2 (larger chi adds a transitional layer)");
  if (c.network && c.source == "optimized") errors.push_back("network: cannot be combined with source 'optimized'");
  if ((c.alpha.has_value()) != (c.beta.has_value())) errors.push_back("alpha: alpha and beta must be given together");
  if (c.eta && (kind == "flow" || kind == "crossover")) errors.push_back("eta: " + kind + " takes eta from the network's scaling dimensions");
  if (c.w_star && c.chi > 3 && (kind == "crossover" || kind == "mps-export" || kind == "entropy" || kind == "holo-compare") &&
      *c.w_star > 3)
    errors.push_back("w_star: " + std::to_string(*c.w_star) + " with chi " + std::to_string(c.chi) + " exceeds the exact-conversion budget");

  if (!errors.empty()) return report;
  json canon = json::parse(text);  // std::map keys: sorted
  canon["experiment"] = kind;
  canon["seed"] = c.seed;
  c.canonical = canon;
  config = c;
  return report;
}

std::string config_hash(const ExperimentConfig& config) {
  const std::string text = config.canonical.dump();
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

}  // namespace holomera::cli
