#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "config.hpp"
#include "experiments.hpp"
#include "holomera/serialize.hpp"

namespace {

using holomera::Json;
namespace cli = holomera::cli;

enum Exit { kOk = 0, kInvalidConfig = 2, kNumerical = 3 };

int fail(int code, const std::string& kind, const std::string& module, const std::vector<std::string>& errors,
         const std::optional<std::filesystem::path>& out) {
  Json e;
  e["status"] = code == kInvalidConfig ? "invalid-config" : "numerical-failure";
  e["exit_code"] = code;
  e["kind"] = kind;
  e["module"] = module;
  e["errors"] = errors;
  e["version"] = holomera::kVersion;
  const std::string text = e.dump(2) + "\n";
  std::cerr << text;
  if (out) {
    std::error_code ec;
    std::filesystem::create_directories(*out, ec);
    std::ofstream(*out / "error.json", std::ios::binary) << text;
  }
  return code;
}

/// Leading word of a library message names the module ("optimizer: ..." and the like).
std::string module_of(const std::string& message) {
  const auto colon = message.find(':');
  return colon == std::string::npos || colon > 32 ? "core" : message.substr(0, colon);
}

bool read_file(const std::string& path, std::string& text) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream os;
  os << in.rdbuf();
  text = os.str();
  return true;
}

bool apply_thread_cap(std::string& error) {
  const char* env = std::getenv("HOLOMERA_THREADS");
  if (!env || !*env) return true;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1 || n > 1024) {
    error = std::string("HOLOMERA_THREADS: '") + env + "' is not a thread count in [1, 1024]";
    return false;
  }
  Eigen::setNbThreads(int(n));
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MERA engine and holographic-geometry calculator"};
  app.set_version_flag("--version", std::string(holomera::kVersion));
  app.require_subcommand(1, 1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> kinds = cli::kKinds;
  kinds.push_back("validate");
  std::string validate_kind;
  for (const auto& kind : kinds) {
    auto* sub = app.add_subcommand(kind, kind == "validate" ? "Check a configuration without running it"
                                                             : "Run the " + kind + " experiment");
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    if (kind == "validate") {
      sub->add_option("--kind", validate_kind, "Experiment kind (defaults to the config's 'experiment' key)");
    } else {
      sub->add_option("--out", out_dir, "Artifact directory")->default_val(".");
      sub->add_option("--seed", seed, "Overrides the config seed");
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInvalidConfig;
  }
  const std::string kind = app.get_subcommands().front()->get_name();

  std::string text;
  if (kind == "validate") {
    Json report;
    std::vector<std::string> errors;
    if (!read_file(config_path, text)) {
      errors.push_back("config: cannot read '" + config_path + "'");
    } else {
      std::string k = validate_kind;
      if (k.empty()) {
        try {
          const Json doc = Json::parse(text);
          if (doc.is_object() && doc.contains("experiment") && doc["experiment"].is_string()) k = doc["experiment"];
        } catch (const Json::parse_error&) {
        }
      }
      if (k.empty()) k = "scaling-dims";
      cli::ExperimentConfig c;
      errors = cli::parse_config(text, k, c).errors;
      report["kind"] = k;
    }
    report["valid"] = errors.empty();
    report["errors"] = errors;
    std::cout << report.dump(2) << "\n";
    return kOk;
  }

  const std::filesystem::path out(out_dir);
  std::string thread_error;
  if (!apply_thread_cap(thread_error)) return fail(kInvalidConfig, kind, "cli", {thread_error}, out);
  if (!read_file(config_path, text)) return fail(kInvalidConfig, kind, "cli", {"config: cannot read '" + config_path + "'"}, out);
  cli::ExperimentConfig config;
  const cli::ValidationReport report = cli::parse_config(text, kind, config, seed);
  if (!report.ok()) return fail(kInvalidConfig, kind, "config", report.errors, out);

  std::vector<cli::Artifact> artifacts;
  try {
    artifacts = cli::run_experiment(config);
  } catch (const holomera::InvalidArgument& e) {
    return fail(kInvalidConfig, kind, module_of(e.what()), {e.what()}, out);
  } catch (const std::exception& e) {
    return fail(kNumerical, kind, module_of(e.what()), {e.what()}, out);
  }

  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) return fail(kNumerical, kind, "cli", {"cannot create '" + out.string() + "': " + ec.message()}, std::nullopt);
  for (const auto& a : artifacts) {
    std::ofstream f(out / a.name, std::ios::binary);
    f << a.content;
    if (!f) return fail(kNumerical, kind, "cli", {"cannot write '" + (out / a.name).string() + "'"}, std::nullopt);
    std::cout << (out / a.name).string() << "\n";
  }
  return kOk;
}
