#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <sys/wait.h>

#include "config.hpp"
#include "experiments.hpp"
#include "holomera/serialize.hpp"

using namespace holomera;
using namespace holomera::cli;

namespace {

ExperimentConfig parsed(const std::string& text, const std::string& kind) {
  ExperimentConfig c;
  const ValidationReport r = parse_config(text, kind, c);
  EXPECT_TRUE(r.ok()) << (r.errors.empty() ? "" : r.errors.front());
  return c;
}

const Artifact& find(const std::vector<Artifact>& as, const std::string& name) {
  for (const auto& a : as)
    if (a.name == name) return a;
  throw std::runtime_error("missing artifact " + name);
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

struct Process {
  int status = -1;
  std::string out;
};

Process run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + HOLOMERA_CLI + std::string(" ") + args + " 2>&1";
  Process p;
  FILE* pipe = popen(cmd.c_str(), "r");
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) p.out.append(buf, n);
  const int raw = pclose(pipe);
  p.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return p;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("holomera_cli_test_" + std::to_string(::getpid())) / name;
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST(Validate, EmptyDocument) {
  ExperimentConfig c;
  const auto r = parse_config("", "flow", c);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0], "config: empty document");
}

TEST(Validate, SampleConfigIsClean) {
  ExperimentConfig c;
  EXPECT_TRUE(parse_config(R"({"experiment": "crossover", "chi": 2, "w_star": 3, "cap": "product", "seed": 4})", "crossover", c).ok());
  EXPECT_EQ(*c.w_star, 3);
  EXPECT_EQ(c.seed, 4u);
}

TEST(Validate, RangeViolationNamed) {
  ExperimentConfig c;
  const auto r = parse_config(R"({"chi": 1})", "flow", c);
  ASSERT_EQ(r.errors.size(), 1u);
  EXPECT_EQ(r.errors[0], "chi: 1 is outside [2, 8]");
}

TEST(Validate, SchemaErrorsAreCollected) {
  ExperimentConfig c;
  const auto r = parse_config(R"({"chi": 2.5, "colour": 1, "m2": [0, -0.3], "cap": "thermal", "separations": [3, 1]})",
                              "flow", c);
  std::string all;
  for (const auto& e : r.errors) all += e + "\n";
  EXPECT_NE(all.find("chi: expected an integer"), std::string::npos);
  EXPECT_NE(all.find("colour: unknown key"), std::string::npos);
  EXPECT_NE(all.find("m2: -0.3 violates"), std::string::npos);
  EXPECT_NE(all.find("cap: expected one of"), std::string::npos);
  EXPECT_NE(all.find("separations: entries must be strictly increasing"), std::string::npos);
}

TEST(Validate, KindRules) {
  ExperimentConfig c;
  EXPECT_FALSE(parse_config(R"({"chi": 2})", "crossover", c).ok());
  EXPECT_FALSE(parse_config(R"({"w_star": 2, "cap": "maximally-mixed"})", "mps-export", c).ok());
  EXPECT_FALSE(parse_config(R"({"experiment": "flow"})", "entropy", c).ok());
  EXPECT_FALSE(parse_config(R"({"alpha": 1})", "flow", c).ok());
  EXPECT_FALSE(parse_config(R"({"outputs": {"nope": "x.csv"}})", "flow", c).ok());
  EXPECT_FALSE(parse_config(R"({"outputs": {"curve": "../x.csv"}})", "flow", c).ok());
  EXPECT_TRUE(parse_config(R"({"outputs": {"curve": "x.csv"}})", "flow", c).ok());
}

TEST(ConfigHash, CanonicalAndSeedSensitive) {
  const ExperimentConfig a = parsed(R"({"chi": 3, "seed": 1})", "flow");
  const ExperimentConfig b = parsed(R"({ "seed": 1,
      "chi": 3 })", "flow");
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 64u);
  ExperimentConfig c;
  ASSERT_TRUE(parse_config(R"({"chi": 3, "seed": 1})", "flow", c, 2).ok());
  EXPECT_NE(config_hash(a), config_hash(c));
}

TEST(Run, ScalingDimsHasIdentityRow) {
  const auto as = run_experiment(parsed(R"({"chi": 4, "seed": 0})", "scaling-dims"));
  const Json doc = Json::parse(find(as, "scaling_dims.json").content);
  EXPECT_EQ(doc["meta"]["version"], kVersion);
  const Json& row = doc["operators"]["operators"][0];
  EXPECT_EQ(row["alpha"], 0);
  EXPECT_NEAR(row["delta"].get<double>(), 0.0, 1e-12);
}

TEST(Run, FlowResidualColumnBelowTolerance) {
  const auto as = run_experiment(parsed(R"({"chi": 3, "seed": 2})", "flow"));
  const auto rows = csv_rows(find(as, "flow.csv").content);
  ASSERT_GT(rows.size(), 3u);
  const auto& header = rows[0];
  const auto col = std::size_t(std::find(header.begin(), header.end(), "cs_residual") - header.begin());
  ASSERT_LT(col, header.size());
  int seen = 0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (col < rows[i].size() && !rows[i][col].empty()) {
      EXPECT_LT(std::abs(std::stod(rows[i][col])), 1e-6);
      ++seen;
    }
  EXPECT_EQ(seen, int(rows.size()) - 3);
}

TEST(Run, ArtifactsCarryHashAndVersion) {
  const ExperimentConfig c = parsed(R"({"chi": 2, "w_star": 2, "seed": 1})", "crossover");
  const std::string hash = config_hash(c);
  for (const auto& a : run_experiment(c)) {
    EXPECT_NE(a.content.find(hash), std::string::npos) << a.name;
    EXPECT_NE(a.content.find(kVersion), std::string::npos) << a.name;
    EXPECT_EQ(a.content.find('\r'), std::string::npos);
  }
}

TEST(Run, OutputsRenameArtifacts) {
  const auto as = run_experiment(parsed(R"({"chi": 2, "outputs": {"curve": "c.csv"}})", "flow"));
  EXPECT_NO_THROW(find(as, "c.csv"));
  EXPECT_NO_THROW(find(as, "flow.json"));
}

TEST(Run, OptimizeWritesCheckpoints) {
  const auto as = run_experiment(parsed(R"({"chi": 2, "sweeps": 4, "checkpoint_every": 2})", "optimize"));
  const Json ck = Json::parse(find(as, "checkpoint_000002.json").content);
  EXPECT_EQ(ck["sweep"], 2);
  EXPECT_NO_THROW(scale_invariant_from_json(ck["network"]));
  EXPECT_NO_THROW(find(as, "checkpoint_000004.json"));
  const auto rows = csv_rows(find(as, "energies.csv").content);
  EXPECT_EQ(rows.size(), 6u);  // header plus sweeps 0..4
}

TEST(Binary, RepeatedRunsAreByteIdentical) {
  const auto dir = scratch("det");
  std::ofstream(dir / "cfg.json") << R"({"experiment": "entropy", "chi": 2, "seed": 3, "ells": [2, 3, 4, 6], "offsets": 2})";
  for (const char* out : {"a", "b"}) {
    const Process p = run_cli("entropy --config " + (dir / "cfg.json").string() + " --out " + (dir / out).string());
    ASSERT_EQ(p.status, 0) << p.out;
  }
  int files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir / "a")) {
    EXPECT_EQ(slurp(e.path()), slurp(dir / "b" / e.path().filename())) << e.path();
    ++files;
  }
  EXPECT_EQ(files, 3);
  std::filesystem::remove_all(dir);
}

TEST(Binary, OptimizedNetworkFeedsLaterRuns) {
  const auto dir = scratch("chain");
  std::ofstream(dir / "opt.json") << R"({"chi": 2, "sweeps": 20})";
  ASSERT_EQ(run_cli("optimize --config " + (dir / "opt.json").string() + " --out " + (dir / "o").string()).status, 0);
  std::ofstream(dir / "flow.json") << R"({"network": ")" + (dir / "o" / "network.json").string() + R"("})";
  const Process p = run_cli("flow --config " + (dir / "flow.json").string() + " --out " + (dir / "f").string());
  ASSERT_EQ(p.status, 0) << p.out;
  EXPECT_NE(slurp(dir / "f" / "flow.json").find("file:"), std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST(Binary, ExitCodes) {
  const auto dir = scratch("exit");
  std::ofstream(dir / "bad.json") << R"({"chi": 1})";
  std::ofstream(dir / "complex.json") << R"({"chi": 3, "seed": 2, "alpha": 1, "beta": 1})";
  std::ofstream(dir / "empty.json");

  Process p = run_cli("flow --config " + (dir / "bad.json").string() + " --out " + (dir / "o2").string());
  EXPECT_EQ(p.status, 2);
  const Json e2 = Json::parse(slurp(dir / "o2" / "error.json"));
  EXPECT_EQ(e2["status"], "invalid-config");
  EXPECT_EQ(e2["errors"][0], "chi: 1 is outside [2, 8]");

  // Operator 1 of this network has a complex eigenvalue, so its correlator is complex.
  p = run_cli("flow --config " + (dir / "complex.json").string() + " --out " + (dir / "o3").string());
  EXPECT_EQ(p.status, 3);
  EXPECT_EQ(Json::parse(slurp(dir / "o3" / "error.json"))["module"], "correlator");

  p = run_cli("flow --config " + (dir / "missing.json").string() + " --out " + (dir / "o4").string());
  EXPECT_EQ(p.status, 2);
  p = run_cli("flow --config " + (dir / "bad.json").string() + " --out " + (dir / "o5").string(), "HOLOMERA_THREADS=0");
  EXPECT_EQ(p.status, 2);

  p = run_cli("validate --config " + (dir / "empty.json").string());
  EXPECT_EQ(p.status, 0);
  const Json v = Json::parse(p.out);
  EXPECT_FALSE(v["valid"].get<bool>());
  EXPECT_EQ(v["errors"][0], "config: empty document");

  p = run_cli("validate --config " + (dir / "bad.json").string());
  EXPECT_EQ(Json::parse(p.out)["errors"][0], "chi: 1 is outside [2, 8]");
  std::filesystem::remove_all(dir);
}
