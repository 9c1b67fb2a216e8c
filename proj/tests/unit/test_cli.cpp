#include "commands.hpp"
#include "config.hpp"

#include "oslsim/simulator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

namespace osl::cli {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Json shipped(const std::string& name) {
  return Json::parse(slurp(fs::path(OSLSIM_CONFIG_DIR) / (name + ".json")));
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("oslsim_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write_config(const Json& j, const std::string& name = "config.json") {
    const fs::path p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p.string();
  }

  int run_cmd(const std::string& command, const std::string& config, const std::string& out,
              std::function<void(Options&)> tweak = {}) {
    Options o;
    o.command = command;
    o.config_path = config;
    o.out_dir = (dir_ / out).string();
    if (tweak) tweak(o);
    log_.str("");
    return run(o, log_);
  }

  fs::path dir_;
  std::ostringstream log_;
};

TEST_F(Cli, ValidateStableLikeSample) {
  const auto cfg = std::string(OSLSIM_CONFIG_DIR) + "/stable_like.json";
  EXPECT_EQ(run_cmd("validate", cfg, "v"), kOk) << log_.str();
  const Json rep = Json::parse(slurp(dir_ / "v" / "validate.json"));
  EXPECT_TRUE(rep["ok"].get<bool>());
  // The lattice need not hit the peak of alpha, so the probed minimum sits just above 1/1.5.
  EXPECT_GE(rep["min_lambda"].get<double>(), 1.0 / 1.5 - 1e-12);
  EXPECT_NEAR(rep["min_lambda"].get<double>(), 1.0 / 1.5, 1e-3);
}

TEST_F(Cli, ValidateAlphaMaxTwoNamesLowerBound) {
  Json j = shipped("stable_like");
  j["model"]["field"]["alpha_max"] = 2.0;
  EXPECT_EQ(run_cmd("validate", write_config(j), "v"), kFailure);
  EXPECT_NE(log_.str().find("(E3)"), std::string::npos) << log_.str();
}

TEST_F(Cli, MissingFieldKindIsLineAnchoredConfigError) {
  Json j = shipped("stable_like");
  j["model"]["field"].erase("kind");
  const std::string cfg = write_config(j);
  int field_line = 0;
  std::istringstream text(slurp(cfg));
  for (std::string l; std::getline(text, l);) {
    ++field_line;
    if (l.find("\"field\"") != std::string::npos) break;
  }
  EXPECT_EQ(run_cmd("validate", cfg, "v"), kConfigError);
  EXPECT_NE(log_.str().find("config line " + std::to_string(field_line) + ":"), std::string::npos)
      << log_.str();
  EXPECT_NE(log_.str().find("kind"), std::string::npos);
}

TEST_F(Cli, SyntaxErrorReportsParserLine) {
  const fs::path p = dir_ / "bad.json";
  std::ofstream(p) << "{\n  \"model\": {\n    \"dim\": 2,\n    oops\n  }\n}\n";
  EXPECT_EQ(run_cmd("validate", p.string(), "v"), kConfigError);
  EXPECT_NE(log_.str().find("config line 4"), std::string::npos) << log_.str();
}

TEST_F(Cli, UnreadableConfigIsIoError) {
  EXPECT_EQ(run_cmd("validate", (dir_ / "missing.json").string(), "v"), kIoError);
}

TEST_F(Cli, UnwritableOutputIsIoError) {
  const fs::path blocker = dir_ / "file";
  std::ofstream(blocker) << "x";
  const auto cfg = std::string(OSLSIM_CONFIG_DIR) + "/levy_cauchy_1d.json";
  EXPECT_EQ(run_cmd("symbol-eval", cfg, "file/sub"), kIoError);
}

TEST_F(Cli, UnknownCommandAndMissingConfig) {
  EXPECT_EQ(run_cmd("frobnicate", "", "o"), kConfigError);
  EXPECT_EQ(run_cmd("simulate", "", "o"), kConfigError);
}

TEST_F(Cli, NonSymmetricSymbolNeedsComplexFlag) {
  Json j = shipped("stable_like");
  j["model"]["sigma"] = {{"kind", "discrete"},
                         {"atoms", {{1.0, 0.0}, {0.0, 1.0}}},
                         {"weights", {1.0, 0.5}}};
  const auto cfg = write_config(j);
  EXPECT_EQ(run_cmd("symbol-eval", cfg, "s"), kFailure);
  EXPECT_NE(log_.str().find("--complex"), std::string::npos);
  EXPECT_EQ(run_cmd("symbol-eval", cfg, "s", [](Options& o) { o.complex = true; }), kOk);
  const auto rows = csv_rows(slurp(dir_ / "s" / "symbol.csv"));
  ASSERT_FALSE(rows.empty());
  EXPECT_EQ(rows[0], (std::vector<std::string>{"x1", "x2", "xi1", "xi2", "q_re", "q_im", "err_est"}));
}

TEST_F(Cli, ZeroFrequencyGivesSingleZeroRow) {
  Json j = shipped("stable_like");
  j["symbol_eval"] = {{"xi", {{0.0, 0.0}}}};
  ASSERT_EQ(run_cmd("symbol-eval", write_config(j), "s"), kOk) << log_.str();
  const auto rows = csv_rows(slurp(dir_ / "s" / "symbol.csv"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"x1", "x2", "xi1", "xi2", "q", "err_est"}));
  EXPECT_EQ(std::stod(rows[1][4]), 0.0);
}

TEST_F(Cli, CauchyGridMatchesClosedForm) {
  Json j = shipped("levy_cauchy_1d");
  const double mass = 2.5;
  j["model"]["sigma"]["mass"] = mass;
  const Json grid = {{"directions", {{1.0}, {-1.0}}}, {"lo", 1e-3}, {"hi", 1e3}, {"n", 13}};
  j["symbol_eval"] = {{"xi_grid", grid}};
  ASSERT_EQ(run_cmd("symbol-eval", write_config(j), "s"), kOk) << log_.str();
  const auto rows = csv_rows(slurp(dir_ / "s" / "symbol.csv"));
  ASSERT_EQ(rows.size(), 27u);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double xi = std::stod(rows[k][1]);
    const double q = std::stod(rows[k][2]);
    const double ref = std::numbers::pi * mass / 2.0 * std::abs(xi);
    EXPECT_LE(std::abs(q - ref), 3e-8 * ref) << "xi = " << xi;
  }
}

TEST_F(Cli, SymbolEvalIsByteIdenticalAcrossRunsAndThreads) {
  const auto cfg = std::string(OSLSIM_CONFIG_DIR) + "/stable_like.json";
  ASSERT_EQ(run_cmd("symbol-eval", cfg, "a"), kOk);
  ASSERT_EQ(run_cmd("symbol-eval", cfg, "b", [](Options& o) { o.threads = 3; }), kOk);
  const std::string a = slurp(dir_ / "a" / "symbol.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(dir_ / "b" / "symbol.csv"));
}

TEST_F(Cli, FloatsCarrySeventeenDigits) {
  const auto cfg = std::string(OSLSIM_CONFIG_DIR) + "/levy_cauchy_1d.json";
  ASSERT_EQ(run_cmd("symbol-eval", cfg, "s"), kOk);
  const auto rows = csv_rows(slurp(dir_ / "s" / "symbol.csv"));
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double q = std::stod(rows[k][2]);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", q);
    EXPECT_EQ(rows[k][2], buf);
  }
}

TEST_F(Cli, SimulateRejectsZeroPaths) {
  Json j = shipped("levy_cauchy_1d");
  j["sim"]["n_paths"] = 0;
  EXPECT_EQ(run_cmd("simulate", write_config(j), "e"), kConfigError);
  EXPECT_NE(log_.str().find("n_paths"), std::string::npos);
}

TEST_F(Cli, SimulateManifestAndHeader) {
  Json j = shipped("levy_cauchy_1d");
  j["sim"]["n_paths"] = 50;
  const auto cfg = write_config(j);
  ASSERT_EQ(run_cmd("simulate", cfg, "e"), kOk) << log_.str();
  const Json manifest = Json::parse(slurp(dir_ / "e" / "manifest.json"));
  const RunConfig rc = load_config(cfg);
  const OslModel model = build_model(rc);
  EXPECT_EQ(manifest["truncation_error_bound"].get<double>(),
            truncation_error_bound(model, j["sim"]["eps"].get<double>()));
  EXPECT_EQ(manifest["model_hash"].get<std::string>(), rc.model_hash());

  std::istringstream lines(slurp(dir_ / "e" / "ensemble.jsonl"));
  std::string line;
  ASSERT_TRUE(std::getline(lines, line));
  const Json header = Json::parse(line);
  EXPECT_EQ(header["type"], "header");
  EXPECT_EQ(header["seed"].get<std::uint64_t>(), 11u);
  EXPECT_EQ(header["eps"].get<double>(), 1e-3);
  EXPECT_EQ(header["model_hash"], manifest["model_hash"]);
  std::size_t paths = 0;
  while (std::getline(lines, line)) {
    const Json p = Json::parse(line);
    EXPECT_EQ(p["index"].get<std::size_t>(), paths);
    EXPECT_EQ(p["times"].size(), p["radii"].size());
    ++paths;
  }
  EXPECT_EQ(paths, 50u);
}

TEST_F(Cli, SimulateSameSeedReproduces) {
  Json j = shipped("interpolated_2d");
  j["sim"]["n_paths"] = 40;
  const auto cfg = write_config(j);
  ASSERT_EQ(run_cmd("simulate", cfg, "a"), kOk);
  ASSERT_EQ(run_cmd("simulate", cfg, "b", [](Options& o) { o.threads = 2; }), kOk);
  ASSERT_EQ(run_cmd("simulate", cfg, "c", [](Options& o) { o.seed = 99; }), kOk);
  const std::string a = slurp(dir_ / "a" / "ensemble.jsonl");
  EXPECT_EQ(a, slurp(dir_ / "b" / "ensemble.jsonl"));
  EXPECT_NE(a, slurp(dir_ / "c" / "ensemble.jsonl"));
  EXPECT_EQ(Json::parse(slurp(dir_ / "c" / "manifest.json"))["seed"].get<std::uint64_t>(), 99u);
}

TEST_F(Cli, ModelHashIgnoresNonModelSections) {
  Json j = shipped("levy_cauchy_1d");
  const std::string h1 = parse_config(j.dump()).model_hash();
  j["sim"]["seed"] = 12345;
  EXPECT_EQ(parse_config(j.dump()).model_hash(), h1);
  j["model"]["sigma"]["mass"] = 2.0;
  EXPECT_NE(parse_config(j.dump()).model_hash(), h1);
  EXPECT_EQ(h1.size(), 16u);
}

TEST_F(Cli, StatsReportSchema) {
  Json j = shipped("levy_cauchy_1d");
  j["sim"]["n_paths"] = 300;
  ASSERT_EQ(run_cmd("stats", write_config(j), "st"), kOk) << log_.str();
  const Json reports = Json::parse(slurp(dir_ / "st" / "stats.json"));
  ASSERT_EQ(reports.size(), j["stats"].size());
  for (const auto& r : reports) {
    for (const char* key : {"statistic", "params", "estimate", "ci", "reference_shape", "verdict"}) {
      EXPECT_TRUE(r.contains(key)) << key << " missing in " << r.dump();
    }
    EXPECT_EQ(r["ci"].size(), 2u);
  }
  EXPECT_TRUE(fs::exists(dir_ / "st" / "tail_1.csv"));
}

TEST_F(Cli, StatsRefuseNonSymmetricModels) {
  Json j = shipped("levy_cauchy_1d");
  j["model"]["sigma"] = {{"kind", "discrete"}, {"atoms", {{1.0}}}, {"weights", {1.0}}};
  EXPECT_EQ(run_cmd("stats", write_config(j), "st"), kFailure);
  EXPECT_NE(log_.str().find("symmetric"), std::string::npos);
}

TEST_F(Cli, StatsUnknownStatisticIsConfigError) {
  Json j = shipped("levy_cauchy_1d");
  j["stats"] = {{{"statistic", "kurtosis"}}};
  EXPECT_EQ(run_cmd("stats", write_config(j), "st"), kConfigError);
}

TEST_F(Cli, IndicesMatchClosedForm) {
  const auto cfg = std::string(OSLSIM_CONFIG_DIR) + "/stable_like.json";
  ASSERT_EQ(run_cmd("indices", cfg, "i"), kOk) << log_.str();
  const Json j = Json::parse(slurp(dir_ / "i" / "indices.json"));
  // alpha(x) = 1.2 + 0.3 sin(x_1); both indices at infinity equal alpha(x).
  EXPECT_NEAR(j["infinity"][0]["beta"].get<double>(), 1.2, 1e-12);
  EXPECT_NEAR(j["infinity"][1]["delta"].get<double>(), 1.5, 1e-12);
  EXPECT_NEAR(j["zero"]["value"].get<double>(), 0.9, 1e-9);
}

TEST_F(Cli, VerifyBrokenFieldFailsExactlyAdmissibility) {
  const auto cfg = std::string(OSLSIM_CONFIG_DIR) + "/broken_field.json";
  EXPECT_EQ(run_cmd("verify", cfg, "v"), kFailure);
  const Json rep = Json::parse(slurp(dir_ / "v" / "verify.json"));
  std::vector<std::string> failed;
  for (const auto& item : rep["items"]) {
    if (!item["passed"].get<bool>()) failed.push_back(item["item"].get<std::string>());
  }
  EXPECT_EQ(failed, (std::vector<std::string>{"admissibility.E3", "admissibility.E4"}));
}

TEST_F(Cli, VerifyEmptySelectionIsConfigError) {
  EXPECT_EQ(run_cmd("verify", write_config({{"verify", {{"suites", Json::array()}}}}), "v"),
            kConfigError);
  EXPECT_EQ(run_cmd("verify", write_config({{"verify", {{"suites", {"nope"}}}}}), "v"),
            kConfigError);
}

TEST_F(Cli, VerifyQuickSuitePasses) {
  const Json cfg = {{"verify", {{"suites", {"matexp", "indices"}}, {"scale", "quick"}}}};
  EXPECT_EQ(run_cmd("verify", write_config(cfg), "v"), kOk) << log_.str();
  const Json rep = Json::parse(slurp(dir_ / "v" / "verify.json"));
  EXPECT_TRUE(rep["passed"].get<bool>());
  EXPECT_EQ(rep["items"].size(), 5u);
}

TEST_F(Cli, ArgumentParsing) {
  const std::string out = (dir_ / "p").string();
  const std::string cfg = std::string(OSLSIM_CONFIG_DIR) + "/levy_cauchy_1d.json";
  std::vector<std::string> args = {"oslsim", "symbol-eval", "--config", cfg, "--out", out,
                                   "--threads", "2"};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  EXPECT_EQ(main_entry(static_cast<int>(argv.size()), argv.data()), kOk);
  EXPECT_TRUE(fs::exists(fs::path(out) / "symbol.csv"));

  std::vector<std::string> bad = {"oslsim", "simulate", "--threads", "many"};
  std::vector<char*> bargv;
  for (auto& a : bad) bargv.push_back(a.data());
  EXPECT_EQ(main_entry(static_cast<int>(bargv.size()), bargv.data()), kConfigError);
}

}  // namespace
}  // namespace osl::cli
