#include "confpinch/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace confpinch;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "confpinch");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = main_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("confpinch_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::filesystem::path dir_;
};

}  // namespace

TEST_F(Cli, NoSubcommandIsUsageError) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
}

TEST_F(Cli, HelpExitsZero) {
  const CliRun r = cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("verify-identities"), std::string::npos);
}

TEST_F(Cli, IdentitiesPassAndAreDeterministic) {
  const std::vector<std::string> base{"--seed", "11", "verify-identities", "--samples", "300", "--algebra-samples",
                                      "40"};
  auto a = base, b = base;
  a.insert(a.begin(), {"--out", path("a.json")});
  b.insert(b.begin(), {"--out", path("b.json")});
  const CliRun ra = cli(a), rb = cli(b);
  EXPECT_EQ(ra.code, kExitPass) << ra.out << ra.err;
  EXPECT_EQ(rb.code, kExitPass);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
  const auto j = Report::Json::parse(slurp(path("a.json")));
  EXPECT_EQ(j["schema"], "confpinch.report/1");
  EXPECT_EQ(j["command"], "verify-identities");
  EXPECT_EQ(j["parameters"]["seed"], 11);
  EXPECT_EQ(j["parameters"]["tolerances"]["q_identity"], 1e-10);
  EXPECT_EQ(j["pass"], true);
}

TEST_F(Cli, ToleranceOverrideErrors) {
  EXPECT_EQ(cli({"--out", path("r.json"), "--tol", "bogus=1", "verify-identities", "--samples", "10"}).code,
            kExitUsage);
  EXPECT_EQ(cli({"--out", path("r.json"), "--tol", "pinch=-1", "verify-identities", "--samples", "10"}).code,
            kExitUsage);
  EXPECT_FALSE(std::filesystem::exists(path("r.json")));
}

TEST_F(Cli, FailingCheckExitsOneAndNamesIt) {
  const CliRun r = cli({"--out", path("r.json"), "--tol", "cancellation=2", "pinch", "--model", "derdzinski", "--n",
                     "4", "--R", "6", "--C", "0.45", "--samples", "10"});
  EXPECT_EQ(r.code, kExitFail);
  EXPECT_NE(r.err.find("FAIL cancellation"), std::string::npos) << r.err;
  const auto j = Report::Json::parse(slurp(path("r.json")));
  EXPECT_EQ(j["pass"], false);
  EXPECT_EQ(j["parameters"]["tolerances"]["cancellation"], 2.0);
}

TEST_F(Cli, PinchModels) {
  const CliRun p = cli({"--out", path("p.json"), "pinch", "--model", "product", "--n", "4", "--L", "6.2832", "--r",
                     "1", "--samples", "10"});
  EXPECT_EQ(p.code, kExitPass) << p.out << p.err;
  const auto j = Report::Json::parse(slurp(path("p.json")));
  EXPECT_EQ(j["parameters"]["model"], "product");
  EXPECT_EQ(j["data"]["regularized"].size(), 3u);
  const CliRun s = cli({"--out", path("s.json"), "pinch", "--model", "sphere", "--n", "3", "--eps", "0.1,0.01",
                     "--samples", "10"});
  EXPECT_EQ(s.code, kExitPass) << s.out << s.err;
  EXPECT_EQ(Report::Json::parse(slurp(path("s.json")))["data"]["P"], 0.0);
  const CliRun c = cli({"--out", path("c.json"), "pinch", "--chart", "derdzinski-3", "--samples", "10"});
  EXPECT_EQ(c.code, kExitPass) << c.out << c.err;
}

TEST_F(Cli, PinchUsageErrors) {
  const std::string out = path("r.json");
  EXPECT_EQ(cli({"--out", out, "pinch"}).code, kExitUsage);
  EXPECT_EQ(cli({"--out", out, "pinch", "--model", "torus"}).code, kExitUsage);
  EXPECT_EQ(cli({"--out", out, "pinch", "--model", "derdzinski", "--n", "4", "--R", "6"}).code, kExitUsage);
  EXPECT_EQ(cli({"--out", out, "pinch", "--model", "derdzinski", "--n", "4", "--R", "6", "--C", "0.5"}).code,
            kExitUsage);
  EXPECT_EQ(cli({"--out", out, "pinch", "--chart", "conformal-3-a"}).code, kExitUsage);
  EXPECT_EQ(cli({"--out", out, "pinch", "--chart", "nowhere"}).code, kExitUsage);
  EXPECT_EQ(cli({"--out", out, "pinch", "--model", "sphere", "--eps", "0.1,-1"}).code, kExitUsage);
  EXPECT_EQ(cli({"--out", out, "pinch", "--model", "sphere", "--n", "2"}).code, kExitUsage);
}

TEST_F(Cli, DerdzinskiTableToStdoutAndFile) {
  const CliRun r = cli({"--out", path("d.json"), "derdzinski", "--n", "4", "--R", "6", "--C", "0.45", "--grid", "128"});
  EXPECT_EQ(r.code, kExitPass) << r.out << r.err;
  const auto pos = r.out.find("# confpinch warp table v1");
  ASSERT_NE(pos, std::string::npos);
  std::istringstream table(r.out.substr(pos));
  const WarpSolution s = read_table(table);
  EXPECT_EQ(s.size(), 128);
  EXPECT_EQ(s.ode.C, 0.45);

  const CliRun f = cli({"--out", path("d.json"), "derdzinski", "--n", "4", "--R", "6", "--C", "0.45", "--table",
                     path("t.txt")});
  EXPECT_EQ(f.code, kExitPass);
  EXPECT_EQ(f.out.find("# confpinch warp table"), std::string::npos);
  std::ifstream in(path("t.txt"));
  EXPECT_EQ(read_table(in).ode.n, 4);
  const auto j = Report::Json::parse(slurp(path("d.json")));
  EXPECT_EQ(j["command"], "derdzinski");
  EXPECT_NEAR(j["data"]["C_max"].get<double>(), 0.5, 1e-15);
}

TEST_F(Cli, DerdzinskiUsageErrors) {
  const std::string out = path("r.json");
  EXPECT_EQ(cli({"--out", out, "derdzinski", "--n", "4", "--R", "6", "--C", "0.5"}).code, kExitUsage);
  EXPECT_EQ(cli({"--out", out, "derdzinski", "--n", "4", "--R", "6", "--C", "5"}).code, kExitUsage);
  EXPECT_EQ(cli({"--out", out, "derdzinski", "--n", "4", "--R", "-6", "--C", "0.1"}).code, kExitUsage);
  EXPECT_EQ(cli({"--out", out, "derdzinski", "--n", "4", "--R", "6"}).code, kExitUsage);
  EXPECT_EQ(cli({"--out", out, "derdzinski", "--n", "4", "--R", "6", "--C", "0.3", "--grid", "10"}).code,
            kExitUsage);
}

TEST_F(Cli, VerifyModelsSelectedCharts) {
  const CliRun r = cli({"--out", path("m.json"), "verify-models", "--samples", "5", "--identity-samples", "3",
                     "--chart", "product-3", "--chart", "conformal-4-b"});
  EXPECT_EQ(r.code, kExitPass) << r.out << r.err;
  const auto j = Report::Json::parse(slurp(path("m.json")));
  EXPECT_TRUE(j["data"]["charts"].contains("product-3"));
  EXPECT_TRUE(j["data"]["charts"].contains("conformal-4-b"));
  EXPECT_EQ(j["data"]["charts"].size(), 2u);
  EXPECT_EQ(cli({"--out", path("m.json"), "verify-models", "--chart", "nowhere"}).code, kExitUsage);
}

TEST_F(Cli, CorpusSubcommand) {
  const CliRun r = cli({"corpus"});
  EXPECT_EQ(r.code, kExitPass);
  EXPECT_EQ(r.out, emit_corpus(default_corpus()));
  {
    std::ofstream c(path("c.yaml"));
    c << "version: 1\ncharts:\n  - {name: s, kind: sphere, n: 3, radius: 2}\n";
    std::ofstream bad(path("bad.yaml"));
    bad << "version: 9\ncharts: []\n";
  }
  const CliRun one = cli({"--corpus", path("c.yaml"), "corpus"});
  EXPECT_EQ(one.code, kExitPass);
  EXPECT_EQ(parse_corpus(one.out).charts.size(), 1u);
  EXPECT_EQ(cli({"--corpus", path("bad.yaml"), "corpus"}).code, kExitUsage);
  EXPECT_EQ(cli({"--corpus", path("missing.yaml"), "corpus"}).code, kExitUsage);
}

TEST_F(Cli, UnwritableReportIsUsageError) {
  EXPECT_EQ(cli({"--out", path("no/such/dir/r.json"), "verify-identities", "--samples", "10"}).code, kExitUsage);
}
