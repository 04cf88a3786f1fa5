#include <gtest/gtest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rirkit/cli.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  json report;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = rirkit::cli::run(args, out, err);
  return {code, json::parse(out.str()), err.str()};
}

const std::string kPaperG = R"({"num":[1.5679e-5,-2.5685e-5],"den":[1,-2.000985,1.000994]})";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rirkit_cli_" + name);
  fs::remove_all(p);
  return p;
}

void expect_csv_shape(const fs::path& p) {
  std::ifstream f(p);
  ASSERT_TRUE(f) << p;
  std::string line;
  std::getline(f, line);
  const auto cols = std::count(line.begin(), line.end(), ',');
  int rows = 0;
  while (std::getline(f, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), cols);
    ++rows;
  }
  EXPECT_GT(rows, 0);
}

}  // namespace

TEST(Cli, AnalyzePaperG) {
  const fs::path dir = scratch("analyze");
  const Result r = call({"analyze", "--input", kPaperG, "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.report["schema"], "rirkit/1");
  EXPECT_EQ(r.report["status"], "exact_sufficient");
  EXPECT_NEAR(r.report["lower_bound"].get<double>(), 0.2868, 0.05 * 0.2868);
  expect_csv_shape(dir / "response.csv");
  std::ifstream f(dir / "report.json");
  EXPECT_EQ(json::parse(f), r.report);
}

TEST(Cli, StableInputIsPrecondition) {
  const Result r = call({"analyze", "--input", R"({"num":[1],"den":[1,-0.5]})"});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.report["error"]["type"], "precondition");
  EXPECT_NE(r.report["error"]["message"].get<std::string>().find("not in G"), std::string::npos);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, InvalidInputs) {
  EXPECT_EQ(call({"analyze", "--input", R"({"num":[1,0,0],"den":[1,2]})"}).code, 2);
  EXPECT_EQ(call({"analyze", "--input", R"({"num":[1],"den":[1,-1]})"}).code, 2);
  EXPECT_EQ(call({"analyze", "--input", "{not json"}).code, 2);
  EXPECT_EQ(call({"bogus"}).code, 2);
  EXPECT_EQ(call({"maglev", "--param", "k=abc"}).code, 2);
  EXPECT_EQ(call({"maglev", "--param", "zz=1"}).code, 2);
}

TEST(Cli, SynthAndNyquist) {
  const Result s = call({"synth", "--input", R"({"num":[1],"den":[1,-2]})"});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_TRUE(s.report["closed_loop"]["single_mode"].get<bool>());

  const fs::path dir = scratch("nyquist");
  const Result n = call({"nyquist", "--input", R"({"num":[-2],"den":[1,-2]})", "--dump", "--out",
                         dir.string()});
  ASSERT_EQ(n.code, 0) << n.err;
  EXPECT_EQ(n.report["nu_o"], -1);
  EXPECT_TRUE(n.report["stable"].get<bool>());
  expect_csv_shape(dir / "nyquist.csv");
}

TEST(Cli, PcrMaxDeterministic) {
  const std::vector<std::string> args{"pcr-max", "--param", "omega=1.2", "--param", "theta=-0.7",
                                      "--param", "trials=200", "--seed", "7"};
  std::ostringstream a, b, e;
  ASSERT_EQ(rirkit::cli::run(args, a, e), 0) << e.str();
  ASSERT_EQ(rirkit::cli::run(args, b, e), 0);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_LE(json::parse(a.str())["gap"].get<double>(), 1e-6 + 0.0);
}

TEST(Cli, MaglevAndFhnFind) {
  const Result m = call({"maglev"});
  ASSERT_EQ(m.code, 0) << m.err;
  EXPECT_EQ(m.report["analysis"]["status"], "not_exact");
  EXPECT_EQ(m.report["compensated_analysis"]["status"], "exact_sufficient");
  EXPECT_TRUE(m.report["bound"]["validated"].get<bool>());

  const fs::path dir = scratch("fhn");
  const Result f = call({"fhn-find", "--out", dir.string()});
  ASSERT_EQ(f.code, 0) << f.err;
  EXPECT_NEAR(f.report["e_o"].get<double>(), -0.1192, 3e-3);
  expect_csv_shape(dir / "fig1.csv");

  const Result s = call({"fhn-sim", "--eps", "-0.05", "--steps", "20000", "--out", dir.string()});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_EQ(s.report["recorded"], 20000);
  expect_csv_shape(dir / s.report["files"][0].get<std::string>());
}
