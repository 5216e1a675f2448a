#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "cli.hpp"

namespace fs = std::filesystem;
using synthctl::Json;
using synthctl::cli::run;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("synthctl_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ASSERT_EQ(call({"simulate", "--out", path("sim")}), 0) << err_.str();
    panel_ = path("sim/panel.csv");
  }
  void TearDown() override { fs::remove_all(dir_); }

  int call(const std::vector<std::string>& args) {
    err_.str("");
    return run(args, err_);
  }
  std::string path(const std::string& rel) const { return (dir_ / rel).string(); }
  std::vector<std::string> fit_args(const std::string& out) const {
    return {"fit", "--panel", panel_, "--treated", "treated", "--t0", "2015", "--out", path(out)};
  }
  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }
  static Json json(const std::string& p) { return Json::parse(slurp(p)); }

  fs::path dir_;
  std::string panel_;
  std::ostringstream err_;
};

}  // namespace

TEST_F(Cli, FitWritesThreeArtifacts) {
  ASSERT_EQ(call(fit_args("fit")), 0) << err_.str();
  for (const char* f : {"fit.json", "gaps.csv", "trajectory.svg"}) EXPECT_TRUE(fs::exists(path(std::string("fit/") + f)));
  const Json j = json(path("fit/fit.json"));
  EXPECT_EQ(j["outcome_mode"], "ratio");
  EXPECT_EQ(j["fit"]["weights"].size(), 9u);
  EXPECT_NEAR(j["effect"]["mean_gap"].get<double>(), 0.9, 0.15);
  EXPECT_NE(slurp(path("fit/trajectory.svg")).find("class=\"series\""), std::string::npos);
}

TEST_F(Cli, T0OutsideWindowExits2WithJson) {
  auto args = fit_args("bad");
  args[6] = "2030";
  EXPECT_EQ(call(args), 2);
  const Json e = Json::parse(err_.str());
  EXPECT_EQ(e["error"]["command"], "fit");
  EXPECT_NE(e["error"]["message"].get<std::string>().find("t0=2030"), std::string::npos);
}

TEST_F(Cli, RawOutcomeSwitchesColumn) {
  auto args = fit_args("raw");
  args.insert(args.end(), {"--outcome", "raw"});
  ASSERT_EQ(call(args), 0) << err_.str();
  const Json j = json(path("raw/fit.json"));
  EXPECT_EQ(j["outcome_mode"], "raw");
  EXPECT_EQ(j["outcome_label"], "passengers");
  EXPECT_EQ(j["fit"]["outcome_label"], "passengers");
  const Json r = json(path("sim/simulation.json"));
  EXPECT_EQ(json(path("raw/fit.json"))["treated"], r["treated"]);
}

TEST_F(Cli, AscmAndSdidMethods) {
  auto a = fit_args("ascm");
  a.insert(a.end(), {"--method", "ascm"});
  ASSERT_EQ(call(a), 0) << err_.str();
  EXPECT_TRUE(json(path("ascm/fit.json")).contains("augmented"));
  auto s = fit_args("sdid");
  s.insert(s.end(), {"--method", "sdid"});
  ASSERT_EQ(call(s), 0) << err_.str();
  EXPECT_TRUE(json(path("sdid/fit.json")).contains("sdid"));
  EXPECT_TRUE(fs::exists(path("sdid/trajectory.svg")));
  auto bad = fit_args("x");
  bad.insert(bad.end(), {"--method", "ols"});
  EXPECT_EQ(call(bad), 2);
}

TEST_F(Cli, PlaceboRatioTableRanksTreatedFirst) {
  ASSERT_EQ(call({"simulate", "--sim-effect", "1.0", "--out", path("strong")}), 0);
  ASSERT_EQ(call({"placebo", "--panel", path("strong/panel.csv"), "--treated", "treated", "--t0", "2015", "--out",
                  path("pl")}),
            0)
      << err_.str();
  const Json j = json(path("pl/placebo.json"));
  EXPECT_EQ(j["placebo"]["rank"], 1);
  EXPECT_DOUBLE_EQ(j["placebo"]["p_value"].get<double>(), 0.1);
  const std::string csv = slurp(path("pl/placebo_ratios.csv"));
  EXPECT_EQ(csv.rfind("unit,treated,pre_mspe,post_mspe,ratio,ranked,exclusion\ntreated,1,", 0), 0u);
  const std::string svg = slurp(path("pl/placebo_gaps.svg"));
  std::size_t n = 0;
  for (auto p = svg.find("class=\"series\""); p != std::string::npos; p = svg.find("class=\"series\"", p + 1)) ++n;
  EXPECT_EQ(n, 10u);
  EXPECT_TRUE(fs::exists(path("pl/placebo_gaps.csv")));
}

TEST_F(Cli, BootstrapSameSeedSameBytesAnyJobs) {
  const std::vector<std::string> base{"bootstrap", "--panel", panel_, "--treated", "treated", "--t0", "2015",
                                      "--seed",    "7",       "--draws", "40"};
  auto a = base, b = base, c = base;
  a.insert(a.end(), {"--out", path("b1")});
  b.insert(b.end(), {"--out", path("b2")});
  c.insert(c.end(), {"--out", path("b3"), "--jobs", "3"});
  ASSERT_EQ(call(a), 0) << err_.str();
  ASSERT_EQ(call(b), 0);
  ASSERT_EQ(call(c), 0);
  EXPECT_EQ(slurp(path("b1/bootstrap.json")), slurp(path("b2/bootstrap.json")));
  EXPECT_EQ(slurp(path("b1/bootstrap.json")), slurp(path("b3/bootstrap.json")));
  EXPECT_EQ(slurp(path("b1/bootstrap_estimates.csv")), slurp(path("b3/bootstrap_estimates.csv")));
  EXPECT_NE(slurp(path("b1/bootstrap_histogram.svg")).find("not displayed"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("b1/bootstrap_histogram.csv")));
}

TEST_F(Cli, ReportNeedsFitArtifact) {
  fs::create_directories(path("empty"));
  EXPECT_EQ(call({"report", "--out", path("empty")}), 2);
  EXPECT_NE(Json::parse(err_.str())["error"]["message"].get<std::string>().find("fit.json"), std::string::npos);
  ASSERT_EQ(call(fit_args("rep")), 0);
  ASSERT_EQ(call({"report", "--out", path("rep")}), 0) << err_.str();
  const std::string md = slurp(path("rep/report.md"));
  EXPECT_NE(md.find("trajectory.svg"), std::string::npos);
  EXPECT_NE(md.find("| donor | weight |"), std::string::npos);
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
  std::ofstream(path("run.ini")) << "panel=" << panel_ << "\ntreated=treated\nt0=2015\nmethod=sdid\nout="
                                 << path("cfg") << "\n";
  ASSERT_EQ(call({"fit", "--config", path("run.ini")}), 0) << err_.str();
  EXPECT_EQ(json(path("cfg/fit.json"))["method"], "sdid");
  ASSERT_EQ(call({"fit", "--config", path("run.ini"), "--method", "scm", "--out", path("cfg2")}), 0) << err_.str();
  EXPECT_EQ(json(path("cfg2/fit.json"))["method"], "scm");
}

TEST_F(Cli, OutputDirFromEnvironment) {
  ::setenv("SYNTHCTL_OUT", path("envout").c_str(), 1);
  const int rc = call({"fit", "--panel", panel_, "--treated", "treated", "--t0", "2015"});
  ::unsetenv("SYNTHCTL_OUT");
  ASSERT_EQ(rc, 0) << err_.str();
  EXPECT_TRUE(fs::exists(path("envout/fit.json")));
}

TEST_F(Cli, UsageErrorsExit2) {
  EXPECT_EQ(call({"fit", "--bogus"}), 2);
  EXPECT_EQ(call({}), 2);
  EXPECT_EQ(call({"fit", "--panel", panel_, "--t0", "2015"}), 2);
  EXPECT_EQ(call({"fit", "--panel", path("nope.csv"), "--treated", "x", "--t0", "2015"}), 2);
  EXPECT_EQ(call({"fit", "--builtin", "nowhere"}), 2);
  EXPECT_EQ(call({"fit", "--panel", panel_, "--treated", "treated", "--t0", "2015", "--window", "2015-2019"}), 2);
}

TEST_F(Cli, GenevaBuiltin) {
  ASSERT_EQ(call({"ingest", "--builtin", "geneva", "--out", path("g")}), 0) << err_.str();
  const Json j = json(path("g/ingest.json"));
  EXPECT_EQ(j["units"].size(), 2u);
  EXPECT_EQ(j["geneva_metric"].size(), 10u);
  EXPECT_DOUBLE_EQ(j["geneva_reference"]["average_effect"].get<double>(), 0.91);
  // two series only: one donor, so a synthetic control cannot be fitted
  EXPECT_EQ(call({"fit", "--builtin", "geneva", "--out", path("g")}), 2);
  EXPECT_EQ(Json::parse(err_.str())["error"]["kind"], "domain");
}

TEST_F(Cli, WindowRestriction) {
  auto args = fit_args("win");
  args.insert(args.end(), {"--window", "2012:2019"});
  ASSERT_EQ(call(args), 0) << err_.str();
  EXPECT_EQ(json(path("win/fit.json"))["window"][0], 2012);
}
