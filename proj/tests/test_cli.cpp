#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"

using namespace tractorlab;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args, std::optional<std::string> env = std::nullopt) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err, env);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("tractorlab_test_" + name);
}

}  // namespace

TEST(Cli, VerifySphereSuitePasses) {
  auto r = run({"verify", "--model", "round_sphere", "--m", "1", "--signature", "2,0",
                "--points", "4"});
  EXPECT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["suite"], "standard");
  bool sasaki = false, thm = false;
  for (const auto& c : j["checks"]) {
    sasaki |= c["check_name"].get<std::string>().rfind("sasaki.", 0) == 0;
    thm |= c["check_name"].get<std::string>().rfind("tractor_hk.", 0) == 0;
  }
  EXPECT_TRUE(sasaki && thm);
}

TEST(Cli, UnsupportedDimensionIsAUsageError) {
  auto r = run({"verify", "--model", "round_sphere", "--m", "5"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("m = 1 and m = 2"), std::string::npos);
}

TEST(Cli, UnknownModelAndSuiteListOptions) {
  auto r = run({"verify", "--model", "klein_bottle"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("flat_projective"), std::string::npos);
  auto s = run({"verify", "--suite", "everything"});
  EXPECT_EQ(s.code, 2);
  EXPECT_NE(s.err.find("descent"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"verify", "--signature", "2"}).code, 2);
  EXPECT_EQ(run({"verify", "--signature", "1,1", "--m", "2"}).code, 2);
  EXPECT_EQ(run({"verify", "--points", "0"}).code, 2);
  EXPECT_EQ(run({"verify", "--bogus"}).code, 2);
  EXPECT_EQ(run({"verify", "--points", "2"}, std::string("not-a-number")).code, 2);
}

TEST(Cli, StratifyReportsThreeNonemptyStrata) {
  auto path = temp_file("stratify.json");
  auto r = run({"stratify", "--model", "flat_projective", "--m", "1", "--signature", "1,1",
                "--points", "8", "--report", path.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  std::ifstream in(path);
  auto j = nlohmann::json::parse(in);
  bool found = false;
  for (const auto& c : j["checks"])
    if (c["check_name"] == "stratify.labels") {
      found = true;
      for (const char* key : {"plus", "zero", "minus"})
        EXPECT_GT(std::stoi(c["notes"][key].get<std::string>()), 0) << key;
    }
  EXPECT_TRUE(found);
  EXPECT_NE(r.out.find("checks passed"), std::string::npos);
  std::filesystem::remove(path);
}

TEST(Cli, FailingChecksExitWithOne) {
  auto r = run({"verify", "--points", "2", "--tol", "1e-30"});
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, ReportsAreByteIdentical) {
  std::vector<std::string> args{"all", "--model", "flat_projective", "--signature", "1,1",
                                "--points", "4", "--seed", "17"};
  auto a = run(args), b = run(args);
  EXPECT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  args.push_back("--jobs");
  args.push_back("3");
  EXPECT_EQ(run(args).out, a.out);
  EXPECT_EQ(nlohmann::json::parse(a.out)["wall_time"], nullptr);
  args.push_back("--timing");
  EXPECT_TRUE(nlohmann::json::parse(run(args).out)["wall_time"].is_number());
}

TEST(Cli, SettingsPrecedence) {
  auto path = temp_file("config.json");
  {
    std::ofstream f(path);
    f << R"({"seed": 7, "points": 3, "signature": "1,1", "model": "flat_projective"})";
  }
  auto s = cli::resolve({"verify", "--config", path.string()}, std::string("99"));
  EXPECT_EQ(s.seed, 7u);
  EXPECT_EQ(s.points, 3);
  EXPECT_EQ(s.model, "flat_projective");
  EXPECT_EQ(s.p, 1);
  EXPECT_EQ(s.q, 1);
  s = cli::resolve({"verify", "--config", path.string(), "--seed", "9", "--points", "5"},
                   std::string("99"));
  EXPECT_EQ(s.seed, 9u);
  EXPECT_EQ(s.points, 5);
  s = cli::resolve({"verify"}, std::string("99"));
  EXPECT_EQ(s.seed, 99u);
  s = cli::resolve({"verify"}, std::nullopt);
  EXPECT_EQ(s.seed, 0u);
  EXPECT_EQ(s.model, "round_sphere");
  EXPECT_EQ(s.suite, "standard");
  EXPECT_EQ(cli::resolve({"stratify"}, std::nullopt).model, "flat_projective");
  EXPECT_EQ(cli::resolve({"descend", "--model", "flat_projective"}, std::nullopt).suite, "m0");
  {
    std::ofstream f(path);
    f << R"({"seeds": 7})";
  }
  EXPECT_THROW(cli::resolve({"verify", "--config", path.string()}, std::nullopt),
               std::invalid_argument);
  EXPECT_EQ(run({"verify", "--config", path.string()}).code, 2);
  std::filesystem::remove(path);
}

TEST(Cli, ListModels) {
  auto r = run({"list-models"});
  EXPECT_EQ(r.code, 0);
  for (const char* name : {"round_sphere", "round_sphere_minus", "flat_projective", "metric_cone",
                           "holonomy", "m0"})
    EXPECT_NE(r.out.find(name), std::string::npos) << name;
}

TEST(Cli, SignatureParsing) {
  EXPECT_EQ(cli::parse_signature("3,0"), (std::pair{3, 0}));
  EXPECT_THROW(cli::parse_signature("3;0"), std::invalid_argument);
  EXPECT_THROW(cli::parse_signature("-1,2"), std::invalid_argument);
  EXPECT_THROW(cli::parse_signature("1,x"), std::invalid_argument);
}
