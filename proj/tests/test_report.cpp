#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "json.hpp"
#include "tractorlab/report.hpp"
#include "tractorlab/suites.hpp"

using namespace tractorlab;

TEST(Report, PassedIffResidualWithinTolerance) {
  EXPECT_TRUE(make_check("a", anchor::kThmA, 1, 1e-9, 1e-8).passed);
  EXPECT_TRUE(make_check("a", anchor::kThmA, 1, 1e-8, 1e-8).passed);
  EXPECT_FALSE(make_check("a", anchor::kThmA, 1, 2e-8, 1e-8).passed);
  EXPECT_FALSE(make_check("a", anchor::kThmA, 1, std::nan(""), 1e-8).passed);
  EXPECT_FALSE(make_check("a", anchor::kThmA, 1, INFINITY, 1e-8).passed);
}

TEST(Report, SeventeenSignificantDigits) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(std::nan("")), "null");
  double back = std::stod(format_number(1.0 / 3.0));
  EXPECT_EQ(back, 1.0 / 3.0);
}

TEST(Report, JsonSchemaAndKeyOrder) {
  VerificationReport rep;
  rep.artifact_version = artifact_version();
  rep.model = {"round_sphere", 1, 2, 0, "gnomonic", 42};
  rep.suite = "standard";
  auto c = make_check("x.y", anchor::kSasaki, 3, 1.5e-12, 1e-7);
  c.notes.emplace_back("count", "3");
  rep.checks.push_back(c);
  auto text = rep.to_json();
  auto j = nlohmann::json::parse(text);
  EXPECT_EQ(j["model"]["seed"], 42);
  EXPECT_EQ(j["model"]["chart"], "gnomonic");
  EXPECT_TRUE(j["wall_time"].is_null());
  ASSERT_EQ(j["checks"].size(), 1u);
  const auto& jc = j["checks"][0];
  for (const char* key : {"check_name", "paper_anchor", "n_points", "max_residual", "tolerance",
                          "passed"})
    EXPECT_TRUE(jc.contains(key)) << key;
  EXPECT_EQ(jc["paper_anchor"], std::string(anchor::kSasaki));
  EXPECT_DOUBLE_EQ(jc["max_residual"].get<double>(), 1.5e-12);
  // Sorted keys: re-serialising the parsed object changes nothing but spacing.
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
  EXPECT_LT(text.find("\"artifact_version\""), text.find("\"checks\""));
  EXPECT_LT(text.find("\"checks\""), text.find("\"model\""));
  EXPECT_TRUE(rep.all_passed());
  rep.wall_time = 1.25;
  EXPECT_EQ(nlohmann::json::parse(rep.to_json())["wall_time"], 1.25);
}

TEST(Report, ResidualTrackerKeepsNaN) {
  ResidualTracker t;
  t.add(1e-3);
  t.add(1e-5);
  EXPECT_EQ(t.max(), 1e-3);
  EXPECT_EQ(t.count(), 2);
  t.add(std::nan(""));
  EXPECT_TRUE(std::isnan(t.max()));
}

TEST(Anchors, RegistryIsClosedAndDistinct) {
  std::set<std::string_view> seen;
  for (auto a : anchor::all()) {
    EXPECT_FALSE(a.empty());
    EXPECT_TRUE(seen.insert(a).second) << a;
    EXPECT_TRUE(anchor::known(a));
  }
  EXPECT_FALSE(anchor::known("Thm. Z"));
}

// Every check produced by every suite on every model type carries a
// registered anchor.
TEST(Anchors, EverySuiteCheckIsAnchored) {
  SuiteOptions opt;
  opt.points = 2;
  opt.seed = 1;
  std::set<std::string> suites_seen;
  for (auto [name, p, q] : {std::tuple{"round_sphere", 2, 0}, std::tuple{"flat_projective", 1, 1},
                            std::tuple{"metric_cone", 2, 0}}) {
    auto model = get_model(name, 1, p, q);
    for (const auto& suite : applicable_suites(model)) {
      auto rep = run_suite(model, suite, opt);
      suites_seen.insert(suite);
      EXPECT_FALSE(rep.checks.empty()) << suite;
      for (const auto& c : rep.checks) {
        EXPECT_TRUE(anchor::known(c.paper_anchor)) << c.check_name << " " << c.paper_anchor;
        EXPECT_EQ(c.passed, c.max_residual <= c.tolerance) << c.check_name;
      }
    }
  }
  EXPECT_EQ(suites_seen.size(), suite_list().size() - 2);
}

TEST(Suites, ExpansionAndErrors) {
  auto sphere = get_model("round_sphere", 1, 2, 0);
  EXPECT_EQ(expand_suite(sphere, "standard"), (std::vector<std::string>{"sasaki", "tractor_hk"}));
  EXPECT_EQ(expand_suite(sphere, "tractor_hk,sasaki,tractor_hk"), (std::vector<std::string>{"tractor_hk", "sasaki"}));
  EXPECT_THROW(expand_suite(sphere, "nope"), SuiteError);
  EXPECT_THROW(expand_suite(sphere, "stratify"), SuiteError);
  try {
    expand_suite(sphere, "nope");
  } catch (const SuiteError& e) {
    EXPECT_NE(std::string(e.what()).find("holonomy"), std::string::npos);
  }
}

TEST(Suites, JobsDoNotChangeTheReport) {
  auto model = get_model("round_sphere", 1, 1, 1);
  SuiteOptions a;
  a.points = 6;
  a.seed = 3;
  SuiteOptions b = a;
  b.jobs = 4;
  EXPECT_EQ(run_suite(model, "sasaki,tractor_hk,adapted", a).to_json(),
            run_suite(model, "sasaki,tractor_hk,adapted", b).to_json());
}

TEST(Suites, ToleranceOverrideSparesStructuralChecks) {
  auto model = get_model("round_sphere", 1, 2, 0);
  SuiteOptions opt;
  opt.points = 2;
  opt.tol = 1e-30;
  auto rep = run_suite(model, "tractor_hk", opt);
  bool any_failed = false;
  for (const auto& c : rep.checks) {
    if (c.check_name == "tractor_hk.h_signature") EXPECT_TRUE(c.passed);
    else if (c.max_residual > 1e-30) {
      EXPECT_FALSE(c.passed);
      any_failed = true;
    }
  }
  EXPECT_TRUE(any_failed);
}

TEST(Suites, SplitPointsCoversEverything) {
  std::vector<Point> pts;
  for (int i = 0; i < 7; ++i) pts.push_back({double(i)});
  auto parts = split_points(pts, 3);
  ASSERT_EQ(parts.size(), 3u);
  std::vector<Point> joined;
  for (const auto& p : parts) joined.insert(joined.end(), p.begin(), p.end());
  EXPECT_EQ(joined, pts);
  EXPECT_EQ(split_points(pts, 20).size(), 7u);
}
