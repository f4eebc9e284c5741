#include <gtest/gtest.h>

#include "tractorlab/errors.hpp"
#include "tractorlab/models.hpp"

using namespace tractorlab;

TEST(Models, CatalogNames) {
  std::vector<std::string> names;
  for (const auto& info : model_list()) names.push_back(info.name);
  EXPECT_EQ(names, (std::vector<std::string>{"round_sphere", "round_sphere_minus",
                                             "flat_projective", "metric_cone"}));
}

TEST(Models, UnknownModelListsValidNames) {
  try {
    get_model("torus", 1, 2, 0);
    FAIL();
  } catch (const ModelError& e) {
    EXPECT_NE(std::string(e.what()).find("round_sphere"), std::string::npos);
  }
}

TEST(Models, CapabilityBounds) {
  EXPECT_THROW(get_model("round_sphere", 5, 6, 0), CapabilityError);
  EXPECT_THROW(get_model("round_sphere", 1, 1, 0), PreconditionError);
  EXPECT_THROW(get_model("round_sphere", 1, 0, 2), PreconditionError);
  EXPECT_THROW(get_model("round_sphere_minus", 1, 2, 0), PreconditionError);
}

TEST(Models, SelfCheckPassesOnEveryModel) {
  for (const auto& info : model_list())
    for (auto [p, q] : {std::pair{2, 0}, std::pair{1, 1}}) {
      if (info.name == "round_sphere_minus" && q == 0) continue;
      auto model = get_model(info.name, 1, p, q);
      EXPECT_EQ(self_check(model), "") << info.name;
      EXPECT_EQ(model.chart.dim(), info.name == "metric_cone" ? 8 : 7);
    }
}

TEST(Models, GnomonicTauSign) {
  auto model = make_round_sphere(1, 1, 1);
  for (const auto& x : model.chart.sample_points(20, 1)) EXPECT_GT(model.tau(x), 0.0);
  auto minus = make_round_sphere(1, 1, 1, -1);
  for (const auto& x : minus.chart.sample_points(20, 1)) EXPECT_LT(minus.tau(x), 0.0);
}

TEST(Models, HopfProjectionIsConstantOnFibres) {
  auto model = make_round_sphere(1, 2, 0);
  auto r = check_hopf(model, model.chart.sample_points(8, 2), 3);
  EXPECT_LT(r.fiber_drift, 1e-12);
  EXPECT_LT(r.kernel, 1e-12);
  EXPECT_LT(r.section, 1e-14);
}

TEST(Models, StratumMetricMatchesSphereMetric) {
  auto model = make_round_sphere(1, 2, 0);
  auto g = stratum_metric(model.ambient, model.chart);
  for (const auto& x : model.chart.sample_points(4, 4)) {
    auto a = g.values(x), b = model.metric->values(x);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-13);
  }
}

TEST(Models, ProjectedTripleIsTheKillingTriple) {
  auto model = make_round_sphere(1, 1, 1);
  for (int t = 0; t < 3; ++t) {
    auto xi = projected_linear_field(model.ambient.ijk[t], model.chart, "xi");
    for (const auto& x : model.chart.sample_points(3, 5)) {
      auto a = xi.values(x), b = model.triple->xi[t].values(x);
      for (int c = 0; c < 7; ++c) EXPECT_NEAR(a[c], b[c], 1e-13);
    }
  }
}
