#include <gtest/gtest.h>

#include "tractorlab/errors.hpp"
#include "tractorlab/strat.hpp"

using namespace tractorlab;

class Adapted : public ::testing::TestWithParam<std::tuple<const char*, int, int, int>> {};

TEST_P(Adapted, LemmaIdentitiesHoldInTheEinsteinScale) {
  auto [name, m, p, q] = GetParam();
  auto model = get_model(name, m, p, q);
  Scale s(model.connection);
  auto r = check_adapted_scale(s, model.triple->xi, model.chart.sample_points(m == 1 ? 6 : 2, 1));
  EXPECT_EQ(r.families.size(), 10u);
  for (const auto& [family, v] : r.families) EXPECT_LT(v, 1e-10) << family;
  EXPECT_LT(r.affine_symmetry, 1e-10);
  for (double dv : r.divergence) EXPECT_LT(std::abs(dv), 1e-10);
}

INSTANTIATE_TEST_SUITE_P(Models, Adapted,
                         ::testing::Values(std::tuple{"round_sphere", 1, 2, 0},
                                           std::tuple{"round_sphere", 1, 1, 1},
                                           std::tuple{"round_sphere_minus", 1, 1, 1},
                                           std::tuple{"round_sphere", 2, 1, 2}));

TEST(Adapted, NonInvariantScaleIsRejected) {
  auto model = make_round_sphere(1, 2, 0);
  const int d = 7;
  // Upsilon = d(0.3 x0): Upsilon(i) != 0, so div i picks up (n + 2) Upsilon(i).
  TensorField upsilon(model.chart, TensorShape::covector(d), 0.0, Jet::kMaxOrder,
                      [d](std::span<const Jet>) {
                        std::vector<Jet> u(d, Jet(0.0));
                        u[0] = Jet(0.3);
                        return u;
                      });
  Scale s(projective_change(model.connection, upsilon));
  try {
    check_adapted_scale(s, model.triple->xi, model.chart.sample_points(3, 2));
    FAIL() << "scale accepted";
  } catch (const NotAdaptedError& e) {
    ASSERT_EQ(e.divergences().size(), 3u);
    double mx = 0.0;
    for (double v : e.divergences()) mx = std::max(mx, std::abs(v));
    EXPECT_GT(mx, 1e-3);
  }
}

TEST(Adapted, FamilyLookupByName) {
  AdaptedScaleReport r;
  r.families = {{"a.P_ii", 1e-3}, {"q.Q_parallel", 2e-3}};
  EXPECT_EQ(r.family("q.Q_parallel"), 2e-3);
  EXPECT_EQ(r.max_family(), 2e-3);
}
