#include <gtest/gtest.h>

#include "tractorlab/quaternion.hpp"
#include "tractorlab/errors.hpp"
#include "tractorlab/models.hpp"
#include "tractorlab/suites.hpp"

using namespace tractorlab;

class ThreeSasaki : public ::testing::TestWithParam<std::tuple<const char*, int, int, int>> {};

TEST_P(ThreeSasaki, AxiomsHold) {
  auto [name, m, p, q] = GetParam();
  auto model = get_model(name, m, p, q);
  auto r = check_3sasaki(*model.triple, model.chart.sample_points(m == 1 ? 8 : 3, 1));
  EXPECT_LT(r.max(), 1e-10);
  for (const auto& s : r.sasaki) {
    EXPECT_LT(s.killing, 1e-12);
    EXPECT_LT(s.unit_norm, 1e-12);
  }
  EXPECT_LT(r.einstein, 1e-10);
}

INSTANTIATE_TEST_SUITE_P(Models, ThreeSasaki,
                         ::testing::Values(std::tuple{"round_sphere", 1, 2, 0},
                                           std::tuple{"round_sphere", 1, 1, 1},
                                           std::tuple{"round_sphere_minus", 1, 1, 1},
                                           std::tuple{"round_sphere", 2, 2, 1}));

TEST(Sasaki, RescaledMetricFailsTheAxioms) {
  auto model = make_round_sphere(1, 2, 0);
  SasakiTriple t = *model.triple;
  t.g = scale(t.g, 2.0);
  auto r = check_3sasaki(t, model.chart.sample_points(3, 2));
  EXPECT_NEAR(r.sasaki[0].unit_norm, 1.0, 1e-12);
  EXPECT_GT(r.sasaki[0].second_derivative, 0.1);
  // Killing fields stay Killing under a constant rescaling.
  EXPECT_LT(r.sasaki[0].killing, 1e-12);
}

TEST(Sasaki, LieBracketOfTheTriple) {
  auto model = make_round_sphere(1, 2, 0);
  const auto& xi = model.triple->xi;
  auto x = model.chart.sample_points(1, 3)[0];
  auto ij = lie_bracket(xi[0], xi[1], x);
  auto k = xi[2].values(x);
  for (int a = 0; a < 7; ++a) EXPECT_NEAR(ij[a], -2.0 * k[a], 1e-13);
}

TEST(Cone, OverTheSphereIsFlatHyperkaehler) {
  auto model = make_round_sphere(1, 2, 0);
  auto cone = cone_build(*model.triple);
  auto r = check_cone(cone, cone.chart.sample_points(5, 4));
  EXPECT_LT(r.almost_complex, 1e-12);
  EXPECT_LT(r.hermitian, 1e-12);
  EXPECT_LT(r.parallel, 1e-10);
  EXPECT_LT(r.ricci, 1e-10);
  EXPECT_LT(r.riemann, 1e-10);
  EXPECT_LT(r.round_trip, 1e-12);
  EXPECT_EQ(r.signature, (std::pair{8, 0}));
}

TEST(Cone, IndefiniteCone) {
  auto model = make_round_sphere(1, 1, 1);
  auto cone = cone_build(*model.triple);
  auto r = check_cone(cone, cone.chart.sample_points(3, 5));
  EXPECT_LT(r.parallel, 1e-10);
  EXPECT_EQ(r.signature, (std::pair{4, 4}));
}

TEST(Cone, NonSasakiBaseIsNotKaehler) {
  auto model = make_round_sphere(1, 2, 0);
  SasakiTriple t = *model.triple;
  t.g = holonomy_control_metric(model, 0.3);
  auto cone = cone_build(t);
  auto r = check_cone(cone, cone.chart.sample_points(3, 6));
  EXPECT_GT(r.parallel, 1e-3);
}

TEST(TractorHK, QuaternionicParallelStructure) {
  auto model = make_round_sphere(1, 1, 1);
  auto hk = build_tractor_hk(*model.triple);
  auto r = check_tractor_hk(hk, model.chart.sample_points(6, 7));
  EXPECT_LT(r.quaternion, 1e-12);
  EXPECT_LT(r.parallel, 1e-12);
  EXPECT_LT(r.metric_parallel, 1e-12);
  EXPECT_LT(r.hermitian, 1e-12);
  EXPECT_LT(r.ijk_form, 1e-12);
  EXPECT_EQ(r.signature, (std::pair{4, 4}));
  EXPECT_TRUE(r.signature_constant);
  EXPECT_TRUE(r.orientation_constant);
}

TEST(TractorHK, NonEinsteinMetricIsRefused) {
  auto model = make_round_sphere(1, 2, 0);
  SasakiTriple t = *model.triple;
  t.g = holonomy_control_metric(model, 0.3);
  EXPECT_THROW(build_tractor_hk(t), PreconditionError);
}

TEST(TractorHK, QuaternionicBasisSpans) {
  auto R = right_triple(2);
  auto basis = quaternionic_basis(R[0], R[1], R[2]);
  ASSERT_EQ(basis.size(), 2u);
  Mat M(8, 8);
  for (int s = 0; s < 2; ++s) {
    M.col(4 * s) = basis[s];
    M.col(4 * s + 1) = R[0] * basis[s];
    M.col(4 * s + 2) = R[1] * basis[s];
    M.col(4 * s + 3) = R[2] * basis[s];
  }
  EXPECT_GT(std::abs(M.determinant()), 1e-6);
}
