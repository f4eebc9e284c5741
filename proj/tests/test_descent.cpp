#include <gtest/gtest.h>

#include <random>

#include "tractorlab/descent.hpp"
#include "tractorlab/errors.hpp"
#include "tractorlab/suites.hpp"

using namespace tractorlab;

TEST(Descent, QuaternionicStructureDescendsFromS7) {
  auto model = make_round_sphere(1, 2, 0);
  Scale s(model.connection);
  auto upts = model.hopf->quotient_chart.sample_points(3, 1);
  auto r = descend_quaternionic(model, s, model.triple->xi, upts, 2);
  EXPECT_LT(r.quaternion, 1e-12);
  EXPECT_LT(r.lie_relations, 1e-12);
  EXPECT_LT(r.fiber_consistency, 1e-12);
  EXPECT_GE(r.fiber_pairs, 3);
  EXPECT_LT(r.frame_orthogonality, 1e-12);
  EXPECT_GT(r.frame_det_min, 0.0);
  EXPECT_LT(r.torsion, 1e-12);
  EXPECT_LT(r.q_preserving, 1e-12);
  EXPECT_LT(r.standard_structure, 1e-12);
  EXPECT_LT(r.scale_independence, 1e-12);
  EXPECT_LT(r.change_formula, 1e-12);
}

TEST(Descent, IndefiniteStratumDescends) {
  auto model = make_round_sphere(1, 1, 1, -1);
  Scale s(model.connection);
  auto r = descend_quaternionic(model, s, model.triple->xi,
                                model.hopf->quotient_chart.sample_points(2, 3), 4);
  EXPECT_LT(r.fiber_consistency, 1e-12);
  EXPECT_LT(r.q_preserving, 1e-12);
}

TEST(Descent, FibreMovesStayOnTheFibre) {
  auto model = make_round_sphere(1, 2, 0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N(0.0, 0.1);
  int moved = 0;
  for (const auto& x : model.chart.sample_points(6, 6)) {
    Quaternion r{1.0, N(rng), N(rng), N(rng)};
    r = (1.0 / std::sqrt(r.norm2())) * r;
    auto y = fibre_move(model, x, r);
    if (!y) continue;
    ++moved;
    auto u = model.hopf->project(x), v = model.hopf->project(*y);
    for (std::size_t c = 0; c < u.size(); ++c) EXPECT_NEAR(u[c], v[c], 1e-13);
    EXPECT_GT(std::abs((*y)[0] - x[0]) + std::abs((*y)[1] - x[1]) + std::abs((*y)[2] - x[2]), 0.0);
  }
  EXPECT_GT(moved, 0);
}

TEST(Descent, FrameFitRecoversARotation) {
  auto Q = right_triple(1);
  Mat R(3, 3);
  const double c = std::cos(0.7), sn = std::sin(0.7);
  R << c, -sn, 0, sn, c, 0, 0, 0, 1;
  std::array<Mat, 3> to;
  for (int r = 0; r < 3; ++r) {
    to[r] = Mat::Zero(4, 4);
    for (int s = 0; s < 3; ++s) to[r] += R(r, s) * Q[s];
  }
  auto [fit, res] = frame_fit(Q, to);
  EXPECT_LT(res, 1e-14);
  EXPECT_LT(max_abs(fit - R), 1e-14);
}

TEST(TractorDescent, RoundSphereTractorsDescend) {
  auto model = make_round_sphere(1, 2, 0);
  Scale s(model.connection);
  auto r = check_tractor_descent(model, s, model.triple->xi, model.chart.sample_points(2, 7), 8);
  EXPECT_LT(r.curvature, 1e-12);
  EXPECT_LT(r.path_independence, 1e-9);
  EXPECT_LT(r.test_tractor, 1e-9);
  EXPECT_GE(r.fiber_pairs, 1);
}

TEST(TractorDescent, GenericMetricHasCurvatureAlongD) {
  auto model = make_round_sphere(1, 2, 0);
  Scale s(levi_civita(holonomy_control_metric(model)));
  const auto& xi = model.triple->xi;
  EXPECT_GT(curvature_degeneracy(s, {xi[0], xi[1], xi[2]}, model.chart.sample_points(3, 9)),
            1e-3);
}

TEST(QuaternionicKaehler, QuotientOfS7IsEinsteinWithConstant12) {
  auto model = make_round_sphere(1, 2, 0);
  auto r = qk_quotient_check(model, model.hopf->quotient_chart.sample_points(3, 10), 11);
  EXPECT_LT(r.ricci, 1e-10);
  EXPECT_LT(r.hermitian, 1e-12);
  EXPECT_LT(r.q_parallel, 1e-12);
  EXPECT_LT(r.descended_vs_levi_civita, 1e-12);
  EXPECT_LT(r.fiber_consistency, 1e-12);
  EXPECT_EQ(r.signature, (std::pair{4, 0}));
}

TEST(QuaternionicKaehler, IndefiniteQuotients) {
  auto plus = make_round_sphere(2, 2, 1, 1);
  auto r = qk_quotient_check(plus, plus.hopf->quotient_chart.sample_points(1, 12), 13);
  EXPECT_LT(r.ricci, 1e-9);
  EXPECT_EQ(r.signature, (std::pair{4, 4}));
  auto minus = make_round_sphere(1, 1, 1, -1);
  auto rm = qk_quotient_check(minus, minus.hopf->quotient_chart.sample_points(2, 14), 15);
  EXPECT_LT(rm.ricci, 1e-10);
  EXPECT_EQ(rm.signature, (std::pair{0, 4}));
}

TEST(QuaternionicKaehler, QuotientMetricIsFibreIndependent) {
  auto model = make_round_sphere(1, 1, 1);
  auto gq = quotient_metric(model);
  auto u = model.hopf->quotient_chart.sample_points(1, 16)[0];
  auto v = gq.values(u);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) EXPECT_NEAR(v[a * 4 + b], v[b * 4 + a], 1e-14);
}
