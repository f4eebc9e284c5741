#include <gtest/gtest.h>

#include <cmath>

#include "tractorlab/quaternion.hpp"
#include "tractorlab/errors.hpp"
#include "tractorlab/strat.hpp"

using namespace tractorlab;

class Stratification_ : public ::testing::TestWithParam<std::tuple<int, int, int>> {};

TEST_P(Stratification_, LabelsMatchTheQuadraticForm) {
  auto [m, p, q] = GetParam();
  auto model = make_flat_projective(m, p, q);
  Scale s(model.connection);
  auto h = flat_tractor_form(s, model.ambient.h, "h");
  auto pts = model.chart.sample_points(60, 1);
  auto st = stratify(s, h, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double t = model.tau(pts[i]);
    EXPECT_NEAR(st.tau[i], t, 1e-12 * std::max(1.0, std::abs(t)));
    if (std::abs(t) > st.tol_zero) EXPECT_EQ(st.labels[i], t > 0 ? 1 : -1);
  }
  EXPECT_EQ(st.plus + st.zero + st.minus, 60);
  if (q == 0) EXPECT_EQ(st.minus, 0);
  else {
    EXPECT_GT(st.minus, 0);
    EXPECT_GT(st.plus, 0);
  }
}

INSTANTIATE_TEST_SUITE_P(Signatures, Stratification_,
                         ::testing::Values(std::tuple{1, 1, 1}, std::tuple{1, 2, 0},
                                           std::tuple{2, 2, 1}, std::tuple{2, 1, 2}));

TEST(Stratify, NonParallelFormIsRefused) {
  auto model = make_flat_projective(1, 1, 1);
  Scale s(model.connection);
  Mat A = model.ambient.h;
  A(0, 3) = A(3, 0) = 0.4;
  auto h = constant_endomorphism(s, A, "not parallel");
  EXPECT_THROW(stratify(s, h, model.chart.sample_points(5, 2)), PreconditionError);
}

TEST(Stratify, M0RootsLieOnTheQuadric) {
  auto model = make_flat_projective(1, 1, 1);
  Scale s(model.connection);
  auto tau = tau_field(s, flat_tractor_form(s, model.ambient.h, "h"));
  auto r = locate_m0(tau, model.chart, 12, 17, 5);
  ASSERT_FALSE(r.roots.empty());
  EXPECT_EQ(r.separated, r.sign_changes);
  EXPECT_LE(r.max_abs_tau, 1e-10);
  for (const auto& x : r.roots) EXPECT_LE(std::abs(model.tau(x)), 1e-10);
}

TEST(Stratify, M0IsFoundForEverySeedInDimension11) {
  auto model = make_flat_projective(2, 2, 1);
  Scale s(model.connection);
  auto tau = tau_field(s, flat_tractor_form(s, model.ambient.h, "h"));
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto r = locate_m0(tau, model.chart, 8, 17, seed);
    ASSERT_FALSE(r.roots.empty()) << seed;
    EXPECT_LE(r.max_abs_tau, 1e-10) << seed;
  }
}

TEST(Stratify, DefiniteFormHasNoM0) {
  auto model = make_flat_projective(1, 2, 0);
  Scale s(model.connection);
  auto tau = tau_field(s, flat_tractor_form(s, model.ambient.h, "h"));
  auto r = locate_m0(tau, model.chart, 6, 9, 5);
  EXPECT_TRUE(r.roots.empty());
  EXPECT_EQ(r.sign_changes, 0);
}

TEST(Stratify, LabelsAreScaleInvariant) {
  auto model = make_flat_projective(2, 2, 1);
  Scale s(model.connection);
  auto h = flat_tractor_form(s, model.ambient.h, "h");
  const int d = 11;
  TensorField f(model.chart, TensorShape::scalar(d), 0.0, Jet::kMaxOrder,
                [d](std::span<const Jet> x) {
                  Jet r(0.0);
                  for (int a = 0; a < d; ++a) r += 0.2 * sin(x[a] * (a + 1.0));
                  return std::vector<Jet>{r};
                });
  auto li = label_scale_invariance(s, h, f, model.chart.sample_points(30, 3));
  EXPECT_EQ(li.flips, 0);
  EXPECT_LT(li.ratio_residual, 1e-12);
  EXPECT_GT(li.min_ratio, 0.0);
}

TEST(Stratify, TripleIsNowhereVanishing) {
  auto model = make_flat_projective(1, 1, 1);
  auto pts = model.chart.sample_points(50, 4);
  for (const auto& A : model.ambient.ijk)
    EXPECT_GT(normalized_field_norm(projected_linear_field(A, model.chart, "xi"), pts), 0.1);
}

TEST(Stratify, EinsteinMetricsOnBothStrata) {
  for (int stratum : {1, -1}) {
    auto chart = make_round_sphere(1, 1, 1, stratum).chart;
    auto r = einstein_metric_on_stratum(1, 1, 1, stratum, chart.sample_points(4, 5));
    EXPECT_LT(r.ricci, 1e-10);
    EXPECT_EQ(r.signature, (std::pair{3, 4}));
    EXPECT_LT(r.projective, 1e-12);
    EXPECT_LT(r.upsilon_closed, 1e-12);
    EXPECT_LT(r.triple.max(), 1e-10);
    EXPECT_GT(r.band_margin, 0.0);
  }
}

TEST(Stratify, EinsteinMetricRefusesPointsNearM0) {
  auto model = make_flat_projective(1, 1, 1);
  Scale s(model.connection);
  auto tau = tau_field(s, flat_tractor_form(s, model.ambient.h, "h"));
  auto roots = locate_m0(tau, model.chart, 6, 17, 6).roots;
  ASSERT_FALSE(roots.empty());
  EXPECT_THROW(einstein_metric_on_stratum(1, 1, 1, 1, {roots[0]}), DomainError);
}

TEST(Distribution, TripleSpansARank3InvolutiveDistribution) {
  auto model = make_round_sphere(1, 2, 0);
  const auto& xi = model.triple->xi;
  auto r = check_D_integrability({xi[0], xi[1], xi[2]}, model.chart.sample_points(10, 7));
  EXPECT_EQ(r.rank, 3);
  EXPECT_FALSE(r.rank_drop.has_value());
  EXPECT_LT(r.commutators, 1e-12);
}

TEST(Distribution, DependentFieldsDropRank) {
  auto model = make_round_sphere(1, 2, 0);
  const auto& xi = model.triple->xi;
  auto r = check_D_integrability({xi[0], xi[1], add(xi[0], scale(xi[1], -2.0))},
                                 model.chart.sample_points(5, 8));
  EXPECT_EQ(r.rank, 2);
  ASSERT_TRUE(r.rank_drop.has_value());
}

TEST(M0, IndefiniteModelSmall) {
  auto r = m0_checks(1, 1, 1, 8, 3);
  EXPECT_FALSE(r.search.roots.empty());
  EXPECT_EQ(r.conformal_signature, (std::pair{3, 3}));
  EXPECT_LT(r.x_orthogonality, 1e-12);
  EXPECT_LT(r.tangency, 1e-12);
  EXPECT_EQ(r.h0_dimension, 0);
  EXPECT_EQ(r.h0_corank, 3);
}

TEST(M0, LeviFormIsQuaternionicHeisenberg) {
  auto r = m0_checks(2, 2, 1, 8, 4);
  EXPECT_EQ(r.conformal_signature, (std::pair{7, 3}));
  EXPECT_EQ(r.h0_dimension, 4);
  EXPECT_EQ(r.h0_corank, 3);
  EXPECT_LT(r.h0_invariance, 1e-12);
  EXPECT_LT(r.levi_crosscheck, 1e-10);
  EXPECT_LT(r.heisenberg_fit, 1e-10);
  EXPECT_EQ(r.heisenberg_signature, (std::pair{1, 0}));
}

TEST(M0, QuotientStructureIsTheNegatedRightTriple) {
  auto Q = quotient_quaternionic_structure(2);
  auto R = right_triple(2);
  for (int r = 0; r < 3; ++r) EXPECT_EQ(max_abs(Q[r] - R[r]), 0.0);
}
