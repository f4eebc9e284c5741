#include <gtest/gtest.h>

#include "tractorlab/quaternion.hpp"
#include "tractorlab/errors.hpp"
#include "tractorlab/models.hpp"
#include "tractorlab/suites.hpp"

using namespace tractorlab;

namespace {

TensorField quadratic_field(const Chart& chart) {
  const int d = chart.dim();
  return TensorField(chart, TensorShape::vector(d), 0.0, Jet::kMaxOrder,
                     [d](std::span<const Jet> x) {
                       std::vector<Jet> out(d, Jet(0.0));
                       out[1] = square(x[0]);
                       out[2] = x[1] * x[3];
                       return out;
                     });
}

TensorField scale_function(const Chart& chart) {
  const int d = chart.dim();
  return TensorField(chart, TensorShape::scalar(d), 0.0, Jet::kMaxOrder,
                     [d](std::span<const Jet> x) {
                       Jet f(0.0);
                       for (int a = 0; a < d; ++a) f += 0.1 * cos(x[a] + a) * x[(a + 2) % d];
                       return std::vector<Jet>{f};
                     });
}

}  // namespace

TEST(Tractor, FlatModelHasFlatTractorConnection) {
  auto model = make_flat_projective(1, 1, 1);
  Scale s(model.connection);
  for (const auto& x : model.chart.sample_points(4, 1)) {
    for (const auto& F : tractor_curvature(s, x)) EXPECT_EQ(max_abs(F.values()), 0.0);
    for (const auto& A : model.ambient.ijk)
      for (const auto& D : adjoint_derivative(s, flat_tractor_endomorphism(s, A, "A"), x))
        EXPECT_LT(max_abs(D.values()), 1e-14);
  }
}

TEST(Tractor, CurvatureMatchesTensorsForAGenericConnection) {
  auto model = make_round_sphere(1, 2, 0);
  Scale s(levi_civita(holonomy_control_metric(model)));
  auto t = constant_tractor(s, {1, 0.5, -0.2, 0.3, 0.1, 0, 0.7, -1}, false, "t");
  for (const auto& x : model.chart.sample_points(3, 2)) {
    auto F = tractor_curvature(s, x);
    auto Ft = tractor_curvature_from_tensors(s, x);
    double size = 0.0;
    for (std::size_t i = 0; i < F.size(); ++i) {
      size = std::max(size, max_abs(Ft[i]));
      EXPECT_LT(max_abs(F[i].values() - Ft[i]), 1e-11);
    }
    EXPECT_GT(size, 1e-2);
    EXPECT_LT(curvature_commutator_residual(s, t, x), 1e-10);
  }
}

TEST(Tractor, ConnectionIsScaleInvariant) {
  auto model = make_round_sphere(1, 1, 1);
  Scale s(model.connection);
  auto sc = change_scale(s, scale_function(model.chart));
  auto t = constant_tractor(s, {0.3, -0.5, 1, 0.2, 0, 0.4, -0.1, 0.9}, false, "t");
  auto tt = sc.transform(t);
  for (const auto& x : model.chart.sample_points(3, 3)) {
    Mat G = sc.gauge(x, 0).values();
    auto D0 = tractor_derivative(s, t, x);
    auto D1 = tractor_derivative(sc.to, tt, x);
    for (int a = 0; a < 7; ++a) {
      Vec v0(8), v1(8);
      for (int i = 0; i < 8; ++i) {
        v0[i] = D0[a][i].value();
        v1[i] = D1[a][i].value();
      }
      EXPECT_LT((v1 - G * v0).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(Tractor, FieldsFromAnotherScaleAreRejected) {
  auto model = make_round_sphere(1, 2, 0);
  Scale s(model.connection);
  auto sc = change_scale(s, scale_function(model.chart));
  auto t = constant_tractor(s, std::vector<double>(8, 1.0), false, "t");
  auto x = model.chart.sample_points(1, 4)[0];
  EXPECT_THROW(tractor_derivative(sc.to, t, x), ScaleMismatchError);
}

TEST(Tractor, DualityHoldsWithExplicitCotractorFormula) {
  auto model = make_round_sphere(1, 2, 0);
  Scale s(model.connection);
  auto mu = constant_tractor(s, {1, 2, 3, 4, 5, 6, 7, 8}, true, "mu");
  auto t = constant_tractor(s, {0.5, -1, 0.25, 2, 0, 1, -0.5, 3}, false, "t");
  for (const auto& x : model.chart.sample_points(4, 5))
    EXPECT_LT(duality_residual(s, mu, t, x), 1e-12);
}

TEST(Tractor, KillingFieldsAreNormalSolutions) {
  auto model = make_round_sphere(1, 2, 0);
  Scale s(model.connection);
  auto pts = model.chart.sample_points(4, 6);
  for (const auto& xi : model.triple->xi) {
    auto r = check_normal_solution(s, xi, pts);
    EXPECT_TRUE(r.normal(1e-10));
    EXPECT_TRUE(r.parallel(1e-10));
  }
}

TEST(Tractor, GenericFieldIsNotInTheBGGKernel) {
  auto model = make_round_sphere(1, 2, 0);
  Scale s(model.connection);
  auto r = check_normal_solution(s, quadratic_field(model.chart), model.chart.sample_points(3, 7));
  EXPECT_GT(r.bgg_residual, 1e-2);
  EXPECT_GT(r.parallel_residual, 1e-2);
}

TEST(Tractor, SplittingOperatorProjectsBack) {
  auto model = make_round_sphere(1, 1, 1);
  Scale s(model.connection);
  auto xi = quadratic_field(model.chart);
  for (const auto& x : model.chart.sample_points(3, 8)) {
    auto L = splitting_operator(s, xi, x);
    auto pi = adjoint_projection(L);
    auto v = xi.values(x);
    for (int a = 0; a < 7; ++a) EXPECT_NEAR(pi[a].value(), v[a], 1e-14);
    EXPECT_NEAR(L.values().trace(), 0.0, 1e-13);
  }
}

TEST(Tractor, TransportAroundLoopsInFlatSpaceIsTrivial) {
  auto model = make_flat_projective(1, 2, 0);
  Scale s(model.connection);
  auto x = model.chart.sample_points(1, 9)[0];
  auto [M, steps] = transport_converged(s, rectangle_loop(x, 0, 3, 0.05));
  EXPECT_LT(max_abs(M - Mat::Identity(8, 8)), 1e-11);
  EXPECT_GE(steps, 8);
}

TEST(Tractor, TransportReversesAlongReversedCurves) {
  auto model = make_round_sphere(1, 2, 0);
  Scale s(levi_civita(holonomy_control_metric(model)));
  auto pts = model.chart.sample_points(2, 10);
  auto c = straight_segment(pts[0], pts[1]);
  Mat fwd = transport_converged(s, c).first;
  Mat back = transport_converged(s, reversed(c)).first;
  EXPECT_LT(max_abs(back * fwd - Mat::Identity(8, 8)), 1e-10);
}

TEST(Holonomy, SphereHolonomyLiesInSpPQ) {
  auto model = make_round_sphere(1, 1, 1);
  auto hk = build_tractor_hk(*model.triple);
  HolonomyOptions opt;
  opt.loops = 3;
  opt.seed = 2;
  auto r = holonomy_sample(hk.scale, hk.h, hk.I, hk.J, hk.K, opt);
  EXPECT_EQ(r.loops, 3);
  EXPECT_LT(r.membership_residual, 1e-6);
}

TEST(Holonomy, NonParallelStructureIsRefused) {
  auto model = make_round_sphere(1, 2, 0);
  auto hk = build_tractor_hk(*model.triple);
  Mat A = Mat::Identity(8, 8);
  A(0, 1) = 0.5;
  auto bad = constant_endomorphism(hk.scale, A, "A");
  HolonomyOptions opt;
  opt.loops = 1;
  EXPECT_THROW(holonomy_sample(hk.scale, hk.h, bad, hk.J, hk.K, opt), PreconditionError);
}

TEST(Holonomy, GenericMetricFailsMembership) {
  auto model = make_round_sphere(1, 2, 0);
  auto hk = build_tractor_hk(*model.triple);
  Scale perturbed(levi_civita(holonomy_control_metric(model)));
  HolonomyOptions opt;
  opt.loops = 2;
  opt.seed = 3;
  opt.check_preconditions = false;
  auto r = holonomy_sample(perturbed, hk.h, hk.I, hk.J, hk.K, opt);
  EXPECT_GT(r.membership_residual, 1e-3);
  EXPECT_GT(r.algebra_dimension, 0);
}

TEST(Holonomy, MembershipResidualSeparatesAlgebraElements) {
  auto amb = make_ambient(1, 2, 0);
  auto L = left_triple(2);
  // Left multiplications commute with the right triple and are skew.
  EXPECT_LT(sp_membership_residual(L[0] + 0.5 * L[2], amb.h, amb.ijk[0], amb.ijk[1], amb.ijk[2]),
            1e-15);
  Mat generic = Mat::Zero(8, 8);
  generic(0, 5) = 1.0;
  EXPECT_GT(sp_membership_residual(generic, amb.h, amb.ijk[0], amb.ijk[1], amb.ijk[2]), 0.1);
}

TEST(Volume, TractorVolumeIsParallelAndPathIndependent) {
  auto model = make_round_sphere(1, 2, 0);
  Scale s(levi_civita(holonomy_control_metric(model)));
  auto r = tractor_volume_check(s, model.chart.sample_points(4, 11));
  EXPECT_LT(r.parallel_residual, 1e-10);
  EXPECT_LT(r.uniqueness_residual, 1e-10);
  EXPECT_GT(r.min_value, 0.0);
}
