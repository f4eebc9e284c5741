#include <gtest/gtest.h>

#include "tractorlab/connection.hpp"
#include "tractorlab/errors.hpp"
#include "tractorlab/models.hpp"
#include "tractorlab/suites.hpp"

using namespace tractorlab;

namespace {

double max_component(const TensorJets& t) { return max_abs(t); }

TensorField exact_form(const Chart& chart, double amp) {
  const int d = chart.dim();
  return TensorField(chart, TensorShape::covector(d), 0.0, 2,
                     make_pointwise_rule([d, amp](const Point& x, int order) {
                       auto X = seed(x, order + 1);
                       Jet f(0.0);
                       for (int a = 0; a < d; ++a) f += amp * sin(X[a] * (a + 1.0)) * X[(a + 1) % d];
                       std::vector<Jet> out;
                       for (int a = 0; a < d; ++a) out.push_back(f.derivative(a));
                       return out;
                     }));
}

}  // namespace

TEST(Connection, FlatChartHasNoCurvature) {
  auto c = flat_connection(Chart::cube("flat", 7, 1.0));
  for (const auto& x : c.chart.sample_points(5, 1)) {
    auto cur = curvature_at(c, x, 1);
    EXPECT_EQ(max_component(cur.R), 0.0);
    EXPECT_EQ(max_component(cur.P), 0.0);
  }
}

TEST(Connection, RoundSphereIsEinsteinAndProjectivelyFlat) {
  auto model = make_round_sphere(1, 2, 0);
  const auto& g = *model.metric;
  for (const auto& x : model.chart.sample_points(6, 2)) {
    auto gamma = model.connection.gamma_at(x, 1);
    auto gj = g.evaluate(x, 1);
    EXPECT_LT(metricity_residual(gj, gamma), 1e-13);
    auto cur = curvature_from_gamma(gamma);
    auto gv = g.values(x);
    for (int i = 0; i < 49; ++i) EXPECT_NEAR(cur.Ric[i].value(), 6.0 * gv[i], 1e-12);
    EXPECT_LT(max_component(cur.W), 1e-12);
    EXPECT_LT(reconstruction_residual(cur), 1e-12);
  }
}

TEST(Connection, ProjectiveWeylIsInvariantUnderProjectiveChange) {
  auto model = make_round_sphere(1, 2, 0);
  // A non-projectively-flat connection, so the invariance is not trivial.
  auto base = levi_civita(holonomy_control_metric(model));
  auto changed = projective_change(base, exact_form(model.chart, 0.2));
  for (const auto& x : model.chart.sample_points(4, 3)) {
    auto W0 = curvature_at(base, x, 0).W;
    auto W1 = curvature_at(changed, x, 0).W;
    EXPECT_GT(max_abs(W0), 1e-2);
    EXPECT_LT(max_abs_diff(W0, W1), 1e-12);
  }
}

TEST(Connection, RhoChangesByTheExpectedFormula) {
  auto model = make_round_sphere(1, 1, 1);
  auto upsilon = exact_form(model.chart, 0.15);
  auto changed = projective_change(model.connection, upsilon);
  const int d = 7;
  for (const auto& x : model.chart.sample_points(4, 5)) {
    auto P = curvature_at(model.connection, x, 0).P;
    auto Ph = curvature_at(changed, x, 0).P;
    auto U = upsilon.evaluate(x, 1);
    auto dU = covariant_derivative(U, model.connection.gamma_at(x, 0));
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        EXPECT_NEAR(Ph[a * d + b].value(),
                    P[a * d + b].value() - dU[a * d + b].value() + U[a].value() * U[b].value(),
                    1e-12);
  }
}

TEST(Connection, KillingFieldsAreAffine) {
  auto model = make_round_sphere(1, 2, 0);
  for (const auto& x : model.chart.sample_points(4, 6))
    for (const auto& xi : model.triple->xi)
      EXPECT_LT(max_abs(lie_derivative_connection_at(xi, model.connection, x)), 1e-12);
}

TEST(Connection, NonKillingFieldIsNotAffine) {
  auto model = make_round_sphere(1, 2, 0);
  const int d = 7;
  TensorField v(model.chart, TensorShape::vector(d), 0.0, Jet::kMaxOrder,
                [d](std::span<const Jet> x) {
                  std::vector<Jet> out(d, Jet(0.0));
                  out[1] = square(x[0]);
                  return out;
                });
  auto x = model.chart.sample_points(1, 7)[0];
  EXPECT_GT(max_abs(lie_derivative_connection_at(v, model.connection, x)), 0.5);
}

TEST(Connection, SingularMetricIsReportedWithItsPoint) {
  auto chart = Chart::cube("c", 3, 1.0);
  TensorField g(chart, TensorShape::valence(3, 0, 2), 0.0, Jet::kMaxOrder,
                [](std::span<const Jet> x) {
                  std::vector<Jet> c(9, Jet(0.0));
                  c[0] = Jet(1.0);
                  c[4] = Jet(1.0);
                  c[8] = 0.0 * x[0];
                  return c;
                });
  try {
    (void)levi_civita(g);
    FAIL() << "singular metric accepted";
  } catch (const DegeneracyError& e) {
    EXPECT_EQ(e.point().size(), 3u);
  }
}

TEST(Connection, CurvatureIdentitiesHoldForAGenericMetric) {
  auto model = make_round_sphere(1, 2, 0);
  auto nabla = levi_civita(holonomy_control_metric(model, 0.4));
  for (const auto& x : model.chart.sample_points(3, 8)) {
    auto gamma = nabla.gamma_at(x, 2);
    auto cur = curvature_from_gamma(gamma);
    EXPECT_LT(torsion_residual(gamma), 1e-14);
    EXPECT_LT(first_bianchi_residual(cur.R), 1e-11);
    EXPECT_LT(weyl_trace_residual(cur.W), 1e-11);
    EXPECT_LT(reconstruction_residual(cur), 1e-11);
    EXPECT_LT(weyl_divergence_residual(cur, gamma), 1e-9);
  }
}
