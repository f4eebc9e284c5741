#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "tractorlab/connection.hpp"
#include "tractorlab/jet.hpp"
#include "tractorlab/models.hpp"

using namespace tractorlab;
using tractorlab::testing::JetRule;

namespace {

Jet sample_function(std::span<const Jet> x) {
  return sin(x[0]) * exp(x[1]) + pow(x[0], 3.0) * x[2] + log(2.0 + square(x[1]));
}

}  // namespace

TEST(Jet, MatchesAnalyticDerivativesToThirdOrder) {
  const Point p{0.3, -0.4, 0.7};
  auto X = seed(p, 3);
  Jet f = sample_function(X);
  const double x = p[0], y = p[1], z = p[2];
  const double s = std::sin(x), c = std::cos(x), e = std::exp(y), q = 2.0 + y * y;
  EXPECT_NEAR(f.value(), s * e + x * x * x * z + std::log(q), 1e-15);
  EXPECT_NEAR(f.d(0), c * e + 3 * x * x * z, 1e-14);
  EXPECT_NEAR(f.d(1), s * e + 2 * y / q, 1e-14);
  EXPECT_NEAR(f.d(2), x * x * x, 1e-14);
  EXPECT_NEAR(f.d(0, 0), -s * e + 6 * x * z, 1e-14);
  EXPECT_NEAR(f.d(0, 1), c * e, 1e-14);
  EXPECT_NEAR(f.d(1, 0), c * e, 1e-14);
  EXPECT_NEAR(f.d(0, 2), 3 * x * x, 1e-14);
  EXPECT_NEAR(f.d(1, 1), s * e + (2 * q - 4 * y * y) / (q * q), 1e-14);
  EXPECT_NEAR(f.d(0, 0, 0), -c * e + 6 * z, 1e-13);
  EXPECT_NEAR(f.d(0, 0, 2), 6 * x, 1e-13);
  EXPECT_NEAR(f.d(0, 1, 1), c * e, 1e-13);
  EXPECT_NEAR(f.d(2, 2, 2), 0.0, 1e-13);
}

TEST(Jet, ThirdDerivativesAreSymmetric) {
  auto X = seed(Point{0.1, 0.2, -0.3}, 3);
  Jet f = sample_function(X) * reciprocal(1.5 + cos(X[2] * X[0]));
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) {
        EXPECT_NEAR(f.d(a, b, c), f.d(b, a, c), 1e-13);
        EXPECT_NEAR(f.d(a, b, c), f.d(c, b, a), 1e-13);
      }
}

TEST(Jet, InverseFunctionsRoundTrip) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.2, 1.5);
  for (int t = 0; t < 20; ++t) {
    auto X = seed(Point{U(rng), U(rng)}, 3);
    Jet a = X[0] * X[1] + 0.5;
    Jet r1 = exp(log(a)) - a;
    Jet r2 = square(sqrt(a)) - a;
    Jet r3 = a * reciprocal(a) - 1.0;
    Jet r4 = pow(a, 2.5) * pow(a, -1.5) - a;
    for (const Jet* r : {&r1, &r2, &r3, &r4})
      for (double v : r->raw()) EXPECT_NEAR(v, 0.0, 1e-12);
  }
}

TEST(Jet, CompositionFollowsChainRule) {
  const Point u0{0.2, -0.1};
  auto U = seed(u0, 3);
  std::vector<Jet> x_of_u{U[0] * U[1] + U[0], sin(U[1]), U[0] - square(U[1])};
  Point x0;
  for (const auto& j : x_of_u) x0.push_back(j.value());
  auto X = seed(x0, 3);
  std::vector<Jet> f{sample_function(X)};
  auto composed = compose(f, x_of_u);
  Jet direct = sample_function(x_of_u);
  for (std::size_t i = 0; i < direct.raw().size(); ++i)
    EXPECT_NEAR(composed[0].raw()[i], direct.raw()[i], 1e-12);
}

TEST(Jet, RestrictAndEmbedRoundTrip) {
  auto X = seed(Point{0.1, 0.2, 0.3, 0.4}, 3);
  Jet f = sin(X[1]) * X[3];
  const std::vector<int> vars{1, 3};
  Jet g = f.restrict_to(vars);
  EXPECT_EQ(g.dim(), 2);
  EXPECT_NEAR(g.d(0, 1), f.d(1, 3), 1e-15);
  Jet back = g.embed(4, vars);
  EXPECT_NEAR(back.d(1, 1, 3), f.d(1, 1, 3), 1e-15);
  EXPECT_EQ(back.d(0), 0.0);
}

TEST(Jet, DerivativeLowersOrder) {
  auto X = seed(Point{0.5, 0.25}, 3);
  Jet f = exp(X[0] * X[1]);
  Jet g = f.derivative(0);
  EXPECT_EQ(g.order(), 2);
  EXPECT_NEAR(g.value(), f.d(0), 1e-15);
  EXPECT_NEAR(g.d(1, 1), f.d(0, 1, 1), 1e-15);
}

TEST(FiniteDifference, ScalarConvergesAtSecondOrder) {
  JetRule f = [](const Point& x, int order) {
    return std::vector<Jet>{sample_function(seed(x, order))};
  };
  const Point x{0.3, -0.2, 0.5};
  double o1 = tractorlab::testing::observed_order(
      [&](double h) { return tractorlab::testing::central_difference_error(f, x, h); }, 1e-2);
  double o2 = tractorlab::testing::observed_order(
      [&](double h) { return tractorlab::testing::second_difference_error(f, x, h); }, 1e-2);
  EXPECT_GE(o1, 1.9);
  EXPECT_GE(o2, 1.9);
}

TEST(FiniteDifference, ChristoffelJetsConvergeAtSecondOrder) {
  auto model = make_round_sphere(1, 2, 0);
  const auto& nabla = model.connection;
  JetRule f = [&](const Point& x, int order) { return nabla.gamma_at(x, order).c; };
  const Point x = model.chart.sample_points(1, 4)[0];
  double o = tractorlab::testing::observed_order(
      [&](double h) { return tractorlab::testing::central_difference_error(f, x, h); }, 1e-2);
  EXPECT_GE(o, 1.9);
}
