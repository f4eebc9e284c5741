#include <gtest/gtest.h>

#include <random>

#include "tractorlab/heisenberg.hpp"
#include "tractorlab/quaternion.hpp"

using namespace tractorlab;

namespace {

Quaternion random_quaternion(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  return {U(rng), U(rng), U(rng), U(rng)};
}

double distance(const Quaternion& a, const Quaternion& b) {
  auto d = a - b;
  return std::sqrt(d.norm2());
}

}  // namespace

TEST(Quaternion, MultiplicationTable) {
  auto one = Quaternion::unit(0), i = Quaternion::unit(1), j = Quaternion::unit(2),
       k = Quaternion::unit(3);
  EXPECT_EQ(distance(i * j, k), 0.0);
  EXPECT_EQ(distance(j * k, i), 0.0);
  EXPECT_EQ(distance(k * i, j), 0.0);
  EXPECT_EQ(distance(j * i, -1.0 * k), 0.0);
  EXPECT_EQ(distance(i * i, -1.0 * one), 0.0);
  EXPECT_EQ(distance(i * j * k, -1.0 * one), 0.0);
}

TEST(Quaternion, NormIsMultiplicativeAndInverseWorks) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 100; ++t) {
    auto a = random_quaternion(rng), b = random_quaternion(rng);
    EXPECT_NEAR((a * b).norm2(), a.norm2() * b.norm2(), 1e-14);
    EXPECT_NEAR(distance(a * a.inverse(), Quaternion::unit(0)), 0.0, 1e-14);
    EXPECT_NEAR(distance((a * b).conj(), b.conj() * a.conj()), 0.0, 1e-14);
  }
}

TEST(Quaternion, MatricesRepresentMultiplication) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    auto a = random_quaternion(rng), x = random_quaternion(rng);
    Vec xv(4);
    for (int r = 0; r < 4; ++r) xv[r] = x[r];
    Vec l = left_mult(a) * xv, rr = right_mult(a) * xv;
    auto ax = a * x, xa = x * a;
    for (int r = 0; r < 4; ++r) {
      EXPECT_NEAR(l[r], ax[r], 1e-15);
      EXPECT_NEAR(rr[r], xa[r], 1e-15);
    }
  }
}

TEST(Quaternion, TriplesAreHypercomplexAndCommute) {
  for (int blocks : {1, 2, 3}) {
    auto R = right_triple(blocks);
    auto L = left_triple(blocks);
    EXPECT_LT(quaternionic_defect(R[0], R[1], R[2]), 1e-15);
    EXPECT_LT(quaternionic_defect(L[0], L[1], L[2]), 1e-15);
    EXPECT_LT(max_abs(R[0] * R[1] - R[2]), 1e-15);
    EXPECT_LT(max_abs(L[0] * L[1] - L[2]), 1e-15);
    for (const auto& a : R)
      for (const auto& b : L) EXPECT_LT(max_abs(a * b - b * a), 1e-15);
  }
}

TEST(Quaternion, DefectDetectsNonQuaternionicTriples) {
  auto R = right_triple(1);
  Mat J = R[1];
  J(0, 0) += 0.1;
  EXPECT_GT(quaternionic_defect(R[0], J, R[2]), 0.05);
}

TEST(Heisenberg, BracketOfBasisElements) {
  // p = 1: [(1, 0), (i, 0)] = (0, Im(conj(1) i)) = (0, i).
  HeisenbergElement u{{Quaternion::unit(0)}, {}}, v{{Quaternion::unit(1)}, {}};
  auto w = heisenberg_bracket(1, 0, u, v);
  EXPECT_EQ(distance(w.a, Quaternion::unit(1)), 0.0);
  ASSERT_EQ(w.x.size(), 1u);
  EXPECT_EQ(w.x[0].norm2(), 0.0);
  // [(j, 0), (k, 0)] = Im(conj(j) k) = Im(-j k) = -i.
  HeisenbergElement a{{Quaternion::unit(2)}, {}}, b{{Quaternion::unit(3)}, {}};
  EXPECT_EQ(distance(heisenberg_bracket(1, 0, a, b).a, -1.0 * Quaternion::unit(1)), 0.0);
  // A negative block flips the sign.
  EXPECT_EQ(distance(heisenberg_bracket(0, 1, u, v).a, -1.0 * Quaternion::unit(1)), 0.0);
}

TEST(Heisenberg, StructureConstantsMatchTheBracket) {
  const int p = 1, q = 1;
  auto omega = heisenberg_structure(p, q);
  const int n = 4 * (p + q);
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) {
      HeisenbergElement u{std::vector<Quaternion>(p + q), {}}, v{std::vector<Quaternion>(p + q), {}};
      u.x[s / 4][s % 4] = 1.0;
      v.x[t / 4][t % 4] = 1.0;
      auto w = heisenberg_bracket(p, q, u, v);
      for (int r = 0; r < 3; ++r) {
        EXPECT_EQ(omega[r](s, t), w.a[r + 1]);
        EXPECT_EQ(omega[r](s, t), -omega[r](t, s));
      }
    }
}

TEST(Heisenberg, JacobiAndTwoStepNilpotency) {
  std::mt19937_64 rng(4);
  for (auto [p, q] : {std::pair{2, 0}, std::pair{1, 1}, std::pair{1, 2}}) {
    auto elem = [&] {
      HeisenbergElement e;
      for (int b = 0; b < p + q; ++b) e.x.push_back(random_quaternion(rng));
      e.a = random_quaternion(rng);
      e.a.w = 0.0;
      return e;
    };
    for (int t = 0; t < 20; ++t) {
      auto u = elem(), v = elem(), w = elem();
      EXPECT_LT(heisenberg_jacobi_residual(p, q, u, v, w), 1e-14);
      EXPECT_LT(heisenberg_nilpotency_residual(p, q, u, v, w), 1e-14);
      auto uv = heisenberg_bracket(p, q, u, v), vu = heisenberg_bracket(p, q, v, u);
      EXPECT_LT(distance(uv.a, -1.0 * vu.a), 1e-14);
    }
  }
}

TEST(Heisenberg, CentreIsTheImaginaryQuaternions) {
  // Each omega_r is nondegenerate on H^{p+q}.
  auto omega = heisenberg_structure(1, 1);
  for (const auto& w : omega) EXPECT_NEAR(std::abs(w.determinant()), 1.0, 1e-12);
}
