#pragma once

#include <array>
#include <utility>
#include <vector>

#include "tractorlab/tractor.hpp"

namespace tractorlab {

// Metric with a triple of unit Killing fields, signature (4p - 1, 4q).
struct SasakiTriple {
  TensorField g;
  std::array<TensorField, 3> xi;  // i, j, k
  int p = 1;
  int q = 0;
};

// Vector-field Lie bracket [X, Y]^c = X^a d_a Y^c - Y^a d_a X^c (values).
std::vector<double> lie_bracket(const TensorField& X, const TensorField& Y, const Point& x);

// max |nabla_(a xi_b)| for the Levi-Civita connection of g.
double killing_residual(const TensorField& g, const TensorField& xi, const Point& x);

struct SasakiResiduals {
  double killing = 0.0;
  double unit_norm = 0.0;          // |g(k, k) - 1|
  double second_derivative = 0.0;  // nabla_a nabla_b k^c + g_ab k^c - delta^c_a k_b
  int n_points = 0;
};
SasakiResiduals check_sasaki(const TensorField& g, const TensorField& k,
                             const std::vector<Point>& points);

struct ThreeSasakiResiduals {
  std::array<SasakiResiduals, 3> sasaki;
  double orthogonality = 0.0;  // g(i,j), g(j,k), g(k,i)
  double commutators = 0.0;    // [i,j] + 2k and cyclic
  double identity_a = 0.0;     // i.nabla j = -j.nabla i = -k and cyclic
  double identity_b = 0.0;     // nabla_b i^c nabla_a i^b - i_a i^c + delta
  double identity_c = 0.0;     // nabla_b i^c nabla_a j^b - j_a i^c = nabla_a k^c ...
  double einstein = 0.0;       // Ric - (dim - 1) g
  int n_points = 0;
  double max() const;
};
ThreeSasakiResiduals check_3sasaki(const SasakiTriple& t, const std::vector<Point>& points);

// ---------- metric cone ----------

// Cone chart (x, t) with metric dt^2 + t^2 g and the endomorphisms
//   K(v) = nabla_v k (v orthogonal to k), K(k) = -t d_t, K(t d_t) = k,
// extended linearly, so that k = K d_t at t = 1. Coordinates are ordered
// (x^0 .. x^n, t).
struct ConeGeometry {
  Chart chart{"", {0, 0}, {1, 1}};
  SasakiTriple base;
  TensorField metric;
  std::array<TensorField, 3> J;  // (1,1) tensors, rows upper index
};
ConeGeometry cone_build(const SasakiTriple& t, double t_lo = 0.5, double t_hi = 2.0);

struct ConeResiduals {
  double almost_complex = 0.0;  // J^2 + id and IJ - K
  double hermitian = 0.0;
  double parallel = 0.0;        // cone Levi-Civita derivative of I, J, K
  double ricci = 0.0;
  double riemann = 0.0;         // full curvature (flat cones only)
  double round_trip = 0.0;      // k - K d_t at t = 1
  std::pair<int, int> signature{0, 0};
  int n_points = 0;
};
ConeResiduals check_cone(const ConeGeometry& c, const std::vector<Point>& points);

// ---------- tractor hyperkaehler structure ----------

struct TractorHK {
  Scale scale;
  EndomorphismField h;  // bilinear form diag(g, 1) in the Einstein scale
  EndomorphismField I, J, K;
  SasakiTriple triple;
};

// Builds h and I = L(i), J = L(j), K = L(k) in the Levi-Civita scale of g.
// Throws PreconditionError if Ric - (dim - 1) g exceeds einstein_tol.
TractorHK build_tractor_hk(const SasakiTriple& t, double einstein_tol = 1e-7);

struct TractorHKResiduals {
  double quaternion = 0.0;  // I^2, J^2, K^2, IJK + id, IJ - K, JK - I, KI - J
  double parallel = 0.0;    // nabla^T of I, J, K
  double metric_parallel = 0.0;
  double hermitian = 0.0;
  double ijk_form = 0.0;    // L(i) vs [[nabla i, i], [-i_b, 0]]
  std::pair<int, int> signature{0, 0};
  bool signature_constant = true;
  int orientation_chart = 0;  // sign against eps in the chart tractor frame
  bool orientation_constant = true;
  int n_points = 0;
};
TractorHKResiduals check_tractor_hk(const TractorHK& hk, const std::vector<Point>& points);

// A basis E_1..E_r such that (E_s, I E_s, J E_s, K E_s) spans, chosen
// greedily from the standard basis.
std::vector<Vec> quaternionic_basis(const Mat& I, const Mat& J, const Mat& K);

}  // namespace tractorlab
