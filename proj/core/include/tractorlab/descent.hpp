#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tractorlab/models.hpp"
#include "tractorlab/quaternion.hpp"

namespace tractorlab {

// Data pushed to the leaf space at one point x of M, as jets in the chart
// variables of M. Horizontal lifts L_alpha of the quotient coordinate fields
// are taken in the common kernel of the 1-forms form(i, .), form(j, .),
// form(k, .), where form is P of the scale (or a metric).
struct DescendedStructure {
  std::array<JetMatrix, 3> Q;  // Q-tilde frame, 4m x 4m, order k
  std::vector<Jet> gamma;      // Gamma-tilde^g_{ab} at (g * 4m + a) * 4m + b, order k - 1
  Mat lifts;                   // d x 4m
};

// order <= 1. The connection's Gamma must be available to order + 1.
DescendedStructure descended_structure(const ModelGeometry& model, const Scale& s,
                                       const std::array<TensorField, 3>& ijk, const Point& x,
                                       int order);

// Chart variables of M that restrict jets to the section through u.
std::vector<int> section_variables(const ModelGeometry& model);

// Unit quaternion acting on the right of the gnomonic lift; returns the chart
// point of Y r, or nullopt if it leaves the chart.
std::optional<Point> fibre_move(const ModelGeometry& model, const Point& x, const Quaternion& r);

// Best fit Q' = R Q of two frames; returns (R, residual).
std::pair<Mat, double> frame_fit(const std::array<Mat, 3>& from, const std::array<Mat, 3>& to);

struct DescentReport {
  double quaternion = 0.0;        // relations of the induced frame
  double lie_relations = 0.0;     // L_i nabla j + 2 nabla k, L_i nabla i, cyclic
  double fiber_consistency = 0.0; // Q-tilde at x and x r (span fit residual)
  double frame_orthogonality = 0.0;  // |R^T R - 1|
  double frame_det_min = 0.0;
  int fiber_pairs = 0;
  double torsion = 0.0;
  double q_preserving = 0.0;      // nabla-tilde Q-tilde modulo Q-tilde
  double standard_structure = 0.0;  // Q-tilde vs right multiplication on H^m
  double scale_independence = 0.0;  // Q-tilde in a second adapted scale
  double change_formula = 0.0;    // Gamma-tilde' - Gamma-tilde vs the quaternionic formula
  int n_points = 0;
};

// Points are quotient-chart points u; lifts are taken on the section. Throws
// DescentError if a fibre pair disagrees beyond fiber_error_tol.
DescentReport descend_quaternionic(const ModelGeometry& model, const Scale& s,
                                   const std::array<TensorField, 3>& ijk,
                                   const std::vector<Point>& points, std::uint64_t seed,
                                   double fiber_error_tol = 1e-6);

// max_b |xi^a F_ab| over the fields and points.
double curvature_degeneracy(const Scale& s, const std::vector<TensorField>& fields,
                            const std::vector<Point>& points);

struct TractorDescentReport {
  double curvature = 0.0;         // R^T(xi, .) for xi in D
  double path_independence = 0.0; // two fibre paths with equal endpoints
  double test_tractor = 0.0;      // relative mismatch of a transported tractor
  int fiber_pairs = 0;
  Mat worst_first, worst_second;  // the two transports of the worst pair
  int n_points = 0;
};
TractorDescentReport check_tractor_descent(const ModelGeometry& model, const Scale& s,
                                           const std::array<TensorField, 3>& ijk,
                                           const std::vector<Point>& points,
                                           std::uint64_t seed);

// Quotient metric g-tilde(d pi xi, d pi eta) = g(xi, eta) on D-perp, as a
// field on the quotient chart (max order 2).
TensorField quotient_metric(const ModelGeometry& model);

struct QKReport {
  double ricci = 0.0;             // Ric-tilde - (4m + 8) g-tilde
  double hermitian = 0.0;
  double q_parallel = 0.0;        // Levi-Civita of g-tilde preserves Q-tilde
  double descended_vs_levi_civita = 0.0;
  double fiber_consistency = 0.0; // g-tilde from x and x r
  int fiber_pairs = 0;
  std::pair<int, int> signature{0, 0};
  bool signature_constant = true;
  int n_points = 0;
};
QKReport qk_quotient_check(const ModelGeometry& model, const std::vector<Point>& points,
                           std::uint64_t seed, double fiber_error_tol = 1e-6);

}  // namespace tractorlab
