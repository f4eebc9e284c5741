#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tractorlab/models.hpp"

namespace tractorlab {

// ---------- curved orbits ----------

// tau = h(X, X) read off the (d, d) slot of a tractor bilinear form.
TensorField tau_field(const Scale& s, const EndomorphismField& h);

struct Stratification {
  std::vector<Point> points;
  std::vector<double> tau;
  std::vector<int> labels;  // +1, 0, -1
  double tol_zero = 0.0;
  int plus = 0, zero = 0, minus = 0;
  bool degenerate = false;  // more than half of the points inside the band
};

// Labels by the sign of tau against tol_zero = rel_band * max |tau|.
Stratification stratify(const TensorField& tau, const std::vector<Point>& points,
                        double rel_band = 1e-6);
// Same with tau = h(X, X); throws PreconditionError unless h is parallel.
Stratification stratify(const Scale& s, const EndomorphismField& h,
                        const std::vector<Point>& points, double rel_band = 1e-6,
                        double parallel_tol = 1e-8);

struct M0Search {
  std::vector<Point> roots;      // |tau| <= tol after polishing
  int lines = 0;
  int sign_changes = 0;          // + to - transitions between grid nodes
  int separated = 0;             // transitions with a located root in between
  double max_abs_tau = 0.0;      // over the roots
};

// Bisection along axis-parallel grid lines through sample points, segments
// joining sample points of opposite sign and rays along -sign(tau) grad tau,
// then Newton polishing along grad tau.
M0Search locate_m0(const TensorField& tau, const Chart& chart, int lines, int nodes,
                   std::uint64_t seed, double tol = 1e-10);

// Labels recomputed after a change of scale by f; tau has weight 2 and
// changes by the positive factor e^{-2f}.
struct LabelInvariance {
  int flips = 0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double ratio_residual = 0.0;  // |ratio - e^{-2f}|
};
LabelInvariance label_scale_invariance(const Scale& s, const EndomorphismField& h,
                                       const TensorField& f, const std::vector<Point>& points,
                                       double rel_band = 1e-6);

// min over points of |V ^ Y| / |Y|^2 with Y = (1, x), V = (0, xi(x)).
double normalized_field_norm(const TensorField& xi, const std::vector<Point>& points);

// ---------- Einstein metrics on the open strata ----------

struct StratumMetricReport {
  ModelGeometry model;
  double ricci = 0.0;             // Ric - (4m + 2) g
  std::pair<int, int> signature{0, 0};
  bool signature_constant = true;
  double projective = 0.0;        // Gamma - Upsilon (x) delta - delta (x) Upsilon
  double upsilon_closed = 0.0;    // d Upsilon
  double weyl = 0.0;              // W of the Levi-Civita connection (flat: 0)
  double spray = 0.0;             // Gamma(v, v) - 2 Upsilon(v) v
  ThreeSasakiResiduals triple;
  double band_margin = 0.0;       // min over chart corners and points of stratum * tau
  int n_points = 0;
};

// g_+- from the normalisation onto {h = +-1}; throws DomainError if the patch
// meets the classification band around M0.
StratumMetricReport einstein_metric_on_stratum(int m, int p, int q, int stratum,
                                               const std::vector<Point>& points,
                                               double rel_band = 1e-6);

// ---------- the distribution D ----------

struct IntegrabilityReport {
  int rank = 0;                     // minimum over points
  double min_singular_value = 0.0;  // of the normalised field matrix
  double commutators = 0.0;         // [i,j] + 2k and cyclic (three fields only)
  std::optional<Point> rank_drop;   // first point with rank < number of fields
  int n_points = 0;
};
IntegrabilityReport check_D_integrability(const std::vector<TensorField>& fields,
                                          const std::vector<Point>& points,
                                          double rank_tol = 1e-8);

// ---------- adapted scales ----------

struct AdaptedScaleReport {
  std::array<double, 3> divergence{};
  // (a1) i.nabla i, (a2) P(i,i) - 1, (a3) P_cd i^d nabla_b i^c,
  // (a4) nabla_c i^a nabla_b i^c - i^a P_bc i^c + delta, (b) P(i,j),
  // (c1) i.nabla j + k, j.nabla i - k, (c2) P_bc i^c nabla_a j^b - P_ac k^c,
  // (d1) nabla_b i^c nabla_a j^b - P_ad j^d i^c - nabla_a k^c,
  // (d2) -nabla_b j^c nabla_a i^b + P_ad i^d j^c - nabla_a k^c, (q) Q_parallel;
  // cyclic permutations included.
  std::vector<std::pair<std::string, double>> families;
  double affine_symmetry = 0.0;  // L_i nabla, L_j nabla, L_k nabla
  int n_points = 0;
  double max_family() const;
  double family(const std::string& name) const;
};

// Throws NotAdaptedError (with the divergences) if nabla_a i^a etc. exceed
// div_tol at some point.
AdaptedScaleReport check_adapted_scale(const Scale& s, const std::array<TensorField, 3>& ijk,
                                       const std::vector<Point>& points,
                                       double div_tol = 1e-8);

// ---------- M0 ----------

struct M0Report {
  M0Search search;
  std::pair<int, int> conformal_signature{0, 0};  // b on ker d tau
  bool conformal_signature_constant = true;
  double x_orthogonality = 0.0;   // h(X, IX), h(X, JX), h(X, KX)
  double null_orthogonal = 0.0;   // b(i, i), b(i, j), ...
  double tangency = 0.0;          // d tau (i) on M0
  // leaf quotient
  int h0_dimension = 0;
  int h0_corank = 0;              // in T M0-tilde
  double h0_invariance = 0.0;     // Q-tilde invariance of H0-tilde
  double levi_crosscheck = 0.0;   // Lie bracket of extensions vs Cartan formula
  double levi_rank_min = 0.0;     // smallest singular value of the Levi map
  double heisenberg_fit = 0.0;    // relative residual of the structure fit
  Mat fit_matrix;                 // Im H change of basis
  std::pair<int, int> heisenberg_signature{0, 0};
  int n_points = 0;
};

// Checks on the flat model of signature (p, q), p, q >= 1.
M0Report m0_checks(int m, int p, int q, int lines, std::uint64_t seed);

// The quaternionic structure of the affine chart of HP^m, used on the M0
// leaf quotient: the negated right multiplications on H^m.
std::array<Mat, 3> quotient_quaternionic_structure(int m);

}  // namespace tractorlab
