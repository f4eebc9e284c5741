#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tractorlab/connection.hpp"
#include "tractorlab/linalg.hpp"

namespace tractorlab {

// A connection in the projective class with symmetric Ricci tensor. Tractor
// slots are expressed in the splitting this scale determines, with weighted
// bundles trivialised by its parallel density, so that standard tractors
// t = (nu^b, rho) obey
//   nabla_a (nu^b, rho) = (d_a nu^b + Gamma^b_{ac} nu^c + rho delta^b_a,
//                          d_a rho - P_{ac} nu^c).
class Scale {
 public:
  // Throws PreconditionError if Ric is not symmetric within `ric_tol` (relative
  // to max |Ric|, floor 1) at the sample points.
  explicit Scale(Connection nabla, int sample_points = 16, double ric_tol = 1e-9);

  const Connection& connection() const { return nabla_; }
  const std::string& name() const { return nabla_.name; }
  const Chart& chart() const { return nabla_.chart; }
  int dim() const { return nabla_.dim(); }
  int n() const { return nabla_.n(); }
  int rank() const { return nabla_.dim() + 1; }
  // Largest order available for the connection forms omega_a.
  int omega_order() const { return nabla_.gamma_order() - 1; }

  CurvatureJets curvature(const Point& x, int order) const;
  // omega_a = [[Gamma^b_{ac}, e_a], [-P_{ac}, 0]], one matrix per direction.
  std::vector<JetMatrix> omega(const Point& x, int order) const;
  double max_ricci_asymmetry() const { return ric_asym_; }

 private:
  Connection nabla_;
  double ric_asym_ = 0.0;
};

// Tractor-valued field in a fixed scale. Standard tractors hold (nu^b, rho),
// cotractors (dual = true) hold (mu_b, sigma); both have n + 2 slots.
struct TractorField {
  std::string scale;
  bool dual = false;
  int max_order = Jet::kMaxOrder;
  std::function<std::vector<Jet>(const Point&, int order)> slots;
  std::string name;

  std::vector<Jet> evaluate(const Point& x, int order) const;
};

// Endomorphism-valued tractor field (rank x rank jet matrix per point).
struct EndomorphismField {
  std::string scale;
  int max_order = Jet::kMaxOrder;
  std::function<JetMatrix(const Point&, int order)> matrix;
  std::string name;

  JetMatrix evaluate(const Point& x, int order) const;
};

TractorField constant_tractor(const Scale& s, std::vector<double> slots, bool dual = false,
                              std::string name = {});
EndomorphismField constant_endomorphism(const Scale& s, const Mat& m, std::string name = {});

// Block form [[phi, xi], [nu, -tr phi]] of an adjoint tractor.
JetMatrix assemble_adjoint(const std::vector<Jet>& phi, const std::vector<Jet>& xi,
                           const std::vector<Jet>& nu);
// Projection Pi(A) = top-right column.
std::vector<Jet> adjoint_projection(const JetMatrix& a);

// ---------- tractor connection ----------

// nabla_a t for each direction a; outputs have order min(order(t) - 1, order).
// Cotractors use nabla_a mu = d_a mu - omega_a^T mu. Throws
// ScaleMismatchError if the field refers to another scale.
std::vector<std::vector<Jet>> tractor_derivative(const Scale& s, const TractorField& t,
                                                 const Point& x, int order = 0);
// The cotractor connection written out in slots,
//   (nabla_a mu_b + P_ab sigma, nabla_a sigma - mu_a).
std::vector<std::vector<Jet>> cotractor_derivative_explicit(const Scale& s,
                                                            const TractorField& t,
                                                            const Point& x, int order = 0);
// max_a |d_a <mu, t> - <nabla_a mu, t> - <mu, nabla_a t>| for a cotractor mu
// and standard tractor t, using the explicit cotractor formula.
double duality_residual(const Scale& s, const TractorField& mu, const TractorField& t,
                        const Point& x);

std::vector<JetMatrix> adjoint_derivative(const Scale& s, const EndomorphismField& a,
                                          const Point& x, int order = 0);
// nabla_a h = d_a h - omega_a^T h - h omega_a for a bilinear form on T.
std::vector<JetMatrix> metric_derivative(const Scale& s, const EndomorphismField& h,
                                         const Point& x, int order = 0);

// Curvature F_ab = d_a omega_b - d_b omega_a + [omega_a, omega_b], flattened
// a * dim + b. Needs omega of order >= 1.
std::vector<JetMatrix> tractor_curvature(const Scale& s, const Point& x, int order = 0);
// The same from the curvature decomposition: [[W_ab^c_d, 0], [-C_abd, 0]].
std::vector<Mat> tractor_curvature_from_tensors(const Scale& s, const Point& x);
// [nabla_a, nabla_b] t - F_ab t for a standard tractor field of order >= 2.
double curvature_commutator_residual(const Scale& s, const TractorField& t,
                                     const Point& x);

// ---------- scale changes ----------

// Scale change by the exact form Upsilon = -df. Slots transform by
//   t -> G t, G = e^f [[1, 0], [-Upsilon^T, 1]],
// cotractors by G^{-T}, endomorphisms by conjugation, forms by G^{-T} . G^{-1}.
struct ScaleChange {
  Scale from;
  Scale to;
  TensorField f;

  JetMatrix gauge(const Point& x, int order) const;
  TractorField transform(const TractorField& t) const;
  EndomorphismField transform(const EndomorphismField& a) const;
  EndomorphismField transform_form(const EndomorphismField& h) const;
};
ScaleChange change_scale(const Scale& s, const TensorField& f);

// ---------- splitting and BGG ----------

// L^A(xi) = [[nabla_b xi^a - mu delta^a_b, xi^a], [-d_b mu - P_bc xi^c, -mu]]
// with mu = nabla_c xi^c / (n + 2). Needs xi of order + 2.
JetMatrix splitting_operator(const Scale& s, const TensorField& xi, const Point& x,
                             int order = 0);
EndomorphismField splitting_field(const Scale& s, const TensorField& xi);

// Trace-free part of nabla_(b nabla_c) xi^a + P_(bc) xi^a, slots (a, b, c).
TensorJets bgg_operator(const Scale& s, const TensorField& xi, const Point& x);
// Max |trace| of a (1,2) tensor over (a,b) and (a,c).
double bgg_trace_residual(const TensorJets& d);

struct NormalSolutionReport {
  double weyl_residual = 0.0;    // max |W_ab^c_d xi^d|
  double cotton_residual = 0.0;  // max |C_abd xi^d|
  double bgg_residual = 0.0;     // max |D(xi)|
  double parallel_residual = 0.0;  // max |nabla^T L^A(xi)|
  int n_points = 0;
  bool normal(double tol) const {
    return weyl_residual <= tol && cotton_residual <= tol && bgg_residual <= tol;
  }
  bool parallel(double tol) const { return parallel_residual <= tol; }
};
NormalSolutionReport check_normal_solution(const Scale& s, const TensorField& xi,
                                           const std::vector<Point>& points);

// ---------- transport and holonomy ----------

struct Curve {
  std::function<Point(double)> position;  // parameter in [0, 1]
  std::function<Point(double)> velocity;
};
Curve straight_segment(const Point& a, const Point& b);
Curve concatenate(std::vector<Curve> pieces);
// Closed coordinate rectangle at `base` in the (a, b) plane with side eps.
Curve rectangle_loop(const Point& base, int a, int b, double eps);
Curve reversed(const Curve& c);

// Transport matrix of nabla^T along the curve (classical RK4 with `steps`
// steps); applies to standard tractors.
Mat transport_matrix(const Scale& s, const Curve& c, int steps);
// Step count doubled from `initial_steps` until successive transports differ
// by less than `tol`; returns the converged matrix and the step count used.
std::pair<Mat, int> transport_converged(const Scale& s, const Curve& c,
                                        int initial_steps = 8, double tol = 1e-12,
                                        int max_steps = 4096);
Vec parallel_transport(const Scale& s, const Vec& t0, const Curve& c, int steps = 64);

struct HolonomyOptions {
  int loops = 8;
  std::uint64_t seed = 0;
  std::vector<double> sides{1e-2, 5e-3};
  bool check_preconditions = true;
  double precondition_tol = 1e-7;
  double minus_one_margin = 1e-3;
};

struct HolonomyReport {
  std::vector<Mat> generators;  // Richardson-extrapolated log-holonomy / area
  // max over loops and loop sizes of membership residual / area
  double membership_residual = 0.0;
  double extrapolated_residual = 0.0;
  int algebra_dimension = 0;
  int resampled = 0;
  int loops = 0;
};

// Samples small rectangular loops and tests the sp(p,q) conditions
// A^T h + h A = 0, [A, I] = [A, J] = [A, K] = 0 on the logarithms. With
// check_preconditions, throws PreconditionError unless h, I, J, K are
// parallel at the loop base points.
HolonomyReport holonomy_sample(const Scale& s, const EndomorphismField& h,
                               const EndomorphismField& I, const EndomorphismField& J,
                               const EndomorphismField& K, const HolonomyOptions& opt);

// Membership residual of a single algebra element at a point.
double sp_membership_residual(const Mat& a, const Mat& h, const Mat& I, const Mat& J,
                              const Mat& K);

// ---------- tractor volume ----------

struct VolumeReport {
  double parallel_residual = 0.0;     // |d_a eps - tr(omega_a) eps| / |eps|
  double uniqueness_residual = 0.0;   // spread of the ratio of two constructions
  double min_value = 0.0;             // min eps over the points (chart frame)
  int n_points = 0;
};

// eps(x) = exp(int_{x0}^{x} Gamma^b_{ab} dx^a) along straight lines from the
// chart centre, as jets (Gauss-Legendre quadrature on composed jets).
std::vector<Jet> tractor_volume(const Scale& s, const Point& x, int order = 1);
// The same along an axis-first broken path (second construction).
double tractor_volume_broken_path(const Scale& s, const Point& x);
VolumeReport tractor_volume_check(const Scale& s, const std::vector<Point>& points);

}  // namespace tractorlab
