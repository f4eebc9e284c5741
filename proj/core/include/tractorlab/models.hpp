#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tractorlab/sasaki.hpp"

namespace tractorlab {

// Ambient space R^{4m+4} = H^{m+1}, quaternion blocks ordered (1, i, j, k).
// The first p blocks carry the form +1, the remaining q blocks -1.
struct AmbientData {
  int m = 1, p = 2, q = 0;
  Mat h;                // diag(+-1)
  std::array<Mat, 3> ijk;  // negated right multiplications, IJ = K
  int dim() const { return 4 * m + 4; }
};
AmbientData make_ambient(int m, int p, int q);

// Leaf projection of the right Sp(1) action in the gnomonic chart
// Y = (1, x): u_b = q_b q_0^{-1}, b = 1..m, onto an affine chart of HP^m.
struct HopfProjection {
  int m = 1;
  std::vector<double> block_signs;  // sign of block b = 1..m
  Chart quotient_chart{"", {0, 0}, {1, 1}};

  // u(x) as jets in the same variables as the coordinate jets.
  std::vector<Jet> project(std::span<const Jet> x) const;
  Point project(const Point& x) const;
  // Section u -> x with q_0 = 1.
  Point section(const Point& u) const;
  // rho(u) = 1 + sum_b s_b |u_b|^2; tau = |q_0|^2 rho.
  double rho(const Point& u) const;
};

struct ModelGeometry {
  std::string name;
  int m = 1, p = 2, q = 0;
  int stratum = 1;  // sign of tau on the chart (0: chart meets every stratum)
  Chart chart{"", {0, 0}, {1, 1}};
  AmbientData ambient;
  std::optional<TensorField> metric;
  Connection connection;
  std::optional<SasakiTriple> triple;
  std::optional<HopfProjection> hopf;
  std::optional<ConeGeometry> cone;
  std::map<std::string, double> expected;

  // tau(x) = h(Y, Y) with Y = (1, x).
  double tau(const Point& x) const;
};

// Chart coordinates x^a correspond to ambient Y_{a+1}, with Y_0 = 1.
std::vector<Jet> gnomonic_lift(std::span<const Jet> x);

// Metric H/tau - (HY)(HY)^T/tau^2 pulled back to the gnomonic chart; on
// {tau > 0} it is the induced metric of {h = 1}, on {tau < 0} minus the
// induced metric of {h = -1}.
TensorField stratum_metric(const AmbientData& amb, const Chart& chart);
// Projection of the linear field Y -> A Y to the chart.
TensorField projected_linear_field(const Mat& A, const Chart& chart, std::string name);

// Tractor data of the flat model in the flat chart scale: constant ambient
// objects conjugated by B(x) = [[1, x], [0, 1]] (tractor index d <-> ambient 0).
EndomorphismField flat_tractor_endomorphism(const Scale& s, const Mat& ambient,
                                            std::string name);
EndomorphismField flat_tractor_form(const Scale& s, const Mat& ambient, std::string name);
// Ambient matrix permuted into tractor index order.
Mat to_tractor_order(const Mat& ambient);

// Sphere-type model: the stratum of sign `stratum` of the flat model with
// its Einstein metric and Killing triple. The chart is a box around the
// origin (stratum +1) or around x^{4p - 1} = 2 (stratum -1).
ModelGeometry make_round_sphere(int m, int p, int q, int stratum = 1);
ModelGeometry make_flat_projective(int m, int p, int q);
HopfProjection hopf_projection(const ModelGeometry& model);
// Metric cone over a sphere-type model, t in [0.5, 2].
ModelGeometry make_cone(const ModelGeometry& model);

struct HopfResiduals {
  double fiber_drift = 0.0;     // |pi(x q) - pi(x)|
  double kernel = 0.0;          // |d pi (i)|, |d pi (j)|, |d pi (k)|
  double section = 0.0;         // |pi(s(u)) - u|
  int n_points = 0;
};
HopfResiduals check_hopf(const ModelGeometry& model, const std::vector<Point>& points,
                         std::uint64_t seed);

// Catalog of self-validated models. `get` builds the model and refuses
// (ModelError) to return it unless its analytic data passes the checks.
struct ModelInfo {
  std::string name;
  std::string description;
};
const std::vector<ModelInfo>& model_list();
ModelGeometry get_model(const std::string& name, int m, int p, int q);
// Light self-check used by get_model; returns the failing check or empty.
std::string self_check(const ModelGeometry& model);

}  // namespace tractorlab
