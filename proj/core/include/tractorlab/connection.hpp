#pragma once

#include <string>
#include <vector>

#include "tractorlab/tensor.hpp"

namespace tractorlab {

// Torsion-free affine connection given by Christoffel symbols Gamma^c_{ab},
// stored with index order (c, a, b) so that
//   nabla_a xi^c = d_a xi^c + Gamma^c_{ab} xi^b.
struct Connection {
  Chart chart{"", {0, 0}, {1, 1}};
  TensorField gamma;
  bool is_special = false;  // symmetric Ricci (a scale)
  std::string name;

  int dim() const { return chart.dim(); }
  int n() const { return chart.dim() - 1; }
  // Highest order for which Gamma jets are available.
  int gamma_order() const { return gamma.max_order(); }
  TensorJets gamma_at(const Point& x, int order) const { return gamma.evaluate(x, order); }
};

TensorShape gamma_shape(int dim);    // (Up, Down, Down)
TensorShape riemann_shape(int dim);  // R_{ab}^c_d as (Down, Down, Up, Down)

// ---------- pointwise kernels ----------

// Christoffel symbols (order k) from metric jets (order k+1).
TensorJets christoffel(const TensorJets& g, const TensorJets& g_inv);
TensorJets metric_inverse(const TensorJets& g);

struct CurvatureJets {
  TensorJets R;    // order k
  TensorJets Ric;  // order k
  TensorJets P;    // order k
  TensorJets W;    // order k
  TensorJets C;    // order k - 1 (empty shape when k == 0)
};

// Curvature quantities from Christoffel jets of order k + 1.
CurvatureJets curvature_from_gamma(const TensorJets& gamma);
CurvatureJets curvature_at(const Connection& nabla, const Point& x, int order);

// Covariant derivative; the derivative index becomes the new first slot.
// Weighted densities are treated as coordinate-trivialised scalars unless
// `weight` is nonzero, in which case d_a + (w/(n+2)) Gamma^b_{ab} is used.
TensorJets covariant_derivative(const TensorJets& t, const TensorJets& gamma,
                                double weight = 0.0);

// Second covariant derivative nabla_a nabla_b of a tensor; needs gamma of
// order >= 1 and t of order >= 2.
TensorJets second_covariant_derivative(const TensorJets& t, const TensorJets& gamma);

// ---------- constructions ----------

Connection flat_connection(const Chart& chart);
// Levi-Civita connection; the metric is sampled on the chart and a
// DegeneracyError naming the point is thrown where it is singular.
Connection levi_civita(const TensorField& g, int sample_points = 16);
// Connection from explicit Christoffel symbols.
Connection connection_from_gamma(const TensorField& gamma, std::string name);

// Gamma-hat^c_{ab} = Gamma^c_{ab} + Upsilon_a delta^c_b + Upsilon_b delta^c_a.
Connection projective_change(const Connection& nabla, const TensorField& upsilon);

// Connection on E(w) induced by nabla applied to a weight-w density sigma,
// after changing nabla by upsilon: nabla-hat_a sigma = nabla_a sigma + w Upsilon_a sigma.
TensorJets density_change(const TensorField& sigma, const Connection& nabla,
                          const TensorField& upsilon, const Point& x, int order);
// The unique connection in the projective class with nabla sigma = 0.
Connection scale_from_density(const TensorField& sigma, const Connection& nabla,
                              int sample_points = 16);

// (L_xi nabla)^c_{ab} by the coordinate formula.
TensorJets lie_derivative_connection_at(const TensorField& xi, const Connection& nabla,
                                        const Point& x, int order = 0);
TensorField lie_derivative_connection(const TensorField& xi, const Connection& nabla);

struct CurvaturePack {
  TensorField R, Ric, P, W, C;
};
CurvaturePack curvature_pack(const Connection& nabla);

// ---------- residual helpers ----------

double torsion_residual(const TensorJets& gamma);
// max |nabla_a g_bc|
double metricity_residual(const TensorJets& g, const TensorJets& gamma);
// max |R_[ab^c_d]| over the three covariant slots
double first_bianchi_residual(const TensorJets& R);
// max |contractions of W|
double weyl_trace_residual(const TensorJets& W);
// R vs W + 2 delta^c_[a P_b]d - 2 P_[ab] delta^c_d
double reconstruction_residual(const CurvatureJets& cur);
// nabla_c W_ab^c_d - (n-1) C_abd; needs W of order >= 1
double weyl_divergence_residual(const CurvatureJets& cur, const TensorJets& gamma);

}  // namespace tractorlab
