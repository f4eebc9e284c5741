#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "tractorlab/jet.hpp"

namespace tractorlab {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Square matrices of jets stored row-major.
struct JetMatrix {
  int rows = 0, cols = 0;
  std::vector<Jet> e;

  JetMatrix() = default;
  JetMatrix(int r, int c) : rows(r), cols(c), e(r * c, Jet(0.0)) {}
  static JetMatrix identity(int n);
  static JetMatrix from(const Mat& m);

  Jet& operator()(int r, int c) { return e[r * cols + c]; }
  const Jet& operator()(int r, int c) const { return e[r * cols + c]; }

  Mat values() const;
  JetMatrix derivative(int var) const;
  JetMatrix truncated(int order) const;
};

JetMatrix operator*(const JetMatrix& a, const JetMatrix& b);
JetMatrix operator+(const JetMatrix& a, const JetMatrix& b);
JetMatrix operator-(const JetMatrix& a, const JetMatrix& b);
JetMatrix operator*(const Jet& s, const JetMatrix& a);
JetMatrix transpose(const JetMatrix& a);
JetMatrix commutator(const JetMatrix& a, const JetMatrix& b);
// Gauss-Jordan inverse with pivoting on values; throws DegeneracyError.
JetMatrix inverse(const JetMatrix& a);
Jet determinant(const JetMatrix& a);

// Jet components of a square matrix stored flat.
std::vector<Jet> jet_inverse(std::span<const Jet> m, int d);

// Counts of (positive, negative) eigenvalues of a symmetric matrix; entries
// with |lambda| <= zero_tol * max|lambda| count as neither.
std::pair<int, int> signature(const Mat& sym, double zero_tol = 1e-10);

double smallest_singular_value(const Mat& m);

// Principal matrix logarithm (inverse scaling and squaring with Pade core).
Mat matrix_log(const Mat& m);
Mat matrix_exp(const Mat& m);

double max_abs(const Mat& m);

}  // namespace tractorlab
