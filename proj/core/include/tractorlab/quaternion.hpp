#pragma once

#include <array>
#include <span>
#include <vector>

#include "tractorlab/linalg.hpp"

namespace tractorlab {

// Quaternion w + x i + y j + z k; real coordinates are ordered (1, i, j, k).
struct Quaternion {
  double w = 0, x = 0, y = 0, z = 0;

  static Quaternion unit(int axis);  // 0 -> 1, 1 -> i, 2 -> j, 3 -> k
  Quaternion conj() const { return {w, -x, -y, -z}; }
  double norm2() const { return w * w + x * x + y * y + z * z; }
  Quaternion inverse() const;
  std::array<double, 4> coords() const { return {w, x, y, z}; }
  double& operator[](int i);
  double operator[](int i) const;
};

Quaternion operator*(const Quaternion& a, const Quaternion& b);
Quaternion operator+(const Quaternion& a, const Quaternion& b);
Quaternion operator-(const Quaternion& a, const Quaternion& b);
Quaternion operator*(double s, const Quaternion& a);

// 4x4 real matrices of q -> a q and q -> q a.
Mat left_mult(const Quaternion& a);
Mat right_mult(const Quaternion& a);

// Block diagonal (blocks copies of `block`) of size 4*blocks.
Mat block_diag(const Mat& block, int blocks);

// The hypercomplex triple acting on H^{blocks} by negated right
// multiplication, I = -R_i, J = -R_j, K = -R_k. These satisfy IJ = K and the
// induced linear vector fields obey [i, j] = -2k.
std::array<Mat, 3> right_triple(int blocks);
// Left multiplication triple (L_i, L_j, L_k); IJ = K as well.
std::array<Mat, 3> left_triple(int blocks);

// Max deviation of (I,J,K) from I^2 = J^2 = K^2 = IJK = -1.
double quaternionic_defect(const Mat& I, const Mat& J, const Mat& K);

// Sign of vol(E1, I E1, J E1, K E1, ..., E_r, I E_r, J E_r, K E_r) where the
// reference volume is `volume` times the determinant in the standard basis.
// Throws PreconditionError if (I, J, K) fail the quaternion relations beyond
// `tol`, RankError if the quaternionic basis is degenerate.
int orientation_sign(const Mat& I, const Mat& J, const Mat& K,
                     std::span<const Vec> basis, double volume = 1.0,
                     double tol = 1e-8);

// Sign of a general volume form given as a matrix `omega` acting by
// vol(V) = det(omega * V).
int orientation_sign_form(const Mat& I, const Mat& J, const Mat& K,
                          std::span<const Vec> basis, const Mat& omega,
                          double tol = 1e-8);

}  // namespace tractorlab
