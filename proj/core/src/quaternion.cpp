#include "tractorlab/quaternion.hpp"

#include <cmath>

#include "tractorlab/errors.hpp"

namespace tractorlab {

Quaternion Quaternion::unit(int axis) {
  Quaternion q;
  q[axis] = 1.0;
  return q;
}

Quaternion Quaternion::inverse() const {
  double n = norm2();
  if (n == 0.0) throw DomainError("inverse of zero quaternion");
  Quaternion c = conj();
  return {c.w / n, c.x / n, c.y / n, c.z / n};
}

double& Quaternion::operator[](int i) {
  switch (i) {
    case 0: return w;
    case 1: return x;
    case 2: return y;
    default: return z;
  }
}

double Quaternion::operator[](int i) const {
  switch (i) {
    case 0: return w;
    case 1: return x;
    case 2: return y;
    default: return z;
  }
}

Quaternion operator*(const Quaternion& a, const Quaternion& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

Quaternion operator+(const Quaternion& a, const Quaternion& b) {
  return {a.w + b.w, a.x + b.x, a.y + b.y, a.z + b.z};
}

Quaternion operator-(const Quaternion& a, const Quaternion& b) {
  return {a.w - b.w, a.x - b.x, a.y - b.y, a.z - b.z};
}

Quaternion operator*(double s, const Quaternion& a) {
  return {s * a.w, s * a.x, s * a.y, s * a.z};
}

Mat left_mult(const Quaternion& a) {
  Mat m(4, 4);
  for (int c = 0; c < 4; ++c) {
    Quaternion r = a * Quaternion::unit(c);
    for (int r4 = 0; r4 < 4; ++r4) m(r4, c) = r[r4];
  }
  return m;
}

Mat right_mult(const Quaternion& a) {
  Mat m(4, 4);
  for (int c = 0; c < 4; ++c) {
    Quaternion r = Quaternion::unit(c) * a;
    for (int r4 = 0; r4 < 4; ++r4) m(r4, c) = r[r4];
  }
  return m;
}

Mat block_diag(const Mat& block, int blocks) {
  const int b = static_cast<int>(block.rows());
  Mat m = Mat::Zero(b * blocks, b * blocks);
  for (int k = 0; k < blocks; ++k) m.block(k * b, k * b, b, b) = block;
  return m;
}

std::array<Mat, 3> right_triple(int blocks) {
  return {block_diag(-right_mult(Quaternion::unit(1)), blocks),
          block_diag(-right_mult(Quaternion::unit(2)), blocks),
          block_diag(-right_mult(Quaternion::unit(3)), blocks)};
}

std::array<Mat, 3> left_triple(int blocks) {
  return {block_diag(left_mult(Quaternion::unit(1)), blocks),
          block_diag(left_mult(Quaternion::unit(2)), blocks),
          block_diag(left_mult(Quaternion::unit(3)), blocks)};
}

double quaternionic_defect(const Mat& I, const Mat& J, const Mat& K) {
  const Mat id = Mat::Identity(I.rows(), I.cols());
  double d = 0.0;
  d = std::max(d, max_abs(I * I + id));
  d = std::max(d, max_abs(J * J + id));
  d = std::max(d, max_abs(K * K + id));
  d = std::max(d, max_abs(I * J * K + id));
  return d;
}

int orientation_sign_form(const Mat& I, const Mat& J, const Mat& K,
                          std::span<const Vec> basis, const Mat& omega, double tol) {
  const int n = static_cast<int>(I.rows());
  double defect = quaternionic_defect(I, J, K);
  if (defect > tol) {
    throw PreconditionError("endomorphisms violate the quaternion relations (defect " +
                            std::to_string(defect) + ")");
  }
  if (static_cast<int>(basis.size()) * 4 != n) {
    throw RankError("quaternionic basis needs " + std::to_string(n / 4) + " vectors");
  }
  Mat V(n, n);
  for (std::size_t e = 0; e < basis.size(); ++e) {
    const Vec& E = basis[e];
    V.col(4 * e) = E;
    V.col(4 * e + 1) = I * E;
    V.col(4 * e + 2) = J * E;
    V.col(4 * e + 3) = K * E;
  }
  double s_min = smallest_singular_value(V);
  if (!(s_min > 1e-10 * std::max(1.0, V.norm()))) {
    throw RankError("vectors and their I, J, K images do not span");
  }
  double det = (omega * V).determinant();
  return det > 0 ? 1 : -1;
}

int orientation_sign(const Mat& I, const Mat& J, const Mat& K,
                     std::span<const Vec> basis, double volume, double tol) {
  int s = orientation_sign_form(I, J, K, basis, Mat::Identity(I.rows(), I.cols()), tol);
  return volume < 0 ? -s : s;
}

}  // namespace tractorlab
