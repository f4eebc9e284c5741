#include "tractorlab/linalg.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "tractorlab/errors.hpp"

namespace tractorlab {

JetMatrix JetMatrix::identity(int n) {
  JetMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = Jet(1.0);
  return m;
}

JetMatrix JetMatrix::from(const Mat& a) {
  JetMatrix m(static_cast<int>(a.rows()), static_cast<int>(a.cols()));
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) m(r, c) = Jet(a(r, c));
  return m;
}

Mat JetMatrix::values() const {
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = (*this)(r, c).value();
  return m;
}

JetMatrix JetMatrix::derivative(int var) const {
  JetMatrix m(rows, cols);
  for (std::size_t i = 0; i < e.size(); ++i) m.e[i] = e[i].derivative(var);
  return m;
}

JetMatrix JetMatrix::truncated(int order) const {
  JetMatrix m(rows, cols);
  for (std::size_t i = 0; i < e.size(); ++i) m.e[i] = e[i].truncated(order);
  return m;
}

JetMatrix operator*(const JetMatrix& a, const JetMatrix& b) {
  if (a.cols != b.rows) throw ShapeError("jet matrix product: inner dims differ");
  JetMatrix m(a.rows, b.cols);
  for (int r = 0; r < a.rows; ++r)
    for (int k = 0; k < a.cols; ++k) {
      const Jet& x = a(r, k);
      if (x.is_constant() && x.value() == 0.0) continue;
      for (int c = 0; c < b.cols; ++c) {
        const Jet& y = b(k, c);
        if (y.is_constant() && y.value() == 0.0) continue;
        m(r, c).add_product(x, y);
      }
    }
  return m;
}

JetMatrix operator+(const JetMatrix& a, const JetMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) throw ShapeError("jet matrix sum: shapes differ");
  JetMatrix m = a;
  for (std::size_t i = 0; i < m.e.size(); ++i) m.e[i] += b.e[i];
  return m;
}

JetMatrix operator-(const JetMatrix& a, const JetMatrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) throw ShapeError("jet matrix difference: shapes differ");
  JetMatrix m = a;
  for (std::size_t i = 0; i < m.e.size(); ++i) m.e[i] -= b.e[i];
  return m;
}

JetMatrix operator*(const Jet& s, const JetMatrix& a) {
  JetMatrix m(a.rows, a.cols);
  for (std::size_t i = 0; i < m.e.size(); ++i) m.e[i] = s * a.e[i];
  return m;
}

JetMatrix transpose(const JetMatrix& a) {
  JetMatrix m(a.cols, a.rows);
  for (int r = 0; r < a.rows; ++r)
    for (int c = 0; c < a.cols; ++c) m(c, r) = a(r, c);
  return m;
}

JetMatrix commutator(const JetMatrix& a, const JetMatrix& b) { return a * b - b * a; }

std::vector<Jet> jet_inverse(std::span<const Jet> src, int d) {
  std::vector<Jet> m(src.begin(), src.end());
  std::vector<Jet> inv(d * d, Jet(0.0));
  for (int a = 0; a < d; ++a) inv[a * d + a] = Jet(1.0);
  double scale = 0.0;
  for (const auto& j : m) scale = std::max(scale, std::abs(j.value()));
  for (int col = 0; col < d; ++col) {
    int piv = col;
    for (int r = col + 1; r < d; ++r)
      if (std::abs(m[r * d + col].value()) > std::abs(m[piv * d + col].value())) piv = r;
    if (!(std::abs(m[piv * d + col].value()) > 1e-14 * scale))
      throw DegeneracyError("singular matrix in jet inverse", {});
    if (piv != col)
      for (int k = 0; k < d; ++k) {
        std::swap(m[col * d + k], m[piv * d + k]);
        std::swap(inv[col * d + k], inv[piv * d + k]);
      }
    Jet rp = reciprocal(m[col * d + col]);
    for (int k = 0; k < d; ++k) {
      m[col * d + k] = m[col * d + k] * rp;
      inv[col * d + k] = inv[col * d + k] * rp;
    }
    for (int r = 0; r < d; ++r) {
      if (r == col) continue;
      Jet f = m[r * d + col];
      if (f.is_constant() && f.value() == 0.0) continue;
      for (int k = 0; k < d; ++k) {
        m[r * d + k].add_product(f, m[col * d + k], -1.0);
        inv[r * d + k].add_product(f, inv[col * d + k], -1.0);
      }
    }
  }
  return inv;
}

JetMatrix inverse(const JetMatrix& a) {
  if (a.rows != a.cols) throw ShapeError("inverse of a non-square jet matrix");
  JetMatrix m(a.rows, a.cols);
  m.e = jet_inverse(a.e, a.rows);
  return m;
}

Jet determinant(const JetMatrix& a) {
  if (a.rows != a.cols) throw ShapeError("determinant of a non-square jet matrix");
  const int d = a.rows;
  std::vector<Jet> m = a.e;
  Jet det(1.0);
  for (int col = 0; col < d; ++col) {
    int piv = col;
    for (int r = col + 1; r < d; ++r)
      if (std::abs(m[r * d + col].value()) > std::abs(m[piv * d + col].value())) piv = r;
    if (m[piv * d + col].value() == 0.0) return Jet(0.0);
    if (piv != col) {
      for (int k = 0; k < d; ++k) std::swap(m[col * d + k], m[piv * d + k]);
      det *= -1.0;
    }
    det = det * m[col * d + col];
    Jet rp = reciprocal(m[col * d + col]);
    for (int r = col + 1; r < d; ++r) {
      Jet f = m[r * d + col] * rp;
      for (int k = col; k < d; ++k) m[r * d + k].add_product(f, m[col * d + k], -1.0);
    }
  }
  return det;
}

std::pair<int, int> signature(const Mat& sym, double zero_tol) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (sym + sym.transpose()));
  const auto& ev = es.eigenvalues();
  double scale = ev.cwiseAbs().maxCoeff();
  int pos = 0, neg = 0;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i] > zero_tol * scale) ++pos;
    else if (ev[i] < -zero_tol * scale) ++neg;
  }
  return {pos, neg};
}

double smallest_singular_value(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& s = svd.singularValues();
  return s.size() ? s[s.size() - 1] : 0.0;
}

Mat matrix_log(const Mat& m) { return m.log(); }
Mat matrix_exp(const Mat& m) { return m.exp(); }

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace tractorlab
