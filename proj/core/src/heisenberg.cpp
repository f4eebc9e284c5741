#include "tractorlab/heisenberg.hpp"

#include <algorithm>
#include <cmath>

#include "tractorlab/errors.hpp"

namespace tractorlab {

namespace {

void require_size(int p, int q, const std::vector<Quaternion>& x) {
  if (p < 0 || q < 0 || static_cast<int>(x.size()) != p + q)
    throw ShapeError("Heisenberg element must have p + q quaternion components");
}

HeisenbergElement add(const HeisenbergElement& u, const HeisenbergElement& v) {
  HeisenbergElement r = u;
  for (std::size_t b = 0; b < r.x.size(); ++b) r.x[b] = r.x[b] + v.x[b];
  r.a = r.a + v.a;
  return r;
}

double norm(const HeisenbergElement& u) {
  double n = std::sqrt(u.a.norm2());
  for (const auto& x : u.x) n = std::max(n, std::sqrt(x.norm2()));
  return n;
}

}  // namespace

Quaternion heisenberg_pairing(int p, int q, const std::vector<Quaternion>& x,
                              const std::vector<Quaternion>& y) {
  require_size(p, q, x);
  require_size(p, q, y);
  Quaternion s;
  for (int b = 0; b < p + q; ++b) {
    Quaternion t = x[b].conj() * y[b];
    s = b < p ? s + t : s - t;
  }
  return s;
}

HeisenbergElement heisenberg_bracket(int p, int q, const HeisenbergElement& u,
                                     const HeisenbergElement& v) {
  Quaternion s = heisenberg_pairing(p, q, u.x, v.x);
  HeisenbergElement r;
  r.x.assign(p + q, Quaternion{});
  r.a = {0.0, s.x, s.y, s.z};
  return r;
}

std::array<Mat, 3> heisenberg_structure(int p, int q) {
  const int n = 4 * (p + q);
  std::array<Mat, 3> omega;
  for (auto& w : omega) w = Mat::Zero(n, n);
  for (int s = 0; s < n; ++s)
    for (int t = 0; t < n; ++t) {
      std::vector<Quaternion> x(p + q), y(p + q);
      x[s / 4][s % 4] = 1.0;
      y[t / 4][t % 4] = 1.0;
      Quaternion v = heisenberg_pairing(p, q, x, y);
      for (int r = 0; r < 3; ++r) omega[r](s, t) = v[r + 1];
    }
  return omega;
}

double heisenberg_jacobi_residual(int p, int q, const HeisenbergElement& u,
                                  const HeisenbergElement& v, const HeisenbergElement& w) {
  auto a = heisenberg_bracket(p, q, heisenberg_bracket(p, q, u, v), w);
  auto b = heisenberg_bracket(p, q, heisenberg_bracket(p, q, v, w), u);
  auto c = heisenberg_bracket(p, q, heisenberg_bracket(p, q, w, u), v);
  return norm(add(add(a, b), c));
}

double heisenberg_nilpotency_residual(int p, int q, const HeisenbergElement& u,
                                      const HeisenbergElement& v, const HeisenbergElement& w) {
  return norm(heisenberg_bracket(p, q, heisenberg_bracket(p, q, u, v), w));
}

}  // namespace tractorlab
