#pragma once

#include <array>
#include <vector>

#include "tractorlab/linalg.hpp"
#include "tractorlab/quaternion.hpp"

namespace tractorlab {

// Element (x, a) of the quaternionic Heisenberg algebra H^{p+q} + Im H.
struct HeisenbergElement {
  std::vector<Quaternion> x;
  Quaternion a;  // imaginary
};

// <x, y> = sum_{b < p} conj(x_b) y_b - sum_{b >= p} conj(x_b) y_b.
Quaternion heisenberg_pairing(int p, int q, const std::vector<Quaternion>& x,
                              const std::vector<Quaternion>& y);

// [(x, a), (y, b)] = (0, Im <x, y>).
HeisenbergElement heisenberg_bracket(int p, int q, const HeisenbergElement& u,
                                     const HeisenbergElement& v);

// Structure constants on the real basis of H^{p+q} ordered blockwise
// (1, i, j, k): omega[r](s, t) is the (i, j, k)[r] component of Im <e_s, e_t>.
std::array<Mat, 3> heisenberg_structure(int p, int q);

// |[[u, v], w] + [[v, w], u] + [[w, u], v]|, and |[[u, v], w]| (2-step).
double heisenberg_jacobi_residual(int p, int q, const HeisenbergElement& u,
                                  const HeisenbergElement& v, const HeisenbergElement& w);
double heisenberg_nilpotency_residual(int p, int q, const HeisenbergElement& u,
                                      const HeisenbergElement& v, const HeisenbergElement& w);

}  // namespace tractorlab
