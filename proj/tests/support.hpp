#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "tractorlab/jet.hpp"
#include "tractorlab/chart.hpp"

namespace tractorlab::testing {

using JetRule = std::function<std::vector<Jet>(const Point&, int order)>;

// Max error of central differences of the values against the first jet
// derivatives, over all components and directions.
inline double central_difference_error(const JetRule& f, const Point& x, double h) {
  auto exact = f(x, 1);
  double err = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    Point xp = x, xm = x;
    xp[a] += h;
    xm[a] -= h;
    auto fp = f(xp, 0), fm = f(xm, 0);
    for (std::size_t c = 0; c < exact.size(); ++c) {
      double fd = (fp[c].value() - fm[c].value()) / (2 * h);
      err = std::max(err, std::abs(fd - exact[c].d(static_cast<int>(a))));
    }
  }
  return err;
}

// Same for the diagonal second derivatives.
inline double second_difference_error(const JetRule& f, const Point& x, double h) {
  auto exact = f(x, 2);
  auto f0 = f(x, 0);
  double err = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    Point xp = x, xm = x;
    xp[a] += h;
    xm[a] -= h;
    auto fp = f(xp, 0), fm = f(xm, 0);
    for (std::size_t c = 0; c < exact.size(); ++c) {
      double fd = (fp[c].value() - 2 * f0[c].value() + fm[c].value()) / (h * h);
      int ai = static_cast<int>(a);
      err = std::max(err, std::abs(fd - exact[c].d(ai, ai)));
    }
  }
  return err;
}

// Observed order log2(e(h) / e(h / 2)).
inline double observed_order(const std::function<double(double)>& err, double h) {
  return std::log2(err(h) / err(h / 2));
}

}  // namespace tractorlab::testing
