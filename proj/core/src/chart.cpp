#include "tractorlab/chart.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "tractorlab/errors.hpp"

namespace tractorlab {

namespace {

constexpr int kPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                           41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};

double radical_inverse(std::uint64_t index, int base) {
  double result = 0.0;
  double f = 1.0 / base;
  while (index > 0) {
    result += f * static_cast<double>(index % base);
    index /= base;
    f /= base;
  }
  return result;
}

}  // namespace

Chart::Chart(std::string name, std::vector<double> lower,
             std::vector<double> upper)
    : name_(std::move(name)), lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) {
    throw ShapeError("chart bounds have different lengths");
  }
  if (lower_.size() < 2) {
    throw ShapeError("chart dimension must be at least 2");
  }
  if (lower_.size() > std::size(kPrimes)) {
    throw CapabilityError("chart dimension too large");
  }
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (!(lower_[i] < upper_[i])) {
      throw ShapeError("chart box has empty interior");
    }
  }
}

Chart Chart::cube(std::string name, int dim, double half_width) {
  return Chart(std::move(name), std::vector<double>(dim, -half_width),
               std::vector<double>(dim, half_width));
}

int Chart::m() const {
  if (dim() % 4 != 3) {
    throw CapabilityError("dimension " + std::to_string(dim()) +
                          " is not of the form 4m+3");
  }
  return (dim() - 3) / 4;
}

bool Chart::contains(const Point& x) const {
  if (static_cast<int>(x.size()) != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    if (!(x[i] > lower_[i] && x[i] < upper_[i])) return false;
  }
  return true;
}

void Chart::require_inside(const Point& x) const {
  if (!contains(x)) {
    std::ostringstream os;
    os << "point (";
    for (std::size_t i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ") outside chart '" << name_ << "'";
    throw DomainError(os.str());
  }
}

std::vector<Point> Chart::sample_points(int count, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> shift(dim());
  for (auto& s : shift) s = unit(rng);

  constexpr double kMargin = 0.02;
  std::vector<Point> points;
  points.reserve(count);
  for (int k = 0; k < count; ++k) {
    Point x(dim());
    for (int i = 0; i < dim(); ++i) {
      double u = radical_inverse(static_cast<std::uint64_t>(k) + 1, kPrimes[i]) +
                 shift[i];
      u -= std::floor(u);
      u = kMargin + (1.0 - 2.0 * kMargin) * u;
      x[i] = lower_[i] + (upper_[i] - lower_[i]) * u;
    }
    points.push_back(std::move(x));
  }
  return points;
}

}  // namespace tractorlab
