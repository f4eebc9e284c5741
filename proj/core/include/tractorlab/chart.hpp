#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tractorlab {

using Point = std::vector<double>;

// Axis-aligned coordinate box of dimension dim = n + 1.
class Chart {
 public:
  Chart(std::string name, std::vector<double> lower, std::vector<double> upper);

  // Cube [-half_width, half_width]^dim.
  static Chart cube(std::string name, int dim, double half_width);

  const std::string& name() const { return name_; }
  int dim() const { return static_cast<int>(lower_.size()); }
  // Projective convention: dim = n + 1.
  int n() const { return dim() - 1; }
  // Quaternionic convention dim = 4m + 3; throws CapabilityError otherwise.
  int m() const;

  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }

  bool contains(const Point& x) const;
  void require_inside(const Point& x) const;

  // Deterministic low-discrepancy points strictly inside the box: a Halton
  // sequence with a seeded Cranley-Patterson shift, kept off the faces by a
  // 2% margin.
  std::vector<Point> sample_points(int count, std::uint64_t seed) const;

 private:
  std::string name_;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

}  // namespace tractorlab
