#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tractorlab/errors.hpp"
#include "tractorlab/models.hpp"
#include "tractorlab/report.hpp"

namespace tractorlab {

// Unknown suite, or a suite that does not apply to the model.
class SuiteError : public Error {
 public:
  using Error::Error;
};

struct SuiteOptions {
  int points = 20;
  std::uint64_t seed = 0;
  // Replaces the pinned tolerance of every residual check. Structural checks
  // (signatures, counts, margins) keep tolerance 0 or 1.
  std::optional<double> tol;
  int jobs = 1;
  bool timing = false;
};

struct SuiteInfo {
  std::string name;
  std::string description;
};
// Named suites; "standard" and "all" expand per model.
const std::vector<SuiteInfo>& suite_list();
// Concrete suites that run on this model, in report order.
std::vector<std::string> applicable_suites(const ModelGeometry& model);
// Expands "standard", "all" and comma lists into concrete suites; throws
// SuiteError on unknown or inapplicable names.
std::vector<std::string> expand_suite(const ModelGeometry& model, const std::string& suite);

VerificationReport run_suite(const ModelGeometry& model, const std::string& suite,
                             const SuiteOptions& opt);

// Metric whose Levi-Civita connection has non-reduced tractor holonomy: the
// model metric (or the chart's Euclidean metric) times exp(2 phi) for a fixed
// linear phi.
TensorField holonomy_control_metric(const ModelGeometry& model, double strength = 0.3);

// Contiguous split of the points into at most `parts` nonempty pieces.
std::vector<std::vector<Point>> split_points(const std::vector<Point>& points, int parts);

std::string artifact_version();

}  // namespace tractorlab
