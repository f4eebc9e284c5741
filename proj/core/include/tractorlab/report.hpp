#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tractorlab {

// Closed registry of traceability anchors attached to checks.
namespace anchor {
inline constexpr std::string_view kPlumbing = "invented — artifact plumbing";
inline constexpr std::string_view kOrientation = "eq. orientation_q";
inline constexpr std::string_view kHermitian = "eq. Hermitian";
inline constexpr std::string_view kSasaki = "Def. Sasaki";
inline constexpr std::string_view k3Sasaki = "Def. 3-Sasaki";
inline constexpr std::string_view kSasakiIdentities =
    "Prop. \"identities and their cyclic permutations\"";
inline constexpr std::string_view kEinsteinConstant =
    "Prop. \"Einstein with Einstein constant\"";
inline constexpr std::string_view kCone = "Prop. on cones";
inline constexpr std::string_view kMetricCone = "Prop. on metric cones";
inline constexpr std::string_view kProjectiveTensors = "Prop. on projective tensors";
inline constexpr std::string_view kProjectiveChange = "eq. projective_change";
inline constexpr std::string_view kChangeRho = "eq. change_rho";
inline constexpr std::string_view kLieOfNabla = "eq. Lie_of_nabla";
inline constexpr std::string_view kScale = "Def. \"is called a scale\"";
inline constexpr std::string_view kTractorBundle = "Thm. on the tractor bundle";
inline constexpr std::string_view kTractorCurvature = "eq. tractor_curvature";
inline constexpr std::string_view kAdjoint = "eq. adjoint-decomposition";
inline constexpr std::string_view kSplitting = "eq. splitting-operator-adjoint";
inline constexpr std::string_view kBGG = "eq. BGG-operator";
inline constexpr std::string_view kAdjointTractors = "Thm. on adjoint tractors";
inline constexpr std::string_view kGroupIntersection = "eq. group_intersection";
inline constexpr std::string_view kThmA = "Thm. A";
inline constexpr std::string_view kIJKForm = "eq. IJK_form";
inline constexpr std::string_view kIJK = "eq. IJK";
inline constexpr std::string_view kThmB = "Thm. B";
inline constexpr std::string_view kAdaptedScales = "Prop. on adapted scales";
inline constexpr std::string_view kAdaptedLemma = "Lemma of identities";
inline constexpr std::string_view kQParallel = "eq. Q_parallel";
inline constexpr std::string_view kDescent = "Thm. on descent";
inline constexpr std::string_view kDecompInScale = "eq. decomp_in_scale";
inline constexpr std::string_view kQuaterProjChange = "eq. quater_proj_change";
inline constexpr std::string_view kTractorDescent = "Thm. on tractor descent";
inline constexpr std::string_view kThmD = "Thm. D";
inline constexpr std::string_view kHeisenberg = "quaternionic Heisenberg algebra";
inline constexpr std::string_view kWqc = "eq. wqc_structure";

// Every anchor above, for closure checks.
const std::vector<std::string_view>& all();
bool known(std::string_view a);
}  // namespace anchor

struct CheckResult {
  std::string check_name;
  std::string paper_anchor;
  int n_points = 0;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  // Free-form details (counts, signatures, fitted constants).
  std::vector<std::pair<std::string, std::string>> notes;
};

// Builds a result with passed = (max_residual <= tolerance); NaN fails.
CheckResult make_check(std::string name, std::string_view anchor, int n_points,
                       double max_residual, double tolerance);

// Lower-is-better residual accumulation over sample points.
class ResidualTracker {
 public:
  void add(double r);
  double max() const { return max_; }
  int count() const { return count_; }

 private:
  double max_ = 0.0;
  int count_ = 0;
  bool nan_ = false;
};

struct ModelDescriptor {
  std::string name;
  int m = 0;
  int p = 0;
  int q = 0;
  std::string chart;
  std::uint64_t seed = 0;
};

struct VerificationReport {
  std::string artifact_version;
  ModelDescriptor model;
  std::string suite;
  std::vector<CheckResult> checks;
  std::optional<double> wall_time;

  bool all_passed() const;
  // JSON text with sorted keys and 17-significant-digit numbers.
  std::string to_json() const;
};

// Formats a double with 17 significant digits (JSON-safe; non-finite -> null).
std::string format_number(double v);

}  // namespace tractorlab
