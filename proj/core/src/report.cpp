#include "tractorlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

#include "tractorlab/errors.hpp"

#ifndef TRACTORLAB_VERSION
#define TRACTORLAB_VERSION "0.0.0"
#endif

namespace tractorlab {

namespace anchor {

const std::vector<std::string_view>& all() {
  static const std::vector<std::string_view> v = {
      kPlumbing,         kOrientation,      kHermitian,         kSasaki,
      k3Sasaki,          kSasakiIdentities, kEinsteinConstant,  kCone,
      kMetricCone,       kProjectiveTensors, kProjectiveChange, kChangeRho,
      kLieOfNabla,       kScale,            kTractorBundle,     kTractorCurvature,
      kAdjoint,          kSplitting,        kBGG,               kAdjointTractors,
      kGroupIntersection, kThmA,            kIJKForm,           kIJK,
      kThmB,             kAdaptedScales,    kAdaptedLemma,      kQParallel,
      kDescent,          kDecompInScale,    kQuaterProjChange,  kTractorDescent,
      kThmD,             kHeisenberg,       kWqc};
  return v;
}

bool known(std::string_view a) {
  const auto& v = all();
  return std::find(v.begin(), v.end(), a) != v.end();
}

}  // namespace anchor

CheckResult make_check(std::string name, std::string_view anchor_label, int n_points,
                       double max_residual, double tolerance) {
  if (!anchor::known(anchor_label)) {
    throw Error("unregistered anchor '" + std::string(anchor_label) + "'");
  }
  CheckResult r;
  r.check_name = std::move(name);
  r.paper_anchor = std::string(anchor_label);
  r.n_points = n_points;
  r.max_residual = max_residual;
  r.tolerance = tolerance;
  r.passed = !std::isnan(max_residual) && max_residual <= tolerance;
  return r;
}

void ResidualTracker::add(double r) {
  ++count_;
  if (std::isnan(r)) {
    nan_ = true;
    max_ = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  if (!nan_) max_ = std::max(max_, r);
}

bool VerificationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.passed; });
}

std::string format_number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

// nlohmann::json keeps object keys sorted (std::map). Numbers are stored as
// pre-formatted strings tagged with a sentinel and spliced in on output.
constexpr const char* kNumTag = "\x01num:";

nlohmann::json num(double v) { return std::string(kNumTag) + format_number(v); }

std::string splice_numbers(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  const std::string tag = std::string("\"") + "\\u0001num:";
  std::size_t pos = 0;
  while (true) {
    std::size_t hit = text.find(tag, pos);
    if (hit == std::string::npos) {
      out.append(text, pos, std::string::npos);
      break;
    }
    out.append(text, pos, hit - pos);
    std::size_t start = hit + tag.size();
    std::size_t end = text.find('"', start);
    out.append(text, start, end - start);
    pos = end + 1;
  }
  return out;
}

}  // namespace

std::string VerificationReport::to_json() const {
  nlohmann::json j;
  j["artifact_version"] = artifact_version.empty() ? TRACTORLAB_VERSION : artifact_version;
  j["model"] = {{"name", model.name},
                {"m", model.m},
                {"p", model.p},
                {"q", model.q},
                {"chart", model.chart},
                {"seed", model.seed}};
  j["suite"] = suite;
  j["all_passed"] = all_passed();
  nlohmann::json checks_json = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json cj;
    cj["check_name"] = c.check_name;
    cj["paper_anchor"] = c.paper_anchor;
    cj["n_points"] = c.n_points;
    cj["max_residual"] = num(c.max_residual);
    cj["tolerance"] = num(c.tolerance);
    cj["passed"] = c.passed;
    if (!c.notes.empty()) {
      nlohmann::json notes = nlohmann::json::object();
      for (const auto& [k, v] : c.notes) notes[k] = v;
      cj["notes"] = notes;
    }
    checks_json.push_back(cj);
  }
  j["checks"] = checks_json;
  j["wall_time"] = wall_time ? num(*wall_time) : nlohmann::json(nullptr);
  return splice_numbers(j.dump(2)) + "\n";
}

}  // namespace tractorlab
