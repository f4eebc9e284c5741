#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "support.hpp"
#include "tractorlab/descent.hpp"
#include "tractorlab/models.hpp"
#include "tractorlab/suites.hpp"
#include "tractorlab/tractor.hpp"

using namespace tractorlab;

namespace {

using Checks = std::map<std::string, CheckResult>;

Checks run(const ModelGeometry& model, const std::string& suite, int points, int jobs = 1) {
  SuiteOptions opt;
  opt.points = points;
  opt.seed = 2024;
  opt.jobs = jobs;
  Checks out;
  for (auto& c : run_suite(model, suite, opt).checks) out[c.check_name] = c;
  return out;
}

// Accumulates one criterion: every bound must hold and every named check
// must exist.
struct Criterion {
  bool ok = true;
  double worst = 0.0;
  std::vector<std::string> failures;

  void bound(const std::string& what, double value, double limit) {
    worst = std::max(worst, value / limit);
    if (!(value <= limit)) fail(what + " = " + format_number(value) + " > " + format_number(limit));
  }
  void require(const std::string& what, bool cond) {
    if (!cond) fail(what);
  }
  void check(const Checks& cs, const std::string& name, double limit) {
    auto it = cs.find(name);
    if (it == cs.end()) return fail("missing " + name);
    bound(name, it->second.max_residual, limit);
  }
  void passed(const Checks& cs, const std::string& name) {
    auto it = cs.find(name);
    if (it == cs.end()) return fail("missing " + name);
    require(name + " passed", it->second.passed);
  }
  void all_with_prefix(const Checks& cs, const std::string& prefix, double limit) {
    int n = 0;
    for (const auto& [name, c] : cs)
      if (name.rfind(prefix, 0) == 0 && c.tolerance > 0 && c.tolerance < 1) {
        bound(name, c.max_residual, limit);
        ++n;
      }
    require("checks under " + prefix, n > 0);
  }
  void fail(const std::string& what) {
    ok = false;
    failures.push_back(what);
  }
};

int note_value(const Checks& cs, const std::string& name, const std::string& key) {
  auto it = cs.find(name);
  if (it == cs.end()) return -1;
  for (const auto& [k, v] : it->second.notes)
    if (k == key) return std::stoi(v);
  return -1;
}

}  // namespace

int main() {
  const auto s7 = get_model("round_sphere", 1, 2, 0);
  const auto s34 = get_model("round_sphere", 1, 1, 1);
  const auto s11 = get_model("round_sphere", 2, 3, 0);
  const auto cone = get_model("metric_cone", 1, 2, 0);
  const auto flat11 = get_model("flat_projective", 1, 1, 1);
  const auto flat21 = get_model("flat_projective", 2, 2, 1);

  std::vector<std::pair<std::string, std::function<Criterion()>>> criteria;

  criteria.push_back({"3-Sasaki axioms on S7 and S34 over 200 points", [&] {
    Criterion c;
    for (const auto* model : {&s7, &s34}) {
      auto cs = run(*model, "sasaki", 200);
      for (const char* f : {"killing_", "unit_norm_", "second_derivative_"})
        for (const char* t : {"i", "j", "k"}) c.check(cs, std::string("sasaki.") + f + t, 1e-7);
      for (const char* n : {"orthogonality", "commutators", "identity_a", "identity_b",
                            "identity_c"})
        c.check(cs, std::string("sasaki.") + n, 1e-7);
      c.require("200 points", cs["sasaki.killing_i"].n_points >= 200);
    }
    return c;
  }});

  criteria.push_back({"Einstein constants 6 and 10", [&] {
    Criterion c;
    c.check(run(s7, "sasaki", 20), "sasaki.einstein", 1e-7);
    c.check(run(s34, "sasaki", 20), "sasaki.einstein", 1e-7);
    c.check(run(s11, "sasaki", 4), "sasaki.einstein", 1e-7);
    return c;
  }});

  criteria.push_back({"hyperkaehler cone", [&] {
    Criterion c;
    for (const auto* model : {&s7, &s34, &cone}) {
      auto cs = run(*model, "cone", 10);
      c.check(cs, "cone.parallel", 1e-6);
      c.check(cs, "cone.ricci", 1e-6);
      if (model != &s34) c.check(cs, "cone.riemann", 1e-6);
    }
    return c;
  }});

  criteria.push_back({"parallel tractor hyperkaehler structure", [&] {
    Criterion c;
    for (const auto* model : {&s7, &s34}) {
      auto cs = run(*model, "tractor_hk", 10);
      c.check(cs, "tractor_hk.quaternion", 1e-8);
      c.check(cs, "tractor_hk.parallel_IJK", 1e-7);
      c.check(cs, "tractor_hk.parallel_h", 1e-7);
      c.passed(cs, "tractor_hk.h_signature");
    }
    return c;
  }});

  criteria.push_back({"curved orbit stratification", [&] {
    Criterion c;
    for (const auto* model : {&flat11, &flat21}) {
      auto cs = run(*model, "stratify", 40);
      c.passed(cs, "stratify.labels");
      c.check(cs, "stratify.m0_roots", 1e-10);
      c.passed(cs, "stratify.m0_found");
      for (const char* t : {"i", "j", "k"}) c.passed(cs, std::string("stratify.nowhere_vanishing_") + t);
      for (const char* s : {"g_plus", "g_minus"}) {
        c.check(cs, std::string("stratify.") + s + ".einstein", 1e-6);
        c.passed(cs, std::string("stratify.") + s + ".signature");
      }
      for (const char* key : {"plus", "zero", "minus"})
        c.require(std::string("nonempty ") + key, note_value(cs, "stratify.labels", key) > 0);
    }
    return c;
  }});

  criteria.push_back({"adapted scale identities and affine symmetries", [&] {
    Criterion c;
    for (const auto* model : {&s7, &s34}) {
      auto cs = run(*model, "adapted", 10);
      c.all_with_prefix(cs, "adapted.", 1e-7);
      c.check(cs, "adapted.q.Q_parallel", 1e-7);
      c.check(cs, "adapted.affine_symmetry", 1e-7);
    }
    return c;
  }});

  criteria.push_back({"quaternionic and tractor descent over 20 fibre pairs", [&] {
    Criterion c;
    for (const auto* model : {&s7, &s34}) {
      Scale s(model->connection);
      const auto& ijk = model->triple->xi;
      auto upts = model->hopf->quotient_chart.sample_points(12, 77);
      auto q = descend_quaternionic(*model, s, ijk, upts, 78);
      c.require("quaternionic fibre pairs >= 20", q.fiber_pairs >= 20);
      c.bound("fiber_consistency", q.fiber_consistency, 1e-7);
      c.bound("torsion", q.torsion, 1e-7);
      c.bound("q_preserving", q.q_preserving, 1e-7);
      auto tpts = model->chart.sample_points(22, 79);
      auto t = check_tractor_descent(*model, s, ijk, tpts, 80);
      c.require("tractor fibre pairs >= 20", t.fiber_pairs >= 20);
      c.bound("tractor_curvature_vertical", t.curvature, 1e-8);
      c.bound("tractor_fiber_consistency", t.test_tractor, 1e-7);
    }
    return c;
  }});

  criteria.push_back({"quaternionic Kaehler quotient and Heisenberg model", [&] {
    Criterion c;
    for (const auto* model : {&s7, &s11}) {
      auto pts = model->hopf->quotient_chart.sample_points(4, 81);
      auto r = qk_quotient_check(*model, pts, 82);
      c.bound(model->m == 1 ? "Ric - 12g" : "Ric - 16g", r.ricci, model->m == 1 ? 1e-6 : 1e-5);
      c.bound("quotient hermitian", r.hermitian, 1e-7);
      c.bound("quotient Q parallel", r.q_parallel, 1e-7);
    }
    auto cs = run(flat21, "m0", 10);
    c.check(cs, "m0.heisenberg_fit", 1e-5);
    c.passed(cs, "m0.heisenberg_signature");
    return c;
  }});

  criteria.push_back({"holonomy in sp(p,q) with negative control", [&] {
    Criterion c;
    for (const auto* model : {&s7, &s34, &flat11}) {
      auto cs = run(*model, "holonomy", 12);
      c.check(cs, "holonomy.membership_per_area", 1e-6);
      c.passed(cs, "holonomy.negative_control");
    }
    return c;
  }});

  criteria.push_back({"finite difference order and determinism", [&] {
    Criterion c;
    const Point x = s7.chart.sample_points(1, 5)[0];
    testing::JetRule gamma = [&](const Point& y, int order) {
      return s7.connection.gamma_at(y, order).c;
    };
    auto e1 = [&](double h) { return testing::central_difference_error(gamma, x, h); };
    auto e2 = [&](double h) { return testing::second_difference_error(gamma, x, h); };
    double o1 = testing::observed_order(e1, 1e-2), o2 = testing::observed_order(e2, 1e-2);
    c.require("first order " + format_number(o1) + " >= 1.9", o1 >= 1.9);
    c.require("second order " + format_number(o2) + " >= 1.9", o2 >= 1.9);
    SuiteOptions a;
    a.points = 6;
    a.seed = 11;
    SuiteOptions b = a;
    b.jobs = 3;
    for (const auto* model : {&s34, &flat11}) {
      auto first = run_suite(*model, "all", a).to_json();
      c.require("repeat identical", first == run_suite(*model, "all", a).to_json());
      c.require("jobs identical", first == run_suite(*model, "all", b).to_json());
    }
    return c;
  }});

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Criterion c;
    try {
      c = criteria[i].second();
    } catch (const std::exception& e) {
      c.fail(std::string("exception: ") + e.what());
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (c.ok ? "PASS " : "FAIL ") << i + 1 << ". " << criteria[i].first
              << "  (worst residual / bound " << format_number(c.worst) << ", "
              << static_cast<int>(secs) << " s)\n";
    for (const auto& f : c.failures) std::cout << "    " << f << "\n";
    failed += !c.ok;
  }
  std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
