#include "tractorlab/suites.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <thread>

#include "tractorlab/descent.hpp"
#include "tractorlab/heisenberg.hpp"
#include "tractorlab/strat.hpp"

namespace tractorlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string pair_text(std::pair<int, int> s) {
  return "(" + std::to_string(s.first) + ", " + std::to_string(s.second) + ")";
}

// Collects checks for one task. Residual checks honour the --tol override;
// structural ones do not.
class Checks {
 public:
  Checks(std::string prefix, const SuiteOptions& opt) : prefix_(std::move(prefix)), opt_(opt) {}

  CheckResult& residual(const std::string& name, std::string_view anchor, int n, double r,
                        double tol) {
    out_.push_back(make_check(prefix_ + "." + name, anchor, n, r, opt_.tol.value_or(tol)));
    return out_.back();
  }
  CheckResult& exact(const std::string& name, std::string_view anchor, int n, double r) {
    out_.push_back(make_check(prefix_ + "." + name, anchor, n, r, 0.0));
    return out_.back();
  }
  // Passes iff value >= threshold; the residual is threshold / value.
  CheckResult& at_least(const std::string& name, std::string_view anchor, int n, double value,
                        double threshold) {
    double r = value > 0.0 ? threshold / value : std::numeric_limits<double>::infinity();
    out_.push_back(make_check(prefix_ + "." + name, anchor, n, r, 1.0));
    out_.back().notes.emplace_back("value", format_number(value));
    out_.back().notes.emplace_back("threshold", format_number(threshold));
    return out_.back();
  }
  CheckResult& signature(const std::string& name, std::string_view anchor, int n,
                         std::pair<int, int> got, std::pair<int, int> want,
                         bool constant = true) {
    double r = std::abs(got.first - want.first) + std::abs(got.second - want.second) +
               (constant ? 0.0 : 1.0);
    auto& c = exact(name, anchor, n, r);
    c.notes.emplace_back("signature", pair_text(got));
    c.notes.emplace_back("expected", pair_text(want));
    return c;
  }

  std::vector<CheckResult> take() { return std::move(out_); }

 private:
  std::string prefix_;
  const SuiteOptions& opt_;
  std::vector<CheckResult> out_;
};

struct Task {
  std::string label;
  std::string_view anchor;
  std::function<std::vector<CheckResult>()> run;
};

// A library error inside a task becomes one failing check.
std::vector<CheckResult> run_guarded(const Task& t) {
  try {
    return t.run();
  } catch (const Error& e) {
    auto c = make_check(t.label + ".error", t.anchor, 0, kNaN, 0.0);
    c.notes.emplace_back("error", e.what());
    return {c};
  }
}

std::vector<std::vector<CheckResult>> execute(const std::vector<Task>& tasks, int jobs) {
  std::vector<std::vector<CheckResult>> results(tasks.size());
  jobs = std::clamp(jobs, 1, std::max<int>(1, static_cast<int>(tasks.size())));
  if (jobs == 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) results[i] = run_guarded(tasks[i]);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  for (int w = 0; w < jobs; ++w)
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < tasks.size(); i = next++) results[i] = run_guarded(tasks[i]);
    });
  for (auto& w : workers) w.join();
  return results;
}

// Same-named checks from point chunks fold into one: max residual, summed
// points, notes of the first occurrence except "min_" notes, which take the
// minimum.
std::vector<CheckResult> merge(const std::vector<std::vector<CheckResult>>& parts) {
  std::vector<CheckResult> out;
  std::map<std::string, std::size_t> where;
  for (const auto& part : parts)
    for (const auto& c : part) {
      auto it = where.find(c.check_name);
      if (it == where.end()) {
        where.emplace(c.check_name, out.size());
        out.push_back(c);
        continue;
      }
      auto& m = out[it->second];
      m.n_points += c.n_points;
      if (std::isnan(c.max_residual) || std::isnan(m.max_residual)) m.max_residual = kNaN;
      else m.max_residual = std::max(m.max_residual, c.max_residual);
      m.passed = m.passed && c.passed && !std::isnan(m.max_residual);
      for (const auto& note : c.notes) {
        if (note.first == "error") {
          m.notes.push_back(note);
        } else if (note.first.rfind("min_", 0) == 0) {
          for (auto& [key, value] : m.notes)
            if (key == note.first && std::stod(note.second) < std::stod(value))
              value = note.second;
        }
      }
    }
  return out;
}

// One task per point chunk.
void chunked(std::vector<Task>& tasks, const std::string& label, std::string_view anchor,
             const std::vector<Point>& points, int jobs,
             std::function<std::vector<CheckResult>(const std::vector<Point>&)> fn) {
  for (auto& part : split_points(points, jobs))
    tasks.push_back({label, anchor, [fn, part] { return fn(part); }});
}

std::pair<int, int> sasaki_signature(const ModelGeometry& m) {
  return {static_cast<int>(m.expected.at("metric_signature_pos")),
          static_cast<int>(m.expected.at("metric_signature_neg"))};
}

std::pair<int, int> metric_signature(const TensorField& g, const Point& x) {
  const int d = g.dim();
  auto v = g.values(x);
  return signature(Eigen::Map<const Mat>(v.data(), d, d));
}

TensorField test_function(const Chart& chart, double amp) {
  const int d = chart.dim();
  return TensorField(chart, TensorShape::scalar(d), 0.0, Jet::kMaxOrder,
                     [d, amp](std::span<const Jet> x) {
                       Jet f(0.0);
                       for (int a = 0; a < d; ++a)
                         f += amp * (std::sin(0.7 * a + 0.3) * x[a] +
                                     0.5 * std::cos(1.3 * a) * square(x[a]));
                       return std::vector<Jet>{f};
                     },
                     "f");
}

TensorField differential(const TensorField& f) {
  const int d = f.dim();
  return TensorField(f.chart(), TensorShape::covector(d), 0.0, f.max_order() - 1,
                     make_pointwise_rule([f, d](const Point& x, int order) {
                       auto j = f.evaluate(x, order + 1);
                       std::vector<Jet> out;
                       for (int a = 0; a < d; ++a) out.push_back(j[0].derivative(a));
                       return out;
                     }),
                     "df");
}

// ---------- sasaki ----------

void suite_sasaki(const ModelGeometry& model, const SuiteOptions& opt, std::vector<Task>& tasks) {
  auto pts = model.chart.sample_points(opt.points, opt.seed + 101);
  const SasakiTriple t = *model.triple;
  const auto want = sasaki_signature(model);
  chunked(tasks, "sasaki", anchor::kSasaki, pts, opt.jobs, [t, want, &opt](const auto& p) {
    Checks c("sasaki", opt);
    const int n = static_cast<int>(p.size());
    auto r = check_3sasaki(t, p);
    const char* names[3] = {"i", "j", "k"};
    for (int s = 0; s < 3; ++s) {
      c.residual(std::string("killing_") + names[s], anchor::kSasaki, n, r.sasaki[s].killing, 1e-7);
      c.residual(std::string("unit_norm_") + names[s], anchor::kSasaki, n, r.sasaki[s].unit_norm,
                 1e-7);
      c.residual(std::string("second_derivative_") + names[s], anchor::kSasaki, n,
                 r.sasaki[s].second_derivative, 1e-7);
    }
    c.residual("orthogonality", anchor::k3Sasaki, n, r.orthogonality, 1e-7);
    c.residual("commutators", anchor::k3Sasaki, n, r.commutators, 1e-7);
    c.residual("identity_a", anchor::kSasakiIdentities, n, r.identity_a, 1e-7);
    c.residual("identity_b", anchor::kSasakiIdentities, n, r.identity_b, 1e-7);
    c.residual("identity_c", anchor::kSasakiIdentities, n, r.identity_c, 1e-7);
    c.residual("einstein", anchor::kEinsteinConstant, n, r.einstein, 1e-7)
        .notes.emplace_back("constant", std::to_string(t.g.dim() - 1));
    double sig = 0.0;
    for (const auto& x : p) {
      auto s = metric_signature(t.g, x);
      sig = std::max<double>(sig, std::abs(s.first - want.first) + std::abs(s.second - want.second));
    }
    c.exact("metric_signature", anchor::k3Sasaki, n, sig)
        .notes.emplace_back("expected", pair_text(want));
    return c.take();
  });
}

// ---------- cone ----------

void suite_cone(const ModelGeometry& model, const SuiteOptions& opt, std::vector<Task>& tasks) {
  const ConeGeometry cone = model.cone ? *model.cone : cone_build(*model.triple);
  std::pair<int, int> expected;
  if (model.cone)
    expected = {static_cast<int>(model.expected.at("cone_signature_pos")),
                static_cast<int>(model.expected.at("cone_signature_neg"))};
  else expected = {sasaki_signature(model).first + 1, sasaki_signature(model).second};
  auto pts = cone.chart.sample_points(opt.points, opt.seed + 202);
  chunked(tasks, "cone", anchor::kCone, pts, opt.jobs, [cone, expected, &opt](const auto& p) {
    Checks c("cone", opt);
    const int n = static_cast<int>(p.size());
    auto r = check_cone(cone, p);
    c.residual("almost_complex", anchor::kCone, n, r.almost_complex, 1e-6);
    c.residual("hermitian", anchor::kHermitian, n, r.hermitian, 1e-6);
    c.residual("parallel", anchor::kCone, n, r.parallel, 1e-6);
    c.residual("ricci", anchor::kMetricCone, n, r.ricci, 1e-6);
    c.residual("riemann", anchor::kMetricCone, n, r.riemann, 1e-6);
    c.residual("round_trip", anchor::kCone, n, r.round_trip, 1e-7);
    c.signature("signature", anchor::kMetricCone, n, r.signature, expected);
    return c.take();
  });
}

// ---------- tractor_hk ----------

void suite_tractor_hk(const ModelGeometry& model, const SuiteOptions& opt, std::vector<Task>& tasks) {
  auto pts = model.chart.sample_points(opt.points, opt.seed + 303);
  auto hk = std::make_shared<TractorHK>(build_tractor_hk(*model.triple));
  // Signature (4p' - 1, 4q') of the triple's metric gives (4p', 4q'); on the
  // - stratum p' = q, q' = p.
  const std::pair<int, int> want{sasaki_signature(model).first + 1,
                                 sasaki_signature(model).second};
  const int orient = (model.m % 2 == 0) ? 1 : -1;
  chunked(tasks, "tractor_hk", anchor::kThmA, pts, opt.jobs, [hk, want, orient, &opt](const auto& p) {
    Checks c("tractor_hk", opt);
    const int n = static_cast<int>(p.size());
    auto r = check_tractor_hk(*hk, p);
    c.residual("quaternion", anchor::kIJK, n, r.quaternion, 1e-8);
    c.residual("parallel_IJK", anchor::kThmA, n, r.parallel, 1e-7);
    c.residual("parallel_h", anchor::kThmA, n, r.metric_parallel, 1e-7);
    c.residual("hermitian", anchor::kHermitian, n, r.hermitian, 1e-7);
    c.residual("ijk_form", anchor::kIJKForm, n, r.ijk_form, 1e-7);
    c.signature("h_signature", anchor::kThmA, n, r.signature, want, r.signature_constant);
    auto& o = c.exact("orientation", anchor::kOrientation, n,
                      (r.orientation_constant && r.orientation_chart == orient) ? 0.0 : 1.0);
    o.notes.emplace_back("chart_sign", std::to_string(orient));

    const Scale& s = hk->scale;
    const char* names[3] = {"i", "j", "k"};
    for (int t = 0; t < 3; ++t) {
      const auto& xi = hk->triple.xi[t];
      auto ns = check_normal_solution(s, xi, p);
      c.residual(std::string("normal_solution_") + names[t], anchor::kBGG, n,
                 std::max({ns.weyl_residual, ns.cotton_residual, ns.bgg_residual}), 1e-7);
      c.residual(std::string("splitting_parallel_") + names[t], anchor::kAdjointTractors, n,
                 ns.parallel_residual, 1e-7);
      double proj = 0.0, trace = 0.0;
      for (const auto& x : p) {
        auto L = splitting_operator(s, xi, x);
        auto pi = adjoint_projection(L);
        auto v = xi.values(x);
        for (std::size_t a = 0; a < v.size(); ++a)
          proj = std::max(proj, std::abs(pi[a].value() - v[a]));
        trace = std::max(trace, std::abs(L.values().trace()));
      }
      c.residual(std::string("splitting_projection_") + names[t], anchor::kSplitting, n, proj,
                 1e-10);
      c.residual(std::string("adjoint_trace_") + names[t], anchor::kAdjoint, n, trace, 1e-10);
    }
    return c.take();
  });
}

// ---------- projective ----------

void suite_projective(const ModelGeometry& model, const SuiteOptions& opt,
                      std::vector<Task>& tasks) {
  auto s = std::make_shared<Scale>(model.connection);
  const Chart chart = model.connection.chart;
  auto pts = chart.sample_points(opt.points, opt.seed + 404);
  const int d = chart.dim();
  auto f = test_function(chart, 0.1);
  auto upsilon = differential(f);
  auto changed = std::make_shared<Connection>(projective_change(model.connection, upsilon));
  auto sc = std::make_shared<ScaleChange>(change_scale(*s, f));

  tasks.push_back({"projective", anchor::kScale, [s, &opt] {
                     Checks c("projective", opt);
                     c.residual("ricci_symmetric", anchor::kScale, 16, s->max_ricci_asymmetry(),
                                1e-9);
                     return c.take();
                   }});

  chunked(tasks, "projective", anchor::kProjectiveTensors, pts, opt.jobs,
          [s, changed, upsilon, sc, d, &opt](const auto& p) {
    Checks c("projective", opt);
    const int n = static_cast<int>(p.size());
    const Connection& nabla = s->connection();
    const bool second = nabla.gamma_order() >= 2;
    double tors = 0, bianchi = 0, trace = 0, recon = 0, div = 0, rho = 0, spray = 0;
    double tcurv = 0, comm = 0, dual = 0, gauge = 0;
    std::vector<double> tslots(d + 1), cslots(d + 1);
    for (int a = 0; a <= d; ++a) {
      tslots[a] = std::cos(1.0 + a);
      cslots[a] = std::sin(2.0 + 0.5 * a);
    }
    auto t = constant_tractor(*s, tslots, false, "t");
    auto mu = constant_tractor(*s, cslots, true, "mu");
    auto tt = sc->transform(t);
    for (const auto& x : p) {
      auto gamma = nabla.gamma_at(x, second ? 2 : 1);
      auto cur = curvature_from_gamma(gamma);
      tors = std::max(tors, torsion_residual(gamma));
      bianchi = std::max(bianchi, first_bianchi_residual(cur.R));
      trace = std::max(trace, weyl_trace_residual(cur.W));
      recon = std::max(recon, reconstruction_residual(cur));
      if (second) div = std::max(div, weyl_divergence_residual(cur, gamma));

      // P-hat = P - nabla Upsilon + Upsilon Upsilon
      auto P = curvature_at(nabla, x, 0).P;
      auto Ph = curvature_at(*changed, x, 0).P;
      auto U = upsilon.evaluate(x, 1);
      auto dU = covariant_derivative(U, nabla.gamma_at(x, 0));
      auto g0 = nabla.gamma_at(x, 0), g1 = changed->gamma_at(x, 0);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          double want = P[a * d + b].value() - dU[a * d + b].value() +
                        U[a].value() * U[b].value();
          rho = std::max(rho, std::abs(Ph[a * d + b].value() - want));
        }
      // Gamma-hat(v, v) - Gamma(v, v) = 2 Upsilon(v) v
      std::vector<double> v(d);
      for (int a = 0; a < d; ++a) v[a] = std::cos(0.3 + a);
      double uv = 0;
      for (int a = 0; a < d; ++a) uv += U[a].value() * v[a];
      for (int cc = 0; cc < d; ++cc) {
        double diff = 0;
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b)
            diff += (g1[(cc * d + a) * d + b].value() - g0[(cc * d + a) * d + b].value()) * v[a] *
                    v[b];
        spray = std::max(spray, std::abs(diff - 2.0 * uv * v[cc]));
      }

      if (s->omega_order() >= 1) {
        auto F = tractor_curvature(*s, x);
        auto Ft = tractor_curvature_from_tensors(*s, x);
        for (std::size_t i = 0; i < F.size(); ++i)
          tcurv = std::max(tcurv, max_abs(F[i].values() - Ft[i]));
        comm = std::max(comm, curvature_commutator_residual(*s, t, x));
      }
      dual = std::max(dual, duality_residual(*s, mu, t, x));

      // nabla-hat (G t) = G nabla t
      Mat G = sc->gauge(x, 0).values();
      auto D0 = tractor_derivative(*s, t, x);
      auto D1 = tractor_derivative(sc->to, tt, x);
      for (int a = 0; a < d; ++a) {
        Vec v0(d + 1), v1(d + 1);
        for (int i = 0; i <= d; ++i) {
          v0[i] = D0[a][i].value();
          v1[i] = D1[a][i].value();
        }
        gauge = std::max(gauge, (v1 - G * v0).cwiseAbs().maxCoeff());
      }
    }
    c.residual("torsion", anchor::kProjectiveTensors, n, tors, 1e-12);
    c.residual("first_bianchi", anchor::kProjectiveTensors, n, bianchi, 1e-9);
    c.residual("weyl_trace_free", anchor::kProjectiveTensors, n, trace, 1e-9);
    c.residual("curvature_decomposition", anchor::kProjectiveTensors, n, recon, 1e-9);
    if (second) c.residual("weyl_divergence", anchor::kProjectiveTensors, n, div, 1e-8);
    c.residual("change_rho", anchor::kChangeRho, n, rho, 1e-9);
    c.residual("projective_change_spray", anchor::kProjectiveChange, n, spray, 1e-12);
    if (s->omega_order() >= 1) {
      c.residual("tractor_curvature", anchor::kTractorCurvature, n, tcurv, 1e-9);
      c.residual("tractor_commutator", anchor::kTractorCurvature, n, comm, 1e-8);
    }
    c.residual("tractor_duality", anchor::kTractorBundle, n, dual, 1e-10);
    c.residual("tractor_scale_change", anchor::kTractorBundle, n, gauge, 1e-9);
    auto vol = tractor_volume_check(*s, p);
    c.residual("volume_parallel", anchor::kTractorBundle, n, vol.parallel_residual, 1e-8);
    c.residual("volume_uniqueness", anchor::kTractorBundle, n, vol.uniqueness_residual, 1e-8);
    c.exact("volume_positive", anchor::kTractorBundle, n, vol.min_value > 0.0 ? 0.0 : 1.0);
    return c.take();
  });
}

// ---------- adapted ----------

void suite_adapted(const ModelGeometry& model, const SuiteOptions& opt, std::vector<Task>& tasks) {
  auto s = std::make_shared<Scale>(model.connection);
  auto pts = model.chart.sample_points(opt.points, opt.seed + 505);
  const auto ijk = model.triple->xi;
  chunked(tasks, "adapted", anchor::kAdaptedLemma, pts, opt.jobs, [s, ijk, &opt](const auto& p) {
    Checks c("adapted", opt);
    const int n = static_cast<int>(p.size());
    auto r = check_adapted_scale(*s, ijk, p);
    c.residual("divergence", anchor::kAdaptedScales, n,
               std::max({std::abs(r.divergence[0]), std::abs(r.divergence[1]),
                         std::abs(r.divergence[2])}),
               1e-8);
    for (const auto& [name, v] : r.families)
      c.residual(name, name == "q.Q_parallel" ? anchor::kQParallel : anchor::kAdaptedLemma, n, v,
                 1e-7);
    c.residual("affine_symmetry", anchor::kLieOfNabla, n, r.affine_symmetry, 1e-7);
    auto D = check_D_integrability({ijk[0], ijk[1], ijk[2]}, p);
    c.exact("D_rank", anchor::kDescent, n, std::abs(D.rank - 3))
        .notes.emplace_back("min_singular_value", format_number(D.min_singular_value));
    c.residual("D_involutive", anchor::kDescent, n, D.commutators, 1e-7);
    return c.take();
  });
}

// ---------- stratify ----------

void suite_stratify(const ModelGeometry& model, const SuiteOptions& opt,
                    std::vector<Task>& tasks) {
  auto s = std::make_shared<Scale>(model.connection);
  const int m = model.m, p = model.p, q = model.q;
  const int npts = std::max(opt.points, 10);
  auto pts = model.chart.sample_points(npts, opt.seed + 606);

  // M0 roots join the sample points so that all three strata are represented.
  tasks.push_back({"stratify", anchor::kThmB, [model, s, pts, p, q, &opt] {
    Checks c("stratify", opt);
    auto h = flat_tractor_form(*s, model.ambient.h, "h");
    auto all = pts;
    if (p >= 1 && q >= 1) {
      auto found = locate_m0(tau_field(*s, h), model.chart, std::max(8, opt.points), 17,
                             opt.seed + 607);
      const int nr = static_cast<int>(found.roots.size());
      c.residual("m0_roots", anchor::kThmB, nr, found.max_abs_tau, 1e-10)
          .notes.emplace_back("sign_changes", std::to_string(found.sign_changes));
      c.exact("m0_found", anchor::kThmB, found.lines, found.roots.empty() ? 1.0 : 0.0);
      all.insert(all.end(), found.roots.begin(), found.roots.end());
    }
    const int n = static_cast<int>(all.size());
    auto st = stratify(*s, h, all);
    int mismatch = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
      double t = model.tau(all[i]);
      int want = std::abs(t) <= st.tol_zero ? 0 : (t > 0 ? 1 : -1);
      if (want != st.labels[i]) ++mismatch;
    }
    auto& lab = c.exact("labels", anchor::kThmB, n, mismatch);
    lab.notes.emplace_back("plus", std::to_string(st.plus));
    lab.notes.emplace_back("zero", std::to_string(st.zero));
    lab.notes.emplace_back("minus", std::to_string(st.minus));
    lab.notes.emplace_back("tol_zero", format_number(st.tol_zero));
    // Degeneracy is judged on the samples alone; the roots sit in the band by design.
    const bool degenerate = stratify(*s, h, pts).degenerate;
    lab.notes.emplace_back("degenerate", degenerate ? "true" : "false");

    auto f = test_function(model.chart, 0.2);
    auto li = label_scale_invariance(*s, h, f, all);
    c.exact("label_scale_invariance", anchor::kThmB, n, li.flips);
    c.residual("density_weight", anchor::kThmB, n, li.ratio_residual, 1e-10);

    const char* names[3] = {"i", "j", "k"};
    for (int t = 0; t < 3; ++t) {
      auto xi = projected_linear_field(model.ambient.ijk[t], model.chart, names[t]);
      c.at_least(std::string("nowhere_vanishing_") + names[t], anchor::kThmB, n,
                 normalized_field_norm(xi, all), 0.1);
    }
    return c.take();
  }});

  for (int stratum : {1, -1}) {
    if ((stratum == 1 && p < 1) || (stratum == -1 && q < 1)) continue;
    const std::string tag = stratum == 1 ? "g_plus" : "g_minus";
    const std::pair<int, int> want =
        stratum == 1 ? std::pair{4 * p - 1, 4 * q} : std::pair{4 * q - 1, 4 * p};
    auto chart = make_round_sphere(m, p, q, stratum).chart;
    auto spts = chart.sample_points(std::max(4, opt.points / 4), opt.seed + 608 + stratum);
    tasks.push_back({"stratify", anchor::kThmB, [m, p, q, stratum, tag, want, spts, &opt] {
      Checks c("stratify", opt);
      const int n = static_cast<int>(spts.size());
      auto r = einstein_metric_on_stratum(m, p, q, stratum, spts);
      c.residual(tag + ".einstein", anchor::kEinsteinConstant, n, r.ricci, 1e-6)
          .notes.emplace_back("constant", std::to_string(4 * m + 2));
      c.signature(tag + ".signature", anchor::kThmB, n, r.signature, want, r.signature_constant);
      c.residual(tag + ".projectively_related", anchor::kThmB, n, r.projective, 1e-8);
      c.residual(tag + ".upsilon_closed", anchor::kThmB, n, r.upsilon_closed, 1e-8);
      c.residual(tag + ".spray", anchor::kThmB, n, r.spray, 1e-8);
      c.residual(tag + ".weyl", anchor::kProjectiveTensors, n, r.weyl, 1e-8);
      c.residual(tag + ".three_sasaki", anchor::k3Sasaki, n, r.triple.max(), 1e-7);
      c.at_least(tag + ".band_margin", anchor::kThmB, n, r.band_margin, 1e-12);
      return c.take();
    }});
  }
}

// ---------- m0 ----------

void suite_m0(const ModelGeometry& model, const SuiteOptions& opt, std::vector<Task>& tasks) {
  const int m = model.m, p = model.p, q = model.q;
  tasks.push_back({"m0", anchor::kThmB, [m, p, q, &opt] {
    Checks c("m0", opt);
    auto r = m0_checks(m, p, q, std::max(8, opt.points), opt.seed + 707);
    const int n = r.n_points;
    c.residual("roots", anchor::kThmB, n, r.search.max_abs_tau, 1e-10);
    c.signature("conformal_signature", anchor::kThmB, n, r.conformal_signature,
                {4 * p - 1, 4 * q - 1}, r.conformal_signature_constant);
    c.residual("x_orthogonality", anchor::kThmB, n, r.x_orthogonality, 1e-8);
    c.residual("null_orthogonal", anchor::kThmB, n, r.null_orthogonal, 1e-8);
    c.residual("tangency", anchor::kThmB, n, r.tangency, 1e-8);
    c.exact("h0_dimension", anchor::kWqc, n, std::abs(r.h0_dimension - 4 * (m - 1)));
    c.exact("h0_corank", anchor::kWqc, n, std::abs(r.h0_corank - 3));
    if (r.h0_dimension > 0) {
      c.residual("h0_invariance", anchor::kWqc, n, r.h0_invariance, 1e-8);
      c.residual("levi_crosscheck", anchor::kWqc, n, r.levi_crosscheck, 1e-7);
      c.at_least("levi_nondegenerate", anchor::kWqc, n, r.levi_rank_min, 1e-6);
      c.residual("heisenberg_fit", anchor::kHeisenberg, n, r.heisenberg_fit, 1e-5);
      c.signature("heisenberg_signature", anchor::kHeisenberg, n, r.heisenberg_signature,
                  {p - 1, q - 1});
    }
    return c.take();
  }});

  tasks.push_back({"m0", anchor::kHeisenberg, [p, q, &opt] {
    Checks c("m0", opt);
    std::mt19937_64 rng(opt.seed + 708);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    auto elem = [&] {
      HeisenbergElement e;
      for (int b = 0; b < p + q; ++b) e.x.push_back({U(rng), U(rng), U(rng), U(rng)});
      e.a = {0.0, U(rng), U(rng), U(rng)};
      return e;
    };
    double jac = 0, nil = 0;
    const int n = std::max(4, opt.points);
    for (int i = 0; i < n; ++i) {
      auto u = elem(), v = elem(), w = elem();
      jac = std::max(jac, heisenberg_jacobi_residual(p, q, u, v, w));
      nil = std::max(nil, heisenberg_nilpotency_residual(p, q, u, v, w));
    }
    c.residual("heisenberg_jacobi", anchor::kHeisenberg, n, jac, 1e-12);
    c.residual("heisenberg_two_step", anchor::kHeisenberg, n, nil, 1e-12);
    return c.take();
  }});
}

// ---------- descent ----------

void suite_descent(const ModelGeometry& model, const SuiteOptions& opt,
                   std::vector<Task>& tasks) {
  auto s = std::make_shared<Scale>(model.connection);
  auto upts = model.hopf->quotient_chart.sample_points(opt.points, opt.seed + 808);
  const auto ijk = model.triple->xi;
  const int p = model.p, q = model.q, m = model.m;

  tasks.push_back({"descent", anchor::kDescent, [model, s, ijk, upts, &opt] {
    Checks c("descent", opt);
    auto r = descend_quaternionic(model, *s, ijk, upts, opt.seed + 809);
    const int n = r.n_points;
    c.residual("quaternion", anchor::kDescent, n, r.quaternion, 1e-7);
    c.residual("lie_relations", anchor::kDescent, n, r.lie_relations, 1e-7);
    auto& fc = c.residual("fiber_consistency", anchor::kDescent, n, r.fiber_consistency, 1e-7);
    fc.notes.emplace_back("fiber_pairs", std::to_string(r.fiber_pairs));
    c.residual("frame_orthogonality", anchor::kDescent, n, r.frame_orthogonality, 1e-7);
    c.exact("frame_orientation", anchor::kDescent, n, r.frame_det_min > 0 ? 0.0 : 1.0);
    c.residual("torsion", anchor::kDecompInScale, n, r.torsion, 1e-7);
    c.residual("q_preserving", anchor::kDecompInScale, n, r.q_preserving, 1e-7);
    c.residual("standard_structure", anchor::kDescent, n, r.standard_structure, 1e-7);
    c.residual("scale_independence", anchor::kQuaterProjChange, n, r.scale_independence, 1e-7);
    c.residual("change_formula", anchor::kQuaterProjChange, n, r.change_formula, 1e-7);
    return c.take();
  }});

  auto tpts = model.chart.sample_points(std::max(2, opt.points / 5), opt.seed + 810);
  tasks.push_back({"descent", anchor::kTractorDescent, [model, s, ijk, tpts, &opt] {
    Checks c("descent", opt);
    auto r = check_tractor_descent(model, *s, ijk, tpts, opt.seed + 811);
    const int n = r.n_points;
    c.residual("tractor_curvature_vertical", anchor::kTractorDescent, n, r.curvature, 1e-8);
    c.residual("tractor_path_independence", anchor::kTractorDescent, n, r.path_independence,
               1e-7)
        .notes.emplace_back("fiber_pairs", std::to_string(r.fiber_pairs));
    c.residual("tractor_fiber_consistency", anchor::kTractorDescent, n, r.test_tractor, 1e-7);
    return c.take();
  }});

  const std::pair<int, int> want =
      model.stratum == 1 ? std::pair{4 * (p - 1), 4 * q} : std::pair{4 * (q - 1), 4 * p};
  tasks.push_back({"descent", anchor::kThmD, [model, upts, want, m, &opt] {
    Checks c("descent", opt);
    auto r = qk_quotient_check(model, upts, opt.seed + 812);
    const int n = r.n_points;
    c.residual("quotient_einstein", anchor::kThmD, n, r.ricci, m == 1 ? 1e-6 : 1e-5)
        .notes.emplace_back("constant", std::to_string(4 * m + 8));
    c.residual("quotient_hermitian", anchor::kHermitian, n, r.hermitian, 1e-7);
    c.residual("quotient_q_parallel", anchor::kThmD, n, r.q_parallel, 1e-7);
    c.residual("descended_is_levi_civita", anchor::kThmD, n, r.descended_vs_levi_civita, 1e-7);
    c.residual("quotient_metric_fiber_consistency", anchor::kThmD, n, r.fiber_consistency, 1e-7)
        .notes.emplace_back("fiber_pairs", std::to_string(r.fiber_pairs));
    c.signature("quotient_signature", anchor::kThmD, n, r.signature, want, r.signature_constant);
    return c.take();
  }});
}

// ---------- holonomy ----------

struct ReducedData {
  std::shared_ptr<Scale> scale;
  EndomorphismField h, I, J, K;
};

ReducedData reduced_data(const ModelGeometry& model) {
  if (model.triple) {
    auto hk = build_tractor_hk(*model.triple);
    return {std::make_shared<Scale>(hk.scale), hk.h, hk.I, hk.J, hk.K};
  }
  auto s = std::make_shared<Scale>(model.connection);
  return {s, flat_tractor_form(*s, model.ambient.h, "h"),
          flat_tractor_endomorphism(*s, model.ambient.ijk[0], "I"),
          flat_tractor_endomorphism(*s, model.ambient.ijk[1], "J"),
          flat_tractor_endomorphism(*s, model.ambient.ijk[2], "K")};
}

void suite_holonomy(const ModelGeometry& model, const SuiteOptions& opt,
                    std::vector<Task>& tasks) {
  const int loops = std::max(4, opt.points / 3);
  tasks.push_back({"holonomy", anchor::kGroupIntersection, [model, loops, &opt] {
    Checks c("holonomy", opt);
    auto rd = reduced_data(model);
    HolonomyOptions ho;
    ho.loops = loops;
    ho.seed = opt.seed + 909;
    auto r = holonomy_sample(*rd.scale, rd.h, rd.I, rd.J, rd.K, ho);
    auto& mem = c.residual("membership_per_area", anchor::kGroupIntersection, r.loops,
                           r.membership_residual, 1e-6);
    mem.notes.emplace_back("algebra_dimension", std::to_string(r.algebra_dimension));
    mem.notes.emplace_back("resampled", std::to_string(r.resampled));
    c.residual("membership_extrapolated", anchor::kGroupIntersection, r.loops,
               r.extrapolated_residual, 1e-6);
    return c.take();
  }});
  tasks.push_back({"holonomy", anchor::kGroupIntersection, [model, loops, &opt] {
    Checks c("holonomy", opt);
    auto rd = reduced_data(model);
    Scale perturbed(levi_civita(holonomy_control_metric(model)));
    HolonomyOptions ho;
    ho.loops = std::max(2, loops / 2);
    ho.seed = opt.seed + 910;
    ho.check_preconditions = false;
    auto r = holonomy_sample(perturbed, rd.h, rd.I, rd.J, rd.K, ho);
    c.at_least("negative_control", anchor::kGroupIntersection, r.loops, r.membership_residual,
               1e-3);
    return c.take();
  }});
}

using SuiteFn = void (*)(const ModelGeometry&, const SuiteOptions&, std::vector<Task>&);

struct SuiteEntry {
  const char* name;
  SuiteFn fn;
  bool (*applies)(const ModelGeometry&);
};

bool has_triple(const ModelGeometry& m) { return m.triple.has_value() && !m.cone; }

const std::vector<SuiteEntry>& registry() {
  static const std::vector<SuiteEntry> r{
      {"sasaki", suite_sasaki, has_triple},
      {"cone", suite_cone,
       [](const ModelGeometry& m) { return m.cone.has_value() || has_triple(m); }},
      {"tractor_hk", suite_tractor_hk, has_triple},
      {"projective", suite_projective, [](const ModelGeometry&) { return true; }},
      {"adapted", suite_adapted, has_triple},
      {"stratify", suite_stratify,
       [](const ModelGeometry& m) { return m.name == "flat_projective"; }},
      {"m0", suite_m0,
       [](const ModelGeometry& m) { return m.name == "flat_projective" && m.p >= 1 && m.q >= 1; }},
      {"descent", suite_descent,
       [](const ModelGeometry& m) { return has_triple(m) && m.hopf.has_value(); }},
      {"holonomy", suite_holonomy,
       [](const ModelGeometry& m) { return has_triple(m) || m.name == "flat_projective"; }},
  };
  return r;
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(',', start);
    if (end == std::string::npos) end = s.size();
    if (end > start) out.push_back(s.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

}  // namespace

const std::vector<SuiteInfo>& suite_list() {
  static const std::vector<SuiteInfo> list{
      {"sasaki", "Sasaki and 3-Sasaki axioms, cyclic identities, Einstein constant"},
      {"cone", "hyperkaehler metric cone: complex structures, parallelism, flatness"},
      {"tractor_hk", "tractor h, I, J, K: quaternion relations, parallelism, signature, BGG"},
      {"projective", "projective tensors, scale change, tractor curvature and volume"},
      {"adapted", "adapted scale identities, affine symmetries, integrability of D"},
      {"stratify", "curved orbit labels, M0 roots, Einstein metrics on the open strata"},
      {"m0", "M0 conformal signature, H0, Levi form against the Heisenberg algebra"},
      {"descent", "quaternionic and tractor descent, quotient Einstein metric"},
      {"holonomy", "sampled loop holonomy in sp(p, q), with a negative control"},
      {"standard", "sasaki + tractor_hk on sphere models, cone on cones, projective on flat"},
      {"all", "every suite that applies to the model"}};
  return list;
}

std::vector<std::string> applicable_suites(const ModelGeometry& model) {
  std::vector<std::string> out;
  for (const auto& e : registry())
    if (e.applies(model)) out.push_back(e.name);
  return out;
}

std::vector<std::string> expand_suite(const ModelGeometry& model, const std::string& suite) {
  std::vector<std::string> out;
  auto valid = [] {
    std::string names;
    for (const auto& s : suite_list()) names += (names.empty() ? "" : ", ") + s.name;
    return names;
  };
  auto parts = split_commas(suite);
  if (parts.empty()) throw SuiteError("empty suite name; valid suites: " + valid());
  for (const auto& name : parts) {
    if (name == "all") {
      for (const auto& s : applicable_suites(model)) out.push_back(s);
      continue;
    }
    if (name == "standard") {
      if (model.cone) out.push_back("cone");
      else if (model.triple) {
        out.push_back("sasaki");
        out.push_back("tractor_hk");
      } else out.push_back("projective");
      continue;
    }
    auto it = std::find_if(registry().begin(), registry().end(),
                           [&](const SuiteEntry& e) { return name == e.name; });
    if (it == registry().end())
      throw SuiteError("unknown suite '" + name + "'; valid suites: " + valid());
    if (!it->applies(model)) {
      std::string ok;
      for (const auto& s : applicable_suites(model)) ok += (ok.empty() ? "" : ", ") + s;
      throw SuiteError("suite '" + name + "' does not apply to model '" + model.name +
                       "'; applicable suites: " + ok);
    }
    out.push_back(name);
  }
  std::vector<std::string> unique;
  for (const auto& s : out)
    if (std::find(unique.begin(), unique.end(), s) == unique.end()) unique.push_back(s);
  return unique;
}

VerificationReport run_suite(const ModelGeometry& model, const std::string& suite,
                             const SuiteOptions& opt) {
  if (opt.points < 1) throw SuiteError("--points must be positive");
  auto names = expand_suite(model, suite);
  auto t0 = std::chrono::steady_clock::now();

  std::vector<Task> tasks;
  for (const auto& name : names)
    for (const auto& e : registry())
      if (name == e.name) e.fn(model, opt, tasks);

  VerificationReport rep;
  rep.artifact_version = artifact_version();
  rep.model = {model.name, model.m, model.p, model.q, model.chart.name(), opt.seed};
  rep.suite = suite;
  rep.checks = merge(execute(tasks, opt.jobs));
  if (opt.timing)
    rep.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

TensorField holonomy_control_metric(const ModelGeometry& model, double strength) {
  const Chart chart = model.chart;
  const int d = chart.dim();
  std::optional<TensorField> base = model.metric;
  return TensorField(chart, TensorShape::valence(d, 0, 2), 0.0, Jet::kMaxOrder,
                     [base, d, strength](std::span<const Jet> x) {
                       Jet phi(0.0);
                       for (int a = 0; a < d; ++a) phi += strength * std::sin(1.0 + a) * x[a];
                       Jet w = exp(2.0 * phi);
                       std::vector<Jet> g;
                       if (base) g = base->rule()(x);
                       else {
                         g.assign(d * d, Jet(0.0));
                         for (int a = 0; a < d; ++a) g[a * d + a] = Jet(1.0);
                       }
                       for (auto& c : g) c = w * c;
                       return g;
                     },
                     "control metric");
}

std::vector<std::vector<Point>> split_points(const std::vector<Point>& points, int parts) {
  parts = std::clamp(parts, 1, std::max<int>(1, static_cast<int>(points.size())));
  std::vector<std::vector<Point>> out(parts);
  const std::size_t n = points.size();
  for (int i = 0; i < parts; ++i) {
    std::size_t lo = n * i / parts, hi = n * (i + 1) / parts;
    out[i].assign(points.begin() + lo, points.begin() + hi);
  }
  return out;
}

std::string artifact_version() { return std::string("tractorlab ") + TRACTORLAB_VERSION; }

}  // namespace tractorlab
