#include "tractorlab/descent.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "tractorlab/errors.hpp"
#include "tractorlab/report.hpp"

namespace tractorlab {

namespace {

struct Horizontal {
  JetMatrix dpi;  // 4m x d
  JetMatrix L;    // d x 4m
};

// Lifts in the common kernel of form(v_t, .), t = 0..2, all jets of order k.
Horizontal horizontal(const ModelGeometry& model, const Point& x, int k,
                      const TensorJets& form, const std::array<TensorJets, 3>& v) {
  const HopfProjection& hp = *model.hopf;
  const int d = model.chart.dim();
  const int n4 = 4 * model.m;
  auto X = seed(x, k + 1);
  auto u = hp.project(std::span<const Jet>(X));
  Horizontal H;
  H.dpi = JetMatrix(n4, d);
  JetMatrix M(d, d);
  for (int g = 0; g < n4; ++g)
    for (int a = 0; a < d; ++a) {
      H.dpi(g, a) = u[g].derivative(a);
      M(g, a) = H.dpi(g, a);
    }
  for (int t = 0; t < 3; ++t)
    for (int a = 0; a < d; ++a) {
      Jet acc(0.0);
      for (int c = 0; c < d; ++c) acc.add_product(form.c[a * d + c], v[t].c[c]);
      M(n4 + t, a) = acc.truncated(k);
    }
  JetMatrix Minv = inverse(M);
  H.L = JetMatrix(d, n4);
  for (int a = 0; a < d; ++a)
    for (int al = 0; al < n4; ++al) H.L(a, al) = Minv(a, al);
  return H;
}

std::array<TensorJets, 3> field_jets(const std::array<TensorField, 3>& ijk, const Point& x,
                                     int order) {
  return {ijk[0].evaluate(x, order), ijk[1].evaluate(x, order), ijk[2].evaluate(x, order)};
}

std::array<Mat, 3> values(const std::array<JetMatrix, 3>& q) {
  return {q[0].values(), q[1].values(), q[2].values()};
}

// Residual of a after removing its least-squares component in span(basis).
double off_span(const Mat& a, const std::array<Mat, 3>& basis) {
  const int n = static_cast<int>(a.size());
  Mat B(n, 3);
  for (int t = 0; t < 3; ++t) B.col(t) = Eigen::Map<const Vec>(basis[t].data(), n);
  Vec target = Eigen::Map<const Vec>(a.data(), n);
  Vec c = B.colPivHouseholderQr().solve(target);
  return (B * c - target).cwiseAbs().maxCoeff();
}

Quaternion exp_imag(const Vec& w) {
  double th = w.norm();
  double s = th > 0 ? std::sin(th) / th : 1.0;
  return {std::cos(th), s * w(0), s * w(1), s * w(2)};
}

Vec log_unit(const Quaternion& q) {
  Vec v(3);
  v << q.x, q.y, q.z;
  double s = v.norm();
  if (s == 0.0) return Vec::Zero(3);
  return (std::atan2(s, q.w) / s) * v;
}

Quaternion imag(const Vec& w) { return {0.0, w(0), w(1), w(2)}; }

Quaternion random_rotation(std::mt19937_64& rng, double lo, double hi) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> angle(lo, hi);
  Vec n(3);
  n << normal(rng), normal(rng), normal(rng);
  return exp_imag(angle(rng) * n.normalized());
}

std::vector<double> right_act(const Point& x, const Quaternion& q) {
  const int d = static_cast<int>(x.size());
  std::vector<double> Y(d + 1);
  Y[0] = 1.0;
  for (int a = 0; a < d; ++a) Y[a + 1] = x[a];
  std::vector<double> out(d + 1);
  for (int b = 0; b < (d + 1) / 4; ++b) {
    Quaternion qb{Y[4 * b], Y[4 * b + 1], Y[4 * b + 2], Y[4 * b + 3]};
    Quaternion r = qb * q;
    for (int c = 0; c < 4; ++c) out[4 * b + c] = r[c];
  }
  return out;
}

// Chart curve of the fibre motion s -> Y q(s), with dq/ds supplied.
Curve fibre_curve(const Point& x, std::function<std::pair<Quaternion, Quaternion>(double)> qdq) {
  const int d = static_cast<int>(x.size());
  Curve c;
  c.position = [x, qdq, d](double s) {
    auto Y = right_act(x, qdq(s).first);
    Point p(d);
    for (int a = 0; a < d; ++a) p[a] = Y[a + 1] / Y[0];
    return p;
  };
  c.velocity = [x, qdq, d](double s) {
    auto [q, dq] = qdq(s);
    auto Y = right_act(x, q);
    auto dY = right_act(x, dq);
    Point v(d);
    for (int a = 0; a < d; ++a) v[a] = (dY[a + 1] - Y[a + 1] / Y[0] * dY[0]) / Y[0];
    return v;
  };
  return c;
}

// Metric-horizontal quotient metric as unrestricted jets at x.
std::vector<Jet> quotient_metric_jets(const ModelGeometry& model, const Point& x, int k) {
  const int n4 = 4 * model.m;
  const int d = model.chart.dim();
  auto g = model.metric->evaluate(x, k);
  auto v = field_jets(model.triple->xi, x, k);
  auto H = horizontal(model, x, k, g, v);
  std::vector<Jet> out(n4 * n4, Jet(0.0));
  for (int a = 0; a < d; ++a)
    for (int c = 0; c < d; ++c) {
      const Jet& gac = g.c[a * d + c];
      for (int al = 0; al < n4; ++al) {
        Jet t = H.L(a, al) * gac;
        for (int be = al; be < n4; ++be) out[al * n4 + be].add_product(t, H.L(c, be));
      }
    }
  for (int al = 0; al < n4; ++al)
    for (int be = 0; be < al; ++be) out[al * n4 + be] = out[be * n4 + al];
  return out;
}

std::string describe(const Mat& m) {
  std::ostringstream os;
  os << m;
  return os.str();
}

}  // namespace

DescendedStructure descended_structure(const ModelGeometry& model, const Scale& s,
                                       const std::array<TensorField, 3>& ijk, const Point& x,
                                       int order) {
  if (!model.hopf) throw PreconditionError("descent needs a model with a leaf projection");
  if (order < 0 || order > 1) throw CapabilityError("descended_structure supports order <= 1");
  const int d = s.dim();
  const int n4 = 4 * model.m;
  const int k = order;
  auto gam = s.connection().gamma_at(x, k + 1);
  auto cur = curvature_from_gamma(gam);
  auto gk = truncated(gam, k);
  auto v = field_jets(ijk, x, k + 1);
  std::array<TensorJets, 3> vk{truncated(v[0], k), truncated(v[1], k), truncated(v[2], k)};
  auto H = horizontal(model, x, k, cur.P, vk);

  DescendedStructure out;
  for (int t = 0; t < 3; ++t) {
    auto N = covariant_derivative(v[t], gk);
    JetMatrix Nm(d, d);  // Nm(c, a) = nabla_a v^c
    for (int a = 0; a < d; ++a)
      for (int c = 0; c < d; ++c) Nm(c, a) = N.c[a * d + c];
    out.Q[t] = H.dpi * (Nm * H.L);
  }
  out.lifts = H.L.values();
  if (k >= 1) {
    JetMatrix L = H.L.truncated(k - 1);
    JetMatrix dpi = H.dpi.truncated(k - 1);
    auto g0 = truncated(gam, k - 1);
    std::vector<JetMatrix> dL;
    for (int a = 0; a < d; ++a) dL.push_back(H.L.derivative(a));
    out.gamma.assign(n4 * n4 * n4, Jet(0.0));
    for (int al = 0; al < n4; ++al)
      for (int be = 0; be < n4; ++be) {
        std::vector<Jet> w(d, Jet(0.0));
        for (int c = 0; c < d; ++c)
          for (int a = 0; a < d; ++a) {
            Jet inner = dL[a](c, be);
            for (int b = 0; b < d; ++b) inner.add_product(g0.c[(c * d + a) * d + b], L(b, be));
            w[c].add_product(L(a, al), inner);
          }
        for (int g = 0; g < n4; ++g) {
          Jet acc(0.0);
          for (int c = 0; c < d; ++c) acc.add_product(dpi(g, c), w[c]);
          out.gamma[(g * n4 + al) * n4 + be] = acc;
        }
      }
  }
  return out;
}

std::vector<int> section_variables(const ModelGeometry& model) {
  std::vector<int> vars;
  for (int a = 3; a < model.chart.dim(); ++a) vars.push_back(a);
  return vars;
}

std::optional<Point> fibre_move(const ModelGeometry& model, const Point& x, const Quaternion& r) {
  auto Y = right_act(x, r);
  if (std::abs(Y[0]) < 1e-8) return std::nullopt;
  Point out(x.size());
  for (std::size_t a = 0; a < x.size(); ++a) out[a] = Y[a + 1] / Y[0];
  if (!model.chart.contains(out)) return std::nullopt;
  return out;
}

std::pair<Mat, double> frame_fit(const std::array<Mat, 3>& from, const std::array<Mat, 3>& to) {
  const int n = static_cast<int>(from[0].size());
  Mat B(n, 3);
  for (int t = 0; t < 3; ++t) B.col(t) = Eigen::Map<const Vec>(from[t].data(), n);
  auto qr = B.colPivHouseholderQr();
  Mat R(3, 3);
  double res = 0.0;
  for (int s = 0; s < 3; ++s) {
    Vec target = Eigen::Map<const Vec>(to[s].data(), n);
    Vec c = qr.solve(target);
    R.row(s) = c.transpose();
    res = std::max(res, (B * c - target).cwiseAbs().maxCoeff());
  }
  return {R, res};
}

DescentReport descend_quaternionic(const ModelGeometry& model, const Scale& s,
                                   const std::array<TensorField, 3>& ijk,
                                   const std::vector<Point>& points, std::uint64_t rng_seed,
                                   double fiber_error_tol) {
  if (!model.hopf) throw PreconditionError("descent needs a model with a leaf projection");
  const HopfProjection& hp = *model.hopf;
  const int d = s.dim();
  const int n4 = 4 * model.m;
  const auto vars = section_variables(model);
  DescentReport rep;
  rep.frame_det_min = INFINITY;
  std::mt19937_64 rng(rng_seed);

  // Second adapted scale: Upsilon = d(F o pi) with F a fixed quadratic on the quotient.
  auto F = [n4](std::span<const Jet> u) {
    Jet f(0.0);
    for (int c = 0; c < n4; ++c) f += 0.1 * std::cos(c + 1.0) * u[c] + 0.05 * square(u[c]);
    return f;
  };
  TensorField upsilon(model.chart, TensorShape::covector(d), 0.0, 2,
                      make_pointwise_rule([&hp, F, d](const Point& x, int order) {
                        auto X = seed(x, order + 1);
                        auto u = hp.project(std::span<const Jet>(X));
                        Jet f = F(u);
                        std::vector<Jet> out;
                        for (int a = 0; a < d; ++a) out.push_back(f.derivative(a));
                        return out;
                      }),
                      "d(F o pi)");
  Scale s2(projective_change(s.connection(), upsilon));
  const auto standard = right_triple(model.m);

  for (const auto& u : points) {
    Point x = hp.section(u);
    auto D1 = descended_structure(model, s, ijk, x, 1);
    auto Qv = values(D1.Q);
    rep.quaternion = std::max({rep.quaternion, quaternionic_defect(Qv[0], Qv[1], Qv[2]),
                               max_abs(Qv[0] * Qv[1] - Qv[2]), max_abs(Qv[1] * Qv[2] - Qv[0]),
                               max_abs(Qv[2] * Qv[0] - Qv[1])});
    rep.standard_structure = std::max(rep.standard_structure, frame_fit(standard, Qv).second);

    std::vector<double> G(n4 * n4 * n4);
    for (std::size_t i = 0; i < G.size(); ++i) G[i] = D1.gamma[i].value();
    auto Gm = [&](int g, int a, int b) { return G[(g * n4 + a) * n4 + b]; };
    for (int g = 0; g < n4; ++g)
      for (int a = 0; a < n4; ++a)
        for (int b = 0; b < n4; ++b)
          rep.torsion = std::max(rep.torsion, std::abs(Gm(g, a, b) - Gm(g, b, a)));

    for (int t = 0; t < 3; ++t)
      for (int ga = 0; ga < n4; ++ga) {
        Mat dQ(n4, n4), Gg(n4, n4);
        for (int al = 0; al < n4; ++al)
          for (int be = 0; be < n4; ++be) {
            dQ(al, be) = D1.Q[t](al, be).restrict_to(vars).d(ga);
            Gg(al, be) = Gm(al, ga, be);
          }
        Mat cov = dQ + Gg * Qv[t] - Qv[t] * Gg;
        rep.q_preserving = std::max(rep.q_preserving, off_span(cov, Qv));
      }

    // Flow invariance: L_X (nabla Y) as (1,1) tensors.
    {
      auto gam = s.connection().gamma_at(x, 1);
      auto v = field_jets(ijk, x, 2);
      std::array<TensorJets, 3> N;
      for (int t = 0; t < 3; ++t) N[t] = covariant_derivative(v[t], gam);
      auto lie = [&](int X, int Tidx, int a, int c) {
        // T^c_a = N[Tidx](a, c)
        double r = 0.0;
        for (int b = 0; b < d; ++b) {
          r += v[X].c[b].value() * N[Tidx].c[a * d + c].d(b);
          r -= N[Tidx].c[a * d + b].value() * v[X].c[c].d(b);
          r += N[Tidx].c[b * d + c].value() * v[X].c[b].d(a);
        }
        return r;
      };
      for (int t = 0; t < 3; ++t)
        for (int a = 0; a < d; ++a)
          for (int c = 0; c < d; ++c) {
            double r1 = lie(t, (t + 1) % 3, a, c) + 2.0 * N[(t + 2) % 3].c[a * d + c].value();
            double r2 = lie(t, t, a, c);
            rep.lie_relations = std::max({rep.lie_relations, std::abs(r1), std::abs(r2)});
          }
    }

    // Fibre consistency.
    for (int attempt = 0; attempt < 6; ++attempt) {
      auto x2 = fibre_move(model, x, random_rotation(rng, 0.1, 0.35));
      if (!x2) continue;
      auto Q2 = values(descended_structure(model, s, ijk, *x2, 0).Q);
      auto [R, res] = frame_fit(Qv, Q2);
      if (res > fiber_error_tol)
        throw DescentError("Q-tilde differs along a fibre (residual " + format_number(res) +
                           "):\n" + describe(Qv[0]) + "\nvs\n" + describe(Q2[0]));
      rep.fiber_consistency = std::max(rep.fiber_consistency, res);
      rep.frame_orthogonality =
          std::max(rep.frame_orthogonality, max_abs(R.transpose() * R - Mat::Identity(3, 3)));
      rep.frame_det_min = std::min(rep.frame_det_min, R.determinant());
      ++rep.fiber_pairs;
      if (rep.fiber_pairs >= 2 * (rep.n_points + 1)) break;
    }

    // Second adapted scale and the quaternionic change formula.
    auto D2 = descended_structure(model, s2, ijk, x, 1);
    for (int t = 0; t < 3; ++t)
      rep.scale_independence =
          std::max(rep.scale_independence, max_abs(D2.Q[t].values() - Qv[t]));
    std::vector<double> ut(n4);
    for (int c = 0; c < n4; ++c) ut[c] = 0.1 * std::cos(c + 1.0) + 0.1 * u[c];
    for (int g = 0; g < n4; ++g)
      for (int a = 0; a < n4; ++a)
        for (int b = 0; b < n4; ++b) {
          double f = (g == b ? ut[a] : 0.0) + (g == a ? ut[b] : 0.0);
          for (int t = 0; t < 3; ++t) {
            double ua = 0.0, ub = 0.0;
            for (int e = 0; e < n4; ++e) {
              ua += ut[e] * Qv[t](e, a);
              ub += ut[e] * Qv[t](e, b);
            }
            f -= ua * Qv[t](g, b) + ub * Qv[t](g, a);
          }
          double diff = D2.gamma[(g * n4 + a) * n4 + b].value() - Gm(g, a, b);
          rep.change_formula = std::max(rep.change_formula, std::abs(diff - f));
        }
    ++rep.n_points;
  }
  return rep;
}

double curvature_degeneracy(const Scale& s, const std::vector<TensorField>& fields,
                            const std::vector<Point>& points) {
  const int d = s.dim();
  double r = 0.0;
  for (const auto& x : points) {
    auto F = tractor_curvature(s, x, 0);
    std::vector<Mat> Fv;
    for (const auto& f : F) Fv.push_back(f.values());
    for (const auto& xi : fields) {
      auto v = xi.values(x);
      for (int b = 0; b < d; ++b) {
        Mat acc = Mat::Zero(d + 1, d + 1);
        for (int a = 0; a < d; ++a) acc += v[a] * Fv[a * d + b];
        r = std::max(r, max_abs(acc));
      }
    }
  }
  return r;
}

TractorDescentReport check_tractor_descent(const ModelGeometry& model, const Scale& s,
                                           const std::array<TensorField, 3>& ijk,
                                           const std::vector<Point>& points,
                                           std::uint64_t rng_seed) {
  TractorDescentReport rep;
  rep.curvature = curvature_degeneracy(s, {ijk[0], ijk[1], ijk[2]}, points);
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> normal;
  const int N = s.rank();
  for (const auto& x : points) {
    ++rep.n_points;
    for (int attempt = 0; attempt < 8; ++attempt) {
    Quaternion r = random_rotation(rng, 0.05, 0.25);
    Quaternion mid = random_rotation(rng, 0.03, 0.15);
    Vec w = log_unit(r);
    Vec w1 = log_unit(mid);
    Vec w2 = log_unit(mid.conj() * r);
    Curve direct = fibre_curve(x, [w](double t) {
      Quaternion q = exp_imag(t * w);
      return std::make_pair(q, q * imag(w));
    });
    Curve broken = fibre_curve(x, [w1, w2](double t) {
      if (t <= 0.5) {
        Quaternion q = exp_imag(2 * t * w1);
        return std::make_pair(q, 2.0 * (q * imag(w1)));
      }
      Quaternion q = exp_imag(w1) * exp_imag((2 * t - 1) * w2);
      return std::make_pair(q, 2.0 * (q * imag(w2)));
    });
    bool inside = true;
    for (int k = 0; k <= 16 && inside; ++k) {
      double t = k / 16.0;
      inside = model.chart.contains(direct.position(t)) && model.chart.contains(broken.position(t));
    }
    if (!inside) continue;
    auto [T1, n1] = transport_converged(s, direct);
    auto [T2, n2] = transport_converged(s, broken);
    double diff = max_abs(T1 - T2);
    if (rep.fiber_pairs == 0 || diff > rep.path_independence) {
      rep.worst_first = T1;
      rep.worst_second = T2;
    }
    rep.path_independence = std::max(rep.path_independence, diff);
    Vec t0(N);
    for (int a = 0; a < N; ++a) t0(a) = normal(rng);
    rep.test_tractor = std::max(rep.test_tractor, (T1 * t0 - T2 * t0).norm() / t0.norm());
    ++rep.fiber_pairs;
    break;
    }
  }
  return rep;
}

TensorField quotient_metric(const ModelGeometry& model) {
  if (!model.hopf || !model.metric || !model.triple)
    throw PreconditionError("quotient metric needs a sphere-type model");
  const int n4 = 4 * model.m;
  auto vars = section_variables(model);
  const HopfProjection hp = *model.hopf;
  return TensorField(hp.quotient_chart, TensorShape::valence(n4, 0, 2), 0.0, 2,
                     make_pointwise_rule([model, vars, hp](const Point& u, int order) {
                       auto jets = quotient_metric_jets(model, hp.section(u), order);
                       for (auto& j : jets) j = j.restrict_to(vars);
                       return jets;
                     }),
                     "g-tilde");
}

QKReport qk_quotient_check(const ModelGeometry& model, const std::vector<Point>& points,
                           std::uint64_t rng_seed, double fiber_error_tol) {
  const HopfProjection& hp = *model.hopf;
  const int n4 = 4 * model.m;
  const auto vars = section_variables(model);
  TensorField gq = quotient_metric(model);
  Connection lc = levi_civita(gq, 4);
  Scale se(model.connection);
  const auto& ijk = model.triple->xi;
  const double einstein = 4.0 * model.m + 8;
  QKReport rep;
  std::mt19937_64 rng(rng_seed);
  bool first = true;
  for (const auto& u : points) {
    Point x = hp.section(u);
    auto gv = gq.values(u);
    Mat g = Eigen::Map<const Mat>(gv.data(), n4, n4);
    auto cur = curvature_at(lc, u, 0);
    for (int i = 0; i < n4 * n4; ++i)
      rep.ricci = std::max(rep.ricci, std::abs(cur.Ric.c[i].value() - einstein * gv[i]));
    auto sig = signature(g);
    if (first) rep.signature = sig;
    else if (sig != rep.signature) rep.signature_constant = false;
    first = false;

    auto D1 = descended_structure(model, se, ijk, x, 1);
    auto Qv = values(D1.Q);
    for (int t = 0; t < 3; ++t) rep.hermitian = std::max(rep.hermitian, max_abs(Qv[t].transpose() * g * Qv[t] - g));
    auto gam = lc.gamma_at(u, 0);
    for (std::size_t i = 0; i < D1.gamma.size(); ++i)
      rep.descended_vs_levi_civita = std::max(
          rep.descended_vs_levi_civita, std::abs(D1.gamma[i].value() - gam.c[i].value()));
    for (int t = 0; t < 3; ++t)
      for (int ga = 0; ga < n4; ++ga) {
        Mat dQ(n4, n4), Gg(n4, n4);
        for (int al = 0; al < n4; ++al)
          for (int be = 0; be < n4; ++be) {
            dQ(al, be) = D1.Q[t](al, be).restrict_to(vars).d(ga);
            Gg(al, be) = gam.c[(al * n4 + ga) * n4 + be].value();
          }
        rep.q_parallel = std::max(rep.q_parallel, off_span(dQ + Gg * Qv[t] - Qv[t] * Gg, Qv));
      }

    for (int attempt = 0; attempt < 4; ++attempt) {
      auto x2 = fibre_move(model, x, random_rotation(rng, 0.1, 0.35));
      if (!x2) continue;
      auto j2 = quotient_metric_jets(model, *x2, 0);
      Mat g2(n4, n4);
      for (int a = 0; a < n4; ++a)
        for (int b = 0; b < n4; ++b) g2(a, b) = j2[a * n4 + b].value();
      double diff = max_abs(g2 - g);
      if (diff > fiber_error_tol)
        throw DescentError("g-tilde differs along a fibre (" + format_number(diff) + "):\n" +
                           describe(g) + "\nvs\n" + describe(g2));
      rep.fiber_consistency = std::max(rep.fiber_consistency, diff);
      ++rep.fiber_pairs;
      break;
    }
    ++rep.n_points;
  }
  return rep;
}

}  // namespace tractorlab
