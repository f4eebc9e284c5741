#include "tractorlab/sasaki.hpp"

#include <algorithm>
#include <cmath>

#include "tractorlab/errors.hpp"
#include "tractorlab/quaternion.hpp"

namespace tractorlab {

namespace {

// Metric, Christoffel symbols and derivatives of a vector field at a point:
// dv[a*d + c] = nabla_a v^c (order 1), ddv[(a*d + b)*d + c] = nabla_a nabla_b v^c.
struct Local {
  int d = 0;
  TensorJets g, gamma;
  std::vector<double> gv;
};

Local local(const TensorField& g, const Point& x) {
  Local L;
  L.d = g.dim();
  L.g = g.evaluate(x, 2);
  auto gi = metric_inverse(truncated(L.g, 1));
  L.gamma = christoffel(L.g, gi);
  L.gv = L.g.values();
  return L;
}

struct FieldData {
  std::vector<double> v, lower;  // v^c, v_c
  TensorJets dv;                 // order 1
  TensorJets ddv;                // order 0
};

FieldData field_data(const Local& L, const TensorField& xi, const Point& x) {
  const int d = L.d;
  FieldData F;
  auto v = xi.evaluate(x, 2);
  F.v = v.values();
  F.lower.assign(d, 0.0);
  for (int b = 0; b < d; ++b)
    for (int c = 0; c < d; ++c) F.lower[b] += L.gv[b * d + c] * F.v[c];
  F.dv = covariant_derivative(v, L.gamma);
  F.ddv = covariant_derivative(F.dv, L.gamma);
  return F;
}

double nabla(const FieldData& F, int d, int a, int c) { return F.dv.c[a * d + c].value(); }

}  // namespace

std::vector<double> lie_bracket(const TensorField& X, const TensorField& Y, const Point& x) {
  const int d = X.dim();
  auto xv = X.evaluate(x, 1), yv = Y.evaluate(x, 1);
  std::vector<double> out(d, 0.0);
  for (int c = 0; c < d; ++c)
    for (int a = 0; a < d; ++a)
      out[c] += xv.c[a].value() * yv.c[c].d(a) - yv.c[a].value() * xv.c[c].d(a);
  return out;
}

double killing_residual(const TensorField& g, const TensorField& xi, const Point& x) {
  auto L = local(g, x);
  auto F = field_data(L, xi, x);
  const int d = L.d;
  double r = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      double s = 0.0;
      for (int c = 0; c < d; ++c)
        s += L.gv[b * d + c] * nabla(F, d, a, c) + L.gv[a * d + c] * nabla(F, d, b, c);
      r = std::max(r, 0.5 * std::abs(s));
    }
  return r;
}

SasakiResiduals check_sasaki(const TensorField& g, const TensorField& k,
                             const std::vector<Point>& points) {
  SasakiResiduals res;
  const int d = g.dim();
  for (const auto& x : points) {
    auto L = local(g, x);
    auto F = field_data(L, k, x);
    res.killing = std::max(res.killing, killing_residual(g, k, x));
    double norm = 0.0;
    for (int c = 0; c < d; ++c) norm += F.lower[c] * F.v[c];
    res.unit_norm = std::max(res.unit_norm, std::abs(norm - 1.0));
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c) {
          double r = F.ddv.c[(a * d + b) * d + c].value() + L.gv[a * d + b] * F.v[c] -
                     (a == c ? F.lower[b] : 0.0);
          res.second_derivative = std::max(res.second_derivative, std::abs(r));
        }
    ++res.n_points;
  }
  return res;
}

double ThreeSasakiResiduals::max() const {
  double m = std::max({orthogonality, commutators, identity_a, identity_b, identity_c, einstein});
  for (const auto& s : sasaki) m = std::max({m, s.killing, s.unit_norm, s.second_derivative});
  return m;
}

ThreeSasakiResiduals check_3sasaki(const SasakiTriple& t, const std::vector<Point>& points) {
  ThreeSasakiResiduals res;
  for (int s = 0; s < 3; ++s) res.sasaki[s] = check_sasaki(t.g, t.xi[s], points);
  const int d = t.g.dim();
  for (const auto& x : points) {
    auto L = local(t.g, x);
    std::array<FieldData, 3> F;
    for (int s = 0; s < 3; ++s) F[s] = field_data(L, t.xi[s], x);
    auto cur = curvature_from_gamma(L.gamma);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        res.einstein = std::max(
            res.einstein, std::abs(cur.Ric.c[a * d + b].value() - (d - 1) * L.gv[a * d + b]));

    for (int s = 0; s < 3; ++s) {
      const FieldData& X = F[s];
      const FieldData& Y = F[(s + 1) % 3];
      const FieldData& Z = F[(s + 2) % 3];
      double o = 0.0;
      for (int c = 0; c < d; ++c) o += X.lower[c] * Y.v[c];
      res.orthogonality = std::max(res.orthogonality, std::abs(o));

      auto br = lie_bracket(t.xi[s], t.xi[(s + 1) % 3], x);
      for (int c = 0; c < d; ++c)
        res.commutators = std::max(res.commutators, std::abs(br[c] + 2.0 * Z.v[c]));

      for (int c = 0; c < d; ++c) {
        double xy = 0.0, yx = 0.0;
        for (int a = 0; a < d; ++a) {
          xy += X.v[a] * nabla(Y, d, a, c);
          yx += Y.v[a] * nabla(X, d, a, c);
        }
        res.identity_a = std::max({res.identity_a, std::abs(xy + Z.v[c]), std::abs(yx - Z.v[c])});
      }

      for (int a = 0; a < d; ++a)
        for (int c = 0; c < d; ++c) {
          double xx = 0.0, xy = 0.0, yx = 0.0;
          for (int b = 0; b < d; ++b) {
            xx += nabla(X, d, b, c) * nabla(X, d, a, b);
            xy += nabla(X, d, b, c) * nabla(Y, d, a, b);
            yx += nabla(Y, d, b, c) * nabla(X, d, a, b);
          }
          double rb = xx - X.lower[a] * X.v[c] + (a == c ? 1.0 : 0.0);
          res.identity_b = std::max(res.identity_b, std::abs(rb));
          double nz = nabla(Z, d, a, c);
          double c1 = xy - Y.lower[a] * X.v[c] - nz;
          double c2 = -yx + X.lower[a] * Y.v[c] - nz;
          res.identity_c = std::max({res.identity_c, std::abs(c1), std::abs(c2)});
        }
    }
    ++res.n_points;
  }
  return res;
}

// ---------- cone ----------

ConeGeometry cone_build(const SasakiTriple& t, double t_lo, double t_hi) {
  if (!(t_lo > 0.0) || !(t_hi > t_lo))
    throw DomainError("cone t-interval must lie in (0, inf) and be nonempty");
  const int d = t.g.dim();
  const int D = d + 1;
  std::vector<double> lo = t.g.chart().lower(), hi = t.g.chart().upper();
  lo.push_back(t_lo);
  hi.push_back(t_hi);
  ConeGeometry c;
  c.chart = Chart("cone(" + t.g.chart().name() + ")", lo, hi);
  c.base = t;

  FieldRule grule = t.g.rule();
  c.metric = TensorField(
      c.chart, TensorShape::valence(D, 0, 2), 0.0, t.g.max_order(),
      [grule, d, D](std::span<const Jet> y) {
        auto g = grule(y.subspan(0, d));
        Jet t2 = square(y[d]);
        std::vector<Jet> out(D * D, Jet(0.0));
        for (int a = 0; a < d; ++a)
          for (int b = 0; b < d; ++b) out[a * D + b] = t2 * g[a * d + b];
        out[d * D + d] = Jet(1.0);
        return out;
      },
      "cone metric");

  const int max_order = std::min(t.g.max_order() - 1, t.xi[0].max_order() - 1);
  std::vector<int> positions(d);
  for (int a = 0; a < d; ++a) positions[a] = a;
  for (int s = 0; s < 3; ++s) {
    TensorField g = t.g, k = t.xi[s];
    c.J[s] = TensorField(
        c.chart, TensorShape::valence(D, 1, 1), 0.0, max_order,
        make_pointwise_rule([g, k, d, D, positions](const Point& y, int order) {
          Point x(y.begin(), y.begin() + d);
          auto gj = g.evaluate(x, order + 1);
          auto gamma = christoffel(gj, metric_inverse(truncated(gj, order)));
          auto kj = k.evaluate(x, order + 1);
          auto dk = covariant_derivative(kj, gamma);  // [b][a] = nabla_b k^a
          Jet tj = Jet::variable(D, order, d, y[d]);
          auto up = [&](const Jet& j) { return j.truncated(order).embed(D, positions); };
          std::vector<Jet> out(D * D, Jet(D, order, 0.0));
          for (int a = 0; a < d; ++a) {
            for (int b = 0; b < d; ++b) out[a * D + b] = up(dk.c[b * d + a]);
            out[a * D + d] = up(kj.c[a]) / tj;
          }
          for (int b = 0; b < d; ++b) {
            Jet kb(0.0);
            for (int e = 0; e < d; ++e) kb.add_product(gj.c[b * d + e], kj.c[e]);
            out[d * D + b] = -(tj * up(kb));
          }
          return out;
        }),
        std::string("cone ") + "IJK"[s]);
  }
  return c;
}

ConeResiduals check_cone(const ConeGeometry& c, const std::vector<Point>& points) {
  ConeResiduals res;
  const int D = c.chart.dim();
  const int d = D - 1;
  bool first = true;
  for (const auto& y : points) {
    auto G = c.metric.evaluate(y, 2);
    auto gamma = christoffel(G, metric_inverse(truncated(G, 1)));
    auto cur = curvature_from_gamma(gamma);
    Mat Gm(D, D);
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b) Gm(a, b) = G.c[a * D + b].value();
    std::array<Mat, 3> M;
    for (int s = 0; s < 3; ++s) {
      auto J = c.J[s].evaluate(y, 1);
      M[s].resize(D, D);
      for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b) M[s](a, b) = J.c[a * D + b].value();
      res.parallel = std::max(res.parallel, max_abs(covariant_derivative(J, truncated(gamma, 0))));
      res.hermitian = std::max(res.hermitian, max_abs(Mat(M[s].transpose() * Gm * M[s] - Gm)));
    }
    res.almost_complex = std::max(res.almost_complex, quaternionic_defect(M[0], M[1], M[2]));
    res.ricci = std::max(res.ricci, max_abs(cur.Ric));
    res.riemann = std::max(res.riemann, max_abs(cur.R));
    auto sig = signature(Gm);
    if (first) res.signature = sig;
    first = false;
    ++res.n_points;

    // round trip at t = 1 above the same base point
    Point y1 = y;
    y1[d] = 1.0;
    if (c.chart.contains(y1)) {
      Point x(y.begin(), y.begin() + d);
      for (int s = 0; s < 3; ++s) {
        auto J = c.J[s].values(y1);
        auto k = c.base.xi[s].values(x);
        for (int a = 0; a < d; ++a)
          res.round_trip = std::max(res.round_trip, std::abs(k[a] - J[a * D + d]));
      }
    }
  }
  return res;
}

// ---------- tractor hyperkaehler ----------

TractorHK build_tractor_hk(const SasakiTriple& t, double einstein_tol) {
  const int d = t.g.dim();
  Scale scale(levi_civita(t.g));
  for (const auto& x : t.g.chart().sample_points(8, 0)) {
    auto cur = scale.curvature(x, 0);
    auto g = t.g.values(x);
    double r = 0.0;
    for (int a = 0; a < d * d; ++a) r = std::max(r, std::abs(cur.Ric.c[a].value() - (d - 1) * g[a]));
    if (r > einstein_tol)
      throw PreconditionError("metric is not Einstein with constant dim - 1 (residual " +
                              std::to_string(r) + ")");
  }
  EndomorphismField h;
  h.scale = scale.name();
  h.name = "h";
  h.max_order = t.g.max_order();
  TensorField g = t.g;
  h.matrix = [g, d](const Point& x, int order) {
    auto gj = g.evaluate(x, order);
    JetMatrix m(d + 1, d + 1);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) m(a, b) = gj.c[a * d + b];
    m(d, d) = Jet(d, order, 1.0);
    return m;
  };
  TractorHK hk{scale, h, splitting_field(scale, t.xi[0]), splitting_field(scale, t.xi[1]),
               splitting_field(scale, t.xi[2]), t};
  return hk;
}

std::vector<Vec> quaternionic_basis(const Mat& I, const Mat& J, const Mat& K) {
  const int N = static_cast<int>(I.rows());
  std::vector<Vec> basis;
  Mat span(N, 0);
  for (int e = 0; e < N && span.cols() < N; ++e) {
    Vec v = Vec::Unit(N, e);
    Mat trial(N, span.cols() + 4);
    trial << span, v, I * v, J * v, K * v;
    Eigen::JacobiSVD<Mat> svd(trial);
    const auto& sv = svd.singularValues();
    if (sv[sv.size() - 1] > 1e-6 * sv[0]) {
      span = trial;
      basis.push_back(v);
    }
  }
  if (span.cols() != N) throw RankError("no quaternionic basis for the given triple");
  return basis;
}

TractorHKResiduals check_tractor_hk(const TractorHK& hk, const std::vector<Point>& points) {
  TractorHKResiduals res;
  const Scale& s = hk.scale;
  const int d = s.dim();
  const int N = s.rank();
  bool first = true;
  for (const auto& x : points) {
    Mat h = hk.h.evaluate(x, 0).values();
    std::array<Mat, 3> M;
    const std::array<const EndomorphismField*, 3> fields{&hk.I, &hk.J, &hk.K};
    for (int a = 0; a < 3; ++a) {
      M[a] = fields[a]->evaluate(x, 0).values();
      for (const auto& m : adjoint_derivative(s, *fields[a], x, 0))
        res.parallel = std::max(res.parallel, max_abs(m.values()));
      res.hermitian = std::max(res.hermitian, max_abs(Mat(M[a].transpose() * h * M[a] - h)));
    }
    for (const auto& m : metric_derivative(s, hk.h, x, 0))
      res.metric_parallel = std::max(res.metric_parallel, max_abs(m.values()));
    const Mat id = Mat::Identity(N, N);
    res.quaternion = std::max(
        {res.quaternion, quaternionic_defect(M[0], M[1], M[2]),
         max_abs(Mat(M[0] * M[1] - M[2])), max_abs(Mat(M[1] * M[2] - M[0])),
         max_abs(Mat(M[2] * M[0] - M[1])), max_abs(Mat(M[0] * M[1] * M[2] + id))});

    // Killing fields in the Einstein scale: blocks [[nabla_b i^a, i^a], [-i_b, 0]]
    auto gamma = s.connection().gamma_at(x, 0);
    for (int a = 0; a < 3; ++a) {
      auto v = hk.triple.xi[a].evaluate(x, 1);
      auto dv = covariant_derivative(v, gamma);
      Mat ref = Mat::Zero(N, N);
      for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) {
          ref(r, c) = dv.c[c * d + r].value();
          ref(d, c) -= h(c, r) * v.c[r].value();
        }
        ref(r, d) = v.c[r].value();
      }
      res.ijk_form = std::max(res.ijk_form, max_abs(Mat(M[a] - ref)));
    }

    auto sig = signature(h);
    Jet eps = tractor_volume(s, x, 0)[0];
    int orient = orientation_sign(M[0], M[1], M[2], quaternionic_basis(M[0], M[1], M[2]),
                                  eps.value());
    if (first) {
      res.signature = sig;
      res.orientation_chart = orient;
    } else {
      if (sig != res.signature) res.signature_constant = false;
      if (orient != res.orientation_chart) res.orientation_constant = false;
    }
    first = false;
    ++res.n_points;
  }
  return res;
}

}  // namespace tractorlab
