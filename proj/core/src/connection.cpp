#include "tractorlab/connection.hpp"

#include <algorithm>
#include <cmath>

#include "tractorlab/errors.hpp"
#include "tractorlab/linalg.hpp"

namespace tractorlab {

TensorShape gamma_shape(int dim) {
  return {dim, {Variance::Up, Variance::Down, Variance::Down}};
}

TensorShape riemann_shape(int dim) {
  return {dim, {Variance::Down, Variance::Down, Variance::Up, Variance::Down}};
}

TensorJets metric_inverse(const TensorJets& g) {
  const int d = g.shape.dim;
  return TensorJets(TensorShape::valence(d, 2, 0), jet_inverse(g.c, d));
}

TensorJets christoffel(const TensorJets& g, const TensorJets& g_inv) {
  const int d = g.shape.dim;
  // dg[(e*d + a)*d + b] = d_e g_ab
  std::vector<Jet> dg(d * d * d);
  for (int e = 0; e < d; ++e)
    for (int a = 0; a < d; ++a)
      for (int b = a; b < d; ++b) {
        dg[(e * d + a) * d + b] = g.c[a * d + b].derivative(e);
        if (b != a) dg[(e * d + b) * d + a] = dg[(e * d + a) * d + b];
      }
  TensorJets gamma(gamma_shape(d));
  std::vector<Jet> lower(d);
  for (int a = 0; a < d; ++a)
    for (int b = a; b < d; ++b) {
      // Gamma_{f ab} = 1/2 (d_a g_fb + d_b g_fa - d_f g_ab)
      for (int f = 0; f < d; ++f) {
        Jet t = dg[(a * d + f) * d + b];
        t += dg[(b * d + f) * d + a];
        t -= dg[(f * d + a) * d + b];
        t *= 0.5;
        lower[f] = std::move(t);
      }
      for (int c = 0; c < d; ++c) {
        Jet acc(0.0);
        for (int f = 0; f < d; ++f) acc.add_product(g_inv.c[c * d + f], lower[f]);
        gamma.c[(c * d + a) * d + b] = acc;
        if (b != a) gamma.c[(c * d + b) * d + a] = std::move(acc);
      }
    }
  return gamma;
}

TensorJets covariant_derivative(const TensorJets& t, const TensorJets& gamma,
                                double weight) {
  const int d = t.shape.dim;
  const int rank = t.shape.rank();
  const int tsize = t.shape.size();
  int order = std::min(t.order() - 1, gamma.order());
  if (order < 0) throw CapabilityError("covariant derivative needs jets of order >= 1");
  std::vector<Variance> slots{Variance::Down};
  slots.insert(slots.end(), t.shape.slots.begin(), t.shape.slots.end());
  TensorJets out(TensorShape(d, slots));

  std::vector<Jet> g(gamma.c.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = gamma.c[i].truncated(order);
  std::vector<int> stride(rank);
  for (int s = rank - 1, st = 1; s >= 0; --s, st *= d) stride[s] = st;

  for (int a = 0; a < d; ++a) {
    Jet trace(0.0);
    if (weight != 0.0) {
      for (int b = 0; b < d; ++b) trace += g[(b * d + a) * d + b];
      trace *= weight / (d + 1);  // d = n + 1, so n + 2 = d + 1
    }
    for (int f = 0; f < tsize; ++f) {
      Jet acc = t.c[f].derivative(a).truncated(order);
      for (int s = 0; s < rank; ++s) {
        int idx = (f / stride[s]) % d;
        int base = f - idx * stride[s];
        for (int e = 0; e < d; ++e) {
          const Jet& te = t.c[base + e * stride[s]];
          if (t.shape.slots[s] == Variance::Up) {
            acc.add_product(g[(idx * d + a) * d + e], te);
          } else {
            acc.add_product(g[(e * d + a) * d + idx], te, -1.0);
          }
        }
      }
      if (weight != 0.0) acc.add_product(trace, t.c[f]);
      out.c[a * tsize + f] = std::move(acc);
    }
  }
  return out;
}

TensorJets second_covariant_derivative(const TensorJets& t, const TensorJets& gamma) {
  return covariant_derivative(covariant_derivative(t, gamma), gamma);
}

CurvatureJets curvature_from_gamma(const TensorJets& gamma) {
  const int d = gamma.shape.dim;
  const int n = d - 1;
  const int k = gamma.order() - 1;
  if (k < 0) throw CapabilityError("curvature needs Christoffel jets of order >= 1");
  auto G = [&](int c, int a, int b) -> int { return (c * d + a) * d + b; };

  std::vector<Jet> gk(gamma.c.size());
  for (std::size_t i = 0; i < gk.size(); ++i) gk[i] = gamma.c[i].truncated(k);

  CurvatureJets out;
  out.R = TensorJets(riemann_shape(d));
  auto Ridx = [&](int a, int b, int c, int e) { return ((a * d + b) * d + c) * d + e; };
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          Jet r = gamma.c[G(c, b, e)].derivative(a);
          r -= gamma.c[G(c, a, e)].derivative(b);
          for (int f = 0; f < d; ++f) {
            r.add_product(gk[G(c, a, f)], gk[G(f, b, e)]);
            r.add_product(gk[G(c, b, f)], gk[G(f, a, e)], -1.0);
          }
          out.R.c[Ridx(b, a, c, e)] = -r;
          out.R.c[Ridx(a, b, c, e)] = std::move(r);
        }
  for (int a = 0; a < d; ++a)
    for (int c = 0; c < d; ++c)
      for (int e = 0; e < d; ++e) out.R.c[Ridx(a, a, c, e)] = Jet(d, k, 0.0);

  out.Ric = TensorJets(TensorShape::valence(d, 0, 2));
  for (int b = 0; b < d; ++b)
    for (int e = 0; e < d; ++e) {
      Jet acc(0.0);
      for (int c = 0; c < d; ++c) acc += out.R.c[Ridx(c, b, c, e)];
      out.Ric.c[b * d + e] = std::move(acc);
    }

  out.P = TensorJets(TensorShape::valence(d, 0, 2));
  const double denom = static_cast<double>(n) * (n + 2);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      Jet p = out.Ric.c[a * d + b] * ((n + 1) / denom);
      p.add_product(Jet(1.0 / denom), out.Ric.c[b * d + a]);
      out.P.c[a * d + b] = std::move(p);
    }

  out.W = out.R;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          Jet& w = out.W.c[Ridx(a, b, c, e)];
          if (c == a) w -= out.P.c[b * d + e];
          if (c == b) w += out.P.c[a * d + e];
          if (c == e) {
            w += out.P.c[a * d + b];
            w -= out.P.c[b * d + a];
          }
        }

  if (k >= 1) {
    TensorJets dP = covariant_derivative(out.P, gamma);
    out.C = TensorJets(TensorShape::valence(d, 0, 3));
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        for (int c = 0; c < d; ++c)
          out.C.c[(a * d + b) * d + c] =
              dP.c[(a * d + b) * d + c] - dP.c[(b * d + a) * d + c];
  }
  return out;
}

CurvatureJets curvature_at(const Connection& nabla, const Point& x, int order) {
  return curvature_from_gamma(nabla.gamma_at(x, order + 1));
}

Connection flat_connection(const Chart& chart) {
  const int d = chart.dim();
  Connection c;
  c.chart = chart;
  c.gamma = constant_field(chart, gamma_shape(d), std::vector<double>(d * d * d, 0.0), 0.0,
                           "flat");
  c.is_special = true;
  c.name = "flat";
  return c;
}

Connection levi_civita(const TensorField& g, int sample_points) {
  const int d = g.dim();
  if (!(g.shape() == TensorShape::valence(d, 0, 2)))
    throw ShapeError("levi_civita expects a covariant 2-tensor field");
  auto pts = g.chart().sample_points(sample_points, 0);
  for (const auto& x : pts) {
    auto v = g.values(x);
    Mat m(d, d);
    double scale = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        m(a, b) = v[a * d + b];
        scale = std::max(scale, std::abs(v[a * d + b]));
      }
    if (max_abs(m - m.transpose()) > 1e-12 * std::max(1.0, scale))
      throw ShapeError("metric is not symmetric");
    Eigen::JacobiSVD<Mat> svd(m);
    const auto& s = svd.singularValues();
    if (!(s[d - 1] > 1e-12 * s[0])) {
      throw DegeneracyError("metric '" + g.name() + "' is singular at a sample point", x);
    }
  }
  TensorField gf = g;
  const int max_order = std::max(0, g.max_order() - 1);
  TensorField gamma(g.chart(), gamma_shape(d), 0.0, max_order,
                    make_pointwise_rule([gf](const Point& x, int order) {
                      auto gj = gf.evaluate(x, order + 1);
                      auto gi = metric_inverse(truncated(gj, order));
                      return christoffel(gj, gi).c;
                    }),
                    "Gamma[" + g.name() + "]");
  Connection c;
  c.chart = g.chart();
  c.gamma = gamma;
  c.is_special = true;  // Levi-Civita connections have symmetric Ricci
  c.name = "levi_civita[" + g.name() + "]";
  return c;
}

Connection connection_from_gamma(const TensorField& gamma, std::string name) {
  if (!(gamma.shape() == gamma_shape(gamma.dim())))
    throw ShapeError("Christoffel field must have valence (1,2)");
  Connection c;
  c.chart = gamma.chart();
  c.gamma = gamma;
  c.is_special = false;
  c.name = std::move(name);
  return c;
}

Connection projective_change(const Connection& nabla, const TensorField& upsilon) {
  const int d = nabla.dim();
  if (!(upsilon.shape() == TensorShape::covector(d)))
    throw ShapeError("projective change needs a one-form");
  FieldRule rg = nabla.gamma.rule(), ru = upsilon.rule();
  TensorField gamma(nabla.chart, gamma_shape(d), 0.0,
                    std::min(nabla.gamma.max_order(), upsilon.max_order()),
                    [rg, ru, d](std::span<const Jet> x) {
                      auto g = rg(x);
                      auto u = ru(x);
                      for (int c = 0; c < d; ++c)
                        for (int a = 0; a < d; ++a) {
                          g[(c * d + a) * d + c] += u[a];
                          g[(c * d + c) * d + a] += u[a];
                        }
                      return g;
                    },
                    nabla.gamma.name() + "+proj");
  Connection c;
  c.chart = nabla.chart;
  c.gamma = gamma;
  c.is_special = false;
  c.name = nabla.name + "^[" + upsilon.name() + "]";
  return c;
}

TensorJets density_change(const TensorField& sigma, const Connection& nabla,
                          const TensorField& upsilon, const Point& x, int order) {
  const int d = nabla.dim();
  const double w = sigma.weight();
  auto s = sigma.evaluate(x, order + 1);
  auto g = nabla.gamma_at(x, order);
  auto u = upsilon.evaluate(x, order);
  TensorJets out = covariant_derivative(s, g, w);
  for (int a = 0; a < d; ++a) out.c[a].add_product(Jet(w) * u.c[a], s.c[0]);
  return out;
}

Connection scale_from_density(const TensorField& sigma, const Connection& nabla,
                              int sample_points) {
  const int d = nabla.dim();
  const double w = sigma.weight();
  if (w == 0.0) throw PreconditionError("a scale needs a density of nonzero weight");
  for (const auto& x : sigma.chart().sample_points(sample_points, 0)) {
    if (sigma.values(x)[0] == 0.0) throw ZeroScaleError("density vanishes at a sample point");
  }
  TensorField sg = sigma;
  Connection base = nabla;
  TensorField upsilon(
      nabla.chart, TensorShape::covector(d), 0.0,
      std::min(sigma.max_order() - 1, nabla.gamma.max_order()),
      make_pointwise_rule([sg, base, w, d](const Point& x, int order) {
        auto s = sg.evaluate(x, order + 1);
        if (s.c[0].value() == 0.0) throw ZeroScaleError("density vanishes");
        auto g = base.gamma_at(x, order);
        auto ds = covariant_derivative(s, g, w);
        Jet inv = reciprocal(s.c[0].truncated(order)) * (-1.0 / w);
        std::vector<Jet> u(d);
        for (int a = 0; a < d; ++a) u[a] = ds.c[a] * inv;
        return u;
      }),
      "Upsilon[" + sigma.name() + "]");
  Connection c = projective_change(nabla, upsilon);
  c.is_special = true;  // preserves a volume density, so Ricci is symmetric
  c.name = "scale[" + sigma.name() + "]";
  return c;
}

TensorJets lie_derivative_connection_at(const TensorField& xi, const Connection& nabla,
                                        const Point& x, int order) {
  const int d = nabla.dim();
  auto v = xi.evaluate(x, order + 2);
  auto g = nabla.gamma_at(x, order + 1);
  TensorJets out(gamma_shape(d));
  std::vector<Jet> dv(d * d);  // dv[e*d + c] = d_e xi^c
  for (int e = 0; e < d; ++e)
    for (int c = 0; c < d; ++c) dv[e * d + c] = v.c[c].derivative(e);
  for (int c = 0; c < d; ++c)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        Jet acc = dv[a * d + c].derivative(b);
        for (int e = 0; e < d; ++e) {
          acc.add_product(v.c[e], g.c[(c * d + a) * d + b].derivative(e));
          acc.add_product(g.c[(e * d + a) * d + b], dv[e * d + c], -1.0);
          acc.add_product(g.c[(c * d + e) * d + b], dv[a * d + e]);
          acc.add_product(g.c[(c * d + a) * d + e], dv[b * d + e]);
        }
        out.c[(c * d + a) * d + b] = acc.truncated(order);
      }
  return out;
}

TensorField lie_derivative_connection(const TensorField& xi, const Connection& nabla) {
  const int d = nabla.dim();
  TensorField xf = xi;
  Connection nf = nabla;
  return TensorField(nabla.chart, gamma_shape(d), 0.0,
                     std::min(xi.max_order() - 2, nabla.gamma.max_order() - 1),
                     make_pointwise_rule([xf, nf](const Point& x, int order) {
                       return lie_derivative_connection_at(xf, nf, x, order).c;
                     }),
                     "Lie[" + xi.name() + "]");
}

CurvaturePack curvature_pack(const Connection& nabla) {
  const int d = nabla.dim();
  const int k = nabla.gamma.max_order() - 1;
  if (k < 0) throw CapabilityError("curvature needs first derivatives of Christoffel symbols");
  Connection nf = nabla;
  auto make = [&](TensorShape shape, int max_order, int which, const char* name) {
    return TensorField(nabla.chart, std::move(shape), 0.0, max_order,
                       make_pointwise_rule([nf, which](const Point& x, int order) {
                         auto cur = curvature_at(nf, x, which == 4 ? order + 1 : order);
                         switch (which) {
                           case 0: return cur.R.c;
                           case 1: return cur.Ric.c;
                           case 2: return cur.P.c;
                           case 3: return cur.W.c;
                           default: return cur.C.c;
                         }
                       }),
                       std::string(name) + "[" + nabla.name + "]");
  };
  CurvaturePack pack{make(riemann_shape(d), k, 0, "R"),
                     make(TensorShape::valence(d, 0, 2), k, 1, "Ric"),
                     make(TensorShape::valence(d, 0, 2), k, 2, "P"),
                     make(riemann_shape(d), k, 3, "W"),
                     TensorField()};
  if (k >= 1) pack.C = make(TensorShape::valence(d, 0, 3), k - 1, 4, "C");
  return pack;
}

double torsion_residual(const TensorJets& gamma) {
  const int d = gamma.shape.dim;
  double m = 0.0;
  for (int c = 0; c < d; ++c)
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        m = std::max(m, std::abs(gamma.c[(c * d + a) * d + b].value() -
                                 gamma.c[(c * d + b) * d + a].value()));
  return m;
}

double metricity_residual(const TensorJets& g, const TensorJets& gamma) {
  return max_abs(covariant_derivative(g, gamma));
}

double first_bianchi_residual(const TensorJets& R) {
  const int d = R.shape.dim;
  double m = 0.0;
  auto r = [&](int a, int b, int c, int e) { return R.c[((a * d + b) * d + c) * d + e].value(); };
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e)
          m = std::max(m, std::abs(r(a, b, c, e) + r(b, e, c, a) + r(e, a, c, b)));
  return m;
}

double weyl_trace_residual(const TensorJets& W) {
  const int d = W.shape.dim;
  double m = 0.0;
  auto w = [&](int a, int b, int c, int e) { return W.c[((a * d + b) * d + c) * d + e].value(); };
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y) {
      double t1 = 0, t2 = 0, t3 = 0;
      for (int c = 0; c < d; ++c) {
        t1 += w(c, x, c, y);
        t2 += w(x, c, c, y);
        t3 += w(x, y, c, c);
      }
      m = std::max({m, std::abs(t1), std::abs(t2), std::abs(t3)});
    }
  return m;
}

double reconstruction_residual(const CurvatureJets& cur) {
  const int d = cur.R.shape.dim;
  double m = 0.0;
  auto idx = [&](int a, int b, int c, int e) { return ((a * d + b) * d + c) * d + e; };
  auto P = [&](int a, int b) { return cur.P.c[a * d + b].value(); };
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) {
          double rhs = cur.W.c[idx(a, b, c, e)].value();
          if (c == a) rhs += P(b, e);
          if (c == b) rhs -= P(a, e);
          if (c == e) rhs -= P(a, b) - P(b, a);
          m = std::max(m, std::abs(cur.R.c[idx(a, b, c, e)].value() - rhs));
        }
  return m;
}

double weyl_divergence_residual(const CurvatureJets& cur, const TensorJets& gamma) {
  const int d = cur.W.shape.dim;
  const int n = d - 1;
  TensorJets dW = covariant_derivative(cur.W, gamma);
  double m = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int e = 0; e < d; ++e) {
        double div = 0.0;
        for (int c = 0; c < d; ++c)
          div += dW.c[(((c * d + a) * d + b) * d + c) * d + e].value();
        m = std::max(m, std::abs(div - (n - 1) * cur.C.c[(a * d + b) * d + e].value()));
      }
  return m;
}

}  // namespace tractorlab
