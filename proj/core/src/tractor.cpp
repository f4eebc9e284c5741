#include "tractorlab/tractor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "tractorlab/errors.hpp"
#include "tractorlab/report.hpp"

namespace tractorlab {

namespace {

Jet constant_jet(int dim, int order, double v) { return Jet(dim, order, v); }

std::vector<Jet> truncate_all(const std::vector<Jet>& v, int order) {
  std::vector<Jet> out;
  out.reserve(v.size());
  for (const auto& j : v) out.push_back(j.truncated(order));
  return out;
}

std::vector<Jet> mat_vec(const JetMatrix& m, const std::vector<Jet>& v) {
  std::vector<Jet> out(m.rows, Jet(0.0));
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) out[r].add_product(m(r, c), v[c]);
  return out;
}

std::vector<Jet> mat_t_vec(const JetMatrix& m, const std::vector<Jet>& v) {
  std::vector<Jet> out(m.cols, Jet(0.0));
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) out[c].add_product(m(r, c), v[r]);
  return out;
}

double max_abs(const JetMatrix& m) { return tractorlab::max_abs(m.values()); }

void require_scale(const Scale& s, const std::string& scale, const std::string& what) {
  if (scale != s.name())
    throw ScaleMismatchError(what + " is expressed in scale '" + scale +
                             "', operation uses '" + s.name() + "'");
}

Point chart_centre(const Chart& c) {
  Point x(c.dim());
  for (int i = 0; i < c.dim(); ++i) x[i] = 0.5 * (c.lower()[i] + c.upper()[i]);
  return x;
}

// Gauss-Legendre nodes and weights on [0, 1].
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre() {
  static const auto rule = [] {
    const int n = 24;
    std::vector<double> nodes(n), weights(n);
    for (int i = 0; i < n; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      nodes[i] = 0.5 * (1.0 - z);
      weights[i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    return std::make_pair(nodes, weights);
  }();
  return rule;
}

}  // namespace

// ---------- Scale ----------

Scale::Scale(Connection nabla, int sample_points, double ric_tol) : nabla_(std::move(nabla)) {
  if (nabla_.gamma_order() < 1)
    throw CapabilityError("a scale needs Christoffel symbols with first derivatives");
  const int d = dim();
  for (const auto& x : nabla_.chart.sample_points(sample_points, 0)) {
    auto cur = curvature_at(nabla_, x, 0);
    double scale = 1.0, asym = 0.0;
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        scale = std::max(scale, std::abs(cur.Ric.c[a * d + b].value()));
        asym = std::max(asym, std::abs(cur.Ric.c[a * d + b].value() -
                                       cur.Ric.c[b * d + a].value()));
      }
    ric_asym_ = std::max(ric_asym_, asym / scale);
  }
  if (ric_asym_ > ric_tol)
    throw PreconditionError("connection '" + nabla_.name +
                            "' is not a scale: Ricci asymmetry " + format_number(ric_asym_));
}

CurvatureJets Scale::curvature(const Point& x, int order) const {
  return curvature_at(nabla_, x, order);
}

std::vector<JetMatrix> Scale::omega(const Point& x, int order) const {
  const int d = dim();
  const int N = rank();
  auto gamma = nabla_.gamma_at(x, order + 1);
  auto cur = curvature_from_gamma(gamma);
  std::vector<JetMatrix> out(d, JetMatrix(N, N));
  for (int a = 0; a < d; ++a) {
    JetMatrix& w = out[a];
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) w(b, c) = gamma.c[(b * d + a) * d + c].truncated(order);
    for (int b = 0; b < d; ++b) w(b, d) = constant_jet(d, order, b == a ? 1.0 : 0.0);
    for (int c = 0; c < d; ++c) w(d, c) = -cur.P.c[a * d + c];
    w(d, d) = constant_jet(d, order, 0.0);
  }
  return out;
}

// ---------- fields ----------

std::vector<Jet> TractorField::evaluate(const Point& x, int order) const {
  if (order > max_order)
    throw CapabilityError("tractor field '" + name + "' supports jets up to order " +
                          std::to_string(max_order));
  return slots(x, order);
}

JetMatrix EndomorphismField::evaluate(const Point& x, int order) const {
  if (order > max_order)
    throw CapabilityError("endomorphism field '" + name + "' supports jets up to order " +
                          std::to_string(max_order));
  return matrix(x, order);
}

TractorField constant_tractor(const Scale& s, std::vector<double> slots, bool dual,
                              std::string name) {
  if (static_cast<int>(slots.size()) != s.rank()) throw ShapeError("tractor slot count");
  const int d = s.dim();
  TractorField t;
  t.scale = s.name();
  t.dual = dual;
  t.name = std::move(name);
  t.slots = [slots, d](const Point&, int order) {
    std::vector<Jet> out;
    for (double v : slots) out.push_back(constant_jet(d, order, v));
    return out;
  };
  return t;
}

EndomorphismField constant_endomorphism(const Scale& s, const Mat& m, std::string name) {
  if (m.rows() != s.rank() || m.cols() != s.rank()) throw ShapeError("endomorphism size");
  const int d = s.dim();
  EndomorphismField e;
  e.scale = s.name();
  e.name = std::move(name);
  e.matrix = [m, d](const Point&, int order) {
    JetMatrix out(m.rows(), m.cols());
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) out(r, c) = constant_jet(d, order, m(r, c));
    return out;
  };
  return e;
}

JetMatrix assemble_adjoint(const std::vector<Jet>& phi, const std::vector<Jet>& xi,
                           const std::vector<Jet>& nu) {
  const int d = static_cast<int>(xi.size());
  if (static_cast<int>(phi.size()) != d * d || static_cast<int>(nu.size()) != d)
    throw ShapeError("adjoint blocks have inconsistent sizes");
  JetMatrix a(d + 1, d + 1);
  Jet tr(0.0);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) a(r, c) = phi[r * d + c];
    tr += phi[r * d + r];
    a(r, d) = xi[r];
    a(d, r) = nu[r];
  }
  a(d, d) = -tr;
  return a;
}

std::vector<Jet> adjoint_projection(const JetMatrix& a) {
  std::vector<Jet> xi(a.rows - 1);
  for (int r = 0; r + 1 < a.rows; ++r) xi[r] = a(r, a.cols - 1);
  return xi;
}

// ---------- tractor connection ----------

std::vector<std::vector<Jet>> tractor_derivative(const Scale& s, const TractorField& t,
                                                 const Point& x, int order) {
  require_scale(s, t.scale, "tractor field '" + t.name + "'");
  const int d = s.dim();
  auto v = t.evaluate(x, order + 1);
  auto w = s.omega(x, order);
  auto vt = truncate_all(v, order);
  std::vector<std::vector<Jet>> out(d);
  for (int a = 0; a < d; ++a) {
    auto conn = t.dual ? mat_t_vec(w[a], vt) : mat_vec(w[a], vt);
    out[a].resize(v.size());
    for (std::size_t r = 0; r < v.size(); ++r) {
      Jet dv = v[r].derivative(a).truncated(order);
      if (t.dual) dv -= conn[r];
      else dv += conn[r];
      out[a][r] = std::move(dv);
    }
  }
  return out;
}

std::vector<std::vector<Jet>> cotractor_derivative_explicit(const Scale& s,
                                                            const TractorField& t,
                                                            const Point& x, int order) {
  require_scale(s, t.scale, "cotractor field '" + t.name + "'");
  if (!t.dual) throw ShapeError("explicit cotractor formula applies to cotractors");
  const int d = s.dim();
  auto v = t.evaluate(x, order + 1);
  TensorJets mu(TensorShape::covector(d), std::vector<Jet>(v.begin(), v.begin() + d));
  auto gamma = s.connection().gamma_at(x, order);
  auto cur = s.curvature(x, order);
  auto dmu = covariant_derivative(mu, gamma);
  Jet sigma = v[d].truncated(order);
  std::vector<std::vector<Jet>> out(d, std::vector<Jet>(d + 1));
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      Jet r = dmu.c[a * d + b];
      r.add_product(cur.P.c[a * d + b], sigma);
      out[a][b] = std::move(r);
    }
    out[a][d] = v[d].derivative(a).truncated(order) - v[a].truncated(order);
  }
  return out;
}

double duality_residual(const Scale& s, const TractorField& mu, const TractorField& t,
                        const Point& x) {
  if (!mu.dual || t.dual) throw ShapeError("duality pairs a cotractor with a tractor");
  const int d = s.dim();
  auto m1 = mu.evaluate(x, 1);
  auto t1 = t.evaluate(x, 1);
  auto dm = cotractor_derivative_explicit(s, mu, x, 0);
  auto dt = tractor_derivative(s, t, x, 0);
  double res = 0.0;
  for (int a = 0; a < d; ++a) {
    double lhs = 0.0, rhs = 0.0;
    for (int r = 0; r <= d; ++r) {
      lhs += m1[r].d(a) * t1[r].value() + m1[r].value() * t1[r].d(a);
      rhs += dm[a][r].value() * t1[r].value() + m1[r].value() * dt[a][r].value();
    }
    res = std::max(res, std::abs(lhs - rhs));
  }
  return res;
}

std::vector<JetMatrix> adjoint_derivative(const Scale& s, const EndomorphismField& a,
                                          const Point& x, int order) {
  require_scale(s, a.scale, "endomorphism '" + a.name + "'");
  auto m = a.evaluate(x, order + 1);
  auto mt = m.truncated(order);
  auto w = s.omega(x, order);
  std::vector<JetMatrix> out;
  for (int i = 0; i < s.dim(); ++i)
    out.push_back(m.derivative(i).truncated(order) + commutator(w[i], mt));
  return out;
}

std::vector<JetMatrix> metric_derivative(const Scale& s, const EndomorphismField& h,
                                         const Point& x, int order) {
  require_scale(s, h.scale, "tractor form '" + h.name + "'");
  auto m = h.evaluate(x, order + 1);
  auto mt = m.truncated(order);
  auto w = s.omega(x, order);
  std::vector<JetMatrix> out;
  for (int i = 0; i < s.dim(); ++i)
    out.push_back(m.derivative(i).truncated(order) - transpose(w[i]) * mt - mt * w[i]);
  return out;
}

std::vector<JetMatrix> tractor_curvature(const Scale& s, const Point& x, int order) {
  const int d = s.dim();
  auto w = s.omega(x, order + 1);
  std::vector<JetMatrix> wt;
  for (const auto& m : w) wt.push_back(m.truncated(order));
  std::vector<JetMatrix> out(d * d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      out[a * d + b] = w[b].derivative(a).truncated(order) -
                       w[a].derivative(b).truncated(order) + commutator(wt[a], wt[b]);
  return out;
}

std::vector<Mat> tractor_curvature_from_tensors(const Scale& s, const Point& x) {
  const int d = s.dim();
  auto cur = s.curvature(x, 1);
  std::vector<Mat> out(d * d, Mat::Zero(d + 1, d + 1));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      Mat& f = out[a * d + b];
      for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e)
          f(c, e) = cur.W.c[((a * d + b) * d + c) * d + e].value();
      for (int e = 0; e < d; ++e) f(d, e) = -cur.C.c[(a * d + b) * d + e].value();
    }
  return out;
}

double curvature_commutator_residual(const Scale& s, const TractorField& t, const Point& x) {
  const int d = s.dim();
  auto du = tractor_derivative(s, t, x, 1);  // u_b = nabla_b t, order 1
  auto w = s.omega(x, 0);
  auto f = tractor_curvature(s, x, 0);
  auto t0 = truncate_all(t.evaluate(x, 0), 0);
  double res = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      auto ub0 = truncate_all(du[b], 0);
      auto ua0 = truncate_all(du[a], 0);
      auto wa_ub = mat_vec(w[a], ub0);
      auto wb_ua = mat_vec(w[b], ua0);
      auto ft = mat_vec(f[a * d + b], t0);
      for (int r = 0; r <= d; ++r) {
        double comm = du[b][r].d(a) + wa_ub[r].value() - du[a][r].d(b) - wb_ua[r].value();
        res = std::max(res, std::abs(comm - ft[r].value()));
      }
    }
  return res;
}

// ---------- scale changes ----------

JetMatrix ScaleChange::gauge(const Point& x, int order) const {
  const int d = from.dim();
  auto fj = f.evaluate(x, order + 1);
  Jet ef = exp(fj.c[0].truncated(order));
  JetMatrix g(d + 1, d + 1);
  for (int r = 0; r < d; ++r) g(r, r) = ef;
  for (int c = 0; c < d; ++c) g(d, c) = ef * fj.c[0].derivative(c).truncated(order);
  g(d, d) = ef;
  return g;
}

TractorField ScaleChange::transform(const TractorField& t) const {
  require_scale(from, t.scale, "tractor field '" + t.name + "'");
  ScaleChange self = *this;
  TractorField out = t;
  out.scale = to.name();
  out.max_order = std::min(t.max_order, f.max_order() - 1);
  out.slots = [self, t](const Point& x, int order) {
    auto g = self.gauge(x, order);
    auto v = t.evaluate(x, order);
    if (!t.dual) return mat_vec(g, v);
    return mat_vec(transpose(inverse(g)), v);
  };
  return out;
}

EndomorphismField ScaleChange::transform(const EndomorphismField& a) const {
  require_scale(from, a.scale, "endomorphism '" + a.name + "'");
  ScaleChange self = *this;
  EndomorphismField out = a;
  out.scale = to.name();
  out.max_order = std::min(a.max_order, f.max_order() - 1);
  out.matrix = [self, a](const Point& x, int order) {
    auto g = self.gauge(x, order);
    return g * a.evaluate(x, order) * inverse(g);
  };
  return out;
}

EndomorphismField ScaleChange::transform_form(const EndomorphismField& h) const {
  require_scale(from, h.scale, "tractor form '" + h.name + "'");
  ScaleChange self = *this;
  EndomorphismField out = h;
  out.scale = to.name();
  out.max_order = std::min(h.max_order, f.max_order() - 1);
  out.matrix = [self, h](const Point& x, int order) {
    auto gi = inverse(self.gauge(x, order));
    return transpose(gi) * h.evaluate(x, order) * gi;
  };
  return out;
}

ScaleChange change_scale(const Scale& s, const TensorField& f) {
  const int d = s.dim();
  if (!(f.shape() == TensorShape::scalar(d))) throw ShapeError("scale change needs a function");
  TensorField ff = f;
  TensorField upsilon(s.chart(), TensorShape::covector(d), 0.0, f.max_order() - 1,
                      make_pointwise_rule([ff, d](const Point& x, int order) {
                        auto fj = ff.evaluate(x, order + 1);
                        std::vector<Jet> u(d);
                        for (int a = 0; a < d; ++a) u[a] = -fj.c[0].derivative(a);
                        return u;
                      }),
                      "-d" + f.name());
  Scale to(projective_change(s.connection(), upsilon));
  return ScaleChange{s, to, f};
}

// ---------- splitting and BGG ----------

JetMatrix splitting_operator(const Scale& s, const TensorField& xi, const Point& x,
                             int order) {
  const int d = s.dim();
  auto v = xi.evaluate(x, order + 2);
  auto gamma = s.connection().gamma_at(x, order + 1);
  auto cur = s.curvature(x, order);
  auto dv = covariant_derivative(v, gamma);  // [b][a] = nabla_b xi^a, order + 1
  Jet div(0.0);
  for (int c = 0; c < d; ++c) div += dv.c[c * d + c];
  Jet mu = div * (1.0 / (d + 1));
  Jet mu0 = mu.truncated(order);
  std::vector<Jet> phi(d * d), top(d), bottom(d);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      Jet e = dv.c[b * d + a].truncated(order);
      if (a == b) e -= mu0;
      phi[a * d + b] = std::move(e);
    }
    top[a] = v.c[a].truncated(order);
  }
  for (int b = 0; b < d; ++b) {
    Jet e = -mu.derivative(b).truncated(order);
    for (int c = 0; c < d; ++c) e.add_product(cur.P.c[b * d + c], top[c], -1.0);
    bottom[b] = std::move(e);
  }
  return assemble_adjoint(phi, top, bottom);
}

EndomorphismField splitting_field(const Scale& s, const TensorField& xi) {
  EndomorphismField e;
  e.scale = s.name();
  e.name = "L(" + xi.name() + ")";
  e.max_order = std::min(xi.max_order() - 2, s.connection().gamma_order() - 1);
  e.matrix = [s, xi](const Point& x, int order) { return splitting_operator(s, xi, x, order); };
  return e;
}

TensorJets bgg_operator(const Scale& s, const TensorField& xi, const Point& x) {
  const int d = s.dim();
  auto v = xi.evaluate(x, 2);
  auto gamma = s.connection().gamma_at(x, 1);
  auto cur = s.curvature(x, 0);
  auto dd = second_covariant_derivative(v, gamma);  // [b][c][a]
  std::vector<double> T(d * d * d);
  auto at = [d](int a, int b, int c) { return (a * d + b) * d + c; };
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c)
        T[at(a, b, c)] = 0.5 * (dd.c[(b * d + c) * d + a].value() +
                                dd.c[(c * d + b) * d + a].value()) +
                         0.5 * (cur.P.c[b * d + c].value() + cur.P.c[c * d + b].value()) *
                             v.c[a].value();
  std::vector<double> mu(d, 0.0);
  for (int c = 0; c < d; ++c) {
    for (int a = 0; a < d; ++a) mu[c] += T[at(a, a, c)];
    mu[c] /= (d + 1);
  }
  TensorJets out(TensorShape(d, {Variance::Up, Variance::Down, Variance::Down}));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int c = 0; c < d; ++c) {
        double u = T[at(a, b, c)];
        if (a == b) u -= mu[c];
        if (a == c) u -= mu[b];
        out.c[at(a, b, c)] = Jet(u);
      }
  return out;
}

double bgg_trace_residual(const TensorJets& t) {
  const int d = t.shape.dim;
  double res = 0.0;
  for (int c = 0; c < d; ++c) {
    double t1 = 0.0, t2 = 0.0;
    for (int a = 0; a < d; ++a) {
      t1 += t.c[(a * d + a) * d + c].value();
      t2 += t.c[(a * d + c) * d + a].value();
    }
    res = std::max({res, std::abs(t1), std::abs(t2)});
  }
  return res;
}

NormalSolutionReport check_normal_solution(const Scale& s, const TensorField& xi,
                                           const std::vector<Point>& points) {
  const int d = s.dim();
  NormalSolutionReport rep;
  auto L = splitting_field(s, xi);
  for (const auto& x : points) {
    auto v = xi.values(x);
    auto cur = s.curvature(x, 1);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        for (int c = 0; c < d; ++c) {
          double w = 0.0;
          for (int e = 0; e < d; ++e)
            w += cur.W.c[((a * d + b) * d + c) * d + e].value() * v[e];
          rep.weyl_residual = std::max(rep.weyl_residual, std::abs(w));
        }
        double cx = 0.0;
        for (int e = 0; e < d; ++e) cx += cur.C.c[(a * d + b) * d + e].value() * v[e];
        rep.cotton_residual = std::max(rep.cotton_residual, std::abs(cx));
      }
    rep.bgg_residual = std::max(rep.bgg_residual, max_abs(bgg_operator(s, xi, x)));
    for (const auto& m : adjoint_derivative(s, L, x, 0))
      rep.parallel_residual = std::max(rep.parallel_residual, max_abs(m));
    ++rep.n_points;
  }
  return rep;
}

// ---------- transport ----------

Curve straight_segment(const Point& a, const Point& b) {
  Point v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = b[i] - a[i];
  return Curve{[a, v](double t) {
                 Point p(a);
                 for (std::size_t i = 0; i < p.size(); ++i) p[i] += t * v[i];
                 return p;
               },
               [v](double) { return v; }};
}

Curve concatenate(std::vector<Curve> pieces) {
  const int k = static_cast<int>(pieces.size());
  auto locate = [k](double t) {
    int i = std::clamp(static_cast<int>(std::floor(t * k)), 0, k - 1);
    return std::make_pair(i, t * k - i);
  };
  return Curve{[pieces, locate](double t) {
                 auto [i, u] = locate(t);
                 return pieces[i].position(u);
               },
               [pieces, locate, k](double t) {
                 auto [i, u] = locate(t);
                 Point v = pieces[i].velocity(u);
                 for (auto& e : v) e *= k;
                 return v;
               }};
}

Curve rectangle_loop(const Point& base, int a, int b, double eps) {
  Point p1 = base, p2 = base, p3 = base;
  p1[a] += eps;
  p2[a] += eps;
  p2[b] += eps;
  p3[b] += eps;
  return concatenate({straight_segment(base, p1), straight_segment(p1, p2),
                      straight_segment(p2, p3), straight_segment(p3, base)});
}

Curve reversed(const Curve& c) {
  return Curve{[c](double t) { return c.position(1.0 - t); },
               [c](double t) {
                 Point v = c.velocity(1.0 - t);
                 for (auto& e : v) e = -e;
                 return v;
               }};
}

namespace {

// Connection matrix contracted with the velocity, evaluated just inside a
// piecewise curve's smooth pieces at step boundaries.
Mat contracted_omega(const Scale& s, const Curve& c, double t) {
  auto x = c.position(t);
  auto v = c.velocity(t);
  auto w = s.omega(x, 0);
  Mat out = Mat::Zero(s.rank(), s.rank());
  for (int a = 0; a < s.dim(); ++a)
    if (v[a] != 0.0) out += v[a] * w[a].values();
  return out;
}

}  // namespace

Mat transport_matrix(const Scale& s, const Curve& c, int steps) {
  if (steps < 1) throw PreconditionError("transport needs at least one step");
  const int N = s.rank();
  const double h = 1.0 / steps;
  const double nudge = 1e-12;
  Mat T = Mat::Identity(N, N);
  for (int i = 0; i < steps; ++i) {
    const double t0 = i * h;
    // endpoints are evaluated inside the step so that corners of piecewise
    // curves falling on step boundaries are handled piece by piece
    Mat w0 = contracted_omega(s, c, t0 + nudge);
    Mat wm = contracted_omega(s, c, t0 + 0.5 * h);
    Mat w1 = contracted_omega(s, c, t0 + h - nudge);
    Mat k1 = -w0 * T;
    Mat k2 = -wm * (T + 0.5 * h * k1);
    Mat k3 = -wm * (T + 0.5 * h * k2);
    Mat k4 = -w1 * (T + h * k3);
    T += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return T;
}

std::pair<Mat, int> transport_converged(const Scale& s, const Curve& c, int initial_steps,
                                        double tol, int max_steps) {
  int steps = initial_steps;
  Mat prev = transport_matrix(s, c, steps);
  while (steps < max_steps) {
    steps *= 2;
    Mat next = transport_matrix(s, c, steps);
    double diff = max_abs(Mat(next - prev));
    prev = std::move(next);
    if (diff < tol) return {prev, steps};
  }
  return {prev, steps};
}

Vec parallel_transport(const Scale& s, const Vec& t0, const Curve& c, int steps) {
  if (t0.size() != s.rank()) throw ShapeError("tractor slot count");
  return transport_matrix(s, c, steps) * t0;
}

double sp_membership_residual(const Mat& a, const Mat& h, const Mat& I, const Mat& J,
                              const Mat& K) {
  double r = max_abs(Mat(a.transpose() * h + h * a));
  r = std::max(r, max_abs(Mat(a * I - I * a)));
  r = std::max(r, max_abs(Mat(a * J - J * a)));
  r = std::max(r, max_abs(Mat(a * K - K * a)));
  return r;
}

HolonomyReport holonomy_sample(const Scale& s, const EndomorphismField& h,
                               const EndomorphismField& I, const EndomorphismField& J,
                               const EndomorphismField& K, const HolonomyOptions& opt) {
  if (opt.sides.size() != 2 || !(opt.sides[0] > opt.sides[1]) || !(opt.sides[1] > 0.0))
    throw PreconditionError("holonomy needs two decreasing positive loop sides");
  const int d = s.dim();
  std::mt19937_64 rng(opt.seed);
  const int pool = 4 * opt.loops + 16;
  auto bases = s.chart().sample_points(pool, opt.seed);
  int next_base = 0;

  HolonomyReport rep;
  const double e1 = opt.sides[0], e2 = opt.sides[1];
  while (rep.loops < opt.loops) {
    if (next_base >= pool) throw DegeneracyError("ran out of admissible holonomy loops", {});
    Point x = bases[next_base++];
    int a = static_cast<int>(rng() % d);
    int b = static_cast<int>(rng() % (d - 1));
    if (b >= a) ++b;
    for (int i : {a, b})
      if (x[i] + e1 >= s.chart().upper()[i]) x[i] -= 2 * e1;

    Mat hx = h.evaluate(x, 0).values(), Ix = I.evaluate(x, 0).values(),
        Jx = J.evaluate(x, 0).values(), Kx = K.evaluate(x, 0).values();
    if (opt.check_preconditions) {
      double r = 0.0;
      for (const auto& m : metric_derivative(s, h, x)) r = std::max(r, max_abs(m));
      for (const auto* e : {&I, &J, &K})
        for (const auto& m : adjoint_derivative(s, *e, x)) r = std::max(r, max_abs(m));
      if (r > opt.precondition_tol)
        throw PreconditionError("h, I, J, K are not parallel at a loop base point (residual " +
                                format_number(r) + ")");
    }

    std::vector<Mat> logs;
    bool rejected = false;
    for (double eps : opt.sides) {
      Mat hol = transport_converged(s, rectangle_loop(x, a, b, eps)).first;
      Eigen::EigenSolver<Mat> es(hol, false);
      for (int i = 0; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()[i] + 1.0) < opt.minus_one_margin) rejected = true;
      if (rejected) break;
      logs.push_back(matrix_log(hol));
    }
    if (rejected) {
      ++rep.resampled;
      continue;
    }
    for (int i = 0; i < 2; ++i) {
      const double area = opt.sides[i] * opt.sides[i];
      rep.membership_residual =
          std::max(rep.membership_residual,
                   sp_membership_residual(logs[i], hx, Ix, Jx, Kx) / area);
    }
    Mat g1 = logs[0] / (e1 * e1), g2 = logs[1] / (e2 * e2);
    Mat gen = (e1 * g2 - e2 * g1) / (e1 - e2);
    rep.extrapolated_residual =
        std::max(rep.extrapolated_residual, sp_membership_residual(gen, hx, Ix, Jx, Kx));
    rep.generators.push_back(std::move(gen));
    ++rep.loops;
  }

  const int N = s.rank();
  Mat stack(N * N, rep.generators.size());
  for (std::size_t i = 0; i < rep.generators.size(); ++i)
    stack.col(i) = Eigen::Map<const Vec>(rep.generators[i].data(), N * N);
  if (stack.cols() > 0) {
    Eigen::JacobiSVD<Mat> svd(stack);
    const auto& sv = svd.singularValues();
    const double cut = std::max(1e-8, 1e-6 * sv[0]);
    for (int i = 0; i < sv.size(); ++i)
      if (sv[i] > cut) ++rep.algebra_dimension;
  }
  return rep;
}

// ---------- tractor volume ----------

std::vector<Jet> tractor_volume(const Scale& s, const Point& x, int order) {
  const int d = s.dim();
  const Point x0 = chart_centre(s.chart());
  auto X = seed(x, order);
  const auto& [nodes, weights] = gauss_legendre();
  Jet phi(d, order, 0.0);
  std::vector<Jet> y(d), dx(d);
  for (int a = 0; a < d; ++a) dx[a] = X[a] - Jet(d, order, x0[a]);
  for (std::size_t q = 0; q < nodes.size(); ++q) {
    for (int a = 0; a < d; ++a) y[a] = Jet(d, order, x0[a]) + dx[a] * nodes[q];
    auto g = s.connection().gamma.evaluate_jets(y);
    for (int a = 0; a < d; ++a) {
      Jet tr(0.0);
      for (int b = 0; b < d; ++b) tr += g.c[(b * d + a) * d + b];
      phi.add_product(tr, dx[a], weights[q]);
    }
  }
  return {exp(phi)};
}

double tractor_volume_broken_path(const Scale& s, const Point& x) {
  const int d = s.dim();
  const Point x0 = chart_centre(s.chart());
  Point corner = x0;
  corner[0] = x[0];
  const auto& [nodes, weights] = gauss_legendre();
  double phi = 0.0;
  for (const auto& [p, q] : {std::make_pair(x0, corner), std::make_pair(corner, x)}) {
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      Point y(d);
      for (int a = 0; a < d; ++a) y[a] = p[a] + nodes[k] * (q[a] - p[a]);
      auto g = s.connection().gamma.values(y);
      for (int a = 0; a < d; ++a) {
        double tr = 0.0;
        for (int b = 0; b < d; ++b) tr += g[(b * d + a) * d + b];
        phi += weights[k] * tr * (q[a] - p[a]);
      }
    }
  }
  return std::exp(phi);
}

VolumeReport tractor_volume_check(const Scale& s, const std::vector<Point>& points) {
  const int d = s.dim();
  VolumeReport rep;
  rep.min_value = std::numeric_limits<double>::infinity();
  double rmin = std::numeric_limits<double>::infinity(), rmax = -rmin;
  for (const auto& x : points) {
    Jet eps = tractor_volume(s, x, 1)[0];
    auto w = s.omega(x, 0);
    for (int a = 0; a < d; ++a) {
      double tr = 0.0;
      for (int r = 0; r <= d; ++r) tr += w[a](r, r).value();
      rep.parallel_residual =
          std::max(rep.parallel_residual, std::abs(eps.d(a) - tr * eps.value()) / eps.value());
    }
    double ratio = eps.value() / tractor_volume_broken_path(s, x);
    rmin = std::min(rmin, ratio);
    rmax = std::max(rmax, ratio);
    rep.min_value = std::min(rep.min_value, eps.value());
    ++rep.n_points;
  }
  rep.uniqueness_residual = rep.n_points ? rmax - rmin : 0.0;
  return rep;
}

}  // namespace tractorlab
