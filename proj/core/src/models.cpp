#include "tractorlab/models.hpp"

#include <cmath>
#include <random>

#include "tractorlab/errors.hpp"
#include "tractorlab/quaternion.hpp"

namespace tractorlab {

namespace {

struct JetQuat {
  Jet w, x, y, z;
};

JetQuat mul(const JetQuat& a, const JetQuat& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

JetQuat block(std::span<const Jet> Y, int b) {
  return {Y[4 * b], Y[4 * b + 1], Y[4 * b + 2], Y[4 * b + 3]};
}

void validate_signature(int m, int p, int q) {
  if (m != 1 && m != 2)
    throw CapabilityError("models are available for m = 1 and m = 2 (dimensions 7 and 11), got m = " +
                          std::to_string(m));
  if (p < 0 || q < 0 || p + q != m + 1)
    throw PreconditionError("signature (p, q) must satisfy p + q = m + 1, got (" +
                            std::to_string(p) + ", " + std::to_string(q) + ")");
}

std::string signature_tag(int p, int q) {
  return "(" + std::to_string(p) + "," + std::to_string(q) + ")";
}

}  // namespace

AmbientData make_ambient(int m, int p, int q) {
  validate_signature(m, p, q);
  AmbientData a;
  a.m = m;
  a.p = p;
  a.q = q;
  const int N = a.dim();
  a.h = Mat::Zero(N, N);
  for (int i = 0; i < N; ++i) a.h(i, i) = (i / 4 < p) ? 1.0 : -1.0;
  a.ijk = right_triple(m + 1);
  return a;
}

std::vector<Jet> gnomonic_lift(std::span<const Jet> x) {
  std::vector<Jet> Y;
  Y.reserve(x.size() + 1);
  Y.push_back(Jet(1.0));
  Y.insert(Y.end(), x.begin(), x.end());
  return Y;
}

double ModelGeometry::tau(const Point& x) const {
  double t = ambient.h(0, 0);
  for (std::size_t a = 0; a < x.size(); ++a) t += ambient.h(a + 1, a + 1) * x[a] * x[a];
  return t;
}

TensorField stratum_metric(const AmbientData& amb, const Chart& chart) {
  const int d = chart.dim();
  if (d != amb.dim() - 1) throw ShapeError("chart dimension does not match ambient data");
  std::vector<double> H(amb.dim());
  for (int i = 0; i < amb.dim(); ++i) H[i] = amb.h(i, i);
  return TensorField(
      chart, TensorShape::valence(d, 0, 2), 0.0, Jet::kMaxOrder,
      [H, d](std::span<const Jet> x) {
        auto Y = gnomonic_lift(x);
        Jet tau(H[0]);
        for (int a = 0; a < d; ++a) tau.add_product(x[a], x[a], H[a + 1]);
        Jet inv = reciprocal(tau);
        Jet inv2 = square(inv);
        std::vector<Jet> hy(d);
        for (int a = 0; a < d; ++a) hy[a] = x[a] * H[a + 1];
        std::vector<Jet> g(d * d);
        for (int a = 0; a < d; ++a)
          for (int b = a; b < d; ++b) {
            Jet e = -(hy[a] * hy[b]) * inv2;
            if (a == b) e.add_product(inv, Jet(H[a + 1]));
            g[a * d + b] = e;
            if (b != a) g[b * d + a] = std::move(e);
          }
        return g;
      },
      "g" + std::string(chart.name().empty() ? "" : "[" + chart.name() + "]"));
}

TensorField projected_linear_field(const Mat& A, const Chart& chart, std::string name) {
  const int d = chart.dim();
  if (A.rows() != d + 1) throw ShapeError("linear field matrix size");
  return TensorField(chart, TensorShape::vector(d), 0.0, Jet::kMaxOrder,
                     [A, d](std::span<const Jet> x) {
                       auto Y = gnomonic_lift(x);
                       std::vector<Jet> AY(d + 1, Jet(0.0));
                       for (int r = 0; r <= d; ++r)
                         for (int c = 0; c <= d; ++c)
                           if (A(r, c) != 0.0) AY[r].add_product(Jet(A(r, c)), Y[c]);
                       std::vector<Jet> v(d);
                       for (int a = 0; a < d; ++a) {
                         v[a] = AY[a + 1];
                         v[a].add_product(x[a], AY[0], -1.0);
                       }
                       return v;
                     },
                     std::move(name));
}

Mat to_tractor_order(const Mat& ambient) {
  const int N = static_cast<int>(ambient.rows());
  auto idx = [N](int r) { return r == N - 1 ? 0 : r + 1; };
  Mat out(N, N);
  for (int r = 0; r < N; ++r)
    for (int c = 0; c < N; ++c) out(r, c) = ambient(idx(r), idx(c));
  return out;
}

namespace {

JetMatrix flat_frame(const Point& x, int order, bool inverse_frame) {
  const int d = static_cast<int>(x.size());
  auto X = seed(x, order);
  JetMatrix B(d + 1, d + 1);
  for (int r = 0; r <= d; ++r) B(r, r) = Jet(d, order, 1.0);
  for (int r = 0; r < d; ++r) B(r, d) = inverse_frame ? -X[r] : X[r];
  return B;
}

}  // namespace

EndomorphismField flat_tractor_endomorphism(const Scale& s, const Mat& ambient,
                                            std::string name) {
  Mat A = to_tractor_order(ambient);
  EndomorphismField e;
  e.scale = s.name();
  e.name = std::move(name);
  e.matrix = [A](const Point& x, int order) {
    return flat_frame(x, order, true) * JetMatrix::from(A) * flat_frame(x, order, false);
  };
  return e;
}

EndomorphismField flat_tractor_form(const Scale& s, const Mat& ambient, std::string name) {
  Mat H = to_tractor_order(ambient);
  EndomorphismField e;
  e.scale = s.name();
  e.name = std::move(name);
  e.matrix = [H](const Point& x, int order) {
    auto B = flat_frame(x, order, false);
    return transpose(B) * JetMatrix::from(H) * B;
  };
  return e;
}

// ---------- Hopf projection ----------

std::vector<Jet> HopfProjection::project(std::span<const Jet> x) const {
  auto Y = gnomonic_lift(x);
  JetQuat q0 = block(Y, 0);
  Jet n2 = square(q0.w) + square(q0.x) + square(q0.y) + square(q0.z);
  Jet inv = reciprocal(n2);
  JetQuat q0inv{q0.w * inv, -(q0.x * inv), -(q0.y * inv), -(q0.z * inv)};
  std::vector<Jet> u;
  for (int b = 1; b <= m; ++b) {
    JetQuat r = mul(block(Y, b), q0inv);
    u.insert(u.end(), {r.w, r.x, r.y, r.z});
  }
  return u;
}

Point HopfProjection::project(const Point& x) const {
  std::vector<Jet> xj;
  for (double v : x) xj.emplace_back(v);
  auto u = project(std::span<const Jet>(xj));
  Point out;
  for (const auto& j : u) out.push_back(j.value());
  return out;
}

Point HopfProjection::section(const Point& u) const {
  Point x(3, 0.0);
  x.insert(x.end(), u.begin(), u.end());
  return x;
}

double HopfProjection::rho(const Point& u) const {
  double r = 1.0;
  for (int b = 0; b < m; ++b)
    for (int c = 0; c < 4; ++c) r += block_signs[b] * u[4 * b + c] * u[4 * b + c];
  return r;
}

HopfProjection hopf_projection(const ModelGeometry& model) {
  HopfProjection hp;
  hp.m = model.m;
  for (int b = 1; b <= model.m; ++b) hp.block_signs.push_back(b < model.p ? 1.0 : -1.0);
  Point centre(model.chart.dim());
  for (int a = 0; a < model.chart.dim(); ++a)
    centre[a] = 0.5 * (model.chart.lower()[a] + model.chart.upper()[a]);
  Point uc = hp.project(centre);
  double half = 0.8 * 0.5 * (model.chart.upper()[0] - model.chart.lower()[0]);
  std::vector<double> lo, hi;
  for (double v : uc) {
    lo.push_back(v - half);
    hi.push_back(v + half);
  }
  hp.quotient_chart = Chart("HP" + std::to_string(model.m) + " affine", lo, hi);
  return hp;
}

HopfResiduals check_hopf(const ModelGeometry& model, const std::vector<Point>& points,
                         std::uint64_t rng_seed) {
  if (!model.hopf) throw PreconditionError("model has no leaf projection");
  const HopfProjection& hp = *model.hopf;
  const AmbientData& amb = model.ambient;
  const int d = model.chart.dim();
  HopfResiduals res;
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> normal;
  std::array<TensorField, 3> fields;
  for (int s = 0; s < 3; ++s)
    fields[s] = projected_linear_field(amb.ijk[s], model.chart, std::string(1, "ijk"[s]));
  for (const auto& x : points) {
    Point u = hp.project(x);
    // fibre motion by right multiplication with a unit quaternion
    Quaternion r{normal(rng), normal(rng), normal(rng), normal(rng)};
    double nr = std::sqrt(r.norm2());
    r = (1.0 / nr) * r;
    std::vector<double> Y(d + 1);
    Y[0] = 1.0;
    for (int a = 0; a < d; ++a) Y[a + 1] = x[a];
    std::vector<double> Yr(d + 1);
    for (int b = 0; b <= model.m; ++b) {
      Quaternion qb{Y[4 * b], Y[4 * b + 1], Y[4 * b + 2], Y[4 * b + 3]};
      Quaternion out = qb * r;
      for (int c = 0; c < 4; ++c) Yr[4 * b + c] = out[c];
    }
    if (std::abs(Yr[0]) > 1e-3) {
      Point xr(d);
      for (int a = 0; a < d; ++a) xr[a] = Yr[a + 1] / Yr[0];
      Point ur = hp.project(xr);
      for (std::size_t c = 0; c < u.size(); ++c)
        res.fiber_drift = std::max(res.fiber_drift, std::abs(ur[c] - u[c]));
    }
    // d pi kills the fibre directions
    auto X = seed(x, 1);
    auto uj = hp.project(std::span<const Jet>(X));
    for (int s = 0; s < 3; ++s) {
      auto v = fields[s].values(x);
      for (const auto& comp : uj) {
        double dv = 0.0;
        for (int a = 0; a < d; ++a) dv += comp.d(a) * v[a];
        res.kernel = std::max(res.kernel, std::abs(dv));
      }
    }
    Point back = hp.project(hp.section(u));
    for (std::size_t c = 0; c < u.size(); ++c)
      res.section = std::max(res.section, std::abs(back[c] - u[c]));
    ++res.n_points;
  }
  return res;
}

// ---------- models ----------

ModelGeometry make_round_sphere(int m, int p, int q, int stratum) {
  validate_signature(m, p, q);
  if (stratum != 1 && stratum != -1) throw PreconditionError("stratum must be +1 or -1");
  if (stratum == 1 && p < 1) throw PreconditionError("the + stratum needs p >= 1");
  if (stratum == -1 && q < 1) throw PreconditionError("the - stratum needs q >= 1");
  ModelGeometry model;
  model.m = m;
  model.p = p;
  model.q = q;
  model.stratum = stratum;
  model.ambient = make_ambient(m, p, q);
  const int d = 4 * m + 3;
  if (stratum == 1) {
    model.name = "round_sphere";
    model.chart = Chart::cube("gnomonic" + signature_tag(p, q) + "+", d, 0.35);
  } else {
    model.name = "round_sphere_minus";
    std::vector<double> lo(d, -0.3), hi(d, 0.3);
    lo[4 * p - 1] += 2.0;
    hi[4 * p - 1] += 2.0;
    model.chart = Chart("gnomonic" + signature_tag(p, q) + "-", lo, hi);
  }
  model.metric = stratum_metric(model.ambient, model.chart);
  model.connection = levi_civita(*model.metric);
  SasakiTriple t;
  t.g = *model.metric;
  for (int s = 0; s < 3; ++s)
    t.xi[s] = projected_linear_field(model.ambient.ijk[s], model.chart, std::string(1, "ijk"[s]));
  t.p = stratum == 1 ? p : q;
  t.q = stratum == 1 ? q : p;
  model.triple = t;
  model.hopf = hopf_projection(model);
  const int pos = stratum == 1 ? 4 * p - 1 : 4 * q - 1;
  const int neg = stratum == 1 ? 4 * q : 4 * p;
  model.expected = {{"einstein_constant", 4.0 * m + 2},
                    {"quotient_einstein_constant", 4.0 * m + 8},
                    {"metric_signature_pos", double(pos)},
                    {"metric_signature_neg", double(neg)},
                    {"tractor_signature_pos", 4.0 * (stratum == 1 ? p : q)},
                    {"tractor_signature_neg", 4.0 * (stratum == 1 ? q : p)}};
  return model;
}

ModelGeometry make_flat_projective(int m, int p, int q) {
  validate_signature(m, p, q);
  ModelGeometry model;
  model.name = "flat_projective";
  model.m = m;
  model.p = p;
  model.q = q;
  model.stratum = (q == 0) ? 1 : (p == 0 ? -1 : 0);
  model.ambient = make_ambient(m, p, q);
  const int d = 4 * m + 3;
  model.chart = Chart::cube("affine" + signature_tag(p, q), d, 1.5);
  model.connection = flat_connection(model.chart);
  model.hopf = hopf_projection(model);
  model.expected = {{"einstein_constant", 4.0 * m + 2},
                    {"quotient_einstein_constant", 4.0 * m + 8},
                    {"tractor_signature_pos", 4.0 * p},
                    {"tractor_signature_neg", 4.0 * q}};
  return model;
}

ModelGeometry make_cone(const ModelGeometry& base) {
  if (!base.triple) throw PreconditionError("cone needs a model with a Killing triple");
  ModelGeometry model = base;
  model.name = "metric_cone";
  model.cone = cone_build(*base.triple);
  model.chart = model.cone->chart;
  model.metric = model.cone->metric;
  model.connection = levi_civita(*model.metric);
  model.hopf.reset();
  model.expected["cone_signature_pos"] = base.expected.at("metric_signature_pos") + 1;
  model.expected["cone_signature_neg"] = base.expected.at("metric_signature_neg");
  return model;
}

// ---------- catalog ----------

const std::vector<ModelInfo>& model_list() {
  static const std::vector<ModelInfo> list{
      {"round_sphere", "pseudo-sphere {h = 1} in H^{p,q} with its 3-Sasaki triple, gnomonic chart"},
      {"round_sphere_minus", "the - stratum {h = -1} with metric of signature (4q-1, 4p)"},
      {"flat_projective", "flat projective chart of the ray projectivisation of R^{4m+4}"},
      {"metric_cone", "metric cone dt^2 + t^2 g over round_sphere, t in [0.5, 2]"}};
  return list;
}

std::string self_check(const ModelGeometry& model) {
  auto pts = model.chart.sample_points(3, 17);
  if (model.triple && !model.cone) {
    auto r = check_3sasaki(*model.triple, pts);
    if (!(r.max() <= 1e-7)) return "3-Sasaki residual " + std::to_string(r.max());
    auto sig = signature(Eigen::Map<const Mat>(model.metric->values(pts[0]).data(),
                                               model.chart.dim(), model.chart.dim()));
    if (sig.first != model.expected.at("metric_signature_pos") ||
        sig.second != model.expected.at("metric_signature_neg"))
      return "metric signature mismatch";
  }
  if (model.hopf) {
    auto r = check_hopf(model, pts, 5);
    if (!(std::max({r.fiber_drift, r.kernel, r.section}) <= 1e-9)) return "Hopf projection";
  }
  if (model.name == "flat_projective") {
    Scale s(model.connection);
    double r = 0.0;
    for (const auto& x : pts) {
      for (const auto& A : model.ambient.ijk)
        for (const auto& m : adjoint_derivative(s, flat_tractor_endomorphism(s, A, "A"), x))
          r = std::max(r, max_abs(m.values()));
      for (const auto& m : metric_derivative(s, flat_tractor_form(s, model.ambient.h, "h"), x))
        r = std::max(r, max_abs(m.values()));
    }
    if (!(r <= 1e-12)) return "flat tractor data not parallel";
  }
  if (model.cone) {
    auto r = check_cone(*model.cone, model.chart.sample_points(2, 17));
    if (!(std::max({r.almost_complex, r.hermitian, r.parallel}) <= 1e-7))
      return "cone hyperkaehler residual";
  }
  return {};
}

ModelGeometry get_model(const std::string& name, int m, int p, int q) {
  ModelGeometry model;
  if (name == "round_sphere") model = make_round_sphere(m, p, q, 1);
  else if (name == "round_sphere_minus") model = make_round_sphere(m, p, q, -1);
  else if (name == "flat_projective") model = make_flat_projective(m, p, q);
  else if (name == "metric_cone") model = make_cone(make_round_sphere(m, p, q, 1));
  else {
    std::string names;
    for (const auto& info : model_list()) names += (names.empty() ? "" : ", ") + info.name;
    throw ModelError("unknown model '" + name + "'; valid models: " + names);
  }
  auto failure = self_check(model);
  if (!failure.empty())
    throw ModelError("model '" + name + "' failed its self-check: " + failure);
  return model;
}

}  // namespace tractorlab
