#include "tractorlab/strat.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "tractorlab/errors.hpp"
#include "tractorlab/heisenberg.hpp"
#include "tractorlab/quaternion.hpp"

namespace tractorlab {

namespace {

int sign_label(double tau, double tol) { return tau > tol ? 1 : (tau < -tol ? -1 : 0); }

double tau_value(const TensorField& tau, const Point& x) { return tau.values(x)[0]; }

Mat null_space(const Mat& rows, double tol = 1e-10) {
  Eigen::JacobiSVD<Mat> svd(rows, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * std::max(1.0, sv(0))) ++rank;
  return svd.matrixV().rightCols(rows.cols() - rank);
}

}  // namespace

TensorField tau_field(const Scale& s, const EndomorphismField& h) {
  const int d = s.dim();
  return TensorField(s.chart(), TensorShape::scalar(d), 2.0, h.max_order,
                     make_pointwise_rule([h, d](const Point& x, int order) {
                       auto H = h.evaluate(x, order);
                       return std::vector<Jet>{H(d, d)};
                     }),
                     "tau");
}

Stratification stratify(const TensorField& tau, const std::vector<Point>& points,
                        double rel_band) {
  Stratification st;
  st.points = points;
  double mx = 0.0;
  for (const auto& x : points) {
    st.tau.push_back(tau_value(tau, x));
    mx = std::max(mx, std::abs(st.tau.back()));
  }
  st.tol_zero = rel_band * mx;
  for (double t : st.tau) {
    int l = sign_label(t, st.tol_zero);
    st.labels.push_back(l);
    (l > 0 ? st.plus : (l < 0 ? st.minus : st.zero))++;
  }
  st.degenerate = 2 * st.zero > static_cast<int>(points.size());
  return st;
}

Stratification stratify(const Scale& s, const EndomorphismField& h,
                        const std::vector<Point>& points, double rel_band,
                        double parallel_tol) {
  for (const auto& x : points) {
    double scale = std::max(1.0, max_abs(h.evaluate(x, 0).values()));
    for (const auto& dh : metric_derivative(s, h, x))
      if (!(max_abs(dh.values()) <= parallel_tol * scale))
        throw PreconditionError("stratify: tractor form '" + h.name + "' is not parallel");
  }
  return stratify(tau_field(s, h), points, rel_band);
}

M0Search locate_m0(const TensorField& tau, const Chart& chart, int lines, int nodes,
                   std::uint64_t rng_seed, double tol) {
  M0Search res;
  const int d = chart.dim();
  // Bisects x(t) on [a, b] where tau changes sign, then polishes along grad tau.
  auto refine = [&](const std::function<Point(double)>& at, double a, double b, double fa) {
    ++res.sign_changes;
    for (int it = 0; it < 80 && b - a > 1e-15; ++it) {
      double mid = 0.5 * (a + b);
      double fm = tau_value(tau, at(mid));
      if ((fm < 0) == (fa < 0)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
      }
    }
    Point x = at(0.5 * (a + b));
    for (int it = 0; it < 8; ++it) {
      auto t = tau.evaluate(x, 1);
      double v = t.c[0].value();
      if (std::abs(v) <= 0.01 * tol) break;
      double g2 = 0.0;
      for (int c = 0; c < d; ++c) g2 += t.c[0].d(c) * t.c[0].d(c);
      if (g2 == 0.0) break;
      Point y = x;
      for (int c = 0; c < d; ++c) y[c] -= v * t.c[0].d(c) / g2;
      if (!chart.contains(y)) break;
      x = y;
    }
    double v = std::abs(tau_value(tau, x));
    if (v <= tol) {
      res.roots.push_back(x);
      res.max_abs_tau = std::max(res.max_abs_tau, v);
      ++res.separated;
    }
  };

  auto bases = chart.sample_points(lines, rng_seed);
  for (int l = 0; l < lines; ++l) {
    const int axis = l % d;
    const double lo = chart.lower()[axis], hi = chart.upper()[axis];
    const double margin = 0.01 * (hi - lo);
    auto at = [&](double t) {
      Point x = bases[l];
      x[axis] = t;
      return x;
    };
    std::vector<double> ts(nodes), vals(nodes);
    for (int k = 0; k < nodes; ++k) {
      ts[k] = lo + margin + (hi - lo - 2 * margin) * k / (nodes - 1);
      vals[k] = tau_value(tau, at(ts[k]));
    }
    ++res.lines;
    for (int k = 0; k + 1 < nodes; ++k)
      if (vals[k] * vals[k + 1] < 0.0) refine(at, ts[k], ts[k + 1], vals[k]);
  }

  // Segments between consecutive sample points of opposite sign; the chart
  // is a box, so segments stay inside.
  std::vector<double> base_vals(bases.size());
  for (std::size_t l = 0; l < bases.size(); ++l) base_vals[l] = tau_value(tau, bases[l]);
  for (std::size_t l = 0; l + 1 < bases.size(); ++l) {
    if (!(base_vals[l] * base_vals[l + 1] < 0.0)) continue;
    const Point& a = bases[l];
    const Point& b = bases[l + 1];
    auto at = [&](double t) {
      Point x(a.size());
      for (std::size_t c = 0; c < a.size(); ++c) x[c] = (1 - t) * a[c] + t * b[c];
      return x;
    };
    ++res.lines;
    refine(at, 0.0, 1.0, base_vals[l]);
  }

  // Rays from each sample point along -sign(tau) grad tau, clipped to the box.
  for (std::size_t l = 0; l < bases.size(); ++l) {
    const Point& x0 = bases[l];
    auto t0 = tau.evaluate(x0, 1);
    Vec dir(d);
    for (int c = 0; c < d; ++c) dir(c) = -std::copysign(1.0, base_vals[l]) * t0.c[0].d(c);
    if (dir.norm() == 0.0) continue;
    dir /= dir.norm();
    double tmax = std::numeric_limits<double>::infinity();
    for (int c = 0; c < d; ++c) {
      const double margin = 0.01 * (chart.upper()[c] - chart.lower()[c]);
      if (dir(c) > 0) tmax = std::min(tmax, (chart.upper()[c] - margin - x0[c]) / dir(c));
      if (dir(c) < 0) tmax = std::min(tmax, (chart.lower()[c] + margin - x0[c]) / dir(c));
    }
    if (!(tmax > 0.0)) continue;
    auto at = [&](double t) {
      Point x = x0;
      for (int c = 0; c < d; ++c) x[c] += t * dir(c);
      return x;
    };
    ++res.lines;
    double prev_t = 0.0, prev_v = base_vals[l];
    for (int k = 1; k < nodes; ++k) {
      double t = tmax * k / (nodes - 1);
      double v = tau_value(tau, at(t));
      if (prev_v * v < 0.0) {
        refine(at, prev_t, t, prev_v);
        break;
      }
      prev_t = t;
      prev_v = v;
    }
  }
  return res;
}

LabelInvariance label_scale_invariance(const Scale& s, const EndomorphismField& h,
                                       const TensorField& f, const std::vector<Point>& points,
                                       double rel_band) {
  ScaleChange sc = change_scale(s, f);
  auto before = stratify(tau_field(s, h), points, rel_band);
  auto after = stratify(tau_field(sc.to, sc.transform_form(h)), points, rel_band);
  LabelInvariance li;
  li.min_ratio = INFINITY;
  li.max_ratio = -INFINITY;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (before.labels[i] != after.labels[i]) ++li.flips;
    if (before.labels[i] == 0) continue;
    double ratio = after.tau[i] / before.tau[i];
    li.min_ratio = std::min(li.min_ratio, ratio);
    li.max_ratio = std::max(li.max_ratio, ratio);
    double expected = std::exp(-2.0 * f.values(points[i])[0]);
    li.ratio_residual = std::max(li.ratio_residual, std::abs(ratio - expected));
  }
  return li;
}

double normalized_field_norm(const TensorField& xi, const std::vector<Point>& points) {
  double mn = INFINITY;
  for (const auto& x : points) {
    auto v = xi.values(x);
    double vv = 0.0, yy = 1.0, vy = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) {
      vv += v[a] * v[a];
      yy += x[a] * x[a];
      vy += v[a] * x[a];
    }
    mn = std::min(mn, std::sqrt(std::max(0.0, vv * yy - vy * vy)) / yy);
  }
  return mn;
}

// ---------- Einstein metrics on the strata ----------

StratumMetricReport einstein_metric_on_stratum(int m, int p, int q, int stratum,
                                               const std::vector<Point>& points,
                                               double rel_band) {
  StratumMetricReport rep;
  rep.model = make_round_sphere(m, p, q, stratum);
  const Chart& chart = rep.model.chart;
  const int d = chart.dim();

  std::vector<Point> probes = chart.sample_points(64, 3);
  probes.insert(probes.end(), points.begin(), points.end());
  if (d <= 12)
    for (int mask = 0; mask < (1 << d); ++mask) {
      Point c(d);
      for (int a = 0; a < d; ++a) c[a] = (mask >> a & 1) ? chart.upper()[a] : chart.lower()[a];
      probes.push_back(c);
    }
  double mx = 0.0, margin = INFINITY;
  for (const auto& x : probes) {
    double t = rep.model.tau(x);
    mx = std::max(mx, std::abs(t));
    margin = std::min(margin, stratum * t);
  }
  rep.band_margin = margin;
  if (!(margin > rel_band * mx))
    throw DomainError("stratum patch '" + chart.name() + "' meets the band around M0");

  const TensorField& g = *rep.model.metric;
  const Connection& lc = rep.model.connection;
  const double einstein = 4.0 * m + 2;
  bool first = true;
  for (std::size_t idx = 0; idx < points.size(); ++idx) {
    const Point& x = points[idx];
    auto gv = g.values(x);
    auto cur = curvature_at(lc, x, 0);
    for (int i = 0; i < d * d; ++i)
      rep.ricci = std::max(rep.ricci, std::abs(cur.Ric.c[i].value() - einstein * gv[i]));
    rep.weyl = std::max(rep.weyl, max_abs(cur.W));
    auto sig = signature(Eigen::Map<const Mat>(gv.data(), d, d));
    if (first) rep.signature = sig;
    else if (sig != rep.signature) rep.signature_constant = false;
    first = false;

    auto gam = lc.gamma_at(x, 1);
    std::vector<Jet> ups(d, Jet(0.0));
    for (int a = 0; a < d; ++a)
      for (int c = 0; c < d; ++c) ups[a] += gam.c[(c * d + a) * d + c] * (1.0 / (d + 1));
    for (int c = 0; c < d; ++c)
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          double r = gam.c[(c * d + a) * d + b].value() - (c == b ? ups[a].value() : 0.0) -
                     (c == a ? ups[b].value() : 0.0);
          rep.projective = std::max(rep.projective, std::abs(r));
        }
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b)
        rep.upsilon_closed = std::max(rep.upsilon_closed, std::abs(ups[b].d(a) - ups[a].d(b)));
    std::vector<double> v(d);
    for (int a = 0; a < d; ++a) v[a] = std::cos(1.0 + 0.7 * a + 0.3 * idx);
    double uv = 0.0;
    for (int a = 0; a < d; ++a) uv += ups[a].value() * v[a];
    for (int c = 0; c < d; ++c) {
      double s = 0.0;
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) s += gam.c[(c * d + a) * d + b].value() * v[a] * v[b];
      rep.spray = std::max(rep.spray, std::abs(s - 2.0 * uv * v[c]));
    }
    ++rep.n_points;
  }
  rep.triple = check_3sasaki(*rep.model.triple, points);
  return rep;
}

// ---------- D ----------

IntegrabilityReport check_D_integrability(const std::vector<TensorField>& fields,
                                          const std::vector<Point>& points, double rank_tol) {
  IntegrabilityReport rep;
  const int r = static_cast<int>(fields.size());
  if (r == 0) throw ShapeError("check_D_integrability: no fields");
  const int d = fields[0].dim();
  rep.rank = r;
  rep.min_singular_value = INFINITY;
  for (const auto& x : points) {
    Mat F(d, r);
    for (int s = 0; s < r; ++s) {
      auto v = fields[s].values(x);
      Vec col = Eigen::Map<const Vec>(v.data(), d);
      double n = col.norm();
      F.col(s) = n > 0 ? Vec(col / n) : col;
    }
    Eigen::JacobiSVD<Mat> svd(F);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > rank_tol) ++rank;
    rep.min_singular_value = std::min(rep.min_singular_value, sv(sv.size() - 1));
    if (rank < rep.rank) rep.rank = rank;
    if (rank < r && !rep.rank_drop) rep.rank_drop = x;
    if (r == 3)
      for (int s = 0; s < 3; ++s) {
        auto br = lie_bracket(fields[s], fields[(s + 1) % 3], x);
        auto z = fields[(s + 2) % 3].values(x);
        for (int c = 0; c < d; ++c)
          rep.commutators = std::max(rep.commutators, std::abs(br[c] + 2.0 * z[c]));
      }
    ++rep.n_points;
  }
  return rep;
}

// ---------- adapted scales ----------

double AdaptedScaleReport::max_family() const {
  double m = 0.0;
  for (const auto& [name, v] : families) m = std::max(m, v);
  return m;
}

double AdaptedScaleReport::family(const std::string& name) const {
  for (const auto& [n, v] : families)
    if (n == name) return v;
  throw Error("unknown identity family '" + name + "'");
}

AdaptedScaleReport check_adapted_scale(const Scale& s, const std::array<TensorField, 3>& ijk,
                                       const std::vector<Point>& points, double div_tol) {
  const int d = s.dim();
  AdaptedScaleReport rep;
  const std::vector<std::string> names{"a.i_nabla_i",     "a.P_ii",
                                       "a.P_i_nabla_i",   "a.nabla_i_squared",
                                       "b.P_orthogonal",  "c.i_nabla_j",
                                       "c.P_nabla_j",     "d.nabla_i_nabla_j",
                                       "d.nabla_j_nabla_i", "q.Q_parallel"};
  std::vector<double> fam(names.size(), 0.0);
  auto upd = [&](int f, double v) { fam[f] = std::max(fam[f], std::abs(v)); };

  struct Data {
    std::vector<double> v;
    std::vector<double> N;   // N[a*d + c] = nabla_a v^c
    std::vector<double> NN;  // nabla_a nabla_b v^c
  };
  std::vector<Data> all;
  for (const auto& x : points) {
    auto gam = s.connection().gamma_at(x, 1);
    auto cur = curvature_from_gamma(gam);
    std::vector<double> P(d * d);
    for (int i = 0; i < d * d; ++i) P[i] = cur.P.c[i].value();
    std::array<Data, 3> F;
    for (int t = 0; t < 3; ++t) {
      auto v = ijk[t].evaluate(x, 2);
      auto dv = covariant_derivative(v, gam);
      auto ddv = covariant_derivative(dv, gam);
      F[t].v = v.values();
      F[t].N = dv.values();
      F[t].NN = ddv.values();
      double div = 0.0;
      for (int a = 0; a < d; ++a) div += F[t].N[a * d + a];
      rep.divergence[t] = std::max(rep.divergence[t], std::abs(div));
    }
    for (int t = 0; t < 3; ++t)
      if (!(rep.divergence[t] <= div_tol))
        throw NotAdaptedError("scale '" + s.name() + "' is not (i,j,k)-adapted",
                              {rep.divergence[0], rep.divergence[1], rep.divergence[2]});

    auto Pm = [&](int a, int b) { return P[a * d + b]; };
    for (int t = 0; t < 3; ++t) {
      const Data& X = F[t];
      const Data& Y = F[(t + 1) % 3];
      const Data& Z = F[(t + 2) % 3];
      auto N = [d](const Data& D, int a, int c) { return D.N[a * d + c]; };
      auto Pv = [&](const Data& D, int a) {
        double r = 0.0;
        for (int c = 0; c < d; ++c) r += Pm(a, c) * D.v[c];
        return r;
      };
      double pxx = 0.0, pxy = 0.0;
      for (int a = 0; a < d; ++a) {
        pxx += X.v[a] * Pv(X, a);
        pxy += X.v[a] * Pv(Y, a);
      }
      upd(1, pxx - 1.0);
      upd(4, pxy);
      for (int b = 0; b < d; ++b) {
        double a1 = 0.0, a3 = 0.0, c1 = 0.0, c1b = 0.0;
        for (int a = 0; a < d; ++a) {
          a1 += X.v[a] * N(X, a, b);
          c1 += X.v[a] * N(Y, a, b);
          c1b += Y.v[a] * N(X, a, b);
          a3 += Pv(X, a) * N(X, b, a);
        }
        upd(0, a1);
        upd(2, a3);
        upd(5, c1 + Z.v[b]);
        upd(5, c1b - Z.v[b]);
      }
      for (int a = 0; a < d; ++a) {
        double c2 = 0.0, c2b = 0.0;
        for (int b = 0; b < d; ++b) {
          c2 += Pv(X, b) * N(Y, a, b);
          c2b += Pv(Y, b) * N(X, a, b);
        }
        upd(6, c2 - Pv(Z, a));
        upd(6, -c2b - Pv(Z, a));
        for (int c = 0; c < d; ++c) {
          double a4 = 0.0, d1 = 0.0, d2 = 0.0;
          for (int e = 0; e < d; ++e) {
            a4 += N(X, e, c) * N(X, a, e);
            d1 += N(X, e, c) * N(Y, a, e);
            d2 += N(Y, e, c) * N(X, a, e);
          }
          upd(3, a4 - X.v[c] * Pv(X, a) + (a == c ? 1.0 : 0.0));
          upd(7, d1 - Pv(Y, a) * X.v[c] - N(Z, a, c));
          upd(8, -d2 + Pv(X, a) * Y.v[c] - N(Z, a, c));
          for (int b = 0; b < d; ++b)
            upd(9, X.NN[(a * d + b) * d + c] + Pm(a, b) * X.v[c] - (a == c ? Pv(X, b) : 0.0));
        }
      }
      auto lie = lie_derivative_connection_at(ijk[t], s.connection(), x, 0);
      rep.affine_symmetry = std::max(rep.affine_symmetry, max_abs(lie));
    }
    ++rep.n_points;
  }
  for (std::size_t f = 0; f < names.size(); ++f) rep.families.emplace_back(names[f], fam[f]);
  return rep;
}

// ---------- M0 ----------

std::array<Mat, 3> quotient_quaternionic_structure(int m) { return right_triple(m); }

M0Report m0_checks(int m, int p, int q, int lines, std::uint64_t rng_seed) {
  if (p < 1 || q < 1) throw PreconditionError("m0_checks needs p, q >= 1");
  ModelGeometry model = make_flat_projective(m, p, q);
  const AmbientData& amb = model.ambient;
  const int d = model.chart.dim();
  Scale s(model.connection);
  EndomorphismField h = flat_tractor_form(s, amb.h, "h");
  std::array<EndomorphismField, 3> Q{flat_tractor_endomorphism(s, amb.ijk[0], "I"),
                                     flat_tractor_endomorphism(s, amb.ijk[1], "J"),
                                     flat_tractor_endomorphism(s, amb.ijk[2], "K")};
  M0Report rep;
  rep.search = locate_m0(tau_field(s, h), model.chart, lines, 17, rng_seed);
  if (rep.search.roots.empty()) throw PreconditionError("m0_checks: no M0 points located");

  const Mat Htop = amb.h.bottomRightCorner(d, d);
  bool first = true;
  for (const auto& x : rep.search.roots) {
    Vec Y(d + 1);
    Y(0) = 1.0;
    for (int a = 0; a < d; ++a) Y(a + 1) = x[a];
    Vec grad = 2.0 * (amb.h * Y).tail(d);
    Mat E = null_space(grad.transpose());
    auto sig = signature(E.transpose() * Htop * E);
    if (first) rep.conformal_signature = sig;
    else if (sig != rep.conformal_signature) rep.conformal_signature_constant = false;
    first = false;

    Mat hv = h.evaluate(x, 0).values();
    std::array<Vec, 3> xi;
    for (int r = 0; r < 3; ++r) {
      Mat A = Q[r].evaluate(x, 0).values();
      rep.x_orthogonality = std::max(rep.x_orthogonality, std::abs((hv * A)(d, d)));
      xi[r] = A.col(d).head(d);
      rep.tangency = std::max(rep.tangency, std::abs(grad.dot(xi[r])));
    }
    for (int r = 0; r < 3; ++r)
      for (int t = r; t < 3; ++t)
        rep.null_orthogonal =
            std::max(rep.null_orthogonal, std::abs(xi[r].dot(Htop * xi[t])));
    ++rep.n_points;
  }

  // Leaf quotient of M0 at the image of the first root.
  const HopfProjection& hp = *model.hopf;
  const int n4 = 4 * m;
  Point u0 = hp.project(rep.search.roots.front());
  Mat S = Mat::Zero(n4, n4);
  for (int b = 0; b < m; ++b)
    for (int c = 0; c < 4; ++c) S(4 * b + c, 4 * b + c) = hp.block_signs[b];
  auto Qt = quotient_quaternionic_structure(m);
  auto rows_at = [&](const Vec& grad) {
    Mat W(4, n4);
    W.row(0) = grad.transpose();
    for (int r = 0; r < 3; ++r) W.row(r + 1) = grad.transpose() * Qt[r];
    return W;
  };
  Vec u0v = Eigen::Map<const Vec>(u0.data(), n4);
  Mat W0 = rows_at(2.0 * S * u0v);
  Mat E = null_space(W0);
  const int hdim = static_cast<int>(E.cols());
  rep.h0_dimension = hdim;
  rep.h0_corank = (n4 - 1) - hdim;
  if (hdim == 0) return rep;
  Mat PH = E * E.transpose();
  for (int r = 0; r < 3; ++r)
    rep.h0_invariance = std::max(
        rep.h0_invariance, max_abs((Mat::Identity(n4, n4) - PH) * Qt[r] * PH));

  // Cartan: theta_r(v) = <Q_r^T grad rho, v>, Levi form = -d theta_r.
  std::array<Mat, 3> omega;
  for (int r = 0; r < 3; ++r) omega[r] = -2.0 * (S * Qt[r] - Qt[r].transpose() * S);

  // Independent route: bracket of projected extensions X(u) = P_H(u) X0.
  {
    auto uj = seed(u0, 1);
    JetMatrix W(4, n4);
    for (int c = 0; c < n4; ++c) {
      Jet gc = 2.0 * S(c, c) * uj[c];
      W(0, c) = gc;
    }
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < n4; ++c) {
        Jet acc(0.0);
        for (int a = 0; a < n4; ++a)
          if (Qt[r](a, c) != 0.0) acc += W(0, a) * Qt[r](a, c);
        W(r + 1, c) = acc;
      }
    JetMatrix WWt = W * transpose(W);
    JetMatrix proj = JetMatrix::identity(n4) - transpose(W) * inverse(WWt) * W;
    auto extend = [&](const Vec& X0) {
      std::vector<Jet> X(n4, Jet(0.0));
      for (int c = 0; c < n4; ++c)
        for (int a = 0; a < n4; ++a) X[c] += proj(c, a) * X0(a);
      return X;
    };
    for (int s1 = 0; s1 < hdim; ++s1)
      for (int s2 = s1 + 1; s2 < hdim; ++s2) {
        auto X = extend(E.col(s1)), Yf = extend(E.col(s2));
        Vec br = Vec::Zero(n4);
        for (int c = 0; c < n4; ++c)
          for (int a = 0; a < n4; ++a)
            br(c) += X[a].value() * Yf[c].d(a) - Yf[a].value() * X[c].d(a);
        for (int r = 0; r < 3; ++r) {
          double lhs = (W0.row(r + 1)).dot(br);
          double rhs = E.col(s1).dot(omega[r] * E.col(s2));
          rep.levi_crosscheck = std::max(rep.levi_crosscheck, std::abs(lhs - rhs));
        }
      }
  }

  std::array<Mat, 3> wH, qH;
  for (int r = 0; r < 3; ++r) {
    wH[r] = E.transpose() * omega[r] * E;
    qH[r] = E.transpose() * Qt[r] * E;
  }
  {
    const int pairs = hdim * (hdim - 1) / 2;
    Mat L(3, pairs);
    int col = 0;
    for (int a = 0; a < hdim; ++a)
      for (int b = a + 1; b < hdim; ++b, ++col)
        for (int r = 0; r < 3; ++r) L(r, col) = wH[r](a, b);
    Eigen::JacobiSVD<Mat> svd(L);
    rep.levi_rank_min = svd.singularValues()(2);
  }

  // Metric on H0: symmetric part of omega_1(X, Q_1 Y), then quaternionic
  // Gram-Schmidt into blocks (X, -Q_1 X, -Q_2 X, -Q_3 X); Q = -R, so these
  // match the reference basis (e, e i, e j, e k).
  Mat gH = wH[0] * qH[0];
  gH = 0.5 * (gH + gH.transpose());
  Mat rest = Mat::Identity(hdim, hdim);
  std::vector<std::pair<int, Mat>> blocks;
  const int nblocks = hdim / 4;
  for (int bl = 0; bl < nblocks; ++bl) {
    int best = 0;
    double bv = 0.0;
    for (int c = 0; c < rest.cols(); ++c) {
      double v = std::abs(rest.col(c).dot(gH * rest.col(c)));
      if (v > bv) {
        bv = v;
        best = c;
      }
    }
    if (bv < 1e-12) throw RankError("m0_checks: Levi form degenerate on H0");
    Vec v = rest.col(best);
    double gv = v.dot(gH * v);
    v /= std::sqrt(std::abs(gv));
    Mat B(hdim, 4);
    B.col(0) = v;
    for (int r = 0; r < 3; ++r) B.col(r + 1) = -(qH[r] * v);
    blocks.emplace_back(gv > 0 ? 1 : -1, B);
    for (int c = 0; c < rest.cols(); ++c)
      for (int k = 0; k < 4; ++k) {
        double gkk = B.col(k).dot(gH * B.col(k));
        rest.col(c) -= (rest.col(c).dot(gH * B.col(k)) / gkk) * B.col(k);
      }
  }
  std::stable_sort(blocks.begin(), blocks.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  Mat F(hdim, 4 * nblocks);
  for (int bl = 0; bl < nblocks; ++bl) {
    F.middleCols(4 * bl, 4) = blocks[bl].second;
    (blocks[bl].first > 0 ? rep.heisenberg_signature.first : rep.heisenberg_signature.second)++;
  }
  auto ref = heisenberg_structure(rep.heisenberg_signature.first, rep.heisenberg_signature.second);
  const int nn = 4 * nblocks;
  Mat M(nn * nn, 3);
  for (int r = 0; r < 3; ++r) M.col(r) = Eigen::Map<const Vec>(ref[r].data(), nn * nn);
  rep.fit_matrix = Mat::Zero(3, 3);
  double resid = 0.0, scale = 0.0;
  for (int sidx = 0; sidx < 3; ++sidx) {
    Mat Om = F.transpose() * wH[sidx] * F;
    Vec target = Eigen::Map<const Vec>(Om.data(), nn * nn);
    Vec a = M.colPivHouseholderQr().solve(target);
    rep.fit_matrix.row(sidx) = a.transpose();
    resid = std::max(resid, (M * a - target).cwiseAbs().maxCoeff());
    scale = std::max(scale, target.cwiseAbs().maxCoeff());
  }
  rep.heisenberg_fit = scale > 0 ? resid / scale : INFINITY;
  return rep;
}

}  // namespace tractorlab
