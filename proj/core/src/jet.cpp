#include "tractorlab/jet.hpp"

#include <algorithm>
#include <cmath>

#include "tractorlab/errors.hpp"

namespace tractorlab {

namespace {

// Writes v into every distinct permutation of (i, j, k), i <= j <= k.
inline void put3(double* t, int n, int i, int j, int k, double v) {
  auto at = [&](int a, int b, int c) -> double& { return t[(a * n + b) * n + c]; };
  at(i, j, k) += v;
  if (i == j && j == k) return;
  if (i == j) {
    at(i, k, i) += v;
    at(k, i, i) += v;
    return;
  }
  if (j == k) {
    at(j, i, j) += v;
    at(j, j, i) += v;
    return;
  }
  at(i, k, j) += v;
  at(j, i, k) += v;
  at(j, k, i) += v;
  at(k, i, j) += v;
  at(k, j, i) += v;
}

// out += s * (a * b) for jets of identical dim n and order.
void accumulate_product(double* out, const double* a, const double* b, int n,
                        int order, double s) {
  out[0] += s * a[0] * b[0];
  if (order < 1) return;
  const double* ag = a + 1;
  const double* bg = b + 1;
  double* og = out + 1;
  for (int i = 0; i < n; ++i) og[i] += s * (a[0] * bg[i] + ag[i] * b[0]);
  if (order < 2) return;
  const double* ah = ag + n;
  const double* bh = bg + n;
  double* oh = og + n;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double v = a[0] * bh[i * n + j] + ag[i] * bg[j] + ag[j] * bg[i] +
                 ah[i * n + j] * b[0];
      oh[i * n + j] += s * v;
      if (j != i) oh[j * n + i] += s * v;
    }
  }
  if (order < 3) return;
  const double* at = ah + n * n;
  const double* bt = bh + n * n;
  double* ot = oh + n * n;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      for (int k = j; k < n; ++k) {
        double v = a[0] * bt[(i * n + j) * n + k] + ag[i] * bh[j * n + k] +
                   ag[j] * bh[i * n + k] + ag[k] * bh[i * n + j] +
                   ah[i * n + j] * bg[k] + ah[i * n + k] * bg[j] +
                   ah[j * n + k] * bg[i] + at[(i * n + j) * n + k] * b[0];
        put3(ot, n, i, j, k, s * v);
      }
    }
  }
}

}  // namespace

int Jet::storage_size(int dim, int order) {
  int size = 1;
  int p = 1;
  for (int o = 1; o <= order; ++o) {
    p *= dim;
    size += p;
  }
  return size;
}

Jet::Jet(double c) : dim_(0), order_(kMaxOrder), data_(1, c) {}

Jet::Jet(int dim, int order, double value) : dim_(dim), order_(order) {
  if (order < 0 || order > kMaxOrder) {
    throw CapabilityError("jet order " + std::to_string(order) +
                          " unsupported (max " + std::to_string(kMaxOrder) + ")");
  }
  if (dim < 0) throw ShapeError("negative jet dimension");
  if (dim == 0) order_ = kMaxOrder;
  data_.assign(storage_size(dim_, dim_ == 0 ? 0 : order_), 0.0);
  data_[0] = value;
}

Jet Jet::variable(int dim, int order, int index, double value) {
  Jet j(dim, order, value);
  if (order >= 1) j.d(index) = 1.0;
  return j;
}

void Jet::promote(int dim, int order) {
  if (is_constant()) {
    double v = data_[0];
    *this = Jet(dim, order, v);
    return;
  }
  if (dim != dim_) throw ShapeError("jets over different variable counts");
  if (order < order_) *this = truncated(order);
}

Jet Jet::derivative(int i) const {
  if (is_constant()) return Jet(0.0);
  if (order_ < 1) throw CapabilityError("derivative of an order-0 jet");
  const int n = dim_;
  Jet r(n, order_ - 1, d(i));
  if (order_ >= 2) {
    for (int j = 0; j < n; ++j) r.d(j) = d(i, j);
  }
  if (order_ >= 3) {
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) r.d(j, k) = d(i, j, k);
  }
  return r;
}

Jet Jet::truncated(int order) const {
  if (is_constant() || order >= order_) return *this;
  Jet r(dim_, order);
  std::copy_n(data_.begin(), r.data_.size(), r.data_.begin());
  return r;
}

Jet Jet::restrict_to(std::span<const int> vars) const {
  if (is_constant()) return *this;
  const int m = static_cast<int>(vars.size());
  Jet r(m, order_, value());
  for (int a = 0; a < m && order_ >= 1; ++a) {
    r.d(a) = d(vars[a]);
    if (order_ < 2) continue;
    for (int b = 0; b < m; ++b) {
      r.d(a, b) = d(vars[a], vars[b]);
      if (order_ < 3) continue;
      for (int c = 0; c < m; ++c) r.d(a, b, c) = d(vars[a], vars[b], vars[c]);
    }
  }
  return r;
}

Jet Jet::embed(int new_dim, std::span<const int> positions) const {
  if (is_constant()) return *this;
  const int m = dim_;
  Jet r(new_dim, order_, value());
  for (int a = 0; a < m && order_ >= 1; ++a) {
    r.d(positions[a]) = d(a);
    if (order_ < 2) continue;
    for (int b = 0; b < m; ++b) {
      r.d(positions[a], positions[b]) = d(a, b);
      if (order_ < 3) continue;
      for (int c = 0; c < m; ++c)
        r.d(positions[a], positions[b], positions[c]) = d(a, b, c);
    }
  }
  return r;
}

Jet& Jet::operator+=(const Jet& o) {
  if (o.is_constant()) {
    data_[0] += o.data_[0];
    return *this;
  }
  if (is_constant()) {
    double v = data_[0];
    *this = o;
    data_[0] += v;
    return *this;
  }
  if (o.dim_ != dim_) throw ShapeError("jets over different variable counts");
  if (o.order_ < order_) *this = truncated(o.order_);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  if (o.is_constant()) {
    data_[0] -= o.data_[0];
    return *this;
  }
  if (is_constant()) {
    double v = data_[0];
    *this = o;
    for (auto& x : data_) x = -x;
    data_[0] += v;
    return *this;
  }
  if (o.dim_ != dim_) throw ShapeError("jets over different variable counts");
  if (o.order_ < order_) *this = truncated(o.order_);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (auto& x : data_) x *= s;
  return *this;
}

void Jet::add_product(const Jet& a, const Jet& b, double s) {
  if (a.is_constant()) {
    if (b.is_constant()) {
      data_[0] += s * a.value() * b.value();
      return;
    }
    Jet t = b;
    t *= s * a.value();
    *this += t;
    return;
  }
  if (b.is_constant()) {
    add_product(b, a, s);
    return;
  }
  if (a.dim_ != b.dim_) throw ShapeError("jets over different variable counts");
  int order = std::min(a.order_, b.order_);
  if (!is_constant()) order = std::min(order, order_);
  promote(a.dim_, order);
  if (a.order_ == order && b.order_ == order) {
    accumulate_product(data_.data(), a.data_.data(), b.data_.data(), dim_, order, s);
  } else {
    Jet at = a.truncated(order);
    Jet bt = b.truncated(order);
    accumulate_product(data_.data(), at.data_.data(), bt.data_.data(), dim_, order, s);
  }
}

Jet operator*(const Jet& a, const Jet& b) {
  if (a.is_constant()) return b * a.value();
  if (b.is_constant()) return a * b.value();
  if (a.dim_ != b.dim_) throw ShapeError("jets over different variable counts");
  Jet r(a.dim_, std::min(a.order_, b.order_));
  r.add_product(a, b);
  return r;
}

Jet Jet::apply(double p0, double p1, double p2, double p3) const {
  if (is_constant()) return Jet(p0);
  const int n = dim_;
  Jet r(n, order_, p0);
  if (order_ < 1) return r;
  for (int i = 0; i < n; ++i) r.d(i) = p1 * d(i);
  if (order_ < 2) return r;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double v = p2 * d(i) * d(j) + p1 * d(i, j);
      r.d(i, j) = v;
      r.d(j, i) = v;
    }
  if (order_ < 3) return r;
  double* t = r.data_.data() + 1 + n + n * n;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = j; k < n; ++k) {
        double v = p3 * d(i) * d(j) * d(k) +
                   p2 * (d(i, j) * d(k) + d(i, k) * d(j) + d(j, k) * d(i)) +
                   p1 * d(i, j, k);
        put3(t, n, i, j, k, v);
      }
  return r;
}

Jet operator/(const Jet& a, const Jet& b) {
  if (b.is_constant()) return a * (1.0 / b.value());
  return a * reciprocal(b);
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }
Jet operator-(Jet a) { return a *= -1.0; }
Jet operator*(Jet a, double s) { return a *= s; }
Jet operator*(double s, Jet a) { return a *= s; }

Jet reciprocal(const Jet& a) {
  double x = a.value();
  if (x == 0.0) throw DomainError("reciprocal of a jet with zero value");
  double r = 1.0 / x;
  return a.apply(r, -r * r, 2 * r * r * r, -6 * r * r * r * r);
}

Jet sqrt(const Jet& a) {
  double x = a.value();
  if (!(x > 0.0)) throw DomainError("sqrt of a non-positive jet");
  double s = std::sqrt(x);
  return a.apply(s, 0.5 / s, -0.25 / (s * x), 0.375 / (s * x * x));
}

Jet exp(const Jet& a) {
  double e = std::exp(a.value());
  return a.apply(e, e, e, e);
}

Jet log(const Jet& a) {
  double x = a.value();
  if (!(x > 0.0)) throw DomainError("log of a non-positive jet");
  return a.apply(std::log(x), 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x));
}

Jet sin(const Jet& a) {
  double s = std::sin(a.value()), c = std::cos(a.value());
  return a.apply(s, c, -s, -c);
}

Jet cos(const Jet& a) {
  double s = std::sin(a.value()), c = std::cos(a.value());
  return a.apply(c, -s, -c, s);
}

Jet pow(const Jet& a, double p) {
  double x = a.value();
  if (!(x > 0.0)) throw DomainError("pow of a non-positive jet");
  double v = std::pow(x, p);
  return a.apply(v, p * v / x, p * (p - 1) * v / (x * x),
                 p * (p - 1) * (p - 2) * v / (x * x * x));
}

Jet square(const Jet& a) { return a * a; }

std::vector<Jet> seed(std::span<const double> point, int order) {
  const int n = static_cast<int>(point.size());
  std::vector<Jet> x;
  x.reserve(n);
  for (int i = 0; i < n; ++i) x.push_back(Jet::variable(n, order, i, point[i]));
  return x;
}

bool is_identity_seed(std::span<const Jet> coords) {
  const int n = static_cast<int>(coords.size());
  for (int i = 0; i < n; ++i) {
    const Jet& c = coords[i];
    if (c.dim() != n) return false;
    auto raw = c.raw();
    for (std::size_t k = 1; k < raw.size(); ++k) {
      double expect = (c.order() >= 1 && k == static_cast<std::size_t>(1 + i)) ? 1.0 : 0.0;
      if (raw[k] != expect) return false;
    }
  }
  return true;
}

int common_order(std::span<const Jet> jets) {
  int order = Jet::kMaxOrder;
  for (const auto& j : jets)
    if (!j.is_constant()) order = std::min(order, j.order());
  return order;
}

std::vector<Jet> compose(std::span<const Jet> f, std::span<const Jet> x_of_u) {
  const int n = static_cast<int>(x_of_u.size());
  int fo = 0;
  for (const auto& j : f) {
    if (j.is_constant()) continue;
    if (j.dim() != n) throw ShapeError("compose: jet variables do not match");
    fo = std::max(fo, j.order());
  }
  std::vector<Jet> delta;
  delta.reserve(n);
  for (const auto& x : x_of_u) delta.push_back(x - Jet(x.value()));

  std::vector<Jet> d2, d3;
  if (fo >= 2) {
    d2.resize(n * n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) d2[i * n + j] = delta[i] * delta[j];
  }
  if (fo >= 3) {
    d3.resize(n * n * n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        for (int k = j; k < n; ++k) d3[(i * n + j) * n + k] = d2[i * n + j] * delta[k];
  }

  std::vector<Jet> out;
  out.reserve(f.size());
  for (const auto& fj : f) {
    if (fj.is_constant()) {
      out.push_back(fj);
      continue;
    }
    Jet r(fj.value());
    const int o = fj.order();
    if (o >= 1)
      for (int i = 0; i < n; ++i)
        if (fj.d(i) != 0.0) r.add_product(Jet(fj.d(i)), delta[i]);
    if (o >= 2)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          double c = fj.d(i, j) * (i == j ? 0.5 : 1.0);
          if (c != 0.0) r.add_product(Jet(c), d2[i * n + j]);
        }
    if (o >= 3)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
          for (int k = j; k < n; ++k) {
            double mult = (i == j && j == k) ? 1.0 : ((i == j || j == k) ? 3.0 : 6.0);
            double c = fj.d(i, j, k) * mult / 6.0;
            if (c != 0.0) r.add_product(Jet(c), d3[(i * n + j) * n + k]);
          }
    // Cap at the order carried by the input jets.
    if (!r.is_constant() && r.order() > o) r = r.truncated(o);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace tractorlab
