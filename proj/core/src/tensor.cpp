#include "tractorlab/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tractorlab/errors.hpp"
#include "tractorlab/linalg.hpp"

namespace tractorlab {

namespace {

std::vector<int> unflatten(int flat, int rank, int dim) {
  std::vector<int> idx(rank);
  for (int s = rank - 1; s >= 0; --s) {
    idx[s] = flat % dim;
    flat /= dim;
  }
  return idx;
}

int flatten(std::span<const int> idx, int dim) {
  int f = 0;
  for (int i : idx) f = f * dim + i;
  return f;
}

// Replace dim-0 constants by full jets of the common dim/order.
void normalize(std::vector<Jet>& comps, int dim, int order) {
  for (auto& j : comps)
    if (j.is_constant()) j = Jet(dim, order, j.value());
}

int permutation_sign(std::span<const int> p) {
  int sign = 1;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      if (p[i] > p[j]) sign = -sign;
  return sign;
}

TensorJets permute_average(const TensorJets& a, std::span<const int> slots,
                           bool alternate) {
  for (int s : slots) {
    if (s < 0 || s >= a.shape.rank()) throw ShapeError("slot index out of range");
    if (a.shape.slots[s] != a.shape.slots[slots[0]])
      throw VarianceError("symmetrisation over slots of mixed variance");
  }
  const int dim = a.shape.dim, rank = a.shape.rank();
  std::vector<int> perm(slots.size());
  std::iota(perm.begin(), perm.end(), 0);
  int count = 0;
  TensorJets r(a.shape);
  for (auto& j : r.c) j = Jet(0.0);
  do {
    double sign = alternate ? permutation_sign(perm) : 1.0;
    for (int f = 0; f < a.shape.size(); ++f) {
      auto idx = unflatten(f, rank, dim);
      auto src = idx;
      for (std::size_t k = 0; k < slots.size(); ++k) src[slots[k]] = idx[slots[perm[k]]];
      r.c[f].add_product(Jet(sign), a.c[flatten(src, dim)]);
    }
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (auto& j : r.c) j *= 1.0 / count;
  return r;
}

}  // namespace

TensorShape TensorShape::valence(int d, int r, int s) {
  std::vector<Variance> v(r, Variance::Up);
  v.insert(v.end(), s, Variance::Down);
  return {d, v};
}

int TensorShape::size() const {
  int n = 1;
  for (std::size_t i = 0; i < slots.size(); ++i) n *= dim;
  return n;
}

int TensorShape::contravariant() const {
  return static_cast<int>(std::count(slots.begin(), slots.end(), Variance::Up));
}

int TensorShape::covariant() const { return rank() - contravariant(); }

std::string TensorShape::describe() const {
  std::ostringstream os;
  os << "dim " << dim << " slots ";
  for (auto v : slots) os << (v == Variance::Up ? '^' : '_');
  if (slots.empty()) os << "(scalar)";
  return os.str();
}

TensorJets::TensorJets(TensorShape s, std::vector<Jet> comps)
    : shape(std::move(s)), c(std::move(comps)) {
  if (static_cast<int>(c.size()) != shape.size())
    throw ShapeError("component count does not match " + shape.describe());
}

int TensorJets::flat(std::initializer_list<int> idx) const {
  if (static_cast<int>(idx.size()) != shape.rank()) throw ShapeError("wrong index count");
  int f = 0;
  for (int i : idx) f = f * shape.dim + i;
  return f;
}

Jet& TensorJets::at(std::initializer_list<int> idx) { return c[flat(idx)]; }
const Jet& TensorJets::at(std::initializer_list<int> idx) const { return c[flat(idx)]; }

std::vector<double> TensorJets::values() const {
  std::vector<double> v(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) v[i] = c[i].value();
  return v;
}

TensorField::TensorField(Chart chart, TensorShape shape, double weight,
                         int max_order, FieldRule rule, std::string name)
    : chart_(std::move(chart)),
      shape_(std::move(shape)),
      weight_(weight),
      max_order_(max_order),
      rule_(std::move(rule)),
      name_(std::move(name)) {
  if (shape_.dim != chart_.dim()) throw ShapeError("field shape dim differs from chart dim");
}

TensorJets TensorField::evaluate(const Point& x, int order) const {
  chart_.require_inside(x);
  if (order > max_order_ || order > Jet::kMaxOrder) {
    throw CapabilityError("field '" + name_ + "' supports jets up to order " +
                          std::to_string(max_order_) + ", requested " +
                          std::to_string(order));
  }
  auto coords = seed(x, order);
  auto comps = rule_(coords);
  normalize(comps, chart_.dim(), order);
  return TensorJets(shape_, std::move(comps));
}

TensorJets TensorField::evaluate_jets(std::span<const Jet> coords) const {
  if (static_cast<int>(coords.size()) != chart_.dim()) throw ShapeError("coordinate count");
  return TensorJets(shape_, rule_(coords));
}

std::vector<double> TensorField::values(const Point& x) const {
  return evaluate(x, 0).values();
}

FieldRule make_pointwise_rule(
    std::function<std::vector<Jet>(const Point&, int order)> at_point) {
  return [at_point](std::span<const Jet> coords) {
    Point x(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i) x[i] = coords[i].value();
    const int order = common_order(coords);
    bool all_constant = std::all_of(coords.begin(), coords.end(),
                                    [](const Jet& j) { return j.is_constant(); });
    if (all_constant) {
      auto f = at_point(x, 0);
      for (auto& j : f) j = Jet(j.value());
      return f;
    }
    if (is_identity_seed(coords)) return at_point(x, order);
    return compose(at_point(x, order), coords);
  };
}

TensorJets add(const TensorJets& a, const TensorJets& b) {
  if (!(a.shape == b.shape)) throw ShapeError("add: shapes differ");
  TensorJets r = a;
  for (std::size_t i = 0; i < r.c.size(); ++i) r.c[i] += b.c[i];
  return r;
}

TensorJets scale(const TensorJets& a, const Jet& s) {
  TensorJets r(a.shape);
  for (std::size_t i = 0; i < r.c.size(); ++i) r.c[i] = a.c[i] * s;
  return r;
}

TensorJets outer(const TensorJets& a, const TensorJets& b) {
  if (a.shape.dim != b.shape.dim) throw ShapeError("outer: dims differ");
  auto slots = a.shape.slots;
  slots.insert(slots.end(), b.shape.slots.begin(), b.shape.slots.end());
  TensorJets r(TensorShape(a.shape.dim, slots));
  const int nb = b.shape.size();
  for (int i = 0; i < a.shape.size(); ++i)
    for (int j = 0; j < nb; ++j) r.c[i * nb + j] = a.c[i] * b.c[j];
  return r;
}

TensorJets contract(const TensorJets& a, int i, int j) {
  const int rank = a.shape.rank(), dim = a.shape.dim;
  if (i == j || i < 0 || j < 0 || i >= rank || j >= rank)
    throw ShapeError("contract: invalid slot pair");
  if (a.shape.slots[i] == a.shape.slots[j])
    throw VarianceError("contract: both slots have the same variance");
  std::vector<Variance> slots;
  for (int s = 0; s < rank; ++s)
    if (s != i && s != j) slots.push_back(a.shape.slots[s]);
  TensorJets r(TensorShape(dim, slots));
  for (int f = 0; f < r.shape.size(); ++f) {
    auto ridx = unflatten(f, rank - 2, dim);
    std::vector<int> idx(rank);
    for (int s = 0, k = 0; s < rank; ++s)
      if (s != i && s != j) idx[s] = ridx[k++];
    Jet acc(0.0);
    for (int t = 0; t < dim; ++t) {
      idx[i] = t;
      idx[j] = t;
      acc += a.c[flatten(idx, dim)];
    }
    r.c[f] = std::move(acc);
  }
  return r;
}

TensorJets transpose(const TensorJets& a, std::span<const int> perm) {
  const int rank = a.shape.rank(), dim = a.shape.dim;
  if (static_cast<int>(perm.size()) != rank) throw ShapeError("transpose: permutation size");
  std::vector<int> check(perm.begin(), perm.end());
  std::sort(check.begin(), check.end());
  for (int s = 0; s < rank; ++s)
    if (check[s] != s) throw ShapeError("transpose: not a permutation");
  std::vector<Variance> slots(rank);
  for (int k = 0; k < rank; ++k) slots[k] = a.shape.slots[perm[k]];
  TensorJets r(TensorShape(dim, slots));
  for (int f = 0; f < r.shape.size(); ++f) {
    auto idx = unflatten(f, rank, dim);
    std::vector<int> src(rank);
    for (int k = 0; k < rank; ++k) src[perm[k]] = idx[k];
    r.c[f] = a.c[flatten(src, dim)];
  }
  return r;
}

TensorJets symmetrize(const TensorJets& a, std::span<const int> slots) {
  return permute_average(a, slots, false);
}

TensorJets antisymmetrize(const TensorJets& a, std::span<const int> slots) {
  return permute_average(a, slots, true);
}

TensorJets trace_free_part(const TensorJets& t, const TensorJets& g,
                           const TensorJets& g_inv) {
  const int d = t.shape.dim;
  if (!(t.shape == TensorShape::valence(d, 0, 2)) || !(g.shape == t.shape) ||
      !(g_inv.shape == TensorShape::valence(d, 2, 0)))
    throw ShapeError("trace_free_part expects covariant 2-tensors and an inverse metric");
  Jet tr(0.0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) tr.add_product(g_inv.c[a * d + b], t.c[a * d + b]);
  tr *= 1.0 / d;
  TensorJets r = t;
  for (int f = 0; f < d * d; ++f) r.c[f].add_product(tr, g.c[f], -1.0);
  return r;
}

TensorJets trace_free_part(const TensorJets& t) {
  const int d = t.shape.dim;
  if (!(t.shape == TensorShape::valence(d, 1, 1)))
    throw ShapeError("trace_free_part expects an endomorphism");
  Jet tr(0.0);
  for (int a = 0; a < d; ++a) tr += t.c[a * d + a];
  TensorJets r = t;
  for (int a = 0; a < d; ++a) r.c[a * d + a].add_product(tr, Jet(1.0 / d), -1.0);
  return r;
}

TensorJets truncated(const TensorJets& t, int order) {
  TensorJets r = t;
  for (auto& j : r.c) j = j.truncated(order);
  return r;
}

TensorJets partial(const TensorJets& t, int a) {
  TensorJets r(t.shape);
  for (std::size_t i = 0; i < t.c.size(); ++i) r.c[i] = t.c[i].derivative(a);
  return r;
}

double max_abs(const TensorJets& t) {
  double m = 0.0;
  for (const auto& j : t.c) m = std::max(m, std::abs(j.value()));
  return m;
}

double max_abs_diff(const TensorJets& a, const TensorJets& b) {
  if (a.c.size() != b.c.size()) throw ShapeError("max_abs_diff: sizes differ");
  double m = 0.0;
  for (std::size_t i = 0; i < a.c.size(); ++i)
    m = std::max(m, std::abs(a.c[i].value() - b.c[i].value()));
  return m;
}

// ---------- field level ----------

namespace {

TensorField lift(const TensorField& a, TensorShape shape, double weight,
                 std::function<TensorJets(const TensorJets&)> op, std::string name) {
  FieldRule ra = a.rule();
  TensorShape sa = a.shape();
  FieldRule rule = [ra, sa, op](std::span<const Jet> x) {
    return op(TensorJets(sa, ra(x))).c;
  };
  return TensorField(a.chart(), std::move(shape), weight, a.max_order(), rule,
                     std::move(name));
}

}  // namespace

TensorField add(const TensorField& a, const TensorField& b) {
  if (!(a.shape() == b.shape())) throw ShapeError("add: field shapes differ");
  if (a.weight() != b.weight()) throw ShapeError("add: projective weights differ");
  FieldRule ra = a.rule(), rb = b.rule();
  TensorShape s = a.shape();
  return TensorField(a.chart(), s, a.weight(), std::min(a.max_order(), b.max_order()),
                     [ra, rb, s](std::span<const Jet> x) {
                       return add(TensorJets(s, ra(x)), TensorJets(s, rb(x))).c;
                     },
                     a.name() + "+" + b.name());
}

TensorField scale(const TensorField& a, double s) {
  return lift(a, a.shape(), a.weight(),
              [s](const TensorJets& t) { return scale(t, Jet(s)); }, a.name());
}

TensorField outer(const TensorField& a, const TensorField& b) {
  if (a.dim() != b.dim()) throw ShapeError("outer: dims differ");
  FieldRule ra = a.rule(), rb = b.rule();
  TensorShape sa = a.shape(), sb = b.shape();
  auto slots = sa.slots;
  slots.insert(slots.end(), sb.slots.begin(), sb.slots.end());
  return TensorField(a.chart(), TensorShape(a.dim(), slots), a.weight() + b.weight(),
                     std::min(a.max_order(), b.max_order()),
                     [ra, rb, sa, sb](std::span<const Jet> x) {
                       return outer(TensorJets(sa, ra(x)), TensorJets(sb, rb(x))).c;
                     },
                     a.name() + "*" + b.name());
}

TensorField contract(const TensorField& a, int i, int j) {
  TensorJets probe(a.shape());
  auto shape = contract(probe, i, j).shape;  // validates variance
  return lift(a, shape, a.weight(),
              [i, j](const TensorJets& t) { return contract(t, i, j); }, a.name());
}

TensorField transpose(const TensorField& a, std::vector<int> perm) {
  TensorJets probe(a.shape());
  auto shape = transpose(probe, perm).shape;
  return lift(a, shape, a.weight(),
              [perm](const TensorJets& t) { return transpose(t, perm); }, a.name());
}

TensorField symmetrize(const TensorField& a, std::vector<int> slots) {
  return lift(a, a.shape(), a.weight(),
              [slots](const TensorJets& t) { return symmetrize(t, slots); }, a.name());
}

TensorField antisymmetrize(const TensorField& a, std::vector<int> slots) {
  return lift(a, a.shape(), a.weight(),
              [slots](const TensorJets& t) { return antisymmetrize(t, slots); }, a.name());
}

TensorField trace_free_part(const TensorField& t, const TensorField& g) {
  const int d = t.dim();
  if (!(t.shape() == TensorShape::valence(d, 0, 2)) || !(g.shape() == t.shape()))
    throw ShapeError("trace_free_part expects covariant 2-tensor fields");
  FieldRule rt = t.rule(), rg = g.rule();
  TensorShape s = t.shape();
  return TensorField(
      t.chart(), s, t.weight(), std::min(t.max_order(), g.max_order()),
      [rt, rg, s, d](std::span<const Jet> x) {
        TensorJets tj(s, rt(x)), gj(s, rg(x));
        auto inv = jet_inverse(gj.c, d);
        TensorJets gi(TensorShape::valence(d, 2, 0), inv);
        return trace_free_part(tj, gj, gi).c;
      },
      t.name());
}

TensorField constant_field(const Chart& chart, TensorShape shape,
                           std::vector<double> comps, double weight, std::string name) {
  if (static_cast<int>(comps.size()) != shape.size())
    throw ShapeError("constant_field: component count");
  return TensorField(chart, shape, weight, Jet::kMaxOrder,
                     [comps](std::span<const Jet>) {
                       return std::vector<Jet>(comps.begin(), comps.end());
                     },
                     std::move(name));
}

}  // namespace tractorlab
