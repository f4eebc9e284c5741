#pragma once

#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "tractorlab/chart.hpp"
#include "tractorlab/jet.hpp"

namespace tractorlab {

enum class Variance { Up, Down };

// Valence of a tensor as an ordered list of index slots over a `dim`-space.
struct TensorShape {
  int dim = 0;
  std::vector<Variance> slots;

  TensorShape() = default;
  TensorShape(int d, std::vector<Variance> s) : dim(d), slots(std::move(s)) {}

  static TensorShape scalar(int d) { return {d, {}}; }
  static TensorShape vector(int d) { return {d, {Variance::Up}}; }
  static TensorShape covector(int d) { return {d, {Variance::Down}}; }
  // r contravariant slots followed by s covariant ones.
  static TensorShape valence(int d, int r, int s);

  int rank() const { return static_cast<int>(slots.size()); }
  int size() const;
  int contravariant() const;
  int covariant() const;
  bool operator==(const TensorShape& o) const { return dim == o.dim && slots == o.slots; }
  std::string describe() const;
};

// Component jets of a tensor at one point, dense row-major in slot order.
struct TensorJets {
  TensorShape shape;
  std::vector<Jet> c;

  TensorJets() = default;
  explicit TensorJets(TensorShape s) : shape(std::move(s)), c(shape.size()) {}
  TensorJets(TensorShape s, std::vector<Jet> comps);

  Jet& operator[](int flat) { return c[flat]; }
  const Jet& operator[](int flat) const { return c[flat]; }
  Jet& at(std::initializer_list<int> idx);
  const Jet& at(std::initializer_list<int> idx) const;
  int flat(std::initializer_list<int> idx) const;

  // Component values only, same layout.
  std::vector<double> values() const;
  int order() const { return common_order(c); }
};

// Rule producing component jets from coordinate jets. Coordinates may be any
// jets (for composition); the output jets are in the same variables.
using FieldRule = std::function<std::vector<Jet>(std::span<const Jet>)>;

class TensorField {
 public:
  TensorField() = default;
  TensorField(Chart chart, TensorShape shape, double weight, int max_order,
              FieldRule rule, std::string name = {});

  const Chart& chart() const { return chart_; }
  const TensorShape& shape() const { return shape_; }
  double weight() const { return weight_; }
  int max_order() const { return max_order_; }
  const std::string& name() const { return name_; }
  int dim() const { return shape_.dim; }

  // Components with all partials up to `order` at a chart point.
  TensorJets evaluate(const Point& x, int order) const;
  // Same, but the point is given as coordinate jets (composition).
  TensorJets evaluate_jets(std::span<const Jet> coords) const;
  // Value-only components.
  std::vector<double> values(const Point& x) const;

  const FieldRule& rule() const { return rule_; }

 private:
  Chart chart_{"", {0, 0}, {1, 1}};
  TensorShape shape_;
  double weight_ = 0.0;
  int max_order_ = Jet::kMaxOrder;
  FieldRule rule_;
  std::string name_;
};

// Wraps a rule that is only valid at identity seeds (derived quantities
// computed from jets of other fields) into a rule that also accepts general
// coordinate jets, by evaluating at the base point and composing.
FieldRule make_pointwise_rule(
    std::function<std::vector<Jet>(const Point&, int order)> at_point);

// ---------- pointwise tensor algebra ----------

TensorJets add(const TensorJets& a, const TensorJets& b);
TensorJets scale(const TensorJets& a, const Jet& s);
TensorJets outer(const TensorJets& a, const TensorJets& b);
// Contract slot i with slot j (one Up, one Down).
TensorJets contract(const TensorJets& a, int i, int j);
// Result slot k is input slot perm[k].
TensorJets transpose(const TensorJets& a, std::span<const int> perm);
// Symmetrise / antisymmetrise over the listed slots (same variance).
TensorJets symmetrize(const TensorJets& a, std::span<const int> slots);
TensorJets antisymmetrize(const TensorJets& a, std::span<const int> slots);
// Trace-free part of a covariant 2-tensor with respect to a metric g.
TensorJets trace_free_part(const TensorJets& t, const TensorJets& g,
                           const TensorJets& g_inv);
// Trace-free part of an endomorphism (1,1) tensor.
TensorJets trace_free_part(const TensorJets& t);
TensorJets truncated(const TensorJets& t, int order);
// Derivative along coordinate a of every component.
TensorJets partial(const TensorJets& t, int a);

// Max |component value|.
double max_abs(const TensorJets& t);
double max_abs_diff(const TensorJets& a, const TensorJets& b);

// ---------- field-level tensor algebra ----------

TensorField add(const TensorField& a, const TensorField& b);
TensorField scale(const TensorField& a, double s);
TensorField outer(const TensorField& a, const TensorField& b);
TensorField contract(const TensorField& a, int i, int j);
TensorField transpose(const TensorField& a, std::vector<int> perm);
TensorField symmetrize(const TensorField& a, std::vector<int> slots);
TensorField antisymmetrize(const TensorField& a, std::vector<int> slots);
TensorField trace_free_part(const TensorField& t, const TensorField& g);

// Constant component field.
TensorField constant_field(const Chart& chart, TensorShape shape,
                           std::vector<double> comps, double weight = 0.0,
                           std::string name = {});

}  // namespace tractorlab
