#pragma once

#include <span>
#include <vector>

namespace tractorlab {

// Truncated Taylor jet of a scalar function of `dim` variables, holding the
// value and all partial derivatives up to `order` (at most 3) at one point.
// Storage is dense: value, gradient[n], hessian[n*n], third[n*n*n].
//
// A jet built from a plain double has dim 0 and acts as a constant that
// adapts to whatever jet it is combined with.
class Jet {
 public:
  static constexpr int kMaxOrder = 3;

  Jet() : Jet(0.0) {}
  Jet(double c);  // NOLINT: constants convert implicitly
  Jet(int dim, int order, double value = 0.0);

  // Coordinate function x_index seeded at `value`.
  static Jet variable(int dim, int order, int index, double value);

  int dim() const { return dim_; }
  int order() const { return order_; }
  bool is_constant() const { return dim_ == 0; }

  double value() const { return data_[0]; }
  double& value() { return data_[0]; }
  double d(int i) const { return data_[1 + i]; }
  double d(int i, int j) const { return data_[1 + dim_ + i * dim_ + j]; }
  double d(int i, int j, int k) const {
    return data_[1 + dim_ + dim_ * dim_ + (i * dim_ + j) * dim_ + k];
  }
  double& d(int i) { return data_[1 + i]; }
  double& d(int i, int j) { return data_[1 + dim_ + i * dim_ + j]; }
  double& d(int i, int j, int k) {
    return data_[1 + dim_ + dim_ * dim_ + (i * dim_ + j) * dim_ + k];
  }

  std::span<const double> raw() const { return data_; }

  // Partial derivative along variable i; the order drops by one.
  Jet derivative(int i) const;
  Jet truncated(int order) const;

  // Keep only the listed variables (new variable k is old variable vars[k]).
  Jet restrict_to(std::span<const int> vars) const;
  // Inverse of restrict_to: old variable k becomes new variable positions[k].
  Jet embed(int new_dim, std::span<const int> positions) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(double s);
  // this += s * a * b, without temporaries.
  void add_product(const Jet& a, const Jet& b, double s = 1.0);

  // Chain rule with univariate derivatives phi0..phi3 evaluated at value().
  Jet apply(double phi0, double phi1, double phi2, double phi3) const;

  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);

 private:
  static int storage_size(int dim, int order);
  void promote(int dim, int order);

  int dim_ = 0;
  int order_ = kMaxOrder;
  std::vector<double> data_;
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator-(Jet a);
Jet operator*(Jet a, double s);
Jet operator*(double s, Jet a);

Jet reciprocal(const Jet& a);
Jet sqrt(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet pow(const Jet& a, double p);
Jet square(const Jet& a);

// Identity seeds x_i = point_i + e_i at the given order.
std::vector<Jet> seed(std::span<const double> point, int order);

// True if coords are exactly the identity seeds of some point.
bool is_identity_seed(std::span<const Jet> coords);

// Jets f (in variables x, at x0 = values of coords) composed with x(u).
// `f` must be expressed in the variables x; x_of_u gives x as jets in u.
std::vector<Jet> compose(std::span<const Jet> f, std::span<const Jet> x_of_u);

// Smallest order among the jets (constants ignored); kMaxOrder if none.
int common_order(std::span<const Jet> jets);

}  // namespace tractorlab
