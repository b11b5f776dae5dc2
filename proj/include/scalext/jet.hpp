#pragma once

#include <boost/container/small_vector.hpp>
#include <span>
#include <vector>

#include "scalext/core.hpp"

namespace scalext {

inline constexpr int kMaxJetOrder = 9;

struct JetLayout;

// Truncated multivariate Taylor expansion around a point. Coefficients are
// stored as ∂^α f / α!, graded by |α|.
class Jet {
 public:
  Jet() = default;
  Jet(int nvars, int order);

  static Jet constant(int nvars, int order, double c);
  static Jet variable(int nvars, int order, int var, double at);

  int nvars() const { return nv_; }
  int order() const { return ord_; }
  int size() const { return static_cast<int>(c_.size()); }

  double value() const { return c_[0]; }
  double& operator[](int i) { return c_[i]; }
  double operator[](int i) const { return c_[i]; }
  const MultiIndex& exponent(int i) const;
  int index_of(const MultiIndex& a) const;  // -1 if |α| > order

  double coeff(const MultiIndex& a) const;
  double derivative(const MultiIndex& a) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(double s);
  Jet& operator+=(double s) {
    c_[0] += s;
    return *this;
  }

  // Σ_k a[k] (f − f(0))^k, i.e. g∘f when a holds the Taylor coefficients of g at f(0).
  Jet compose(std::span<const double> a) const;

  // Reinterpret as a jet in `total` variables, own variables placed from `offset`.
  Jet embed(int total, int offset) const;

  friend Jet operator*(const Jet& a, const Jet& b);

 private:
  int nv_ = 0;
  int ord_ = 0;
  const JetLayout* L_ = nullptr;
  boost::container::small_vector<double, 24> c_;
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator*(Jet a, double s) { return a *= s; }
inline Jet operator*(double s, Jet a) { return a *= s; }
inline Jet operator+(Jet a, double s) { return a += s; }
inline Jet operator-(Jet a, double s) { return a += -s; }

Jet exp(const Jet& f);
Jet log(const Jet& f);
Jet reciprocal(const Jet& f);
Jet sqrt(const Jet& f);
Jet pow(const Jet& f, double p);
Jet sin(const Jet& f);
Jet cos(const Jet& f);

}  // namespace scalext
