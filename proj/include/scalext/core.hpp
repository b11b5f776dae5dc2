#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace scalext {

// Charts are tiny: n + d never exceeds this.
inline constexpr int kMaxDim = 4;

using Point = std::array<double, kMaxDim>;
using MultiIndex = std::array<int, kMaxDim>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct QuadratureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SupportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FlowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Dims {
  int n = 0;  // directions along I
  int d = 1;  // transverse directions
  int total() const { return n + d; }
  bool operator==(const Dims&) const = default;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v, double tol = 0.0) const { return v >= lo - tol && v <= hi + tol; }
  double width() const { return hi - lo; }
  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
  static Interval whole() { return {-kInf, kInf}; }
};

inline Interval intersect(const Interval& a, const Interval& b) {
  return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}
inline Interval hull(const Interval& a, const Interval& b) {
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

// Axis-aligned box over the first `dim` coordinates.
struct Box {
  int dim = 0;
  std::array<Interval, kMaxDim> iv{};

  static Box whole(int dim);
  bool empty() const;
  bool bounded() const;
  bool contains(const Point& p, double tol = 0.0) const;
  bool contains(const Box& b, double tol = 0.0) const;
};

Box intersect(const Box& a, const Box& b);
Box hull(const Box& a, const Box& b);

// U = box_x × box_h with 0 ∈ box_h, so λ·box_h ⊆ box_h for λ ∈ (0,1].
struct ChartRegion {
  Dims dims;
  Box box_x;  // dim n
  Box box_h;  // dim d

  ChartRegion() = default;
  ChartRegion(Dims dims, Box box_x, Box box_h);
  static ChartRegion standard(int n, int d, double half_x = 1.0, double half_h = 1.0);

  Box full_box() const;  // dim n + d, x coordinates first
  bool contains(const Point& p, double tol = 0.0) const;
};

inline double h_norm(const Point& p, Dims dims) {
  double s = 0.0;
  for (int j = 0; j < dims.d; ++j) s += p[dims.n + j] * p[dims.n + j];
  return std::sqrt(s);
}

int multi_abs(const MultiIndex& a, int dim);
double multi_factorial(const MultiIndex& a, int dim);
// All multi-indices in `dim` variables with |α| ≤ order, graded by |α|.
std::vector<MultiIndex> multi_indices_upto(int dim, int order);
std::vector<MultiIndex> multi_indices_exact(int dim, int order);
long binomial(int n, int k);

}  // namespace scalext
