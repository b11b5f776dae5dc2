#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scalext/core.hpp"

namespace scalext {

using Covector = std::array<double, kMaxDim>;  // (ξ, η), x-slots first

// Product of per-coordinate closed intervals with a radial range on |h|.
// `open_at_I` removes the points with h = 0 (cones over U∖I).
struct BaseRegion {
  Dims dims;
  Box box;  // dimension n + d
  double rmin = 0.0;
  double rmax = kInf;
  bool open_at_I = false;

  bool contains(const Point& p, double tol = 1e-9) const;
  bool empty() const;
  // does the closure meet I = {h = 0}?
  bool closure_meets_I() const;
};

BaseRegion intersect(const BaseRegion& a, const BaseRegion& b);

// Conic set of codirections.
struct DirectionSet {
  enum class Kind { Full, Cap, Subspace, XiCap };
  Kind kind = Kind::Full;
  int dim = 0;
  Covector axis{};                // Cap / XiCap (XiCap: only the ξ-slots are used)
  double radius = 0.0;            // angular radius in radians
  std::vector<Covector> basis;    // Subspace, orthonormal
  int n = 0;                      // XiCap: number of ξ-slots

  static DirectionSet full(int dim);
  static DirectionSet cap(Covector axis, double radius, int dim);
  static DirectionSet subspace(const std::vector<Covector>& span, int dim);
  // {(ξ,η): ξ/|ξ| within `radius` of axis_ξ, η free} together with its closure ξ = 0.
  static DirectionSet xi_cap(Covector axis_xi, double radius, Dims dims);

  bool contains(const Covector& w, double slack) const;
  DirectionSet negated() const;
  std::string describe() const;
};

struct ConePiece {
  BaseRegion base;
  DirectionSet dirs;
};

class Cone {
 public:
  Cone() = default;
  explicit Cone(Dims dims) : dims_(dims) {}
  Cone(Dims dims, std::vector<ConePiece> pieces);

  Dims dims() const { return dims_; }
  const std::vector<ConePiece>& pieces() const { return pieces_; }
  bool is_empty() const { return pieces_.empty(); }
  void add(ConePiece piece);

  bool contains(const Point& p, const Covector& w, double slack = 1e-9, double base_tol = 1e-9) const;
  Cone negated() const;
  std::string describe() const;
  std::string to_json() const;

 private:
  Dims dims_{};
  std::vector<ConePiece> pieces_;
};

// Chart-wide base region; `open_at_I` drops h = 0.
BaseRegion base_everywhere(Dims dims, const Box& full_box, bool open_at_I = false);
BaseRegion base_on_I(Dims dims, const Box& full_box);

Cone conormal_I(Dims dims, const Box& full_box);
// N*({x_i = 0}) over the whole chart
Cone conormal_hyperplane_x(Dims dims, const Box& full_box, int i);
Cone full_cone(Dims dims, const Box& full_box);

Cone cone_union(const Cone& a, const Cone& b);
Cone cone_sum(const Cone& a, const Cone& b);

struct TransversalityViolation {
  Point point{};
  Covector direction{};
  std::string detail;
};
std::optional<TransversalityViolation> find_transversality_violation(const Cone& a, const Cone& b,
                                                                     double slack = 1e-9);
bool check_transverse(const Cone& a, const Cone& b, double slack = 1e-9);

bool check_scaling_stable(const Cone& g, const Box& chart_box, double slack = 1e-9);
Cone xi_projection(const Cone& g, double shell_a, double shell_b);
bool check_landing(const Cone& g, double slack = 1e-6);

double angle_between(const Covector& a, const Covector& b, int dim);
Covector normalized(const Covector& w, int dim);

}  // namespace scalext
