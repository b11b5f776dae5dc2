#pragma once

#include <string>
#include <vector>

#include "scalext/core.hpp"

namespace scalext {

// Polynomial in the n + d chart coordinates.
struct Poly {
  int vars = 0;
  std::vector<std::pair<MultiIndex, double>> terms;

  static Poly zero(int vars) { return Poly{vars, {}}; }
  static Poly constant(int vars, double c);
  double value(const Point& p) const;
  void gradient(const Point& p, double* out) const;
  bool is_zero() const { return terms.empty(); }
};

// V = Σ_k V^k(q) ∂_{q^k} with polynomial components.
struct VectorField {
  Dims dims;
  std::vector<Poly> comp;  // n + d components, x first

  void eval(const Point& q, double* out) const;
  void jacobian(const Point& q, double* out) const;  // row-major D×D
  static VectorField linear_h(Dims dims, double c);  // c·h^j ∂_{h^j}
  static VectorField from_components(Dims dims, std::vector<Poly> comp);
};

VectorField operator-(const VectorField& a, const VectorField& b);

// ρ = h^j∂_{h^j} + h^i A_i^j ∂_{x^j} + h^i h^j B_ij^k ∂_{h^k}
class EulerField {
 public:
  EulerField() = default;
  EulerField(ChartRegion chart, std::vector<std::vector<Poly>> A, std::vector<std::vector<std::vector<Poly>>> B,
             std::string id);

  static EulerField standard(const ChartRegion& chart);
  static EulerField logistic(const ChartRegion& chart);  // h(1+h)∂_h, d = 1

  const ChartRegion& chart() const { return chart_; }
  Dims dims() const { return chart_.dims; }
  const std::string& id() const { return id_; }
  const VectorField& field() const { return field_; }
  bool is_standard() const { return standard_; }

  // Y(λ,(x,g)) = (g^i A_i^j(x,λg), g^i g^j B_ij^k(x,λg)), the generator of S(λ)^{-1}∘S_ρ(λ).
  void conj_rhs(double lambda, const Point& q, double* out) const;
  void conj_jacobian(double lambda, const Point& q, double* out) const;

 private:
  ChartRegion chart_;
  std::vector<std::vector<Poly>> A_;               // [i][j], i < d, j < n
  std::vector<std::vector<std::vector<Poly>>> B_;  // [i][j][k]
  VectorField field_;
  std::string id_;
  bool standard_ = true;
};

EulerField euler_field_by_id(const std::string& id, const ChartRegion& chart);

struct FlowResult {
  Point endpoint{};
  std::vector<double> jacobian;  // row-major D×D
  double lambda = 1.0;
  int steps = 0;
  double det() const;
};

struct ChartEscape : FlowError {
  ChartEscape(const std::string& what, std::vector<Point> partial) : FlowError(what), trajectory(std::move(partial)) {}
  std::vector<Point> trajectory;
};

struct FlowOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double escape_margin = 1e-9;
  bool check_chart = true;
};

// e^{τ V} applied to p, with the variational Jacobian.
FlowResult flow_time(const VectorField& v, const ChartRegion& chart, double tau, const Point& p,
                     const FlowOptions& opt = {});
// S(λ) = e^{log λ ρ}
FlowResult flow(const EulerField& rho, double lambda, const Point& p, const FlowOptions& opt = {});

struct ConjugationResult {
  Point point{};
  std::vector<double> jacobian;
};
// Φ(λ) = S₁(λ)^{-1} ∘ S₂(λ), so that S₂(λ) = S₁(λ) ∘ Φ(λ).
ConjugationResult conjugation(const EulerField& rho1, const EulerField& rho2, double lambda, const Point& p,
                              const FlowOptions& opt = {});

bool is_euler(const VectorField& v, const ChartRegion& chart);

struct Covec {
  Point q{};
  Point p{};
};
// X*(q,p) = (X(q), −DX(q)ᵀ p)
Covec lifted_field(const VectorField& x, const Covec& c);
Covec lifted_flow(const VectorField& x, const Covec& c, double tau, const FlowOptions& opt = {});
bool cotangent_lift_check(const VectorField& x, const std::vector<Covec>& samples, double tau = 1.0,
                          double tol = 1e-7);
// T*Φ(λ): (q, p) ↦ (Φ(q), DΦ(q)^{-T} p); fixed on N*(I)
bool conjugation_lift_check(const EulerField& rho1, const EulerField& rho2, double lambda,
                            const std::vector<Covec>& samples, double tol = 1e-7);

}  // namespace scalext
