#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "scalext/cone.hpp"
#include "scalext/core.hpp"
#include "scalext/quadrature.hpp"
#include "scalext/test_function.hpp"

namespace scalext {

struct Factor1D {
  std::function<double(double)> f;
  std::vector<double> singular_points;  // where f is singular or not smooth
};

struct HFactor {
  std::function<double(std::span<const double>)> f;
  bool singular_at_origin = false;
};

// Pointwise kernel K(x,h), optionally split as Π_i k_i(x_i) · k_h(h).
struct KernelSpec {
  std::function<double(const Point&)> full;
  std::optional<std::vector<Factor1D>> x_factors;
  std::optional<HFactor> h_factor;
  std::vector<std::vector<double>> x_singular;  // per x-coordinate, for the unsplit path
  bool singular_at_I = false;
  std::string name;

  bool separable() const { return x_factors.has_value() && h_factor.has_value(); }
};

KernelSpec multiply_kernels(const KernelSpec& a, const KernelSpec& b);

class DistributionImpl {
 public:
  virtual ~DistributionImpl() = default;
  virtual double pair(const TestFunction& phi, const QuadOptions& opt) const = 0;
  virtual std::string describe() const = 0;
  virtual const KernelSpec* kernel() const { return nullptr; }
};

class Distribution {
 public:
  Distribution() = default;
  Distribution(std::shared_ptr<const DistributionImpl> impl, ChartRegion domain, bool singular_on_I, std::string id);

  double pair(const TestFunction& phi, const QuadOptions& opt = {}) const;

  const ChartRegion& domain() const { return domain_; }
  Dims dims() const { return domain_.dims; }
  bool singular_on_I() const { return singular_on_I_; }
  const std::string& id() const { return id_; }
  const KernelSpec* kernel() const { return impl_ ? impl_->kernel() : nullptr; }
  std::string describe() const { return impl_->describe(); }
  bool valid() const { return static_cast<bool>(impl_); }

  std::optional<double> meta_degree;
  std::optional<Cone> meta_cone;

 private:
  std::shared_ptr<const DistributionImpl> impl_;
  ChartRegion domain_;
  bool singular_on_I_ = false;
  std::string id_;
};

double pair(const Distribution& t, const TestFunction& phi, const QuadOptions& opt = {});

// λ^{-s}⟨t_λ, φ⟩ = λ^{-s-d}⟨t, φ_{1/λ}⟩
double scale_pair(const Distribution& t, const TestFunction& phi, double lambda, double s,
                  const QuadOptions& opt = {});

struct ScaledPairing {
  std::vector<double> lambda_grid;
  std::vector<double> values;
  double s_used = 0.0;
};
ScaledPairing scaled_pairing(const Distribution& t, const TestFunction& phi, const std::vector<double>& grid,
                             double s, const QuadOptions& opt = {});

Distribution kernel_distribution(const ChartRegion& domain, KernelSpec kernel, std::string id);

// Σ_α c_α(x) ∂_h^α δ_I with c_α = Π_i c_{α,i}(x_i)
struct DeltaTerm {
  MultiIndex alpha{};
  double weight = 1.0;
  std::vector<Factor1D> coeff;  // empty means c ≡ 1
};
Distribution delta_distribution(const ChartRegion& domain, std::vector<DeltaTerm> terms, std::string id);

Distribution linear_combination(const std::vector<std::pair<double, Distribution>>& parts, std::string id);

// ∫ of a kernel against a test function; exposed for the extension module.
double pair_kernel(const KernelSpec& k, const ChartRegion& domain, const TestFunction& phi, const QuadOptions& opt);

// 1-D integral over [lo, hi] with shells toward the listed singular points.
double integrate_with_singularities(const std::function<double(double)>& g, double lo, double hi,
                                    const std::vector<double>& singular, const QuadOptions& opt, EvalBudget& budget);

}  // namespace scalext
