#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scalext/distribution.hpp"
#include "scalext/euler.hpp"

namespace scalext {

// Geometric grid from `hi` down to `lo`, strictly decreasing.
std::vector<double> default_lambda_grid(int points = 40, double lo = 1e-4, double hi = 1.0);

// Eight probes near I with varied supports, moments and oscillation.
std::vector<TestFunction> default_probes(Dims dims);
// Probes supported in U∖I.
std::vector<TestFunction> away_probes(Dims dims);

// φ ↦ (S_λ)_*φ = φ∘S_λ^{-1}·|det DS_λ^{-1}|, as a value-only test function.
TestFunction pushforward(const EulerField& rho, const TestFunction& phi, double lambda);

// How t_λ is formed: the standard dilation h ↦ λh, or the flow of an Euler field.
class ScalingAction {
 public:
  ScalingAction() = default;
  static ScalingAction standard() { return ScalingAction(); }
  static ScalingAction euler(EulerField rho);

  // ⟨t_λ, φ⟩ without the λ^{-s} weight
  double raw(const Distribution& t, const TestFunction& phi, double lambda, const QuadOptions& opt = {}) const;
  std::string id() const { return rho_ ? rho_->id() : "standard"; }

 private:
  std::optional<EulerField> rho_;
};

struct ScalingOptions {
  ScalingAction action;
  QuadOptions quad;
  int threads = 1;
  double log_ratio = 10.0;       // residual improvement that flags a log term
  double residual_floor = 1e-7;  // below this the pure power fit is accepted outright
};

struct ProbeFit {
  bool usable = false;
  int points = 0;
  double slope = 0.0;      // pure power exponent
  double residual = 0.0;
  double log_slope = 0.0;  // exponent of λ^σ(c0 + c1 log λ)
  double log_residual = 0.0;
  double c0 = 0.0, c1 = 0.0;
  bool log_flag = false;
};

struct ScalingReport {
  double s_hat = 0.0;
  bool log_flag = false;
  double residual = 0.0;
  std::vector<std::string> probes;
  std::vector<double> lambda_grid;
  std::vector<std::vector<double>> raw;  // [probe][grid point]
  std::vector<ProbeFit> fits;
  std::string action;
};

// raw[i][j] = ⟨t_λj, φi⟩, evaluated concurrently when threads > 1
std::vector<std::vector<double>> scaled_values(const Distribution& t, const std::vector<TestFunction>& probes,
                                               const std::vector<double>& grid, const ScalingOptions& opt);

ProbeFit fit_probe(const std::vector<double>& grid, const std::vector<double>& values,
                   const std::vector<bool>& usable, const ScalingOptions& opt = {});

ScalingReport estimate_degree(const Distribution& t, const std::vector<TestFunction>& probes,
                              const std::vector<double>& grid, const ScalingOptions& opt = {});
ScalingReport report_from_values(const std::vector<std::string>& ids, const std::vector<double>& grid,
                                 std::vector<std::vector<double>> raw, const ScalingOptions& opt = {});

struct MembershipResult {
  bool member = true;
  int witness = -1;  // first probe showing growth
  double sup = 0.0;  // sup over probes and grid of |λ^{-s}⟨t_λ,φ⟩|
  std::vector<double> trend;  // per-probe log-log slope of |λ^{-s}⟨t_λ,φ⟩|
};

inline constexpr double kTrendTolerance = -0.02;

MembershipResult check_membership(const Distribution& t, double s, const std::vector<TestFunction>& probes,
                                  const std::vector<double>& grid, const ScalingOptions& opt = {});
MembershipResult membership_from_values(double s, const std::vector<double>& grid,
                                        const std::vector<std::vector<double>>& raw);

struct RhoIndependence {
  bool agree = false;
  MembershipResult first, second;
};
RhoIndependence rho_independence_check(const Distribution& t, const EulerField& rho1, const EulerField& rho2,
                                       double s, const std::vector<TestFunction>& probes,
                                       const std::vector<double>& grid, const ScalingOptions& opt = {});

}  // namespace scalext
