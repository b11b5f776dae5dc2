#pragma once

#include <optional>
#include <string>

#include "scalext/cone.hpp"
#include "scalext/cutoff.hpp"
#include "scalext/distribution.hpp"
#include "scalext/scaling.hpp"

namespace scalext {

// Taylor subtraction order for a degree s in codimension d: −1 when s + d > 0, otherwise the m
// with −m−1 < s + d ≤ −m (integer boundary snapped within 1e-9).
int subtraction_order(double s, int d);
// s + d ∈ −ℕ within 1e-9
bool integer_case(double s, int d);

struct ExtensionOptions {
  QuadOptions quad{};
  double rel_stop = 1e-12;  // u-integral truncation
  double max_u = 0.0;       // 0 picks a bound from the decay rate
};

// ⟨t(1−χ),φ⟩ + ∫_0^∞ du ⟨t, ψ(h e^u)·φ⟩, requires s + d > 0
double extend_positive(const Distribution& t, double s, const Cutoff& chi, const TestFunction& phi,
                       const ExtensionOptions& opt = {});
// ⟨t(1−χ),φ⟩ + ∫_0^∞ du ⟨t, ψ(h e^u)·I_mφ⟩, requires −m−1 < s + d ≤ −m
double extend_singular(const Distribution& t, double s, int m, const Cutoff& chi, const TestFunction& phi,
                       const ExtensionOptions& opt = {});

// t̄ as a distribution on the whole chart
Distribution extension_distribution(const Distribution& t, double s, const Cutoff& chi,
                                    const ExtensionOptions& opt = {});

struct ExtendOptions {
  ExtensionOptions ext{};
  bool estimate = true;  // run estimate_degree on t̄
  std::vector<TestFunction> probes;  // default_probes when empty
  std::vector<double> grid;          // default_lambda_grid when empty
  ScalingOptions scaling{};
};

struct ExtensionResult {
  Distribution tbar;
  double s_in = 0.0;
  double s_out = 0.0;
  int m = -1;
  bool log_flag = false;      // detected by the degree fit
  bool integer_case = false;  // s + d ∈ −ℕ
  Cone wf_bound;
  bool landing = false;
  std::string chi_used;
  std::optional<ScalingReport> report;
  std::string to_json() const;
};

ExtensionResult extend(const Distribution& t, double s, const Cutoff& chi, const std::optional<Cone>& cone_in = {},
                       const ExtendOptions& opt = {});

}  // namespace scalext
