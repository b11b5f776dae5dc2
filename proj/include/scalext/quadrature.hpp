#pragma once

#include <functional>

#include "scalext/core.hpp"

namespace scalext {

struct QuadOptions {
  double rel_tol = 1e-9;
  double abs_tol = 0.0;
  long max_evals = 1'000'000;
};

// Counts integrand evaluations across nested calls; throws past the cap.
class EvalBudget {
 public:
  explicit EvalBudget(long cap) : cap_(cap) {}
  void charge(long n);
  long used() const { return used_; }

 private:
  long used_ = 0;
  long cap_;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
};

using Integrand = std::function<double(double)>;
// Integrand that is itself an inner integral; its l1 feeds the outer rounding-noise floor.
using NestedIntegrand = std::function<QuadResult(double)>;

// Globally adaptive Gauss–Kronrod (10/21) on a finite interval.
QuadResult integrate(const Integrand& f, double a, double b, const QuadOptions& opt, EvalBudget& budget);
QuadResult integrate(const NestedIntegrand& f, double a, double b, const QuadOptions& opt, EvalBudget& budget);

// ∫ over [s, e] of an integrand possibly singular at s (but not at e), summed over dyadic
// shells toward s with geometric tail control. Throws QuadratureError when the shell
// contributions stop shrinking (integrand not absolutely integrable at s).
QuadResult integrate_to_singular(const Integrand& f, double s, double e, const QuadOptions& opt,
                                 EvalBudget& budget);
QuadResult integrate_to_singular(const NestedIntegrand& f, double s, double e, const QuadOptions& opt,
                                 EvalBudget& budget);

}  // namespace scalext
