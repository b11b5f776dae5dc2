#include "scalext/cutoff.hpp"

#include <sstream>

#include "scalext/quadrature.hpp"

namespace scalext {

Cutoff::Cutoff(double a, double b, std::string profile) : a_(a), b_(b), profile_(std::move(profile)) {
  if (!(a > 0.0)) throw DomainError("cutoff: a must be positive");
  if (!(b > a)) throw DomainError("cutoff: need a < b");
  if (!known_profile(profile_)) throw DomainError("cutoff: unknown profile '" + profile_ + "'");
}

std::string Cutoff::id() const {
  std::ostringstream os;
  os << "chi(" << a_ << "," << b_ << "," << profile_ << ")";
  return os.str();
}

double Cutoff::chi(const Point& p, Dims dims) const {
  return smooth_step(profile_, (h_norm(p, dims) - a_) / (b_ - a_));
}

double PsiFunction::psi(const Point& p, Dims dims) const {
  Block b = block(dims.d);
  return b(std::span<const double>(p.data() + dims.n, dims.d));
}

Cutoff make_cutoff(double a, double b, const std::string& profile) { return Cutoff(a, b, profile); }

PsiFunction psi_of(const Cutoff& chi) { return PsiFunction(chi); }

double partition_integral(const Cutoff& chi, double Lambda, const Point& p, Dims dims) {
  if (!(Lambda >= 1.0)) throw DomainError("partition_integral: Λ must be >= 1");
  const double r = h_norm(p, dims);
  if (r == 0.0) return 0.0;
  // λ = e^{-v}: ∫_0^{log Λ} ψ(x, h e^{v}) dv, nonzero only for a ≤ r e^v ≤ b
  double lo = std::max(0.0, std::log(chi.a() / r));
  double hi = std::min(std::log(Lambda), std::log(chi.b() / r));
  if (hi <= lo) return 0.0;
  Block psi = psi_of(chi).block(dims.d);
  std::array<double, kMaxDim> h{};
  auto f = [&](double v) {
    double s = std::exp(v);
    for (int j = 0; j < dims.d; ++j) h[j] = p[dims.n + j] * s;
    return psi(std::span<const double>(h.data(), dims.d));
  };
  QuadOptions opt;
  opt.rel_tol = 1e-12;
  opt.abs_tol = 1e-14;
  EvalBudget budget(opt.max_evals);
  return integrate(f, lo, hi, opt, budget).value;
}

}  // namespace scalext
