#pragma once

#include <string>

#include "scalext/block.hpp"
#include "scalext/core.hpp"

namespace scalext {

// χ(x,h) = S((|h| − a)/(b − a)): 1 on |h| ≤ a, 0 on |h| ≥ b.
class Cutoff {
 public:
  Cutoff() = default;
  Cutoff(double a, double b, std::string profile);

  double a() const { return a_; }
  double b() const { return b_; }
  const std::string& profile() const { return profile_; }
  std::string id() const;

  double chi(const Point& p, Dims dims) const;
  Block chi_block(int d) const { return Block::radial_chi(d, a_, b_, profile_); }

 private:
  double a_ = 0.5, b_ = 1.0;
  std::string profile_ = "exp";
};

// ψ = −Σ_j h^j ∂_{h^j} χ, supported in a ≤ |h| ≤ b.
class PsiFunction {
 public:
  explicit PsiFunction(Cutoff chi) : chi_(std::move(chi)) {}
  double inner_radius() const { return chi_.a(); }
  double outer_radius() const { return chi_.b(); }
  const Cutoff& cutoff() const { return chi_; }
  double psi(const Point& p, Dims dims) const;
  Block block(int d) const { return Block::radial_psi(d, chi_.a(), chi_.b(), chi_.profile()); }

 private:
  Cutoff chi_;
};

Cutoff make_cutoff(double a = 0.5, double b = 1.0, const std::string& profile = "exp");
PsiFunction psi_of(const Cutoff& chi);

// ∫_{1/Λ}^1 (dλ/λ) ψ(x, h/λ), which equals χ(x,h) − χ(x,Λh).
double partition_integral(const Cutoff& chi, double Lambda, const Point& p, Dims dims);

}  // namespace scalext
