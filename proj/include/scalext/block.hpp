#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "scalext/core.hpp"
#include "scalext/jet.hpp"

namespace scalext {

// Where a block can be nonzero: a box intersected with a radial shell.
struct BlockSupport {
  Box box;
  double rmin = 0.0;
  double rmax = kInf;

  static BlockSupport whole(int dim);
  bool contains(std::span<const double> u, double tol = 0.0) const;
  bool meets_origin() const;
  bool bounded() const;
  Box bounding_box() const;
};

BlockSupport intersect(const BlockSupport& a, const BlockSupport& b);

class BlockImpl {
 public:
  virtual ~BlockImpl() = default;
  virtual int dim() const = 0;
  virtual double value(std::span<const double> u) const = 0;
  virtual Jet jet(std::span<const double> u, int order) const = 0;
  virtual BlockSupport support() const = 0;
  // Length over which the block changes appreciably; guides Taylor remainder evaluation.
  virtual double scale() const = 0;
  virtual std::string describe() const = 0;
};

// Smooth function of a few variables with exact jets.
class Block {
 public:
  Block() = default;
  explicit Block(std::shared_ptr<const BlockImpl> impl) : p_(std::move(impl)) {}

  int dim() const { return p_->dim(); }
  double operator()(std::span<const double> u) const { return p_->value(u); }
  double operator()(double u) const { return p_->value(std::span<const double>(&u, 1)); }
  Jet jet(std::span<const double> u, int order) const { return p_->jet(u, order); }
  BlockSupport support() const { return p_->support(); }
  double scale() const { return p_->scale(); }
  std::string describe() const { return p_->describe(); }
  bool valid() const { return static_cast<bool>(p_); }
  const BlockImpl* impl() const { return p_.get(); }

  static Block constant(int dim, double c);
  // Tensor product of e·exp(−1/(1−u²)) profiles, peak 1 at the center.
  static Block bump(std::vector<double> center, std::vector<double> radii);
  static Block gaussian(std::vector<double> center, std::vector<double> sigma);
  static Block monomial(int dim, MultiIndex alpha, double coeff = 1.0);
  static Block polynomial(int dim, std::vector<std::pair<MultiIndex, double>> terms);
  // cos(⟨ω,u⟩ + phase)
  static Block cosine(std::vector<double> omega, double phase = 0.0);
  static Block radial_chi(int dim, double a, double b, const std::string& profile);
  static Block radial_chi_complement(int dim, double a, double b, const std::string& profile);
  static Block radial_psi(int dim, double a, double b, const std::string& profile);
  using ValueFn = std::function<double(std::span<const double>)>;
  using JetFn = std::function<Jet(std::span<const double>, int)>;
  static Block callable(int dim, ValueFn value, JetFn jet, BlockSupport support, double scale,
                        std::string name);

 private:
  std::shared_ptr<const BlockImpl> p_;
};

Block product(const Block& a, const Block& b);
// u ↦ a(λu)
Block scaled(const Block& a, double lambda);
// Σ_{|α|≤m} ∂^α a(0) u^α / α!
Block taylor_poly(const Block& a, int m);
// a − taylor_poly(a, m), evaluated through the integral remainder near 0.
Block taylor_remainder(const Block& a, int m);

// 1-D smooth step profiles shared by cutoffs: S(τ) = 1 for τ ≤ 0, 0 for τ ≥ 1.
double smooth_step(const std::string& profile, double tau);
Jet smooth_step(const std::string& profile, const Jet& tau);
bool known_profile(const std::string& profile);

// Gauss–Legendre rules on [0,1].
struct GaussRule {
  std::vector<double> x, w;
};
const GaussRule& gauss_legendre_8();
const GaussRule& gauss_legendre_16();
const GaussRule& gauss_legendre_32();

}  // namespace scalext
