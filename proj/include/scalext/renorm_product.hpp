#pragma once

#include <optional>

#include "scalext/cone.hpp"
#include "scalext/distribution.hpp"
#include "scalext/extension.hpp"

namespace scalext {

// The factors' wave front sets over U∖I contain opposite covectors at a common point.
struct TransversalityError : DomainError {
  TransversalityError(const std::string& what, TransversalityViolation v) : DomainError(what), violation(v) {}
  TransversalityViolation violation;
};

// (Γ1 + Γ2) ∪ Γ1 ∪ Γ2
Cone product_cone(const Cone& g1, const Cone& g2);

// Pointwise product of two kernel-backed distributions off I, with meta_cone = product_cone.
// Γ1, Γ2 are the wave front sets of u1, u2 over U∖I.
Distribution hormander_product(const Distribution& u1, const Distribution& u2, const Cone& g1, const Cone& g2);

struct ProductRequest {
  Distribution u1, u2;
  double s1 = 0.0, s2 = 0.0;
  Cone g1, g2;
  std::optional<double> s_target;  // s1 + s2 − 0.01 when unset

  double target() const { return s_target ? *s_target : s1 + s2 - 0.01; }
};

// R(u1 u2): the product extended across I with degree s_target; wf_bound = Γ ∪ N*(I).
ExtensionResult renormalize_product(const ProductRequest& req, const Cutoff& chi, const ExtendOptions& opt = {});

}  // namespace scalext
