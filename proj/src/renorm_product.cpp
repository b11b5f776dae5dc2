#include "scalext/renorm_product.hpp"

#include <cmath>
#include <sstream>

namespace scalext {

namespace {

std::string describe_violation(const TransversalityViolation& v, Dims dims) {
  std::ostringstream os;
  os << "product refused: opposite covectors at (";
  for (int i = 0; i < dims.total(); ++i) os << (i ? "," : "") << v.point[i];
  os << ") direction (";
  for (int i = 0; i < dims.total(); ++i) os << (i ? "," : "") << v.direction[i];
  os << ")";
  if (!v.detail.empty()) os << ": " << v.detail;
  return os.str();
}

}  // namespace

Cone product_cone(const Cone& g1, const Cone& g2) { return cone_union(cone_union(cone_sum(g1, g2), g1), g2); }

Distribution hormander_product(const Distribution& u1, const Distribution& u2, const Cone& g1, const Cone& g2) {
  if (!u1.valid() || !u2.valid()) throw DomainError("hormander_product: empty factor");
  const Dims dm = u1.dims();
  if (!(u2.dims() == dm) || !(g1.dims() == dm) || !(g2.dims() == dm))
    throw DomainError("hormander_product: dimension mismatch");
  if (const auto v = find_transversality_violation(g1, g2)) throw TransversalityError(describe_violation(*v, dm), *v);
  const KernelSpec* k1 = u1.kernel();
  const KernelSpec* k2 = u2.kernel();
  if (!k1 || !k2) throw DomainError("hormander_product: both factors need pointwise kernels off I");
  Distribution out = kernel_distribution(u1.domain(), multiply_kernels(*k1, *k2), "(" + u1.id() + ")*(" + u2.id() + ")");
  if (u1.meta_degree && u2.meta_degree) out.meta_degree = *u1.meta_degree + *u2.meta_degree;
  out.meta_cone = product_cone(g1, g2);
  return out;
}

ExtensionResult renormalize_product(const ProductRequest& req, const Cutoff& chi, const ExtendOptions& opt) {
  const double s = req.target();
  if (!std::isfinite(s) || !(s < req.s1 + req.s2)) throw DomainError("renormalize_product: need s_target < s1 + s2");
  if (!check_landing(req.g1) || !check_landing(req.g2))
    throw DomainError("renormalize_product: factor cones must land in N*(I)");
  const Distribution prod = hormander_product(req.u1, req.u2, req.g1, req.g2);
  const Cone gamma = *prod.meta_cone;
  if (!check_landing(gamma)) throw DomainError("renormalize_product: product cone does not land in N*(I)");
  return extend(prod, s, chi, gamma, opt);
}

}  // namespace scalext
