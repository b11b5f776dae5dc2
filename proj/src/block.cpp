#include "scalext/block.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <sstream>

namespace scalext {

BlockSupport BlockSupport::whole(int dim) {
  BlockSupport s;
  s.box = Box::whole(dim);
  return s;
}

bool BlockSupport::contains(std::span<const double> u, double tol) const {
  double r2 = 0.0;
  for (int i = 0; i < box.dim; ++i) {
    if (!box.iv[i].contains(u[i], tol)) return false;
    r2 += u[i] * u[i];
  }
  double r = std::sqrt(r2);
  return r >= rmin - tol && r <= rmax + tol;
}

bool BlockSupport::meets_origin() const {
  if (rmin > 0.0) return false;
  for (int i = 0; i < box.dim; ++i)
    if (!box.iv[i].contains(0.0)) return false;
  return true;
}

bool BlockSupport::bounded() const { return box.bounded() || std::isfinite(rmax); }

Box BlockSupport::bounding_box() const {
  Box b = box;
  if (std::isfinite(rmax))
    for (int i = 0; i < b.dim; ++i) b.iv[i] = intersect(b.iv[i], Interval{-rmax, rmax});
  return b;
}

BlockSupport intersect(const BlockSupport& a, const BlockSupport& b) {
  BlockSupport s;
  s.box = intersect(a.box, b.box);
  s.rmin = std::max(a.rmin, b.rmin);
  s.rmax = std::min(a.rmax, b.rmax);
  return s;
}

namespace {

std::string fmt_vec(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(6);
  for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

Jet zero_jet(int dim, int order) { return Jet(dim, order); }

class ConstantBlock final : public BlockImpl {
 public:
  ConstantBlock(int dim, double c) : dim_(dim), c_(c) {}
  int dim() const override { return dim_; }
  double value(std::span<const double>) const override { return c_; }
  Jet jet(std::span<const double>, int order) const override { return Jet::constant(dim_, order, c_); }
  BlockSupport support() const override {
    if (c_ == 0.0) {
      BlockSupport s = BlockSupport::whole(dim_);
      s.rmin = 1.0;
      s.rmax = 0.0;
      return s;
    }
    return BlockSupport::whole(dim_);
  }
  double scale() const override { return kInf; }
  std::string describe() const override {
    std::ostringstream os;
    os << "const(" << c_ << ")";
    return os.str();
  }

 private:
  int dim_;
  double c_;
};

class BumpBlock final : public BlockImpl {
 public:
  BumpBlock(std::vector<double> c, std::vector<double> r) : c_(std::move(c)), r_(std::move(r)) {}
  int dim() const override { return static_cast<int>(c_.size()); }
  double value(std::span<const double> u) const override {
    double v = 1.0;
    for (size_t i = 0; i < c_.size(); ++i) {
      double t = (u[i] - c_[i]) / r_[i];
      double q = 1.0 - t * t;
      if (q <= 0.0) return 0.0;
      v *= std::exp(1.0 - 1.0 / q);
    }
    return v;
  }
  Jet jet(std::span<const double> u, int order) const override {
    const int k = dim();
    Jet out = Jet::constant(k, order, 1.0);
    for (int i = 0; i < k; ++i) {
      double t0 = (u[i] - c_[i]) / r_[i];
      if (1.0 - t0 * t0 <= 0.0) return zero_jet(k, order);
      Jet t = (Jet::variable(k, order, i, u[i]) - c_[i]) * (1.0 / r_[i]);
      Jet q = Jet::constant(k, order, 1.0) - t * t;
      out = out * exp(Jet::constant(k, order, 1.0) - reciprocal(q));
    }
    return out;
  }
  BlockSupport support() const override {
    BlockSupport s;
    s.box.dim = dim();
    for (int i = 0; i < dim(); ++i) s.box.iv[i] = {c_[i] - r_[i], c_[i] + r_[i]};
    return s;
  }
  double scale() const override { return *std::min_element(r_.begin(), r_.end()) / 8.0; }
  std::string describe() const override { return "bump[" + fmt_vec(c_) + ";" + fmt_vec(r_) + "]"; }

 private:
  std::vector<double> c_, r_;
};

class GaussianBlock final : public BlockImpl {
 public:
  GaussianBlock(std::vector<double> c, std::vector<double> s) : c_(std::move(c)), s_(std::move(s)) {}
  int dim() const override { return static_cast<int>(c_.size()); }
  double value(std::span<const double> u) const override {
    double e = 0.0;
    for (size_t i = 0; i < c_.size(); ++i) {
      double t = (u[i] - c_[i]) / s_[i];
      e += t * t;
    }
    return std::exp(-0.5 * e);
  }
  Jet jet(std::span<const double> u, int order) const override {
    const int k = dim();
    Jet e(k, order);
    for (int i = 0; i < k; ++i) {
      Jet t = (Jet::variable(k, order, i, u[i]) - c_[i]) * (1.0 / s_[i]);
      e += t * t;
    }
    return exp(e * -0.5);
  }
  BlockSupport support() const override { return BlockSupport::whole(dim()); }
  double scale() const override { return *std::min_element(s_.begin(), s_.end()) / 2.0; }
  std::string describe() const override { return "gauss[" + fmt_vec(c_) + ";" + fmt_vec(s_) + "]"; }

 private:
  std::vector<double> c_, s_;
};

double monomial_value(std::span<const double> u, const MultiIndex& a, int dim) {
  double v = 1.0;
  for (int i = 0; i < dim; ++i)
    for (int k = 0; k < a[i]; ++k) v *= u[i];
  return v;
}

class PolynomialBlock final : public BlockImpl {
 public:
  PolynomialBlock(int dim, std::vector<std::pair<MultiIndex, double>> terms)
      : dim_(dim), terms_(std::move(terms)) {}
  int dim() const override { return dim_; }
  double value(std::span<const double> u) const override {
    double v = 0.0;
    for (const auto& [a, c] : terms_) v += c * monomial_value(u, a, dim_);
    return v;
  }
  Jet jet(std::span<const double> u, int order) const override {
    Jet j(dim_, order);
    for (int idx = 0; idx < j.size(); ++idx) {
      const MultiIndex& b = j.exponent(idx);
      double acc = 0.0;
      for (const auto& [a, c] : terms_) {
        double term = c;
        for (int i = 0; i < dim_ && term != 0.0; ++i) {
          if (b[i] > a[i]) {
            term = 0.0;
            break;
          }
          term *= static_cast<double>(binomial(a[i], b[i]));
          for (int k = 0; k < a[i] - b[i]; ++k) term *= u[i];
        }
        acc += term;
      }
      j[idx] = acc;
    }
    return j;
  }
  BlockSupport support() const override { return BlockSupport::whole(dim_); }
  double scale() const override { return kInf; }
  std::string describe() const override {
    std::ostringstream os;
    os << "poly{";
    for (size_t t = 0; t < terms_.size(); ++t) {
      os << (t ? "+" : "") << terms_[t].second << "*u^(";
      for (int i = 0; i < dim_; ++i) os << (i ? "," : "") << terms_[t].first[i];
      os << ")";
    }
    os << "}";
    return os.str();
  }

 private:
  int dim_;
  std::vector<std::pair<MultiIndex, double>> terms_;
};

class CosineBlock final : public BlockImpl {
 public:
  // the phase enters through cos φ and sin φ, so cos(θ − π/2) stays an accurate sin θ for small θ
  CosineBlock(std::vector<double> w, double phase)
      : w_(std::move(w)), phase_(phase), cp_(snap(std::cos(phase))), sp_(snap(std::sin(phase))) {}
  int dim() const override { return static_cast<int>(w_.size()); }
  double value(std::span<const double> u) const override {
    double a = 0.0;
    for (size_t i = 0; i < w_.size(); ++i) a += w_[i] * u[i];
    return cp_ * std::cos(a) - sp_ * std::sin(a);
  }
  Jet jet(std::span<const double> u, int order) const override {
    const int k = dim();
    Jet a = Jet::constant(k, order, 0.0);
    for (int i = 0; i < k; ++i) a += Jet::variable(k, order, i, u[i]) * w_[i];
    return cp_ * cos(a) - sp_ * sin(a);
  }
  BlockSupport support() const override { return BlockSupport::whole(dim()); }
  double scale() const override {
    double n = 0.0;
    for (double v : w_) n += v * v;
    return n > 0.0 ? 1.0 / std::sqrt(n) : kInf;
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "cos[" << fmt_vec(w_) << ";" << phase_ << "]";
    return os.str();
  }

 private:
  static double snap(double v) {
    if (std::abs(v) < 1e-15) return 0.0;
    if (std::abs(std::abs(v) - 1.0) < 1e-15) return std::copysign(1.0, v);
    return v;
  }
  std::vector<double> w_;
  double phase_, cp_, sp_;
};

// e^{-1/t} or e^{-1/t²} for t > 0.
double profile_f(bool squared, double t) {
  if (t <= 0.0) return 0.0;
  return squared ? std::exp(-1.0 / (t * t)) : std::exp(-1.0 / t);
}

double profile_df(bool squared, double t) {
  if (t <= 0.0) return 0.0;
  return squared ? 2.0 * profile_f(true, t) / (t * t * t) : profile_f(false, t) / (t * t);
}

bool profile_squared(const std::string& p) {
  if (p == "exp") return false;
  if (p == "exp2") return true;
  throw DomainError("unknown cutoff profile '" + p + "'");
}

// Below this τ (or above 1 − it) the step is flat to double precision in all jet orders.
double flat_margin(bool squared) { return squared ? 1.0 / 27.0 : 1.0 / 700.0; }

class RadialStepBlock final : public BlockImpl {
 public:
  RadialStepBlock(int dim, double a, double b, std::string profile, bool psi, bool complement = false)
      : dim_(dim), a_(a), b_(b), profile_(std::move(profile)), psi_(psi), complement_(complement),
        squared_(profile_squared(profile_)) {}
  int dim() const override { return dim_; }

  double value(std::span<const double> u) const override {
    double r = radius(u);
    double tau = (r - a_) / (b_ - a_);
    // S(1−τ) = 1 − S(τ) without the cancellation near S ≈ 1
    if (complement_) return smooth_step(profile_, 1.0 - tau);
    if (!psi_) return smooth_step(profile_, tau);
    if (tau <= 0.0 || tau >= 1.0) return 0.0;
    double A = profile_f(squared_, 1.0 - tau), B = profile_f(squared_, tau);
    double dA = -profile_df(squared_, 1.0 - tau), dB = profile_df(squared_, tau);
    double dS = (dA * B - A * dB) / ((A + B) * (A + B));
    return -r * dS / (b_ - a_);
  }

  Jet jet(std::span<const double> u, int order) const override {
    double r0 = radius(u);
    double tau0 = (r0 - a_) / (b_ - a_);
    double m = flat_margin(squared_);
    if (tau0 <= m) return Jet::constant(dim_, order, (psi_ || complement_) ? 0.0 : 1.0);
    if (tau0 >= 1.0 - m) return Jet::constant(dim_, order, complement_ ? 1.0 : 0.0);
    // univariate expansion in r, then composed with r(u)
    int uord = psi_ ? order + 1 : order;
    Jet tau = (Jet::variable(1, uord, 0, r0) - a_) * (1.0 / (b_ - a_));
    Jet s = complement_ ? smooth_step(profile_, Jet::constant(1, uord, 1.0) - tau) : smooth_step(profile_, tau);
    std::vector<double> g(order + 1);
    if (!psi_) {
      for (int k = 0; k <= order; ++k) g[k] = s[k];
    } else {
      // -r χ'(r): χ' has coefficients (k+1) s_{k+1}
      for (int k = 0; k <= order; ++k) g[k] = -(r0 * (k + 1) * s[k + 1] + k * s[k]);
    }
    return radius_jet(u, order).compose(g);
  }

  BlockSupport support() const override {
    BlockSupport s = BlockSupport::whole(dim_);
    if (complement_) {
      s.rmin = a_;
      return s;
    }
    for (int i = 0; i < dim_; ++i) s.box.iv[i] = {-b_, b_};
    s.rmax = b_;
    if (psi_) s.rmin = a_;
    return s;
  }
  double scale() const override { return (b_ - a_) / 8.0; }
  std::string describe() const override {
    std::ostringstream os;
    os << (psi_ ? "psi[" : (complement_ ? "1-chi[" : "chi[")) << a_ << "," << b_ << "," << profile_ << "]";
    return os.str();
  }

 private:
  double radius(std::span<const double> u) const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += u[i] * u[i];
    return std::sqrt(s);
  }
  Jet radius_jet(std::span<const double> u, int order) const {
    if (dim_ == 1) {
      Jet v = Jet::variable(1, order, 0, u[0]);
      return u[0] < 0.0 ? v * -1.0 : v;
    }
    Jet s(dim_, order);
    for (int i = 0; i < dim_; ++i) {
      Jet v = Jet::variable(dim_, order, i, u[i]);
      s += v * v;
    }
    return sqrt(s);
  }

  int dim_;
  double a_, b_;
  std::string profile_;
  bool psi_;
  bool complement_;
  bool squared_;
};

class CallableBlock final : public BlockImpl {
 public:
  CallableBlock(int dim, Block::ValueFn v, Block::JetFn j, BlockSupport s, double scale, std::string name)
      : dim_(dim), v_(std::move(v)), j_(std::move(j)), s_(s), scale_(scale), name_(std::move(name)) {}
  int dim() const override { return dim_; }
  double value(std::span<const double> u) const override { return v_(u); }
  Jet jet(std::span<const double> u, int order) const override {
    if (j_) return j_(u, order);
    if (order == 0) return Jet::constant(dim_, 0, v_(u));
    throw DomainError("block '" + name_ + "' provides values only");
  }
  BlockSupport support() const override { return s_; }
  double scale() const override { return scale_; }
  std::string describe() const override { return name_; }

 private:
  int dim_;
  Block::ValueFn v_;
  Block::JetFn j_;
  BlockSupport s_;
  double scale_;
  std::string name_;
};

class ProductBlock final : public BlockImpl {
 public:
  ProductBlock(Block a, Block b) : a_(std::move(a)), b_(std::move(b)), s_(intersect(a_.support(), b_.support())) {}
  int dim() const override { return a_.dim(); }
  double value(std::span<const double> u) const override {
    if (!s_.contains(u)) return 0.0;
    double va = a_(u);
    return va == 0.0 ? 0.0 : va * b_(u);
  }
  Jet jet(std::span<const double> u, int order) const override {
    if (!s_.contains(u)) return Jet(dim(), order);
    return a_.jet(u, order) * b_.jet(u, order);
  }
  BlockSupport support() const override { return s_; }
  double scale() const override { return std::min(a_.scale(), b_.scale()); }
  std::string describe() const override { return a_.describe() + "*" + b_.describe(); }

 private:
  Block a_, b_;
  BlockSupport s_;
};

class ScaledBlock final : public BlockImpl {
 public:
  ScaledBlock(Block a, double lam) : a_(std::move(a)), lam_(lam) {}
  int dim() const override { return a_.dim(); }
  double value(std::span<const double> u) const override {
    std::array<double, kMaxDim> v{};
    for (int i = 0; i < dim(); ++i) v[i] = lam_ * u[i];
    return a_(std::span<const double>(v.data(), dim()));
  }
  Jet jet(std::span<const double> u, int order) const override {
    std::array<double, kMaxDim> v{};
    for (int i = 0; i < dim(); ++i) v[i] = lam_ * u[i];
    Jet j = a_.jet(std::span<const double>(v.data(), dim()), order);
    for (int idx = 0; idx < j.size(); ++idx) j[idx] *= std::pow(lam_, multi_abs(j.exponent(idx), dim()));
    return j;
  }
  BlockSupport support() const override {
    BlockSupport s = a_.support();
    for (int i = 0; i < dim(); ++i) s.box.iv[i] = {s.box.iv[i].lo / lam_, s.box.iv[i].hi / lam_};
    s.rmin /= lam_;
    s.rmax /= lam_;
    return s;
  }
  double scale() const override { return a_.scale() / lam_; }
  std::string describe() const override {
    std::ostringstream os;
    os.precision(17);
    os << "scaled(" << a_.describe() << "," << lam_ << ")";
    return os.str();
  }

 private:
  Block a_;
  double lam_;
};

class TaylorRemainderBlock final : public BlockImpl {
 public:
  TaylorRemainderBlock(Block a, int m) : a_(std::move(a)), m_(m), p_(taylor_poly(a_, m)), s_(a_.support()) {
    top_ = multi_indices_exact(a_.dim(), m_ + 1);
    std::vector<double> zero(a_.dim(), 0.0);
    const Jet j = a_.jet(zero, std::max(m_, 0));
    flat_ = true;
    for (int idx = 0; idx < j.size(); ++idx) flat_ = flat_ && j[idx] == 0.0;
  }
  int dim() const override { return a_.dim(); }
  double value(std::span<const double> u) const override {
    if (flat_) return a_(u);  // nothing is subtracted, so nothing cancels
    if (!s_.contains(u)) return -p_(u);
    double norm = 0.0;
    for (int i = 0; i < dim(); ++i) norm = std::max(norm, std::abs(u[i]));
    if (norm > 2.0 * a_.scale()) return a_(u) - p_(u);
    // (m+1) Σ_{|α|=m+1} u^α ∫_0^1 (1−t)^m [∂^α a(tu)/α!] dt; the integrand is
    // analytic on a disc of radius ~ scale, so short segments need few nodes
    const double sc = a_.scale();
    const GaussRule& g = norm <= 0.25 * sc ? gauss_legendre_8() : norm <= sc ? gauss_legendre_16() : gauss_legendre_32();
    std::array<double, kMaxDim> tu{};
    double acc = 0.0;
    for (size_t q = 0; q < g.x.size(); ++q) {
      double t = g.x[q];
      for (int i = 0; i < dim(); ++i) tu[i] = t * u[i];
      Jet j = a_.jet(std::span<const double>(tu.data(), dim()), m_ + 1);
      double inner = 0.0;
      for (const MultiIndex& al : top_) inner += monomial_value(u, al, dim()) * j.coeff(al);
      acc += g.w[q] * std::pow(1.0 - t, m_) * inner;
    }
    return (m_ + 1) * acc;
  }
  Jet jet(std::span<const double> u, int order) const override { return a_.jet(u, order) - p_.jet(u, order); }
  BlockSupport support() const override { return BlockSupport::whole(dim()); }
  double scale() const override { return a_.scale(); }
  std::string describe() const override {
    return "I" + std::to_string(m_) + "(" + a_.describe() + ")";
  }

 private:
  Block a_;
  int m_;
  Block p_;
  BlockSupport s_;
  std::vector<MultiIndex> top_;
  bool flat_ = false;
};

}  // namespace

Block Block::constant(int dim, double c) { return Block(std::make_shared<ConstantBlock>(dim, c)); }

Block Block::bump(std::vector<double> center, std::vector<double> radii) {
  if (center.size() != radii.size() || center.empty()) throw DomainError("bump: center/radii size mismatch");
  for (double r : radii)
    if (!(r > 0.0)) throw DomainError("bump: radii must be positive");
  return Block(std::make_shared<BumpBlock>(std::move(center), std::move(radii)));
}

Block Block::gaussian(std::vector<double> center, std::vector<double> sigma) {
  if (center.size() != sigma.size() || center.empty()) throw DomainError("gaussian: size mismatch");
  for (double s : sigma)
    if (!(s > 0.0)) throw DomainError("gaussian: sigma must be positive");
  return Block(std::make_shared<GaussianBlock>(std::move(center), std::move(sigma)));
}

Block Block::monomial(int dim, MultiIndex alpha, double coeff) {
  return polynomial(dim, {{alpha, coeff}});
}

Block Block::polynomial(int dim, std::vector<std::pair<MultiIndex, double>> terms) {
  return Block(std::make_shared<PolynomialBlock>(dim, std::move(terms)));
}

Block Block::cosine(std::vector<double> omega, double phase) {
  if (omega.empty()) throw DomainError("cosine: empty frequency");
  return Block(std::make_shared<CosineBlock>(std::move(omega), phase));
}

Block Block::radial_chi(int dim, double a, double b, const std::string& profile) {
  if (!(a > 0.0 && b > a)) throw DomainError("cutoff: need 0 < a < b");
  return Block(std::make_shared<RadialStepBlock>(dim, a, b, profile, false));
}

Block Block::radial_psi(int dim, double a, double b, const std::string& profile) {
  if (!(a > 0.0 && b > a)) throw DomainError("cutoff: need 0 < a < b");
  return Block(std::make_shared<RadialStepBlock>(dim, a, b, profile, true));
}

Block Block::radial_chi_complement(int dim, double a, double b, const std::string& profile) {
  if (!(a > 0.0 && b > a)) throw DomainError("cutoff: need 0 < a < b");
  return Block(std::make_shared<RadialStepBlock>(dim, a, b, profile, false, true));
}

Block Block::callable(int dim, ValueFn value, JetFn jet, BlockSupport support, double scale, std::string name) {
  return Block(std::make_shared<CallableBlock>(dim, std::move(value), std::move(jet), support, scale,
                                               std::move(name)));
}

Block product(const Block& a, const Block& b) {
  if (a.dim() != b.dim()) throw DomainError("block product: dimension mismatch");
  return Block(std::make_shared<ProductBlock>(a, b));
}

Block scaled(const Block& a, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("scaling factor must be positive");
  if (lambda == 1.0) return a;
  return Block(std::make_shared<ScaledBlock>(a, lambda));
}

Block taylor_poly(const Block& a, int m) {
  if (m < 0) return Block::constant(a.dim(), 0.0);
  if (m + 1 > kMaxJetOrder) throw DomainError("taylor_poly: order too high");
  std::array<double, kMaxDim> zero{};
  Jet j = a.jet(std::span<const double>(zero.data(), a.dim()), m);
  std::vector<std::pair<MultiIndex, double>> terms;
  for (int idx = 0; idx < j.size(); ++idx)
    if (j[idx] != 0.0) terms.push_back({j.exponent(idx), j[idx]});
  return Block::polynomial(a.dim(), std::move(terms));
}

Block taylor_remainder(const Block& a, int m) {
  if (m < 0) return a;
  if (m + 1 > kMaxJetOrder) throw DomainError("taylor_remainder: order too high");
  if (!a.support().meets_origin()) return a;
  return Block(std::make_shared<TaylorRemainderBlock>(a, m));
}

bool known_profile(const std::string& p) { return p == "exp" || p == "exp2"; }

double smooth_step(const std::string& profile, double tau) {
  if (tau <= 0.0) return 1.0;
  if (tau >= 1.0) return 0.0;
  bool sq = profile_squared(profile);
  double A = profile_f(sq, 1.0 - tau), B = profile_f(sq, tau);
  return A / (A + B);
}

Jet smooth_step(const std::string& profile, const Jet& tau) {
  const int k = tau.nvars(), o = tau.order();
  double t0 = tau.value();
  bool sq = profile_squared(profile);
  double m = flat_margin(sq);
  if (t0 <= m) return Jet::constant(k, o, 1.0);
  if (t0 >= 1.0 - m) return Jet(k, o);
  auto f = [&](const Jet& t) { return sq ? exp(reciprocal(t * t) * -1.0) : exp(reciprocal(t) * -1.0); };
  Jet A = f(Jet::constant(k, o, 1.0) - tau);
  Jet B = f(tau);
  return A * reciprocal(A + B);
}

namespace {

template <int N>
GaussRule unit_gauss_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  GaussRule r;
  const auto& ab = G::abscissa();
  const auto& wt = G::weights();
  for (size_t i = 0; i < ab.size(); ++i) {
    double xi = ab[i], wi = wt[i];
    if (xi == 0.0) {
      r.x.push_back(0.5);
      r.w.push_back(0.5 * wi);
      continue;
    }
    r.x.push_back(0.5 * (1.0 - xi));
    r.w.push_back(0.5 * wi);
    r.x.push_back(0.5 * (1.0 + xi));
    r.w.push_back(0.5 * wi);
  }
  return r;
}

}  // namespace

const GaussRule& gauss_legendre_8() {
  static const GaussRule rule = unit_gauss_rule<8>();
  return rule;
}

const GaussRule& gauss_legendre_16() {
  static const GaussRule rule = unit_gauss_rule<16>();
  return rule;
}

const GaussRule& gauss_legendre_32() {
  static const GaussRule rule = unit_gauss_rule<32>();
  return rule;
}

}  // namespace scalext
