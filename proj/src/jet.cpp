#include "scalext/jet.hpp"

#include <array>
#include <memory>

namespace scalext {

struct JetLayout {
  int nv = 0, ord = 0;
  std::vector<MultiIndex> exps;
  std::vector<int> code_to_idx;
  std::vector<std::array<int, 3>> mult;  // (i, j, k): e_i + e_j = e_k

  int code(const MultiIndex& a) const {
    int c = 0;
    for (int v = nv - 1; v >= 0; --v) c = c * (ord + 1) + a[v];
    return c;
  }
};

namespace {

using Layout = JetLayout;

std::unique_ptr<Layout> build_layout(int nv, int ord) {
  auto L = std::make_unique<Layout>();
  L->nv = nv;
  L->ord = ord;
  L->exps = multi_indices_upto(nv, ord);
  int codes = 1;
  for (int v = 0; v < nv; ++v) codes *= (ord + 1);
  L->code_to_idx.assign(codes, -1);
  for (int i = 0; i < static_cast<int>(L->exps.size()); ++i) L->code_to_idx[L->code(L->exps[i])] = i;
  for (int i = 0; i < static_cast<int>(L->exps.size()); ++i) {
    int di = multi_abs(L->exps[i], nv);
    for (int j = 0; j < static_cast<int>(L->exps.size()); ++j) {
      if (di + multi_abs(L->exps[j], nv) > ord) continue;
      MultiIndex s{};
      for (int v = 0; v < nv; ++v) s[v] = L->exps[i][v] + L->exps[j][v];
      L->mult.push_back({i, j, L->code_to_idx[L->code(s)]});
    }
  }
  return L;
}

using LayoutTable = std::array<std::array<std::unique_ptr<Layout>, kMaxJetOrder + 1>, kMaxDim + 1>;

const LayoutTable& layout_table() {
  static const LayoutTable table = [] {
    LayoutTable t;
    for (int nv = 0; nv <= kMaxDim; ++nv)
      for (int ord = 0; ord <= kMaxJetOrder; ++ord) t[nv][ord] = build_layout(nv, ord);
    return t;
  }();
  return table;
}

const Layout& layout(int nv, int ord) {
  if (nv < 0 || nv > kMaxDim || ord < 0 || ord > kMaxJetOrder) throw DomainError("jet: unsupported size");
  return *layout_table()[nv][ord];
}

}  // namespace

Jet::Jet(int nvars, int order) : nv_(nvars), ord_(order), L_(&layout(nvars, order)) {
  c_.assign(L_->exps.size(), 0.0);
}

Jet Jet::constant(int nvars, int order, double c) {
  Jet j(nvars, order);
  j.c_[0] = c;
  return j;
}

Jet Jet::variable(int nvars, int order, int var, double at) {
  Jet j(nvars, order);
  j.c_[0] = at;
  if (order >= 1) {
    MultiIndex e{};
    e[var] = 1;
    j.c_[j.index_of(e)] = 1.0;
  }
  return j;
}

const MultiIndex& Jet::exponent(int i) const { return L_->exps[i]; }

int Jet::index_of(const MultiIndex& a) const {
  if (multi_abs(a, nv_) > ord_) return -1;
  for (int v = 0; v < nv_; ++v)
    if (a[v] < 0) return -1;
  return L_->code_to_idx[L_->code(a)];
}

double Jet::coeff(const MultiIndex& a) const {
  int i = index_of(a);
  return i < 0 ? 0.0 : c_[i];
}

double Jet::derivative(const MultiIndex& a) const {
  if (multi_abs(a, nv_) > ord_) throw DomainError("jet: derivative order exceeds truncation");
  return coeff(a) * multi_factorial(a, nv_);
}

Jet& Jet::operator+=(const Jet& o) {
  for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (double& v : c_) v *= s;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  Jet r(a.nv_, a.ord_);
  for (const auto& [i, j, k] : a.L_->mult) r.c_[k] += a.c_[i] * b.c_[j];
  return r;
}

Jet Jet::compose(std::span<const double> a) const {
  Jet delta = *this;
  delta.c_[0] = 0.0;
  Jet result = Jet::constant(nv_, ord_, a.empty() ? 0.0 : a[0]);
  Jet power = delta;
  for (int k = 1; k <= ord_ && k < static_cast<int>(a.size()); ++k) {
    if (a[k] != 0.0)
      for (size_t i = 0; i < c_.size(); ++i) result.c_[i] += a[k] * power.c_[i];
    if (k < ord_) power = power * delta;
  }
  return result;
}

Jet Jet::embed(int total, int offset) const {
  Jet r(total, ord_);
  for (int i = 0; i < size(); ++i) {
    MultiIndex e{};
    const MultiIndex& own = exponent(i);
    for (int v = 0; v < nv_; ++v) e[offset + v] = own[v];
    r.c_[r.index_of(e)] = c_[i];
  }
  return r;
}

namespace {
using Coeffs = std::array<double, kMaxJetOrder + 1>;
}

Jet exp(const Jet& f) {
  Coeffs a{};
  double e = std::exp(f.value());
  double fact = 1.0;
  for (int k = 0; k <= f.order(); ++k) {
    if (k > 0) fact *= k;
    a[k] = e / fact;
  }
  return f.compose(std::span<const double>(a.data(), f.order() + 1));
}

Jet log(const Jet& f) {
  double v = f.value();
  if (v <= 0.0) throw DomainError("jet log: nonpositive argument");
  Coeffs a{};
  a[0] = std::log(v);
  for (int k = 1; k <= f.order(); ++k) a[k] = ((k % 2) ? 1.0 : -1.0) / (k * std::pow(v, k));
  return f.compose(std::span<const double>(a.data(), f.order() + 1));
}

Jet reciprocal(const Jet& f) {
  double v = f.value();
  if (v == 0.0) throw DomainError("jet reciprocal: zero argument");
  Coeffs a{};
  double p = 1.0 / v;
  for (int k = 0; k <= f.order(); ++k) {
    a[k] = ((k % 2) ? -1.0 : 1.0) * p;
    p /= v;
  }
  return f.compose(std::span<const double>(a.data(), f.order() + 1));
}

Jet pow(const Jet& f, double p) {
  double v = f.value();
  if (v <= 0.0) throw DomainError("jet pow: nonpositive base");
  Coeffs a{};
  double binom = 1.0;
  for (int k = 0; k <= f.order(); ++k) {
    if (k > 0) binom *= (p - (k - 1)) / k;
    a[k] = binom * std::pow(v, p - k);
  }
  return f.compose(std::span<const double>(a.data(), f.order() + 1));
}

Jet sqrt(const Jet& f) { return pow(f, 0.5); }

namespace {
// derivatives of cos cycle through cos, -sin, -cos, sin; those of sin start one step later
Jet trig(const Jet& f, bool is_sin) {
  Coeffs a{};
  const double c = std::cos(f.value()), s = std::sin(f.value());
  const double cyc[4] = {c, -s, -c, s};
  const int shift = is_sin ? 3 : 0;
  double fact = 1.0;
  for (int k = 0; k <= f.order(); ++k) {
    if (k > 0) fact *= k;
    a[k] = cyc[(k + shift) % 4] / fact;
  }
  return f.compose(std::span<const double>(a.data(), f.order() + 1));
}
}  // namespace

Jet cos(const Jet& f) { return trig(f, false); }
Jet sin(const Jet& f) { return trig(f, true); }

}  // namespace scalext
