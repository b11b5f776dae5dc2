#include "scalext/core.hpp"

#include <algorithm>

namespace scalext {

Box Box::whole(int dim) {
  Box b;
  b.dim = dim;
  for (int i = 0; i < dim; ++i) b.iv[i] = Interval::whole();
  return b;
}

bool Box::empty() const {
  for (int i = 0; i < dim; ++i)
    if (iv[i].lo > iv[i].hi) return true;
  return false;
}

bool Box::bounded() const {
  for (int i = 0; i < dim; ++i)
    if (!iv[i].bounded()) return false;
  return true;
}

bool Box::contains(const Point& p, double tol) const {
  for (int i = 0; i < dim; ++i)
    if (!iv[i].contains(p[i], tol)) return false;
  return true;
}

bool Box::contains(const Box& b, double tol) const {
  if (b.empty()) return true;
  for (int i = 0; i < dim; ++i)
    if (b.iv[i].lo < iv[i].lo - tol || b.iv[i].hi > iv[i].hi + tol) return false;
  return true;
}

Box intersect(const Box& a, const Box& b) {
  Box r;
  r.dim = a.dim;
  for (int i = 0; i < a.dim; ++i) r.iv[i] = intersect(a.iv[i], b.iv[i]);
  return r;
}

Box hull(const Box& a, const Box& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  Box r;
  r.dim = a.dim;
  for (int i = 0; i < a.dim; ++i) r.iv[i] = hull(a.iv[i], b.iv[i]);
  return r;
}

ChartRegion::ChartRegion(Dims dims_, Box bx, Box bh) : dims(dims_), box_x(bx), box_h(bh) {
  if (dims.d < 1) throw DomainError("chart: codimension d must be >= 1");
  if (dims.n < 0) throw DomainError("chart: n must be >= 0");
  if (dims.total() > kMaxDim) throw DomainError("chart: n + d exceeds the supported dimension");
  if (box_x.dim != dims.n || box_h.dim != dims.d) throw DomainError("chart: box dimension mismatch");
  for (int j = 0; j < dims.d; ++j)
    if (!box_h.iv[j].contains(0.0)) throw DomainError("chart: box_h must contain 0");
  if (box_x.empty() || box_h.empty()) throw DomainError("chart: empty box");
}

ChartRegion ChartRegion::standard(int n, int d, double half_x, double half_h) {
  Box bx, bh;
  bx.dim = n;
  bh.dim = d;
  for (int i = 0; i < n; ++i) bx.iv[i] = {-half_x, half_x};
  for (int j = 0; j < d; ++j) bh.iv[j] = {-half_h, half_h};
  return ChartRegion(Dims{n, d}, bx, bh);
}

Box ChartRegion::full_box() const {
  Box b;
  b.dim = dims.total();
  for (int i = 0; i < dims.n; ++i) b.iv[i] = box_x.iv[i];
  for (int j = 0; j < dims.d; ++j) b.iv[dims.n + j] = box_h.iv[j];
  return b;
}

bool ChartRegion::contains(const Point& p, double tol) const { return full_box().contains(p, tol); }

int multi_abs(const MultiIndex& a, int dim) {
  int s = 0;
  for (int i = 0; i < dim; ++i) s += a[i];
  return s;
}

double multi_factorial(const MultiIndex& a, int dim) {
  double f = 1.0;
  for (int i = 0; i < dim; ++i)
    for (int k = 2; k <= a[i]; ++k) f *= k;
  return f;
}

std::vector<MultiIndex> multi_indices_exact(int dim, int order) {
  std::vector<MultiIndex> out;
  if (dim == 0) {
    if (order == 0) out.push_back(MultiIndex{});
    return out;
  }
  MultiIndex a{};
  // lexicographically descending in the first slot
  auto rec = [&](auto&& self, int slot, int left) -> void {
    if (slot == dim - 1) {
      a[slot] = left;
      out.push_back(a);
      return;
    }
    for (int k = left; k >= 0; --k) {
      a[slot] = k;
      self(self, slot + 1, left - k);
    }
    a[slot] = 0;
  };
  rec(rec, 0, order);
  return out;
}

std::vector<MultiIndex> multi_indices_upto(int dim, int order) {
  std::vector<MultiIndex> out;
  for (int k = 0; k <= order; ++k) {
    auto e = multi_indices_exact(dim, k);
    out.insert(out.end(), e.begin(), e.end());
  }
  return out;
}

long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace scalext
