#include "scalext/test_function.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>

namespace scalext {

namespace {

std::span<const double> h_part(const Point& p, Dims dims) {
  return std::span<const double>(p.data() + dims.n, dims.d);
}

double term_value(const SeparableTerm& t, const Point& p, Dims dims) {
  double v = t.coeff;
  for (int i = 0; i < dims.n && v != 0.0; ++i) v *= t.x[i](p[i]);
  if (v == 0.0) return 0.0;
  return v * t.h(h_part(p, dims));
}

Box term_support(const SeparableTerm& t, Dims dims) {
  Box b;
  b.dim = dims.total();
  for (int i = 0; i < dims.n; ++i) b.iv[i] = t.x[i].support().bounding_box().iv[0];
  Box hb = t.h.support().bounding_box();
  for (int j = 0; j < dims.d; ++j) b.iv[dims.n + j] = hb.iv[j];
  return b;
}

}  // namespace

TestFunction TestFunction::separable(Dims dims, std::vector<Block> x, Block h, double coeff) {
  TestFunction f(dims);
  f.add_term(SeparableTerm{coeff, std::move(x), std::move(h)});
  return f;
}

TestFunction TestFunction::generic(Dims dims, std::function<double(const Point&)> fn, Box support, std::string name) {
  TestFunction f(dims);
  f.add_generic(GenericTerm{std::move(fn), support, std::move(name)});
  return f;
}

void TestFunction::add_term(SeparableTerm t) {
  if (static_cast<int>(t.x.size()) != dims_.n) throw DomainError("test function: wrong number of x-blocks");
  for (const Block& b : t.x)
    if (b.dim() != 1) throw DomainError("test function: x-blocks must be univariate");
  if (!t.h.valid() || t.h.dim() != dims_.d) throw DomainError("test function: h-block dimension mismatch");
  terms_.push_back(std::move(t));
}

void TestFunction::add_generic(GenericTerm t) {
  if (t.support.dim != dims_.total()) throw DomainError("test function: generic support dimension mismatch");
  generic_.push_back(std::move(t));
}

double TestFunction::operator()(const Point& p) const {
  double v = 0.0;
  for (const auto& t : terms_) v += term_value(t, p, dims_);
  for (const auto& g : generic_)
    if (g.support.contains(p)) v += g.f(p);
  return v;
}

double TestFunction::deriv(const MultiIndex& alpha, const Point& p) const {
  const int ah = [&] {
    int s = 0;
    for (int j = 0; j < dims_.d; ++j) s += alpha[dims_.n + j];
    return s;
  }();
  int total = ah;
  for (int i = 0; i < dims_.n; ++i) total += alpha[i];
  if (total > max_order_) throw DomainError("deriv: order exceeds M_max");
  if (total == 0) return (*this)(p);
  if (!generic_.empty()) throw DomainError("deriv: test function carries value-only terms");
  double acc = 0.0;
  MultiIndex ahi{};
  for (int j = 0; j < dims_.d; ++j) ahi[j] = alpha[dims_.n + j];
  for (const auto& t : terms_) {
    double v = t.coeff;
    for (int i = 0; i < dims_.n && v != 0.0; ++i) {
      if (alpha[i] == 0) {
        v *= t.x[i](p[i]);
      } else {
        double u = p[i];
        MultiIndex a1{};
        a1[0] = alpha[i];
        v *= t.x[i].jet(std::span<const double>(&u, 1), alpha[i]).derivative(a1);
      }
    }
    if (v == 0.0) continue;
    if (ah == 0)
      v *= t.h(h_part(p, dims_));
    else
      v *= t.h.jet(h_part(p, dims_), ah).derivative(ahi);
    acc += v;
  }
  return acc;
}

Jet TestFunction::jet(const Point& p, int order) const {
  if (order > max_order_) throw DomainError("jet: order exceeds M_max");
  const int total = dims_.total();
  if (!generic_.empty() && order > 0) throw DomainError("jet: test function carries value-only terms");
  Jet acc(total, order);
  for (const auto& t : terms_) {
    Jet tj = Jet::constant(total, order, t.coeff);
    bool zero = false;
    for (int i = 0; i < dims_.n && !zero; ++i) {
      double u = p[i];
      Jet xj = t.x[i].jet(std::span<const double>(&u, 1), order);
      if (xj.value() == 0.0 && order == 0) zero = true;
      tj = tj * xj.embed(total, i);
    }
    if (zero) continue;
    tj = tj * t.h.jet(h_part(p, dims_), order).embed(total, dims_.n);
    acc += tj;
  }
  for (const auto& g : generic_)
    if (g.support.contains(p)) acc[0] += g.f(p);
  return acc;
}

Box TestFunction::support() const {
  Box b;
  b.dim = dims_.total();
  for (int i = 0; i < b.dim; ++i) b.iv[i] = {1.0, -1.0};  // empty
  for (const auto& t : terms_) b = hull(b, term_support(t, dims_));
  for (const auto& g : generic_) b = hull(b, g.support);
  return b;
}

TestFunction& TestFunction::operator+=(const TestFunction& o) {
  if (!(o.dims_ == dims_)) throw DomainError("test function sum: dimension mismatch");
  for (const auto& t : o.terms_) terms_.push_back(t);
  for (const auto& g : o.generic_) generic_.push_back(g);
  max_order_ = std::min(max_order_, o.max_order_);
  return *this;
}

TestFunction& TestFunction::operator*=(double s) {
  for (auto& t : terms_) t.coeff *= s;
  for (auto& g : generic_) {
    auto f = g.f;
    g.f = [f, s](const Point& p) { return s * f(p); };
  }
  return *this;
}

TestFunction operator+(TestFunction a, const TestFunction& b) { return a += b; }
TestFunction operator*(TestFunction a, double s) { return a *= s; }
TestFunction operator*(double s, TestFunction a) { return a *= s; }

TestFunction operator*(const TestFunction& a, const TestFunction& b) {
  if (!(a.dims() == b.dims())) throw DomainError("test function product: dimension mismatch");
  if (!a.has_derivatives() || !b.has_derivatives())
    throw DomainError("test function product: value-only terms are not supported");
  TestFunction r(a.dims(), std::min(a.max_order(), b.max_order()));
  for (const auto& s : a.terms())
    for (const auto& t : b.terms()) {
      SeparableTerm p;
      p.coeff = s.coeff * t.coeff;
      for (int i = 0; i < a.dims().n; ++i) p.x.push_back(product(s.x[i], t.x[i]));
      p.h = product(s.h, t.h);
      r.add_term(std::move(p));
    }
  return r;
}

TestFunction multiply_h(const TestFunction& f, const Block& g) {
  if (!f.has_derivatives()) throw DomainError("multiply_h: value-only terms are not supported");
  TestFunction r(f.dims(), f.max_order());
  for (auto t : f.terms()) {
    t.h = product(t.h, g);
    r.add_term(std::move(t));
  }
  return r;
}

TestFunction make_bump(Dims dims, const std::vector<double>& center, const std::vector<double>& radii) {
  if (static_cast<int>(center.size()) != dims.total() || static_cast<int>(radii.size()) != dims.total())
    throw DomainError("make_bump: center/radii must have n + d entries");
  for (double r : radii)
    if (!(r > 0.0)) throw DomainError("make_bump: radii must be positive");
  std::vector<Block> xs;
  for (int i = 0; i < dims.n; ++i) xs.push_back(Block::bump({center[i]}, {radii[i]}));
  std::vector<double> hc(center.begin() + dims.n, center.end()), hr(radii.begin() + dims.n, radii.end());
  return TestFunction::separable(dims, std::move(xs), Block::bump(hc, hr));
}

TestFunction dilate_h(const TestFunction& f, double mu) {
  if (!(mu > 0.0)) throw DomainError("scaling factor must be positive");
  if (mu == 1.0) return f;
  TestFunction r(f.dims(), f.max_order());
  for (auto t : f.terms()) {
    t.h = scaled(t.h, mu);
    r.add_term(std::move(t));
  }
  const Dims dims = f.dims();
  for (const auto& g : f.generic_terms()) {
    auto fn = g.f;
    Box sb = g.support;
    for (int j = 0; j < dims.d; ++j) sb.iv[dims.n + j] = {g.support.iv[dims.n + j].lo / mu, g.support.iv[dims.n + j].hi / mu};
    r.add_generic(GenericTerm{[fn, mu, dims](const Point& p) {
                                Point q = p;
                                for (int j = 0; j < dims.d; ++j) q[dims.n + j] *= mu;
                                return fn(q);
                              },
                              sb, g.name});
  }
  return r;
}

TestFunction scale_testfn(const TestFunction& f, double lambda) {
  if (!(lambda > 0.0) || lambda > 1.0) throw DomainError("scale_testfn: λ must lie in (0,1]");
  return dilate_h(f, lambda);
}

double seminorm(const TestFunction& f, int m, const Box& K) {
  if (m < 0 || m > f.max_order()) throw DomainError("seminorm: order must lie in [0, M_max]");
  const int D = f.dims().total();
  if (K.dim != D || !K.bounded()) throw DomainError("seminorm: K must be a bounded box of dimension n + d");
  if (f.is_zero()) return 0.0;
  const long budget = 1L << 21;
  int N = D <= 2 ? 64 : (D == 3 ? 32 : 16);
  const auto alphas = multi_indices_upto(D, m);
  struct Best {
    double v = 0.0;
    Point p{};
  };
  auto sup_on = [&](int pts) {
    std::vector<Best> best(alphas.size());
    long total = 1;
    for (int i = 0; i < D; ++i) total *= pts;
    for (long c = 0; c < total; ++c) {
      long r = c;
      Point p{};
      for (int i = 0; i < D; ++i) {
        int idx = static_cast<int>(r % pts);
        r /= pts;
        p[i] = K.iv[i].lo + K.iv[i].width() * idx / (pts - 1);
      }
      Jet j = f.jet(p, m);
      for (size_t a = 0; a < alphas.size(); ++a) {
        double v = std::abs(j.derivative(alphas[a]));
        if (v > best[a].v) best[a] = {v, p};
      }
    }
    return best;
  };
  auto top = [](const std::vector<Best>& b) {
    double v = 0.0;
    for (const auto& e : b) v = std::max(v, e.v);
    return v;
  };
  std::vector<Best> best = sup_on(N);
  for (int level = 0; level < 4; ++level) {
    int next = 2 * N - 1;
    long pts = 1;
    for (int i = 0; i < D; ++i) pts *= next;
    if (pts > budget) break;
    std::vector<Best> cur = sup_on(next);
    bool settled = std::abs(top(cur) - top(best)) <= 0.01 * std::max(top(cur), 1e-300);
    best = cur;
    N = next;
    if (settled) break;
  }
  // polish each grid maximizer by coordinate-wise Brent searches inside its grid cell
  double result = 0.0;
  for (size_t a = 0; a < alphas.size(); ++a) {
    Point p = best[a].p;
    double v = best[a].v;
    if (v == 0.0) continue;
    for (int sweep = 0; sweep < 2; ++sweep)
      for (int i = 0; i < D; ++i) {
        double step = K.iv[i].width() / (N - 1);
        double lo = std::max(K.iv[i].lo, p[i] - step), hi = std::min(K.iv[i].hi, p[i] + step);
        auto neg = [&](double t) {
          Point q = p;
          q[i] = t;
          return -std::abs(f.deriv(alphas[a], q));
        };
        auto [t, fv] = boost::math::tools::brent_find_minima(neg, lo, hi, 50);
        if (-fv > v) {
          v = -fv;
          p[i] = t;
        }
      }
    result = std::max(result, v);
  }
  return result;
}

TestFunction taylor_poly(const TestFunction& f, int m) {
  if (m + 1 > f.max_order()) throw DomainError("taylor_poly: requires m + 1 <= M_max");
  if (!f.has_derivatives()) throw DomainError("taylor_poly: value-only terms are not supported");
  TestFunction r(f.dims(), f.max_order());
  for (auto t : f.terms()) {
    t.h = taylor_poly(t.h, m);
    r.add_term(std::move(t));
  }
  return r;
}

TestFunction taylor_remainder(const TestFunction& f, int m) {
  if (m + 1 > f.max_order()) throw DomainError("taylor_remainder: requires m + 1 <= M_max");
  if (!f.has_derivatives()) throw DomainError("taylor_remainder: value-only terms are not supported");
  TestFunction r(f.dims(), f.max_order());
  for (auto t : f.terms()) {
    t.h = taylor_remainder(t.h, m);
    r.add_term(std::move(t));
  }
  return r;
}

}  // namespace scalext
