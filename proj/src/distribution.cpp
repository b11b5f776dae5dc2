#include "scalext/distribution.hpp"

#include <algorithm>
#include <sstream>

namespace scalext {

namespace {

void check_support(const Box& supp, const ChartRegion& domain) {
  if (supp.empty()) return;
  if (!supp.bounded()) throw SupportError("pairing: test function support is not compact");
  if (!domain.full_box().contains(supp, 1e-9)) throw SupportError("pairing: test function support leaves the chart");
}

bool in_set(double v, const std::vector<double>& s) {
  return std::any_of(s.begin(), s.end(), [&](double w) { return w == v; });
}

using HFn = std::function<double(std::span<const double>)>;

// Inner integrals that cancel down to rounding noise are returned as exact zeros, so an
// outer level does not chase noise it can never resolve.
double denoise(const QuadResult& r) {
  const double noise = 1e3 * std::numeric_limits<double>::epsilon() * r.l1;
  return std::abs(r.value) <= noise ? 0.0 : r.value;
}

QuadResult denoised(const QuadResult& r) { return {denoise(r), r.error, r.l1}; }

// A loose pilot pass sizes the integral; the accurate pass then gives inner levels an absolute
// tolerance, so ill-conditioned but negligible regions (far cutoff tails under heavy
// cancellation) are not resolved to full relative accuracy.
// run(outer options, inner absolute budget, inner rel_tol) performs one pass.
template <class Run>
QuadResult with_pilot(const Run& run, const QuadOptions& opt) {
  QuadOptions loose = opt;
  loose.rel_tol = std::max(opt.rel_tol, 1e-3);
  const QuadResult pilot = run(loose, opt.abs_tol, loose.rel_tol);
  const double scale = std::max(std::abs(pilot.value), 1e-6 * pilot.l1);
  if (scale == 0.0) return pilot;
  const double abs_total = std::max(opt.abs_tol, 0.01 * opt.rel_tol * scale);
  QuadOptions outer = opt;
  outer.abs_tol = 0.5 * abs_total;
  return run(outer, 0.5 * abs_total, opt.rel_tol);
}

QuadResult integrate_box_nested(const HFn& g, const Box& box, int dim, const QuadOptions& opt, EvalBudget& budget) {
  if (dim == 1) {
    std::array<double, 1> u{};
    Integrand f = [&](double v) {
      u[0] = v;
      return g(std::span<const double>(u.data(), 1));
    };
    return integrate(f, box.iv[0].lo, box.iv[0].hi, opt, budget);
  }
  auto run = [&](const QuadOptions& outer, double inner_abs, double inner_rel) {
    std::array<double, kMaxDim> u{};
    std::function<QuadResult(int, double)> level = [&](int i, double width) -> QuadResult {
      QuadOptions o = outer;
      if (i > 0) {
        o.rel_tol = inner_rel;
        o.abs_tol = inner_abs / width;
      }
      const double w = width * (box.iv[i].hi - box.iv[i].lo);
      if (i + 1 == dim) {
        Integrand f = [&](double v) {
          u[i] = v;
          return g(std::span<const double>(u.data(), dim));
        };
        return integrate(f, box.iv[i].lo, box.iv[i].hi, o, budget);
      }
      NestedIntegrand f = [&](double v) {
        u[i] = v;
        return denoised(level(i + 1, w));
      };
      return integrate(f, box.iv[i].lo, box.iv[i].hi, o, budget);
    };
    return level(0, 1.0);
  };
  return with_pilot(run, opt);
}

template <class Fn>
QuadResult integrate_singular_points(const Fn& g, double lo, double hi,
                                     const std::vector<double>& singular, const QuadOptions& opt, EvalBudget& budget) {
  QuadResult total;
  if (!(hi > lo)) return total;
  std::vector<double> pts{lo};
  for (double s : singular)
    if (s > lo && s < hi) pts.push_back(s);
  pts.push_back(hi);
  std::sort(pts.begin(), pts.end());
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    double p = pts[i], q = pts[i + 1];
    bool sp = in_set(p, singular), sq = in_set(q, singular);
    auto add = [&](const QuadResult& r) {
      total.value += r.value;
      total.error += r.error;
      total.l1 += r.l1;
    };
    if (sp && sq) {
      double mid = 0.5 * (p + q);
      add(integrate_to_singular(g, p, mid, opt, budget));
      add(integrate_to_singular(g, q, mid, opt, budget));
    } else if (sp) {
      add(integrate_to_singular(g, p, q, opt, budget));
    } else if (sq) {
      add(integrate_to_singular(g, q, p, opt, budget));
    } else {
      add(integrate(g, p, q, opt, budget));
    }
  }
  return total;
}

// ∫ g(h) dh over the part of the h-support given by `box` and |h| ∈ [rmin, rmax].
QuadResult integrate_h(const HFn& g, const BlockSupport& supp, bool singular, int d, const QuadOptions& opt,
                       EvalBudget& budget) {
  Box box = supp.bounding_box();
  if (box.empty()) return {};
  if (!box.bounded()) throw SupportError("pairing: unbounded h-support");
  if (d == 1) {
    double lo = box.iv[0].lo, hi = box.iv[0].hi;
    auto g1 = [&](double v) { return g(std::span<const double>(&v, 1)); };
    std::vector<double> sing;
    if (singular) sing.push_back(0.0);
    QuadResult total;
    auto add = [&](const QuadResult& r) {
      total.value += r.value;
      total.error += r.error;
      total.l1 += r.l1;
    };
    double rmin = supp.rmin;
    if (rmin > 0.0) {
      if (lo < -rmin) add(integrate_singular_points(g1, lo, std::min(hi, -rmin), sing, opt, budget));
      if (hi > rmin) add(integrate_singular_points(g1, std::max(lo, rmin), hi, sing, opt, budget));
      return total;
    }
    return integrate_singular_points(g1, lo, hi, sing, opt, budget);
  }
  bool meets_origin = true;
  for (int j = 0; j < d; ++j) meets_origin = meets_origin && box.iv[j].contains(0.0);
  if (!singular) return integrate_box_nested(g, box, d, opt, budget);
  if (d != 2) {
    if (meets_origin && supp.rmin == 0.0)
      throw DomainError("pairing: kernels singular on I are only supported for d <= 2");
    return integrate_box_nested(g, box, d, opt, budget);
  }
  // polar coordinates around the singular origin
  double lo2 = 0.0, hi2 = 0.0;
  for (int j = 0; j < 2; ++j) {
    double c = std::clamp(0.0, box.iv[j].lo, box.iv[j].hi);
    lo2 += c * c;
    double f = std::max(std::abs(box.iv[j].lo), std::abs(box.iv[j].hi));
    hi2 += f * f;
  }
  double r_lo = std::max(std::sqrt(lo2), supp.rmin), r_hi = std::min(std::sqrt(hi2), supp.rmax);
  if (r_hi <= r_lo) return {};
  // radii where the arc pattern changes
  std::vector<double> rc{r_lo, r_hi};
  for (double c1 : {box.iv[0].lo, box.iv[0].hi, 0.0})
    for (double c2 : {box.iv[1].lo, box.iv[1].hi, 0.0}) {
      const double rr = std::hypot(c1, c2);
      if (rr > r_lo && rr < r_hi) rc.push_back(rr);
    }
  std::sort(rc.begin(), rc.end());
  rc.erase(std::unique(rc.begin(), rc.end()), rc.end());
  auto run = [&](const QuadOptions& outer, double inner_abs, double inner_rel) {
    NestedIntegrand radial = [&](double r) {
      QuadOptions o = opt;
      o.rel_tol = inner_rel;
      o.abs_tol = inner_abs / (r * (r_hi - r_lo));
      auto ang = [&](double th) {
        std::array<double, 2> h{r * std::cos(th), r * std::sin(th)};
        return g(std::span<const double>(h.data(), 2));
      };
      // only the arcs of the circle inside the support box contribute
      std::vector<double> cuts{0.0, 2.0 * M_PI};
      auto add_cut = [&](double th) {
        th = std::fmod(th + 4.0 * M_PI, 2.0 * M_PI);
        cuts.push_back(th);
      };
      for (int j = 0; j < 2; ++j)
        for (double c : {box.iv[j].lo, box.iv[j].hi}) {
          if (std::abs(c) >= r) continue;
          const double base = j == 0 ? std::acos(c / r) : std::asin(c / r);
          if (j == 0) {
            add_cut(base);
            add_cut(-base);
          } else {
            add_cut(base);
            add_cut(M_PI - base);
          }
        }
      std::sort(cuts.begin(), cuts.end());
      QuadResult total;
      for (size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double a = cuts[k], b = cuts[k + 1];
        if (!(b > a)) continue;
        const double m = 0.5 * (a + b);
        if (!box.contains(Point{r * std::cos(m), r * std::sin(m)})) continue;
        QuadResult q = integrate(ang, a, b, o, budget);
        total.value += q.value;
        total.error += q.error;
        total.l1 += q.l1;
      }
      return QuadResult{r * denoise(total), r * total.error, r * total.l1};
    };
    QuadResult total;
    for (size_t k = 0; k + 1 < rc.size(); ++k) {
      QuadResult q = (k == 0 && r_lo == 0.0) ? integrate_to_singular(radial, 0.0, rc[1], outer, budget)
                                             : integrate(radial, rc[k], rc[k + 1], outer, budget);
      total.value += q.value;
      total.error += q.error;
      total.l1 += q.l1;
    }
    return total;
  };
  return with_pilot(run, opt);
}

// Nested x-integration with an inner h-integral.
double integrate_xh(const std::function<double(const Point&)>& integrand, const Box& xbox, const BlockSupport& hsupp,
                    bool singular, Dims dims, const std::vector<std::vector<double>>& x_sing, const QuadOptions& opt,
                    EvalBudget& budget) {
  Point p{};
  std::function<QuadResult(int)> level = [&](int i) -> QuadResult {
    if (i == dims.n) {
      HFn g = [&](std::span<const double> h) {
        Point q = p;
        for (int j = 0; j < dims.d; ++j) q[dims.n + j] = h[j];
        return integrand(q);
      };
      return integrate_h(g, hsupp, singular, dims.d, opt, budget);
    }
    NestedIntegrand f = [&](double v) {
      p[i] = v;
      return denoised(level(i + 1));
    };
    static const std::vector<double> none;
    const auto& s = i < static_cast<int>(x_sing.size()) ? x_sing[i] : none;
    return integrate_singular_points(f, xbox.iv[i].lo, xbox.iv[i].hi, s, opt, budget);
  };
  return level(0).value;
}

BlockSupport h_support_of_box(const Box& full, Dims dims) {
  BlockSupport s = BlockSupport::whole(dims.d);
  for (int j = 0; j < dims.d; ++j) s.box.iv[j] = full.iv[dims.n + j];
  return s;
}

class KernelImpl final : public DistributionImpl {
 public:
  KernelImpl(KernelSpec k, ChartRegion domain) : k_(std::move(k)), domain_(std::move(domain)) {}
  double pair(const TestFunction& phi, const QuadOptions& opt) const override {
    return pair_kernel(k_, domain_, phi, opt);
  }
  std::string describe() const override { return "kernel:" + k_.name; }
  const KernelSpec* kernel() const override { return &k_; }

 private:
  KernelSpec k_;
  ChartRegion domain_;
};

class DeltaImpl final : public DistributionImpl {
 public:
  DeltaImpl(std::vector<DeltaTerm> terms, ChartRegion domain) : terms_(std::move(terms)), domain_(std::move(domain)) {}

  double pair(const TestFunction& phi, const QuadOptions& opt) const override {
    const Dims dims = domain_.dims;
    check_support(phi.support(), domain_);
    EvalBudget budget(opt.max_evals);
    double total = 0.0;
    for (const DeltaTerm& dt : terms_) {
      const int order = multi_abs(dt.alpha, dims.d);
      const double sign = (order % 2) ? -1.0 : 1.0;
      for (const SeparableTerm& term : phi.terms()) {
        std::array<double, kMaxDim> zero{};
        double hv = order == 0 ? term.h(std::span<const double>(zero.data(), dims.d))
                               : term.h.jet(std::span<const double>(zero.data(), dims.d), order).derivative(dt.alpha);
        if (hv == 0.0) continue;
        double v = term.coeff * hv;
        for (int i = 0; i < dims.n && v != 0.0; ++i) {
          Box xb = term.x[i].support().bounding_box();
          Interval iv = intersect(xb.iv[0], domain_.box_x.iv[i]);
          if (iv.lo >= iv.hi) {
            v = 0.0;
            break;
          }
          const Block& b = term.x[i];
          if (dt.coeff.empty()) {
            v *= integrate([&](double u) { return b(u); }, iv.lo, iv.hi, opt, budget).value;
          } else {
            const Factor1D& c = dt.coeff[i];
            v *= integrate_with_singularities([&](double u) { return c.f(u) * b(u); }, iv.lo, iv.hi,
                                              c.singular_points, opt, budget);
          }
        }
        total += dt.weight * sign * v;
      }
      for (const GenericTerm& g : phi.generic_terms()) {
        if (order != 0) throw DomainError("delta pairing: derivatives of value-only test functions are unavailable");
        Box xb;
        xb.dim = dims.n;
        for (int i = 0; i < dims.n; ++i) xb.iv[i] = intersect(g.support.iv[i], domain_.box_x.iv[i]);
        Point p{};
        std::function<double(int)> level = [&](int i) -> double {
          if (i == dims.n) {
            Point q = p;
            for (int j = 0; j < dims.d; ++j) q[dims.n + j] = 0.0;
            if (!g.support.contains(q)) return 0.0;
            double c = 1.0;
            for (int k = 0; k < dims.n && !dt.coeff.empty(); ++k) c *= dt.coeff[k].f(q[k]);
            return c * g.f(q);
          }
          auto f = [&](double v) {
            p[i] = v;
            return level(i + 1);
          };
          return integrate(f, xb.iv[i].lo, xb.iv[i].hi, opt, budget).value;
        };
        total += dt.weight * level(0);
      }
    }
    return total;
  }

  std::string describe() const override {
    std::ostringstream os;
    os << "delta{";
    for (size_t t = 0; t < terms_.size(); ++t) {
      os << (t ? "+" : "") << terms_[t].weight << "*d^(";
      for (int j = 0; j < domain_.dims.d; ++j) os << (j ? "," : "") << terms_[t].alpha[j];
      os << ")";
    }
    os << "}";
    return os.str();
  }

 private:
  std::vector<DeltaTerm> terms_;
  ChartRegion domain_;
};

class CombinationImpl final : public DistributionImpl {
 public:
  explicit CombinationImpl(std::vector<std::pair<double, Distribution>> parts) : parts_(std::move(parts)) {}
  double pair(const TestFunction& phi, const QuadOptions& opt) const override {
    double s = 0.0;
    for (const auto& [c, t] : parts_)
      if (c != 0.0) s += c * t.pair(phi, opt);
    return s;
  }
  std::string describe() const override {
    std::ostringstream os;
    os << "sum{";
    for (size_t i = 0; i < parts_.size(); ++i) os << (i ? "+" : "") << parts_[i].first << "*" << parts_[i].second.id();
    os << "}";
    return os.str();
  }

 private:
  std::vector<std::pair<double, Distribution>> parts_;
};

}  // namespace


double integrate_with_singularities(const std::function<double(double)>& g, double lo, double hi,
                                    const std::vector<double>& singular, const QuadOptions& opt, EvalBudget& budget) {
  return integrate_singular_points(g, lo, hi, singular, opt, budget).value;
}

double pair_kernel(const KernelSpec& k, const ChartRegion& domain, const TestFunction& phi, const QuadOptions& opt) {
  const Dims dims = domain.dims;
  if (!(phi.dims() == dims)) throw DomainError("pairing: dimension mismatch");
  EvalBudget budget(opt.max_evals);
  const bool h_singular = k.h_factor ? k.h_factor->singular_at_origin : k.singular_at_I;
  double total = 0.0;
  for (const SeparableTerm& term : phi.terms()) {
    BlockSupport hs = term.h.support();
    Box hbox = hs.bounding_box();
    Box tb;
    tb.dim = dims.total();
    for (int i = 0; i < dims.n; ++i) tb.iv[i] = term.x[i].support().bounding_box().iv[0];
    for (int j = 0; j < dims.d; ++j) tb.iv[dims.n + j] = hbox.iv[j];
    if (tb.empty()) continue;
    check_support(tb, domain);
    if (k.separable()) {
      double v = term.coeff;
      for (int i = 0; i < dims.n && v != 0.0; ++i) {
        const Factor1D& kf = (*k.x_factors)[i];
        const Block& b = term.x[i];
        v *= integrate_with_singularities([&](double u) {
          double bv = b(u);
          return bv == 0.0 ? 0.0 : kf.f(u) * bv;
        }, tb.iv[i].lo, tb.iv[i].hi, kf.singular_points, opt, budget);
      }
      if (v == 0.0) continue;
      const auto& kh = k.h_factor->f;
      HFn g = [&](std::span<const double> h) {
        double hv = term.h(h);
        return hv == 0.0 ? 0.0 : kh(h) * hv;
      };
      total += v * integrate_h(g, hs, h_singular, dims.d, opt, budget).value;
    } else {
      Box xb;
      xb.dim = dims.n;
      for (int i = 0; i < dims.n; ++i) xb.iv[i] = tb.iv[i];
      auto integrand = [&](const Point& p) {
        double v = term.coeff;
        for (int i = 0; i < dims.n && v != 0.0; ++i) v *= term.x[i](p[i]);
        if (v == 0.0) return 0.0;
        v *= term.h(std::span<const double>(p.data() + dims.n, dims.d));
        return v == 0.0 ? 0.0 : v * k.full(p);
      };
      total += integrate_xh(integrand, xb, hs, h_singular, dims, k.x_singular, opt, budget);
    }
  }
  for (const GenericTerm& g : phi.generic_terms()) {
    Box sb = intersect(g.support, domain.full_box());
    if (sb.empty()) continue;
    check_support(g.support, domain);
    Box xb;
    xb.dim = dims.n;
    for (int i = 0; i < dims.n; ++i) xb.iv[i] = sb.iv[i];
    auto integrand = [&](const Point& p) {
      double v = g.f(p);
      return v == 0.0 ? 0.0 : v * k.full(p);
    };
    std::vector<std::vector<double>> xs = k.x_singular;
    if (k.x_factors)
      for (int i = 0; i < dims.n; ++i) {
        if (static_cast<int>(xs.size()) <= i) xs.resize(i + 1);
        for (double s : (*k.x_factors)[i].singular_points) xs[i].push_back(s);
      }
    total += integrate_xh(integrand, xb, h_support_of_box(sb, dims), h_singular, dims, xs, opt, budget);
  }
  return total;
}

KernelSpec multiply_kernels(const KernelSpec& a, const KernelSpec& b) {
  KernelSpec k;
  auto fa = a.full, fb = b.full;
  k.full = [fa, fb](const Point& p) {
    double v = fa(p);
    return v == 0.0 ? 0.0 : v * fb(p);
  };
  if (a.x_factors && b.x_factors && a.h_factor && b.h_factor) {
    std::vector<Factor1D> xs;
    for (size_t i = 0; i < a.x_factors->size(); ++i) {
      auto f1 = (*a.x_factors)[i].f, f2 = (*b.x_factors)[i].f;
      Factor1D f{[f1, f2](double u) { return f1(u) * f2(u); }, (*a.x_factors)[i].singular_points};
      for (double s : (*b.x_factors)[i].singular_points) f.singular_points.push_back(s);
      xs.push_back(std::move(f));
    }
    k.x_factors = std::move(xs);
    auto h1 = a.h_factor->f, h2 = b.h_factor->f;
    k.h_factor = HFactor{[h1, h2](std::span<const double> h) {
                           double v = h1(h);
                           return v == 0.0 ? 0.0 : v * h2(h);
                         },
                         a.h_factor->singular_at_origin || b.h_factor->singular_at_origin};
  }
  size_t nx = std::max(a.x_singular.size(), b.x_singular.size());
  k.x_singular.resize(nx);
  for (size_t i = 0; i < nx; ++i) {
    if (i < a.x_singular.size()) k.x_singular[i] = a.x_singular[i];
    if (i < b.x_singular.size())
      k.x_singular[i].insert(k.x_singular[i].end(), b.x_singular[i].begin(), b.x_singular[i].end());
  }
  k.singular_at_I = a.singular_at_I || b.singular_at_I;
  k.name = "(" + a.name + ")*(" + b.name + ")";
  return k;
}

Distribution::Distribution(std::shared_ptr<const DistributionImpl> impl, ChartRegion domain, bool singular_on_I,
                           std::string id)
    : impl_(std::move(impl)), domain_(std::move(domain)), singular_on_I_(singular_on_I), id_(std::move(id)) {}

double Distribution::pair(const TestFunction& phi, const QuadOptions& opt) const {
  if (!impl_) throw DomainError("pairing: empty distribution");
  if (!(phi.dims() == domain_.dims)) throw DomainError("pairing: dimension mismatch");
  if (phi.is_zero()) return 0.0;
  double v = impl_->pair(phi, opt);
  if (!std::isfinite(v)) throw QuadratureError("pairing: non-finite result");
  return v;
}

double pair(const Distribution& t, const TestFunction& phi, const QuadOptions& opt) { return t.pair(phi, opt); }

double scale_pair(const Distribution& t, const TestFunction& phi, double lambda, double s, const QuadOptions& opt) {
  if (!(lambda > 0.0) || lambda > 1.0) throw DomainError("scale_pair: λ must lie in (0,1]");
  if (lambda == 1.0) return t.pair(phi, opt);
  const int d = t.dims().d;
  return std::pow(lambda, -s - d) * t.pair(dilate_h(phi, 1.0 / lambda), opt);
}

ScaledPairing scaled_pairing(const Distribution& t, const TestFunction& phi, const std::vector<double>& grid, double s,
                             const QuadOptions& opt) {
  ScaledPairing sp;
  sp.lambda_grid = grid;
  sp.s_used = s;
  for (double l : grid) sp.values.push_back(scale_pair(t, phi, l, s, opt));
  return sp;
}

Distribution kernel_distribution(const ChartRegion& domain, KernelSpec kernel, std::string id) {
  if (kernel.x_factors && static_cast<int>(kernel.x_factors->size()) != domain.dims.n)
    throw DomainError("kernel: wrong number of x-factors");
  bool sing = kernel.singular_at_I || (kernel.h_factor && kernel.h_factor->singular_at_origin);
  return Distribution(std::make_shared<KernelImpl>(std::move(kernel), domain), domain, sing, std::move(id));
}

Distribution delta_distribution(const ChartRegion& domain, std::vector<DeltaTerm> terms, std::string id) {
  for (const auto& t : terms)
    if (!t.coeff.empty() && static_cast<int>(t.coeff.size()) != domain.dims.n)
      throw DomainError("delta: coefficient needs one factor per x-coordinate");
  return Distribution(std::make_shared<DeltaImpl>(std::move(terms), domain), domain, false, std::move(id));
}

Distribution linear_combination(const std::vector<std::pair<double, Distribution>>& parts, std::string id) {
  if (parts.empty()) throw DomainError("linear_combination: no parts");
  const ChartRegion dom = parts.front().second.domain();
  bool sing = false;
  for (const auto& [c, t] : parts) {
    if (!(t.dims() == dom.dims)) throw DomainError("linear_combination: dimension mismatch");
    sing = sing || t.singular_on_I();
  }
  return Distribution(std::make_shared<CombinationImpl>(parts), dom, sing, std::move(id));
}

}  // namespace scalext
