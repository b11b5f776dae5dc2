#include "scalext/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <queue>
#include <vector>

namespace scalext {

void EvalBudget::charge(long n) {
  used_ += n;
  if (used_ > cap_) throw QuadratureError("quadrature: evaluation cap exceeded");
}

namespace {

// noise: integrated error of inner integrals, which subdivision cannot reduce
struct Segment {
  double a, b, value, error, l1, noise;
  double excess() const { return std::max(0.0, error - 2.0 * noise); }
  bool operator<(const Segment& o) const { return excess() < o.excess(); }
};

// A sample of the integrand; for an inner integral, mass is its l1 and err its error.
struct Sample {
  double value, mass, err;
};
template <class F>
Segment gk21(const F& f, double a, double b, EvalBudget& budget) {
  using K = boost::math::quadrature::gauss_kronrod<double, 21>;
  using G = boost::math::quadrature::gauss<double, 10>;
  static const auto& kx = K::abscissa();
  static const auto& kw = K::weights();
  static const auto& gw = G::weights();
  budget.charge(21);
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  std::array<double, 21> fv{};
  // kx[0] = 0; odd indices of the Kronrod set are the Gauss points
  const Sample s0 = f(c);
  fv[0] = s0.value;
  double kres = kw[0] * fv[0];
  double gres = 0.0;
  double l1 = kw[0] * s0.mass, noise = kw[0] * s0.err;
  for (size_t i = 1; i < kx.size(); ++i) {
    const Sample p = f(c + h * kx[i]), m = f(c - h * kx[i]);
    fv[2 * i - 1] = p.value;
    fv[2 * i] = m.value;
    kres += kw[i] * (p.value + m.value);
    l1 += kw[i] * (p.mass + m.mass);
    noise += kw[i] * (p.err + m.err);
  }
  // Gauss-10 nodes coincide with Kronrod nodes of odd index
  for (size_t i = 1; i < kx.size(); i += 2) gres += gw[(i - 1) / 2] * (fv[2 * i - 1] + fv[2 * i]);
  double mean = kres * 0.5;
  double asc = kw[0] * std::abs(fv[0] - mean);
  for (size_t i = 1; i < kx.size(); ++i) asc += kw[i] * (std::abs(fv[2 * i - 1] - mean) + std::abs(fv[2 * i] - mean));
  double err = std::abs(kres - gres) * h;
  asc *= h;
  if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  double l1s = l1 * h;
  const double eps = std::numeric_limits<double>::epsilon();
  if (l1s > std::numeric_limits<double>::min() / (50 * eps)) err = std::max(err, 50 * eps * l1s);
  return {a, b, kres * h, err, l1s, noise * h};
}

template <class F>
QuadResult integrate_impl(const F& f, double a, double b, const QuadOptions& opt, EvalBudget& budget) {
  if (a == b) return {};
  if (!(std::isfinite(a) && std::isfinite(b))) throw QuadratureError("integrate: infinite interval");
  std::priority_queue<Segment> heap;
  Segment s0 = gk21(f, a, b, budget);
  heap.push(s0);
  double value = s0.value, error = s0.error, l1 = s0.l1, noise = s0.noise;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int iter = 0; iter < 100000; ++iter) {
    if (!std::isfinite(value)) throw QuadratureError("integrate: non-finite integrand");
    double target = std::max({opt.abs_tol, opt.rel_tol * std::abs(value), 100 * eps * l1});
    if (error <= target + 2.0 * noise) break;
    Segment worst = heap.top();
    double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // interval exhausted at double resolution
    heap.pop();
    Segment left = gk21(f, worst.a, mid, budget), right = gk21(f, mid, worst.b, budget);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    l1 += left.l1 + right.l1 - worst.l1;
    noise += left.noise + right.noise - worst.noise;
    heap.push(left);
    heap.push(right);
  }
  // re-sum to avoid drift from incremental updates
  double v = 0.0, e = 0.0, l = 0.0;
  while (!heap.empty()) {
    v += heap.top().value;
    e += heap.top().error;
    l += heap.top().l1;
    heap.pop();
  }
  return {v, e, l};
}

template <class F>
QuadResult integrate_to_singular_impl(const F& f, double s, double e, const QuadOptions& opt, EvalBudget& budget) {
  QuadResult total;
  if (s == e) return total;
  const double span = e - s;
  std::vector<double> contrib;
  int zero_run = 0;
  for (int k = 0; k < 400; ++k) {
    double far = s + span * std::ldexp(1.0, -k);
    double near = s + span * std::ldexp(1.0, -k - 1);
    if (near == s || near == far) break;  // reached double resolution
    QuadOptions o = opt;
    o.abs_tol = std::max(opt.abs_tol, 0.05 * opt.rel_tol * std::abs(total.value));
    QuadResult r = integrate_impl(f, std::min(near, far), std::max(near, far), o, budget);
    total.value += r.value;
    total.error += r.error;
    total.l1 += r.l1;
    contrib.push_back(std::abs(r.value) + r.error);
    zero_run = (r.l1 == 0.0) ? zero_run + 1 : 0;
    if (zero_run >= 4 && k >= 6) return total;
    const size_t c = contrib.size();
    if (c >= 6) {
      double r1 = contrib[c - 1] / std::max(contrib[c - 2], 1e-300);
      double r2 = contrib[c - 2] / std::max(contrib[c - 3], 1e-300);
      double rho = std::max(r1, r2);
      double scale = std::max({std::abs(total.value), opt.abs_tol, 1e-300});
      if (rho < 0.985) {
        double tail = contrib[c - 1] * rho / (1.0 - rho);
        // the rounding floor matters when the integral cancels to (near) zero
        const double floor = 100 * std::numeric_limits<double>::epsilon() * total.l1;
        if (tail <= std::max(opt.rel_tol * scale, floor) || contrib[c - 1] <= opt.abs_tol * 1e-3) {
          total.error += tail;
          return total;
        }
      } else if (c >= 40 && std::min(r1, r2) > 0.97) {
        throw QuadratureError("shell sums do not converge: integrand not absolutely integrable near the singular set");
      }
    }
  }
  if (contrib.size() >= 3 && contrib.back() > opt.rel_tol * std::abs(total.value) + opt.abs_tol +
                                   100 * std::numeric_limits<double>::epsilon() * total.l1)
    throw QuadratureError("shell sums exhausted before convergence");
  return total;
}

auto plain(const Integrand& f) {
  return [&f](double x) {
    const double v = f(x);
    return Sample{v, std::abs(v), 0.0};
  };
}

auto nested(const NestedIntegrand& f) {
  return [&f](double x) {
    const QuadResult r = f(x);
    return Sample{r.value, std::max(r.l1, std::abs(r.value)), r.error};
  };
}

}  // namespace

QuadResult integrate(const Integrand& f, double a, double b, const QuadOptions& opt, EvalBudget& budget) {
  return integrate_impl(plain(f), a, b, opt, budget);
}

QuadResult integrate(const NestedIntegrand& f, double a, double b, const QuadOptions& opt, EvalBudget& budget) {
  return integrate_impl(nested(f), a, b, opt, budget);
}

QuadResult integrate_to_singular(const Integrand& f, double s, double e, const QuadOptions& opt,
                                 EvalBudget& budget) {
  return integrate_to_singular_impl(plain(f), s, e, opt, budget);
}

QuadResult integrate_to_singular(const NestedIntegrand& f, double s, double e, const QuadOptions& opt,
                                 EvalBudget& budget) {
  return integrate_to_singular_impl(nested(f), s, e, opt, budget);
}

}  // namespace scalext
