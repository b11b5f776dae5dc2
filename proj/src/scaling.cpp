#include "scalext/scaling.hpp"

#include <atomic>
#include <boost/math/tools/minima.hpp>
#include <exception>
#include <thread>

namespace scalext {

std::vector<double> default_lambda_grid(int points, double lo, double hi) {
  if (points < 2 || !(lo > 0.0) || !(hi <= 1.0) || !(lo < hi)) throw DomainError("lambda grid: need 0 < lo < hi <= 1");
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = hi * std::pow(lo / hi, static_cast<double>(i) / (points - 1));
  g.front() = hi;
  return g;
}

namespace {

std::vector<Block> x_blocks(int n, double c, double r) {
  std::vector<Block> xs;
  for (int i = 0; i < n; ++i) xs.push_back(Block::bump({c}, {r}));
  return xs;
}

Block mono(int d, MultiIndex a, double scale) {
  return Block::monomial(d, a, 1.0 / std::pow(scale, multi_abs(a, d)));
}

}  // namespace

std::vector<TestFunction> default_probes(Dims dims) {
  const int d = dims.d;
  std::vector<TestFunction> out;
  auto add = [&](int k, Block h, const std::string& name) {
    const bool shifted = k >= 4;
    out.push_back(TestFunction::separable(dims, x_blocks(dims.n, shifted ? 0.15 : 0.0, shifted ? 0.4 : 0.6), h)
                      .with_id("probe" + std::to_string(k) + ":" + name));
  };
  if (d == 1) {
    const Block b4 = Block::bump({0.0}, {0.4});
    add(0, b4, "bump(0,0.4)");
    add(1, product(mono(1, {1}, 0.4), b4), "h*bump(0,0.4)");
    add(2, product(mono(1, {2}, 0.4), b4), "h^2*bump(0,0.4)");
    add(3, Block::bump({0.1}, {0.3}), "bump(0.1,0.3)");
    add(4, product(Block::bump({-0.1}, {0.35}), Block::cosine({5.0})), "bump(-0.1,0.35)cos(5h)");
    add(5, Block::bump({0.0}, {0.25}), "bump(0,0.25)");
    add(6, product(mono(1, {1}, 0.3), Block::bump({0.05}, {0.3})), "h*bump(0.05,0.3)");
    add(7, product(Block::polynomial(1, {{MultiIndex{}, 1.0}, {MultiIndex{1}, 1.0}}), Block::bump({0.0}, {0.45})),
        "(1+h)bump(0,0.45)");
    return out;
  }
  std::vector<double> zero(d, 0.0), r4(d, 0.4);
  const Block b4 = Block::bump(zero, r4);
  MultiIndex e0{}, e1{}, e00{}, e01{};
  e0[0] = 1;
  e1[1] = 1;
  e00[0] = 2;
  e01[0] = 1;
  e01[1] = 1;
  std::vector<double> c3(d, 0.0), w(d, 0.0);
  c3[0] = 0.1;
  c3[1] = -0.05;
  w[0] = 5.0;
  w[1] = 3.0;
  MultiIndex one{};
  add(0, b4, "bump");
  add(1, product(mono(d, e0, 0.4), b4), "h1*bump");
  add(2, product(mono(d, e1, 0.4), b4), "h2*bump");
  add(3, product(mono(d, e00, 0.4), b4), "h1^2*bump");
  add(4, product(mono(d, e01, 0.4), b4), "h1h2*bump");
  add(5, Block::bump(c3, std::vector<double>(d, 0.3)), "bump(shifted)");
  add(6, product(Block::bump(zero, std::vector<double>(d, 0.35)), Block::cosine(w)), "bump*cos");
  add(7,
      product(Block::polynomial(d, {{one, 1.0}, {e0, 1.0}, {e1, 1.0}}), Block::bump(zero, std::vector<double>(d, 0.45))),
      "(1+h1+h2)bump");
  return out;
}

std::vector<TestFunction> away_probes(Dims dims) {
  const int d = dims.d;
  std::vector<TestFunction> out;
  auto add = [&](Block h, const std::string& name) {
    out.push_back(TestFunction::separable(dims, x_blocks(dims.n, 0.05, 0.5), h).with_id("away:" + name));
  };
  if (d == 1) {
    add(Block::bump({0.5}, {0.3}), "bump(0.5,0.3)");
    add(Block::bump({-0.5}, {0.35}), "bump(-0.5,0.35)");
    add(product(Block::bump({0.4}, {0.2}), Block::cosine({7.0})), "bump(0.4,0.2)cos(7h)");
    add(product(mono(1, {1}, 0.5), Block::bump({-0.45}, {0.3})), "h*bump(-0.45,0.3)");
    return out;
  }
  std::vector<double> c1(d, 0.0), c2(d, 0.0), c3(d, 0.0);
  c1[0] = 0.5;
  c2[0] = -0.5;
  c2[1] = 0.2;
  c3[0] = 0.1;
  c3[1] = 0.45;
  add(Block::bump(c1, std::vector<double>(d, 0.3)), "bump(+0.5)");
  add(Block::bump(c2, std::vector<double>(d, 0.3)), "bump(-0.5)");
  add(product(Block::bump(c3, std::vector<double>(d, 0.2)), Block::cosine(std::vector<double>(d, 4.0))), "bump*cos");
  return out;
}

TestFunction pushforward(const EulerField& rho, const TestFunction& phi, double lambda) {
  if (!(phi.dims() == rho.dims())) throw DomainError("pushforward: dimension mismatch");
  if (!(lambda > 0.0) || lambda > 1.0) throw DomainError("pushforward: λ must lie in (0,1]");
  const Dims dm = rho.dims();
  const int D = dm.total();
  const Box chart_box = rho.chart().full_box();
  Box src = intersect(phi.support(), chart_box);
  if (!src.bounded()) throw SupportError("pushforward: test function support is not compact");
  if (src.empty()) return TestFunction(dm);

  // image box from flowed samples of the source box
  const int k = D <= 2 ? 9 : 5;
  Box img;
  img.dim = D;
  for (int i = 0; i < D; ++i) img.iv[i] = {kInf, -kInf};
  long total = 1;
  for (int i = 0; i < D; ++i) total *= k;
  for (long idx = 0; idx < total; ++idx) {
    Point p{};
    long r = idx;
    for (int i = 0; i < D; ++i) {
      const int c = static_cast<int>(r % k);
      r /= k;
      p[i] = src.iv[i].lo + src.iv[i].width() * c / (k - 1);
    }
    const Point q = flow(rho, lambda, p).endpoint;
    for (int i = 0; i < D; ++i) img.iv[i] = {std::min(img.iv[i].lo, q[i]), std::max(img.iv[i].hi, q[i])};
  }
  for (int i = 0; i < D; ++i) {
    const double m = 0.05 * img.iv[i].width() + 1e-6;
    img.iv[i] = {img.iv[i].lo - m, img.iv[i].hi + m};
  }
  img = intersect(img, chart_box);

  auto f = [rho, phi, lambda, img](const Point& q) -> double {
    if (!img.contains(q)) return 0.0;
    try {
      const FlowResult back = flow(rho, 1.0 / lambda, q);
      const double v = phi(back.endpoint);
      if (v == 0.0) return 0.0;
      return v * std::abs(back.det());
    } catch (const ChartEscape&) {
      return 0.0;  // the preimage lies outside the chart, hence outside supp φ
    }
  };
  return TestFunction::generic(dm, f, img, "push[" + rho.id() + "," + std::to_string(lambda) + "](" + phi.id() + ")");
}

ScalingAction ScalingAction::euler(EulerField rho) {
  ScalingAction a;
  if (!rho.is_standard()) a.rho_ = std::move(rho);
  return a;
}

double ScalingAction::raw(const Distribution& t, const TestFunction& phi, double lambda, const QuadOptions& opt) const {
  if (!rho_ || lambda == 1.0) return scale_pair(t, phi, lambda, 0.0, opt);
  return t.pair(pushforward(*rho_, phi, lambda), opt);
}

std::vector<std::vector<double>> scaled_values(const Distribution& t, const std::vector<TestFunction>& probes,
                                               const std::vector<double>& grid, const ScalingOptions& opt) {
  const size_t np = probes.size(), ng = grid.size();
  std::vector<std::vector<double>> raw(np, std::vector<double>(ng, 0.0));
  const size_t tasks = np * ng;
  std::vector<std::exception_ptr> errors(tasks);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k = next++; k < tasks; k = next++) {
      const size_t i = k / ng, j = k % ng;
      try {
        raw[i][j] = opt.action.raw(t, probes[i], grid[j], opt.quad);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int nt = std::max(1, std::min<int>(opt.threads, static_cast<int>(tasks)));
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  // the lowest failing task wins, independent of scheduling
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  for (const auto& row : raw)
    for (double v : row)
      if (!std::isfinite(v)) throw QuadratureError("scaling: pairing overflowed");
  return raw;
}

namespace {

struct VarPro {
  double residual;
  double c0, c1;
};

// relative-residual fit of v ≈ λ^σ(c0 + c1 log λ) for fixed σ; with_log = false drops c1
VarPro varpro(const std::vector<double>& L, const std::vector<double>& v, double sigma, bool with_log) {
  double saa = 0, sab = 0, sbb = 0, sa = 0, sb = 0;
  const size_t n = L.size();
  std::vector<double> a(n), b(n);
  for (size_t i = 0; i < n; ++i) {
    const double p = std::exp(sigma * L[i]);
    a[i] = p / v[i];
    b[i] = p * L[i] / v[i];
    saa += a[i] * a[i];
    sab += a[i] * b[i];
    sbb += b[i] * b[i];
    sa += a[i];
    sb += b[i];
  }
  double c0 = 0, c1 = 0;
  if (!with_log) {
    c0 = saa > 0 ? sa / saa : 0.0;
  } else {
    const double det = saa * sbb - sab * sab;
    if (std::abs(det) <= 1e-14 * saa * sbb) {
      c0 = saa > 0 ? sa / saa : 0.0;
    } else {
      c0 = (sa * sbb - sb * sab) / det;
      c1 = (saa * sb - sab * sa) / det;
    }
  }
  double r = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double e = 1.0 - c0 * a[i] - c1 * b[i];
    r += e * e;
  }
  return {std::sqrt(r / n), c0, c1};
}

std::pair<double, VarPro> search_sigma(const std::vector<double>& L, const std::vector<double>& v, double sigma0,
                                       bool with_log) {
  double best = sigma0, bestr = kInf;
  const double step = 0.05;
  for (int k = -60; k <= 60; ++k) {
    const double s = sigma0 + k * step;
    const double r = varpro(L, v, s, with_log).residual;
    if (r < bestr) {
      bestr = r;
      best = s;
    }
  }
  auto obj = [&](double s) { return varpro(L, v, s, with_log).residual; };
  auto res = boost::math::tools::brent_find_minima(obj, best - step, best + step, 52);
  double s = res.first;
  if (obj(s) > bestr) s = best;
  return {s, varpro(L, v, s, with_log)};
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

// usable[i][j]: inside the asymptotic window and clearly above the noise of the probe family
std::vector<std::vector<bool>> usable_mask(const std::vector<double>& grid, const std::vector<std::vector<double>>& raw) {
  const size_t np = raw.size(), ng = grid.size();
  std::vector<std::vector<bool>> m(np, std::vector<bool>(ng, false));
  for (size_t j = ng / 2; j < ng; ++j) {
    double mx = 0.0;
    for (size_t i = 0; i < np; ++i) mx = std::max(mx, std::abs(raw[i][j]));
    for (size_t i = 0; i < np; ++i) {
      const double v = std::abs(raw[i][j]);
      m[i][j] = std::isfinite(v) && v > 0.0 && v > 1e-8 * mx;
    }
  }
  return m;
}

}  // namespace

ProbeFit fit_probe(const std::vector<double>& grid, const std::vector<double>& values, const std::vector<bool>& usable,
                   const ScalingOptions& opt) {
  ProbeFit f;
  std::vector<double> L, v, lv;
  for (size_t j = 0; j < grid.size(); ++j)
    if (usable[j]) {
      L.push_back(std::log(grid[j]));
      v.push_back(values[j]);
      lv.push_back(std::log(std::abs(values[j])));
    }
  f.points = static_cast<int>(L.size());
  if (f.points < 4) return f;
  f.usable = true;
  const double s0 = ls_slope(L, lv);
  auto [sp, rp] = search_sigma(L, v, s0, false);
  auto [sl, rl] = search_sigma(L, v, s0, true);
  f.slope = sp;
  f.residual = rp.residual;
  f.log_slope = sl;
  f.log_residual = rl.residual;
  f.c0 = rl.c0;
  f.c1 = rl.c1;
  f.log_flag = f.residual > opt.residual_floor && f.residual >= opt.log_ratio * f.log_residual;
  return f;
}

ScalingReport report_from_values(const std::vector<std::string>& ids, const std::vector<double>& grid,
                                 std::vector<std::vector<double>> raw, const ScalingOptions& opt) {
  ScalingReport r;
  r.probes = ids;
  r.lambda_grid = grid;
  const auto mask = usable_mask(grid, raw);
  bool any = false;
  r.s_hat = kInf;
  for (size_t i = 0; i < raw.size(); ++i) {
    ProbeFit f = fit_probe(grid, raw[i], mask[i], opt);
    if (f.usable) {
      any = true;
      const double s = f.log_flag ? f.log_slope : f.slope;
      r.s_hat = std::min(r.s_hat, s);
      r.log_flag = r.log_flag || f.log_flag;
      r.residual = std::max(r.residual, f.log_flag ? f.log_residual : f.residual);
    }
    r.fits.push_back(f);
  }
  r.raw = std::move(raw);
  if (!any) throw FitError("estimate_degree: fewer than 4 usable grid points for every probe");
  return r;
}

static void check_grid(const std::vector<double>& grid) {
  if (grid.size() < 4) throw FitError("scaling: grid needs at least 4 points");
  for (size_t j = 0; j < grid.size(); ++j) {
    if (!(grid[j] > 0.0) || grid[j] > 1.0) throw DomainError("scaling: grid must lie in (0,1]");
    if (j > 0 && !(grid[j] < grid[j - 1])) throw DomainError("scaling: grid must be strictly decreasing");
  }
}

ScalingReport estimate_degree(const Distribution& t, const std::vector<TestFunction>& probes,
                              const std::vector<double>& grid, const ScalingOptions& opt) {
  if (probes.empty()) throw DomainError("estimate_degree: empty probe list");
  check_grid(grid);
  std::vector<std::string> ids;
  for (const auto& p : probes) ids.push_back(p.id());
  ScalingReport r = report_from_values(ids, grid, scaled_values(t, probes, grid, opt), opt);
  r.action = opt.action.id();
  return r;
}

MembershipResult membership_from_values(double s, const std::vector<double>& grid,
                                        const std::vector<std::vector<double>>& raw) {
  MembershipResult m;
  const auto mask = usable_mask(grid, raw);
  for (size_t i = 0; i < raw.size(); ++i) {
    std::vector<double> L, lw;
    for (size_t j = 0; j < grid.size(); ++j) {
      const double w = std::pow(grid[j], -s) * std::abs(raw[i][j]);
      m.sup = std::max(m.sup, w);
      if (mask[i][j]) {
        L.push_back(std::log(grid[j]));
        lw.push_back(std::log(w));
      }
    }
    if (L.size() < 4) {
      m.trend.push_back(0.0);  // too few points above noise: nothing grows
      continue;
    }
    const double slope = ls_slope(L, lw);
    m.trend.push_back(slope);
    if (slope < kTrendTolerance && m.member) {
      m.member = false;
      m.witness = static_cast<int>(i);
    }
  }
  return m;
}

MembershipResult check_membership(const Distribution& t, double s, const std::vector<TestFunction>& probes,
                                  const std::vector<double>& grid, const ScalingOptions& opt) {
  if (probes.empty()) throw DomainError("check_membership: empty probe list");
  if (!std::isfinite(s)) throw DomainError("check_membership: s must be finite");
  check_grid(grid);
  return membership_from_values(s, grid, scaled_values(t, probes, grid, opt));
}

RhoIndependence rho_independence_check(const Distribution& t, const EulerField& rho1, const EulerField& rho2, double s,
                                       const std::vector<TestFunction>& probes, const std::vector<double>& grid,
                                       const ScalingOptions& opt) {
  if (!is_euler(rho1.field(), rho1.chart()) || !is_euler(rho2.field(), rho2.chart()))
    throw DomainError("rho_independence_check: not an Euler field");
  ScalingOptions o1 = opt, o2 = opt;
  o1.action = ScalingAction::euler(rho1);
  o2.action = ScalingAction::euler(rho2);
  RhoIndependence r;
  r.first = check_membership(t, s, probes, grid, o1);
  r.second = check_membership(t, s, probes, grid, o2);
  r.agree = r.first.member == r.second.member;
  return r;
}

}  // namespace scalext
