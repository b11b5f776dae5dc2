#include "scalext/microlocal.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <sstream>
#include <thread>

namespace scalext {

std::vector<double> default_k_grid() { return {8, 16, 32, 64, 128, 256}; }

namespace {

Block envelope(const std::vector<double>& center, const Window& win) {
  Block b = Block::bump(center, std::vector<double>(center.size(), win.radius));
  if (win.taper <= 0.0) return b;
  return product(b, Block::gaussian(center, std::vector<double>(center.size(), win.radius / win.taper)));
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Expands Π_f (cos θ_f − i sin θ_f) over the factors: one per x-coordinate, plus h unless fixed.
std::pair<TestFunction, TestFunction> oscillatory_terms(Dims dims, const Point& p, const Covector& u, double k,
                                                        const Window& win, const Block* fixed_h) {
  if (!(win.radius > 0.0)) throw DomainError("window: radius must be positive");
  const int n = dims.n, d = dims.d;
  const int nf = fixed_h ? n : n + 1;
  std::vector<Block> env, cosb, sinb;
  std::vector<bool> zero_freq;
  for (int i = 0; i < n; ++i) {
    env.push_back(envelope({p[i]}, win));
    const double om = k * u[i];
    cosb.push_back(Block::cosine({om}, 0.0));
    sinb.push_back(Block::cosine({om}, -M_PI / 2));
    zero_freq.push_back(om == 0.0);
  }
  if (!fixed_h) {
    std::vector<double> hc(d), om(d);
    bool hzero = true;
    for (int j = 0; j < d; ++j) {
      hc[j] = p[n + j];
      om[j] = k * u[n + j];
      hzero = hzero && om[j] == 0.0;
    }
    env.push_back(envelope(hc, win));
    cosb.push_back(Block::cosine(om, 0.0));
    sinb.push_back(Block::cosine(om, -M_PI / 2));
    zero_freq.push_back(hzero);
  }

  TestFunction re(dims), im(dims);
  for (int mask = 0; mask < (1 << nf); ++mask) {
    bool skip = false;
    int q = 0;
    for (int f = 0; f < nf; ++f)
      if (mask >> f & 1) {
        skip = skip || zero_freq[f];
        ++q;
      }
    if (skip) continue;
    // (−i)^q
    static constexpr double kRe[4] = {1, 0, -1, 0}, kIm[4] = {0, -1, 0, 1};
    std::vector<Block> xs;
    for (int i = 0; i < n; ++i) xs.push_back(product(env[i], (mask >> i & 1) ? sinb[i] : cosb[i]));
    const Block hb = fixed_h ? *fixed_h : product(env[n], (mask >> n & 1) ? sinb[n] : cosb[n]);
    const double cr = kRe[q % 4], ci = kIm[q % 4];
    if (cr != 0.0) re += TestFunction::separable(dims, xs, hb, cr);
    if (ci != 0.0) im += TestFunction::separable(dims, xs, hb, ci);
  }
  return {re, im};
}

}  // namespace

std::pair<TestFunction, TestFunction> oscillatory_probe(Dims dims, const Point& p, const Covector& w, double k,
                                                        const Window& win) {
  return oscillatory_terms(dims, p, normalized(w, dims.total()), k, win, nullptr);
}

std::pair<TestFunction, TestFunction> oscillatory_x_probe(Dims dims, const Point& x0, const Covector& w_x, double k,
                                                          const Window& win, const Block& h) {
  if (dims.n > 0 && k != 0.0) {
    Covector u{};
    for (int i = 0; i < dims.n; ++i) u[i] = w_x[i];
    return oscillatory_terms(dims, x0, normalized(u, dims.n), k, win, &h);
  }
  return oscillatory_terms(dims, x0, Covector{}, 0.0, win, &h);
}

double fit_decay(const std::vector<double>& k, const std::vector<double>& amplitude, double reference,
                 double floor) {
  if (k.size() != amplitude.size() || k.size() < 2) throw FitError("wf: need at least two frequencies");
  if (!(reference > 0.0)) return kRapidDecay;
  const double cut = floor * reference;
  const size_t start = k.size() / 2;
  std::vector<double> X, Y;
  double bound = -kRapidDecay;
  for (size_t i = start; i < k.size(); ++i) {
    if (amplitude[i] > cut) {
      X.push_back(std::log(k[i]));
      Y.push_back(std::log(amplitude[i]));
      continue;
    }
    // vanished below the floor: the decay from the last resolved amplitude is at least this fast
    size_t j = i;
    while (j > 0 && !(amplitude[j - 1] > cut)) --j;
    if (j == 0) return kRapidDecay;
    bound = std::max(bound, std::log(amplitude[j - 1] / cut) / std::log(k[i] / k[j - 1]));
    break;
  }
  double N = -kRapidDecay;
  if (X.size() >= 2) {
    const double n = static_cast<double>(X.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < X.size(); ++i) {
      sx += X[i];
      sy += Y[i];
      sxx += X[i] * X[i];
      sxy += X[i] * Y[i];
    }
    N = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
  } else if (bound == -kRapidDecay) {
    return kRapidDecay;
  }
  return std::clamp(std::max(N, bound), -kRapidDecay, kRapidDecay);
}

WfReport wf_estimate_pairs(const Distribution& t, const std::vector<std::pair<Point, Covector>>& pairs,
                           const WfOptions& opt) {
  const Dims dm = t.dims();
  WfReport rep;
  rep.dims = dm;
  rep.k_grid = opt.k_grid.empty() ? default_k_grid() : opt.k_grid;
  if (!std::is_sorted(rep.k_grid.begin(), rep.k_grid.end()) || rep.k_grid.front() <= 0.0)
    throw DomainError("wf: k grid must be positive and increasing");
  rep.threshold = opt.threshold;
  rep.estimated_cone = Cone(dm);
  rep.samples.resize(pairs.size());

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < pairs.size(); i = next++) {
      WfSample& s = rep.samples[i];
      s.point = pairs[i].first;
      s.direction = normalized(pairs[i].second, dm.total());
      try {
        const auto base = oscillatory_probe(dm, s.point, s.direction, 0.0, opt.window).first;
        double ref = std::abs(t.pair(base, opt.quad));
        for (double k : rep.k_grid) {
          const auto [re, im] = oscillatory_probe(dm, s.point, s.direction, k, opt.window);
          const double a = std::hypot(t.pair(re, opt.quad), t.pair(im, opt.quad));
          s.amplitude.push_back(a);
          ref = std::max(ref, a);
        }
        s.decay_exponent = fit_decay(rep.k_grid, s.amplitude, ref, opt.floor);
      } catch (const std::exception& e) {
        s.ok = false;
        s.error = e.what();
      }
    }
  };
  const int nt = std::max(1, std::min<int>(opt.threads, static_cast<int>(pairs.size())));
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (const auto& s : rep.samples) {
    if (!rep.slow(s)) continue;
    BaseRegion b;
    b.dims = dm;
    b.box.dim = dm.total();
    for (int i = 0; i < dm.total(); ++i) b.box.iv[i] = {s.point[i], s.point[i]};
    rep.estimated_cone.add({b, DirectionSet::cap(s.direction, 1e-6, dm.total())});
  }
  return rep;
}

WfReport wf_estimate(const Distribution& t, const std::vector<Point>& points, const std::vector<Covector>& directions,
                     const WfOptions& opt) {
  std::vector<std::pair<Point, Covector>> pairs;
  for (const auto& p : points)
    for (const auto& w : directions) pairs.emplace_back(p, w);
  return wf_estimate_pairs(t, pairs, opt);
}

WfAgreement wf_compare(const WfReport& report, const Cone& cone, double slack) {
  WfAgreement a;
  for (const auto& s : report.samples) {
    if (!s.ok) continue;
    ++a.samples;
    const bool inside = cone.contains(s.point, s.direction, slack);
    const bool slow = report.slow(s);
    a.slow += slow;
    a.slow_outside += slow && !inside;
    a.agree += slow == inside;
  }
  return a;
}

bool wf_bound_check(const WfReport& report, const Cone& bound, double slack) {
  for (const auto& s : report.samples)
    if (report.slow(s) && !bound.contains(s.point, s.direction, slack)) return false;
  return true;
}

std::string WfReport::to_csv() const {
  std::ostringstream os;
  const int D = dims.total();
  for (int i = 0; i < D; ++i) os << "p" << i << ",";
  for (int i = 0; i < D; ++i) os << "w" << i << ",";
  os << "decay_exponent,slow,ok";
  for (double k : k_grid) os << ",amp_k" << fmt17(k);
  os << "\n";
  for (const auto& s : samples) {
    for (int i = 0; i < D; ++i) os << fmt17(s.point[i]) << ",";
    for (int i = 0; i < D; ++i) os << fmt17(s.direction[i]) << ",";
    os << fmt17(s.decay_exponent) << "," << (slow(s) ? 1 : 0) << "," << (s.ok ? 1 : 0);
    for (size_t j = 0; j < k_grid.size(); ++j) os << "," << (j < s.amplitude.size() ? fmt17(s.amplitude[j]) : "nan");
    os << "\n";
  }
  return os.str();
}

}  // namespace scalext
