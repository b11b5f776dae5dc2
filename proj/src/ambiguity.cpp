#include "scalext/ambiguity.hpp"

#include <Eigen/Dense>
#include <cstdio>
#include <sstream>

namespace scalext {

long counterterm_rank(double s, int d) {
  if (d < 1) throw DomainError("counterterm_rank: need d >= 1");
  const int m = subtraction_order(s, d);
  if (m < 0) return 0;
  return binomial(m + d, d);
}

namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ∫ e·exp(−1/(1−u²)) du over [−1, 1]
double unit_bump_mass() {
  static const double mass = [] {
    const Block b = Block::bump({0.0}, {1.0});
    EvalBudget budget(100000);
    QuadOptions q;
    q.rel_tol = 1e-14;
    return integrate([&](double u) { return b(u); }, -1.0, 1.0, q, budget).value;
  }();
  return mass;
}

Block h_probe_block(int d, const MultiIndex& beta, double r) {
  return product(Block::monomial(d, beta, 1.0 / multi_factorial(beta, d)),
                 Block::bump(std::vector<double>(d, 0.0), std::vector<double>(d, r)));
}

// M(β, α) = ⟨∂_h^α δ_I, h^β/β! bump(h/r)⟩ per unit x-mass
Eigen::MatrixXd moment_matrix(int d, const std::vector<MultiIndex>& rows, const std::vector<MultiIndex>& cols,
                              double r, int order) {
  Eigen::MatrixXd M(rows.size(), cols.size());
  const std::vector<double> zero(d, 0.0);
  for (size_t i = 0; i < rows.size(); ++i) {
    const Jet j = h_probe_block(d, rows[i], r).jet(zero, order);
    for (size_t c = 0; c < cols.size(); ++c) {
      const int a = multi_abs(cols[c], d);
      M(i, c) = ((a % 2) ? -1.0 : 1.0) * j.derivative(cols[c]);
    }
  }
  return M;
}

void check_grid(Dims dims, const std::vector<Point>& x_grid, const ExtractionOptions& opt) {
  if (x_grid.empty()) throw DomainError("ambiguity: empty x grid");
  if (!(opt.h_radius > 0.0 && opt.x_radius > 0.0)) throw DomainError("ambiguity: radii must be positive");
  if (dims.n == 0 && x_grid.size() != 1) throw DomainError("ambiguity: n = 0 takes a single grid point");
}

}  // namespace

TestFunction coefficient_probe(Dims dims, const Point& x0, const MultiIndex& beta, const ExtractionOptions& opt) {
  std::vector<Block> xs;
  double norm = 1.0;
  for (int i = 0; i < dims.n; ++i) {
    xs.push_back(Block::bump({x0[i]}, {opt.x_radius}));
    norm /= opt.x_radius * unit_bump_mass();
  }
  return TestFunction::separable(dims, xs, h_probe_block(dims.d, beta, opt.h_radius), norm);
}

std::string Counterterm::to_csv() const {
  std::ostringstream os;
  for (int j = 0; j < dims.d; ++j) os << "alpha" << j << ",";
  for (int i = 0; i < dims.n; ++i) os << "x" << i << ",";
  os << "coeff\n";
  for (const auto& t : terms)
    for (size_t g = 0; g < x_grid.size(); ++g) {
      for (int j = 0; j < dims.d; ++j) os << t.alpha[j] << ",";
      for (int i = 0; i < dims.n; ++i) os << fmt17(x_grid[g][i]) << ",";
      os << fmt17(t.coeff[g]) << "\n";
    }
  return os.str();
}

Decomposition decompose_difference(const Distribution& t1, const Distribution& t2, int m,
                                   const std::vector<Point>& x_grid, const ExtractionOptions& opt) {
  const Dims dm = t1.dims();
  if (!(t2.dims() == dm)) throw DomainError("decompose_difference: dimension mismatch");
  if (m < 0) throw DomainError("decompose_difference: need m >= 0");
  check_grid(dm, x_grid, opt);
  const auto cols = multi_indices_upto(dm.d, m);
  const auto higher = multi_indices_exact(dm.d, m + 1);
  const Eigen::MatrixXd M = moment_matrix(dm.d, cols, cols, opt.h_radius, m + 1);
  const Eigen::MatrixXd Mh = moment_matrix(dm.d, higher, cols, opt.h_radius, m + 1);
  const auto lu = M.fullPivLu();
  if (!lu.isInvertible()) throw FitError("decompose_difference: singular moment system");

  Decomposition out;
  out.counterterm.dims = dm;
  out.counterterm.x_grid = x_grid;
  for (const auto& a : cols) out.counterterm.terms.push_back({a, {}});
  auto diff = [&](const TestFunction& phi) { return t1.pair(phi, opt.quad) - t2.pair(phi, opt.quad); };
  for (const Point& x0 : x_grid) {
    Eigen::VectorXd b(cols.size());
    for (size_t i = 0; i < cols.size(); ++i) b[i] = diff(coefficient_probe(dm, x0, cols[i], opt));
    const Eigen::VectorXd c = lu.solve(b);
    for (size_t i = 0; i < cols.size(); ++i) {
      out.counterterm.terms[i].coeff.push_back(c[i]);
      out.max_coeff = std::max(out.max_coeff, std::abs(c[i]));
    }
    const Eigen::VectorXd pred = Mh * c;
    for (size_t i = 0; i < higher.size(); ++i)
      out.residual = std::max(out.residual, std::abs(diff(coefficient_probe(dm, x0, higher[i], opt)) - pred[i]));
  }
  out.equal = out.max_coeff < opt.tolerance;
  return out;
}

Decomposition decompose_difference(const ExtensionResult& t1, const ExtensionResult& t2, int m,
                                   const std::vector<Point>& x_grid, const ExtractionOptions& opt) {
  if (std::abs(t1.s_in - t2.s_in) > 1e-12) throw DomainError("decompose_difference: extensions of different degree");
  return decompose_difference(t1.tbar, t2.tbar, m, x_grid, opt);
}

Distribution inject_counterterm(const Distribution& t, std::vector<DeltaTerm> terms) {
  const std::string id = t.id() + "+counterterm";
  Distribution ct = delta_distribution(t.domain(), std::move(terms), "counterterm");
  Distribution out = linear_combination({{1.0, t}, {1.0, ct}}, id);
  out.meta_degree = t.meta_degree;
  out.meta_cone = t.meta_cone;
  return out;
}

namespace {

std::vector<Covector> x_directions(int n) {
  std::vector<Covector> out;
  for (int i = 0; i < n; ++i) {
    Covector e{};
    e[i] = 1.0;
    out.push_back(e);
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (double sgn : {1.0, -1.0}) {
        Covector e{};
        e[i] = M_SQRT1_2;
        e[j] = sgn * M_SQRT1_2;
        out.push_back(e);
      }
  return out;
}

// a probe supported away from I, to test that u lives on I
TestFunction off_I_probe(const ChartRegion& chart) {
  const Dims dm = chart.dims;
  std::vector<double> c(dm.total()), r(dm.total());
  for (int i = 0; i < dm.n; ++i) {
    c[i] = 0.5 * (chart.box_x.iv[i].lo + chart.box_x.iv[i].hi);
    r[i] = 0.45 * chart.box_x.iv[i].width();
  }
  const double reach = chart.box_h.iv[0].hi;
  for (int j = 0; j < dm.d; ++j) {
    c[dm.n + j] = j == 0 ? 0.6 * reach : 0.0;
    r[dm.n + j] = 0.25 * reach;
  }
  return make_bump(dm, c, r);
}

}  // namespace

SmoothnessReport smooth_coefficient_check(const Distribution& u, int m, const std::vector<Point>& x_grid,
                                          const SmoothnessOptions& opt) {
  const Dims dm = u.dims();
  const ExtractionOptions& ex = opt.extraction;
  if (m < 0) throw DomainError("smooth_coefficient_check: need m >= 0");
  check_grid(dm, x_grid, ex);
  if (!(u.domain().box_h.iv[0].hi > 0.0)) throw DomainError("smooth_coefficient_check: chart has no room off I");
  if (std::abs(u.pair(off_I_probe(u.domain()), ex.quad)) > opt.support_tolerance)
    throw DomainError("smooth_coefficient_check: distribution is not supported on I");

  SmoothnessReport rep;
  rep.threshold = opt.threshold;
  if (dm.n == 0) return rep;  // coefficients are constants
  const std::vector<double> ks = opt.k_grid.empty() ? default_k_grid() : opt.k_grid;
  const auto cols = multi_indices_upto(dm.d, m);
  const auto lu = moment_matrix(dm.d, cols, cols, ex.h_radius, m).fullPivLu();
  if (!lu.isInvertible()) throw FitError("smooth_coefficient_check: singular moment system");
  std::vector<Block> hb;
  for (const auto& b : cols) hb.push_back(h_probe_block(dm.d, b, ex.h_radius));

  for (const Point& x0 : x_grid)
    for (const Covector& w : x_directions(dm.n)) {
      // amplitude[α][k] of the windowed transform of t_α; index 0 is k = 0
      std::vector<std::vector<double>> amp(cols.size());
      for (size_t kk = 0; kk <= ks.size(); ++kk) {
        const double k = kk == 0 ? 0.0 : ks[kk - 1];
        Eigen::VectorXd bre(cols.size()), bim(cols.size());
        for (size_t i = 0; i < cols.size(); ++i) {
          const auto [re, im] = oscillatory_x_probe(dm, x0, w, k, opt.window, hb[i]);
          bre[i] = u.pair(re, ex.quad);
          bim[i] = im.is_zero() ? 0.0 : u.pair(im, ex.quad);
        }
        const Eigen::VectorXd cre = lu.solve(bre), cim = lu.solve(bim);
        for (size_t i = 0; i < cols.size(); ++i) amp[i].push_back(std::hypot(cre[i], cim[i]));
      }
      double ref = 0.0;
      for (const auto& a : amp)
        for (double v : a) ref = std::max(ref, v);
      for (size_t i = 0; i < cols.size(); ++i) {
        CoefficientSmoothness s;
        s.alpha = cols[i];
        s.x0 = x0;
        s.direction = w;
        s.amplitude.assign(amp[i].begin() + 1, amp[i].end());
        s.decay_exponent = fit_decay(ks, s.amplitude, ref, opt.floor);
        rep.smooth = rep.smooth && s.decay_exponent > opt.threshold;
        rep.samples.push_back(std::move(s));
      }
    }
  return rep;
}

}  // namespace scalext
