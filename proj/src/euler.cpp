#include "scalext/euler.hpp"

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>
#include <functional>

namespace scalext {

namespace odeint = boost::numeric::odeint;
using State = std::vector<double>;

Poly Poly::constant(int vars, double c) {
  Poly p{vars, {}};
  if (c != 0.0) p.terms.push_back({MultiIndex{}, c});
  return p;
}

double Poly::value(const Point& q) const {
  double s = 0.0;
  for (const auto& [a, c] : terms) {
    double t = c;
    for (int k = 0; k < vars; ++k)
      for (int e = 0; e < a[k]; ++e) t *= q[k];
    s += t;
  }
  return s;
}

void Poly::gradient(const Point& q, double* out) const {
  for (int k = 0; k < vars; ++k) out[k] = 0.0;
  for (const auto& [a, c] : terms) {
    for (int k = 0; k < vars; ++k) {
      if (a[k] == 0) continue;
      double t = c * a[k];
      for (int l = 0; l < vars; ++l) {
        int e = a[l] - (l == k ? 1 : 0);
        for (int r = 0; r < e; ++r) t *= q[l];
      }
      out[k] += t;
    }
  }
}

namespace {

Poly times_monomial(const Poly& p, const MultiIndex& m, double scale = 1.0) {
  Poly r{p.vars, {}};
  for (const auto& [a, c] : p.terms) {
    MultiIndex b = a;
    for (int k = 0; k < p.vars; ++k) b[k] += m[k];
    r.terms.push_back({b, c * scale});
  }
  return r;
}

void add_into(Poly& acc, const Poly& p, double s = 1.0) {
  for (const auto& [a, c] : p.terms) {
    bool merged = false;
    for (auto& [b, cb] : acc.terms)
      if (b == a) {
        cb += s * c;
        merged = true;
        break;
      }
    if (!merged) acc.terms.push_back({a, s * c});
  }
  std::erase_if(acc.terms, [](const auto& t) { return t.second == 0.0; });
}

MultiIndex unit(int k) {
  MultiIndex m{};
  m[k] = 1;
  return m;
}

using Rhs = std::function<void(double, const double*, double*)>;
using Jac = std::function<void(double, const double*, double*)>;
using Watch = std::function<void(double, const State&)>;

// Integrates q' = f(t,q) from t0 to t1, optionally with the variational equation M' = Df·M.
State integrate_system(int dim, const Rhs& f, const Jac* jac, double t0, double t1, const Point& q0,
                       const FlowOptions& opt, const Watch& watch, int* steps) {
  const bool var = jac != nullptr;
  const int sz = dim + (var ? dim * dim : 0);
  State x(sz, 0.0);
  for (int k = 0; k < dim; ++k) x[k] = q0[k];
  if (var)
    for (int k = 0; k < dim; ++k) x[dim + k * dim + k] = 1.0;
  if (t0 == t1) return x;
  std::vector<double> jbuf(dim * dim);
  auto sys = [&](const State& s, State& ds, double t) {
    f(t, s.data(), ds.data());
    if (!var) return;
    (*jac)(t, s.data(), jbuf.data());
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) {
        double acc = 0.0;
        for (int k = 0; k < dim; ++k) acc += jbuf[r * dim + k] * s[dim + k * dim + c];
        ds[dim + r * dim + c] = acc;
      }
  };
  auto stepper = odeint::make_controlled(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_dopri5<State>());
  int count = 0;
  double dt = (t1 - t0) / 50.0;
  odeint::integrate_adaptive(stepper, sys, x, t0, t1, dt, [&](const State& s, double t) {
    ++count;
    for (double v : s)
      if (!std::isfinite(v)) throw FlowError("flow: non-finite state");
    if (watch) watch(t, s);
  });
  if (steps) *steps = count;
  return x;
}

}  // namespace

void VectorField::eval(const Point& q, double* out) const {
  for (int k = 0; k < dims.total(); ++k) out[k] = comp[k].value(q);
}

void VectorField::jacobian(const Point& q, double* out) const {
  const int D = dims.total();
  for (int k = 0; k < D; ++k) comp[k].gradient(q, out + k * D);
}

VectorField VectorField::linear_h(Dims dims, double c) {
  VectorField v{dims, {}};
  for (int k = 0; k < dims.total(); ++k) v.comp.push_back(Poly::zero(dims.total()));
  for (int j = 0; j < dims.d; ++j) v.comp[dims.n + j].terms.push_back({unit(dims.n + j), c});
  return v;
}

VectorField VectorField::from_components(Dims dims, std::vector<Poly> comp) {
  if (static_cast<int>(comp.size()) != dims.total()) throw DomainError("vector field: wrong component count");
  for (auto& p : comp) p.vars = dims.total();
  return VectorField{dims, std::move(comp)};
}

VectorField operator-(const VectorField& a, const VectorField& b) {
  if (!(a.dims == b.dims)) throw DomainError("vector field: dimension mismatch");
  VectorField r = a;
  for (int k = 0; k < a.dims.total(); ++k) add_into(r.comp[k], b.comp[k], -1.0);
  return r;
}

EulerField::EulerField(ChartRegion chart, std::vector<std::vector<Poly>> A,
                       std::vector<std::vector<std::vector<Poly>>> B, std::string id)
    : chart_(chart), A_(std::move(A)), B_(std::move(B)), id_(std::move(id)) {
  const Dims dm = chart_.dims;
  const int D = dm.total();
  if (A_.empty()) A_.assign(dm.d, std::vector<Poly>(dm.n, Poly::zero(D)));
  if (B_.empty()) B_.assign(dm.d, std::vector<std::vector<Poly>>(dm.d, std::vector<Poly>(dm.d, Poly::zero(D))));
  if (static_cast<int>(A_.size()) != dm.d || static_cast<int>(B_.size()) != dm.d)
    throw DomainError("euler field: coefficient shape mismatch");
  for (auto& row : A_) {
    if (static_cast<int>(row.size()) != dm.n) throw DomainError("euler field: A shape mismatch");
    for (auto& p : row) p.vars = D;
  }
  for (auto& m : B_) {
    if (static_cast<int>(m.size()) != dm.d) throw DomainError("euler field: B shape mismatch");
    for (auto& row : m) {
      if (static_cast<int>(row.size()) != dm.d) throw DomainError("euler field: B shape mismatch");
      for (auto& p : row) p.vars = D;
    }
  }
  field_ = VectorField::linear_h(dm, 1.0);
  standard_ = true;
  for (int i = 0; i < dm.d; ++i)
    for (int j = 0; j < dm.n; ++j) {
      if (!A_[i][j].is_zero()) standard_ = false;
      add_into(field_.comp[j], times_monomial(A_[i][j], unit(dm.n + i)));
    }
  for (int i = 0; i < dm.d; ++i)
    for (int j = 0; j < dm.d; ++j)
      for (int k = 0; k < dm.d; ++k) {
        if (B_[i][j][k].is_zero()) continue;
        standard_ = false;
        MultiIndex m = unit(dm.n + i);
        m[dm.n + j] += 1;
        add_into(field_.comp[dm.n + k], times_monomial(B_[i][j][k], m));
      }
}

EulerField EulerField::standard(const ChartRegion& chart) { return EulerField(chart, {}, {}, "standard"); }

EulerField EulerField::logistic(const ChartRegion& chart) {
  if (chart.dims.d != 1) throw DomainError("logistic field needs d = 1");
  const int D = chart.dims.total();
  std::vector<std::vector<std::vector<Poly>>> B{{{Poly::constant(D, 1.0)}}};
  return EulerField(chart, {}, std::move(B), "logistic");
}

EulerField euler_field_by_id(const std::string& id, const ChartRegion& chart) {
  if (id == "standard") return EulerField::standard(chart);
  if (id == "logistic") return EulerField::logistic(chart);
  throw DomainError("unknown Euler field '" + id + "'");
}

void EulerField::conj_rhs(double lambda, const Point& q, double* out) const {
  const Dims dm = dims();
  Point qq = q;
  for (int j = 0; j < dm.d; ++j) qq[dm.n + j] = lambda * q[dm.n + j];
  for (int k = 0; k < dm.total(); ++k) out[k] = 0.0;
  for (int i = 0; i < dm.d; ++i) {
    const double gi = q[dm.n + i];
    for (int j = 0; j < dm.n; ++j)
      if (!A_[i][j].is_zero()) out[j] += gi * A_[i][j].value(qq);
    for (int j = 0; j < dm.d; ++j)
      for (int k = 0; k < dm.d; ++k)
        if (!B_[i][j][k].is_zero()) out[dm.n + k] += gi * q[dm.n + j] * B_[i][j][k].value(qq);
  }
}

void EulerField::conj_jacobian(double lambda, const Point& q, double* out) const {
  const Dims dm = dims();
  const int D = dm.total();
  Point qq = q;
  for (int j = 0; j < dm.d; ++j) qq[dm.n + j] = lambda * q[dm.n + j];
  for (int k = 0; k < D * D; ++k) out[k] = 0.0;
  double grad[kMaxDim];
  auto accumulate = [&](int row, const Poly& p, double w, const std::vector<std::pair<int, double>>& dw) {
    // row += ∂(w·p(x,λg)); dw lists (column, ∂w/∂column)
    p.gradient(qq, grad);
    const double pv = p.value(qq);
    for (int l = 0; l < dm.n; ++l) out[row * D + l] += w * grad[l];
    for (int m = 0; m < dm.d; ++m) out[row * D + dm.n + m] += w * lambda * grad[dm.n + m];
    for (const auto& [col, dv] : dw) out[row * D + col] += dv * pv;
  };
  for (int i = 0; i < dm.d; ++i) {
    const double gi = q[dm.n + i];
    for (int j = 0; j < dm.n; ++j)
      if (!A_[i][j].is_zero()) accumulate(j, A_[i][j], gi, {{dm.n + i, 1.0}});
    for (int j = 0; j < dm.d; ++j)
      for (int k = 0; k < dm.d; ++k) {
        if (B_[i][j][k].is_zero()) continue;
        const double gj = q[dm.n + j];
        std::vector<std::pair<int, double>> dw{{dm.n + i, gj}};
        dw.push_back({dm.n + j, gi});
        accumulate(dm.n + k, B_[i][j][k], gi * gj, dw);
      }
  }
}

double FlowResult::det() const {
  const int D = static_cast<int>(std::lround(std::sqrt(static_cast<double>(jacobian.size()))));
  Eigen::MatrixXd m(D, D);
  for (int r = 0; r < D; ++r)
    for (int c = 0; c < D; ++c) m(r, c) = jacobian[r * D + c];
  return m.determinant();
}

FlowResult flow_time(const VectorField& v, const ChartRegion& chart, double tau, const Point& p,
                     const FlowOptions& opt) {
  const int D = v.dims.total();
  if (!std::isfinite(tau)) throw DomainError("flow: non-finite time");
  const Box box = chart.full_box();
  if (opt.check_chart && !box.contains(p, opt.escape_margin)) throw DomainError("flow: start point outside chart");
  std::vector<Point> traj;
  Rhs f = [&](double, const double* q, double* out) {
    Point pq{};
    for (int k = 0; k < D; ++k) pq[k] = q[k];
    v.eval(pq, out);
  };
  Jac j = [&](double, const double* q, double* out) {
    Point pq{};
    for (int k = 0; k < D; ++k) pq[k] = q[k];
    v.jacobian(pq, out);
  };
  Watch w = [&](double, const State& s) {
    Point pq{};
    for (int k = 0; k < D; ++k) pq[k] = s[k];
    traj.push_back(pq);
    if (opt.check_chart && !box.contains(pq, opt.escape_margin))
      throw ChartEscape("flow: trajectory left the chart", traj);
  };
  FlowResult r;
  State x = integrate_system(D, f, &j, 0.0, tau, p, opt, w, &r.steps);
  for (int k = 0; k < D; ++k) r.endpoint[k] = x[k];
  r.jacobian.assign(x.begin() + D, x.end());
  r.lambda = std::exp(tau);
  return r;
}

FlowResult flow(const EulerField& rho, double lambda, const Point& p, const FlowOptions& opt) {
  if (!(lambda > 0.0)) throw DomainError("flow: lambda must be positive");
  const Dims dm = rho.dims();
  if (rho.is_standard()) {
    // exact: (x, λh)
    FlowResult r;
    r.endpoint = p;
    for (int j = 0; j < dm.d; ++j) r.endpoint[dm.n + j] *= lambda;
    const int D = dm.total();
    r.jacobian.assign(D * D, 0.0);
    for (int k = 0; k < D; ++k) r.jacobian[k * D + k] = k < dm.n ? 1.0 : lambda;
    r.lambda = lambda;
    if (opt.check_chart && !rho.chart().contains(r.endpoint, opt.escape_margin))
      throw ChartEscape("flow: trajectory left the chart", {p, r.endpoint});
    return r;
  }
  FlowResult r = flow_time(rho.field(), rho.chart(), std::log(lambda), p, opt);
  if (!(r.det() > 0.0)) throw FlowError("flow: Jacobian lost orientation");
  return r;
}

ConjugationResult conjugation(const EulerField& rho1, const EulerField& rho2, double lambda, const Point& p,
                              const FlowOptions& opt) {
  if (!(rho1.dims() == rho2.dims())) throw DomainError("conjugation: dimension mismatch");
  if (!(lambda >= 0.0) || lambda > 1.0) throw DomainError("conjugation: lambda must lie in [0,1]");
  const int D = rho1.dims().total();
  auto leg = [&](const EulerField& rho, double t0, double t1, const Point& q0, std::vector<double>& M) {
    Rhs f = [&](double t, const double* q, double* out) {
      Point pq{};
      for (int k = 0; k < D; ++k) pq[k] = q[k];
      rho.conj_rhs(t, pq, out);
    };
    Jac j = [&](double t, const double* q, double* out) {
      Point pq{};
      for (int k = 0; k < D; ++k) pq[k] = q[k];
      rho.conj_jacobian(t, pq, out);
    };
    State x = integrate_system(D, f, &j, t0, t1, q0, opt, {}, nullptr);
    Point out{};
    for (int k = 0; k < D; ++k) out[k] = x[k];
    M.assign(x.begin() + D, x.end());
    return out;
  };
  std::vector<double> M2, M1;
  const Point mid = leg(rho2, 1.0, lambda, p, M2);   // G₂(λ)p
  const Point end = leg(rho1, lambda, 1.0, mid, M1);  // G₁(λ)^{-1}
  ConjugationResult r;
  r.point = end;
  r.jacobian.assign(D * D, 0.0);
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b) {
      double s = 0.0;
      for (int k = 0; k < D; ++k) s += M1[a * D + k] * M2[k * D + b];
      r.jacobian[a * D + b] = s;
    }
  return r;
}

bool is_euler(const VectorField& v, const ChartRegion& chart) {
  const Dims dm = v.dims;
  double hmax = kInf;
  for (int j = 0; j < dm.d; ++j)
    hmax = std::min({hmax, std::abs(chart.box_h.iv[j].lo), std::abs(chart.box_h.iv[j].hi)});
  hmax = std::min(hmax, 0.1);
  if (!(hmax > 0.0)) return false;
  const double rmin = std::min(1e-4, hmax * 1e-3);

  // sample base points on I and unit h-directions
  std::vector<Point> bases;
  for (int s : {0, 1, -1}) {
    Point b{};
    for (int i = 0; i < dm.n; ++i) {
      const auto& iv = chart.box_x.iv[i];
      const double c = iv.bounded() ? 0.5 * (iv.lo + iv.hi) : 0.0;
      const double w = iv.bounded() ? 0.25 * iv.width() : 0.5;
      b[i] = c + s * w * (i % 2 == 0 ? 1.0 : -0.7);
    }
    bases.push_back(b);
    if (dm.n == 0) break;
  }
  std::vector<Point> dirs;
  const int nd = dm.d == 1 ? 2 : 6;
  for (int t = 0; t < nd; ++t) {
    Point w{};
    if (dm.d == 1) {
      w[0] = t == 0 ? 1.0 : -1.0;
    } else {
      double norm = 0.0;
      for (int j = 0; j < dm.d; ++j) {
        w[j] = std::cos(0.9 * t + 1.3 * j + 0.2 * t * j);
        norm += w[j] * w[j];
      }
      for (int j = 0; j < dm.d; ++j) w[j] /= std::sqrt(norm);
    }
    dirs.push_back(w);
  }

  // generators of the vanishing ideal: h^j and x^i h^j
  struct Gen {
    int xi;  // -1 for none
    int hj;
  };
  std::vector<Gen> gens;
  for (int j = 0; j < dm.d; ++j) {
    gens.push_back({-1, j});
    for (int i = 0; i < dm.n; ++i) gens.push_back({i, j});
  }

  const int ns = 30;
  const int deg = 4;
  Eigen::MatrixXd V(ns, deg + 1);
  std::vector<double> rs(ns);
  for (int s = 0; s < ns; ++s) {
    rs[s] = rmin * std::pow(hmax / rmin, static_cast<double>(s) / (ns - 1));
    for (int e = 0; e <= deg; ++e) V(s, e) = std::pow(rs[s] / hmax, e);
  }
  auto qr = V.colPivHouseholderQr();
  double vals[kMaxDim];
  for (const Point& b : bases)
    for (const Point& w : dirs)
      for (const Gen& g : gens) {
        Eigen::VectorXd R(ns);
        for (int s = 0; s < ns; ++s) {
          Point q = b;
          for (int j = 0; j < dm.d; ++j) q[dm.n + j] = rs[s] * w[j];
          v.eval(q, vals);
          const double hj = q[dm.n + g.hj];
          double vf, f;
          if (g.xi < 0) {
            vf = vals[dm.n + g.hj];
            f = hj;
          } else {
            vf = vals[g.xi] * hj + q[g.xi] * vals[dm.n + g.hj];
            f = q[g.xi] * hj;
          }
          R(s) = vf - f;
        }
        Eigen::VectorXd c = qr.solve(R);
        if (std::abs(c(0)) >= 1e-6 || std::abs(c(1) / hmax) >= 1e-6) return false;
      }
  return true;
}

Covec lifted_field(const VectorField& x, const Covec& c) {
  const int D = x.dims.total();
  double vals[kMaxDim], J[kMaxDim * kMaxDim];
  x.eval(c.q, vals);
  x.jacobian(c.q, J);
  Covec r;
  for (int k = 0; k < D; ++k) {
    r.q[k] = vals[k];
    double s = 0.0;
    for (int l = 0; l < D; ++l) s += J[l * D + k] * c.p[l];
    r.p[k] = -s;
  }
  return r;
}

Covec lifted_flow(const VectorField& x, const Covec& c, double tau, const FlowOptions& opt) {
  const int D = x.dims.total();
  Rhs f = [&](double, const double* s, double* out) {
    Covec cv;
    for (int k = 0; k < D; ++k) {
      cv.q[k] = s[k];
      cv.p[k] = s[D + k];
    }
    Covec d = lifted_field(x, cv);
    for (int k = 0; k < D; ++k) {
      out[k] = d.q[k];
      out[D + k] = d.p[k];
    }
  };
  State x0(2 * D);
  for (int k = 0; k < D; ++k) {
    x0[k] = c.q[k];
    x0[D + k] = c.p[k];
  }
  auto sys = [&](const State& s, State& ds, double t) { f(t, s.data(), ds.data()); };
  auto stepper = odeint::make_controlled(opt.abs_tol, opt.rel_tol, odeint::runge_kutta_dopri5<State>());
  if (tau != 0.0) odeint::integrate_adaptive(stepper, sys, x0, 0.0, tau, tau / 50.0);
  Covec r;
  for (int k = 0; k < D; ++k) {
    r.q[k] = x0[k];
    r.p[k] = x0[D + k];
  }
  return r;
}

bool cotangent_lift_check(const VectorField& x, const std::vector<Covec>& samples, double tau, double tol) {
  const int D = x.dims.total();
  for (const Covec& c : samples) {
    Covec e = lifted_flow(x, c, tau);
    for (int k = 0; k < D; ++k)
      if (std::abs(e.q[k] - c.q[k]) > tol || std::abs(e.p[k] - c.p[k]) > tol) return false;
  }
  return true;
}

bool conjugation_lift_check(const EulerField& rho1, const EulerField& rho2, double lambda,
                            const std::vector<Covec>& samples, double tol) {
  const int D = rho1.dims().total();
  for (const Covec& c : samples) {
    ConjugationResult cr = conjugation(rho1, rho2, lambda, c.q);
    Eigen::MatrixXd J(D, D);
    Eigen::VectorXd p(D);
    for (int a = 0; a < D; ++a) {
      p(a) = c.p[a];
      for (int b = 0; b < D; ++b) J(a, b) = cr.jacobian[a * D + b];
    }
    // covector pushforward: p' = J^{-T} p
    Eigen::VectorXd pn = J.transpose().fullPivLu().solve(p);
    for (int k = 0; k < D; ++k)
      if (std::abs(cr.point[k] - c.q[k]) > tol || std::abs(pn(k) - c.p[k]) > tol) return false;
  }
  return true;
}

}  // namespace scalext
