#include "scalext/cone.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <json.hpp>
#include <set>
#include <sstream>

namespace scalext {

namespace {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

Vec to_vec(const Covector& c, int dim) {
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = c[i];
  return v;
}

Covector to_cov(const Vec& v) {
  Covector c{};
  for (int i = 0; i < v.size(); ++i) c[i] = v[i];
  return c;
}

double norm(const Covector& w, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += w[i] * w[i];
  return std::sqrt(s);
}

// Orthonormal basis of the column span.
std::vector<Covector> orthonormal_span(const std::vector<Covector>& vs, int dim) {
  if (vs.empty()) return {};
  Mat M(dim, static_cast<int>(vs.size()));
  for (size_t j = 0; j < vs.size(); ++j) M.col(static_cast<int>(j)) = to_vec(vs[j], dim);
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeThinU);
  std::vector<Covector> out;
  const auto& s = svd.singularValues();
  double smax = s.size() ? s[0] : 0.0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > 1e-10 * std::max(1.0, smax)) out.push_back(to_cov(svd.matrixU().col(i)));
  return out;
}

// Basis of the null space of A (rows × cols).
Mat null_space(const Mat& A) {
  if (A.rows() == 0) return Mat::Identity(A.cols(), A.cols());
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  double smax = s.size() ? s[0] : 0.0;
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > 1e-10 * std::max(1.0, smax)) ++rank;
  return svd.matrixV().rightCols(A.cols() - rank);
}

std::vector<Covector> subspace_intersection(const std::vector<Covector>& a, const std::vector<Covector>& b,
                                            int dim) {
  if (a.empty() || b.empty()) return {};
  Mat M(dim, static_cast<int>(a.size() + b.size()));
  for (size_t j = 0; j < a.size(); ++j) M.col(static_cast<int>(j)) = to_vec(a[j], dim);
  for (size_t j = 0; j < b.size(); ++j) M.col(static_cast<int>(a.size() + j)) = -to_vec(b[j], dim);
  Mat N = null_space(M);
  std::vector<Covector> out;
  for (int c = 0; c < N.cols(); ++c) {
    Vec v = Vec::Zero(dim);
    for (size_t j = 0; j < a.size(); ++j) v += N(static_cast<int>(j), c) * to_vec(a[j], dim);
    out.push_back(to_cov(v));
  }
  return orthonormal_span(out, dim);
}

std::vector<Covector> eta_axes(Dims dims) {
  std::vector<Covector> e;
  for (int j = 0; j < dims.d; ++j) {
    Covector c{};
    c[dims.n + j] = 1.0;
    e.push_back(c);
  }
  return e;
}

std::vector<Covector> xi_axes(Dims dims) {
  std::vector<Covector> e;
  for (int i = 0; i < dims.n; ++i) {
    Covector c{};
    c[i] = 1.0;
    e.push_back(c);
  }
  return e;
}

double dist_to_subspace(const Covector& w, const std::vector<Covector>& basis, int dim) {
  Covector r = w;
  for (const auto& b : basis) {
    double dot = 0.0;
    for (int i = 0; i < dim; ++i) dot += w[i] * b[i];
    for (int i = 0; i < dim; ++i) r[i] -= dot * b[i];
  }
  return norm(r, dim);
}

// Closest and farthest |h| over the h-part of a box.
std::pair<double, double> h_radius_range(const BaseRegion& b) {
  double lo2 = 0.0, hi2 = 0.0;
  for (int j = 0; j < b.dims.d; ++j) {
    const Interval& iv = b.box.iv[b.dims.n + j];
    double c = std::clamp(0.0, iv.lo, iv.hi);
    lo2 += c * c;
    double f = std::max(std::abs(iv.lo), std::abs(iv.hi));
    hi2 += f * f;
  }
  return {std::max(std::sqrt(lo2), b.rmin), std::min(std::sqrt(hi2), b.rmax)};
}

std::string fmt_cov(const Covector& c, int dim) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (int i = 0; i < dim; ++i) os << (i ? "," : "") << c[i];
  os << ")";
  return os.str();
}

std::string describe_base(const BaseRegion& b) {
  std::ostringstream os;
  os.precision(6);
  os << "base{";
  for (int i = 0; i < b.dims.total(); ++i) {
    os << (i ? " " : "") << (i < b.dims.n ? "x" : "h") << (i < b.dims.n ? i : i - b.dims.n) << "=[" << b.box.iv[i].lo
       << "," << b.box.iv[i].hi << "]";
  }
  if (b.rmin > 0.0 || std::isfinite(b.rmax)) os << " |h|=[" << b.rmin << "," << b.rmax << "]";
  if (b.open_at_I) os << " off-I";
  os << "}";
  return os.str();
}

}  // namespace

double angle_between(const Covector& a, const Covector& b, int dim) {
  double na = norm(a, dim), nb = norm(b, dim);
  if (na == 0.0 || nb == 0.0) return M_PI;
  double dot = 0.0;
  for (int i = 0; i < dim; ++i) dot += a[i] * b[i];
  return std::acos(std::clamp(dot / (na * nb), -1.0, 1.0));
}

Covector normalized(const Covector& w, int dim) {
  double nw = norm(w, dim);
  Covector r{};
  if (nw == 0.0) return r;
  for (int i = 0; i < dim; ++i) r[i] = w[i] / nw;
  return r;
}

bool BaseRegion::contains(const Point& p, double tol) const {
  if (!box.contains(p, tol)) return false;
  double r = h_norm(p, dims);
  if (r < rmin - tol || r > rmax + tol) return false;
  if (open_at_I && r <= 1e-14) return false;
  return true;
}

bool BaseRegion::empty() const {
  if (box.empty() || rmin > rmax) return true;
  auto [lo, hi] = h_radius_range(*this);
  if (lo > hi + 1e-15) return true;
  if (open_at_I && hi <= 0.0) return true;
  return false;
}

bool BaseRegion::closure_meets_I() const {
  if (rmin > 0.0) return false;
  for (int j = 0; j < dims.d; ++j)
    if (!box.iv[dims.n + j].contains(0.0)) return false;
  return !box.empty();
}

BaseRegion intersect(const BaseRegion& a, const BaseRegion& b) {
  BaseRegion r;
  r.dims = a.dims;
  r.box = intersect(a.box, b.box);
  r.rmin = std::max(a.rmin, b.rmin);
  r.rmax = std::min(a.rmax, b.rmax);
  r.open_at_I = a.open_at_I || b.open_at_I;
  return r;
}

DirectionSet DirectionSet::full(int dim) {
  DirectionSet s;
  s.kind = Kind::Full;
  s.dim = dim;
  return s;
}

DirectionSet DirectionSet::cap(Covector axis, double radius, int dim) {
  if (norm(axis, dim) == 0.0) throw DomainError("cap: zero axis");
  DirectionSet s;
  s.kind = Kind::Cap;
  s.dim = dim;
  s.axis = normalized(axis, dim);
  s.radius = radius;
  return s;
}

DirectionSet DirectionSet::subspace(const std::vector<Covector>& span, int dim) {
  DirectionSet s;
  s.kind = Kind::Subspace;
  s.dim = dim;
  s.basis = orthonormal_span(span, dim);
  if (static_cast<int>(s.basis.size()) == dim) return full(dim);
  return s;
}

DirectionSet DirectionSet::xi_cap(Covector axis_xi, double radius, Dims dims) {
  for (int j = 0; j < dims.d; ++j) axis_xi[dims.n + j] = 0.0;
  if (norm(axis_xi, dims.n) == 0.0) throw DomainError("xi_cap: zero ξ-axis");
  DirectionSet s;
  s.kind = Kind::XiCap;
  s.dim = dims.total();
  s.n = dims.n;
  s.axis = normalized(axis_xi, dims.n);
  s.radius = radius;
  return s;
}

bool DirectionSet::contains(const Covector& w0, double slack) const {
  double nw = norm(w0, dim);
  if (nw == 0.0) return false;
  Covector w = normalized(w0, dim);
  switch (kind) {
    case Kind::Full:
      return true;
    case Kind::Cap:
      return angle_between(w, axis, dim) <= radius + slack;
    case Kind::Subspace:
      return !basis.empty() && dist_to_subspace(w, basis, dim) <= std::sin(std::min(slack, M_PI / 2));
    case Kind::XiCap: {
      double nxi = norm(w, n);
      if (nxi <= std::sin(std::min(slack, M_PI / 2))) return true;
      return angle_between(w, axis, n) <= radius + slack;
    }
  }
  return false;
}

DirectionSet DirectionSet::negated() const {
  DirectionSet s = *this;
  if (kind == Kind::Cap || kind == Kind::XiCap)
    for (double& v : s.axis) v = -v;
  return s;
}

std::string DirectionSet::describe() const {
  std::ostringstream os;
  os.precision(6);
  switch (kind) {
    case Kind::Full:
      os << "dirs{all}";
      break;
    case Kind::Cap:
      os << "dirs{cap " << fmt_cov(axis, dim) << " r=" << radius << "}";
      break;
    case Kind::Subspace: {
      os << "dirs{span";
      for (const auto& b : basis) os << " " << fmt_cov(b, dim);
      os << "}";
      break;
    }
    case Kind::XiCap:
      os << "dirs{xi-cap " << fmt_cov(axis, n) << " r=" << radius << ", eta free}";
      break;
  }
  return os.str();
}

Cone::Cone(Dims dims, std::vector<ConePiece> pieces) : dims_(dims) {
  for (auto& p : pieces) add(std::move(p));
}

void Cone::add(ConePiece piece) {
  if (piece.base.empty()) return;
  if (piece.dirs.kind == DirectionSet::Kind::Subspace && piece.dirs.basis.empty()) return;
  std::string key = describe_base(piece.base) + piece.dirs.describe();
  for (const auto& q : pieces_)
    if (describe_base(q.base) + q.dirs.describe() == key) return;
  pieces_.push_back(std::move(piece));
}

bool Cone::contains(const Point& p, const Covector& w, double slack, double base_tol) const {
  for (const auto& piece : pieces_)
    if (piece.base.contains(p, base_tol) && piece.dirs.contains(w, slack)) return true;
  return false;
}

Cone Cone::negated() const {
  Cone c(dims_);
  for (const auto& p : pieces_) c.add({p.base, p.dirs.negated()});
  return c;
}

std::string Cone::describe() const {
  std::ostringstream os;
  os << "cone[n=" << dims_.n << ",d=" << dims_.d << "]";
  if (pieces_.empty()) os << " empty";
  for (const auto& p : pieces_) os << "\n  " << describe_base(p.base) << " " << p.dirs.describe();
  return os.str();
}

std::string Cone::to_json() const {
  nlohmann::json j;
  j["n"] = dims_.n;
  j["d"] = dims_.d;
  j["pieces"] = nlohmann::json::array();
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : "-inf";
  };
  for (const auto& p : pieces_) {
    nlohmann::json pj;
    for (int i = 0; i < dims_.total(); ++i) pj["box"].push_back({num(p.base.box.iv[i].lo), num(p.base.box.iv[i].hi)});
    pj["rmin"] = num(p.base.rmin);
    pj["rmax"] = num(p.base.rmax);
    pj["open_at_I"] = p.base.open_at_I;
    pj["dirs"] = p.dirs.describe();
    j["pieces"].push_back(pj);
  }
  return j.dump();
}

BaseRegion base_everywhere(Dims dims, const Box& full_box, bool open_at_I) {
  BaseRegion b;
  b.dims = dims;
  b.box = full_box;
  b.open_at_I = open_at_I;
  return b;
}

BaseRegion base_on_I(Dims dims, const Box& full_box) {
  BaseRegion b = base_everywhere(dims, full_box);
  for (int j = 0; j < dims.d; ++j) b.box.iv[dims.n + j] = {0.0, 0.0};
  b.rmax = 0.0;
  return b;
}

Cone conormal_I(Dims dims, const Box& full_box) {
  return Cone(dims, {{base_on_I(dims, full_box), DirectionSet::subspace(eta_axes(dims), dims.total())}});
}

Cone conormal_hyperplane_x(Dims dims, const Box& full_box, int i) {
  if (i < 0 || i >= dims.n) throw DomainError("conormal_hyperplane_x: index out of range");
  BaseRegion b = base_everywhere(dims, full_box);
  b.box.iv[i] = {0.0, 0.0};
  Covector e{};
  e[i] = 1.0;
  return Cone(dims, {{b, DirectionSet::subspace({e}, dims.total())}});
}

Cone full_cone(Dims dims, const Box& full_box) {
  return Cone(dims, {{base_everywhere(dims, full_box), DirectionSet::full(dims.total())}});
}

Cone cone_union(const Cone& a, const Cone& b) {
  if (!(a.dims() == b.dims())) throw DomainError("cone_union: dimension mismatch");
  Cone c(a.dims());
  for (const auto& p : a.pieces()) c.add(p);
  for (const auto& p : b.pieces()) c.add(p);
  return c;
}

namespace {

bool within_eta_space(const DirectionSet& s, Dims dims) {
  if (s.kind != DirectionSet::Kind::Subspace) return false;
  for (const auto& b : s.basis)
    if (norm(b, dims.n) > 1e-12) return false;
  return true;
}

std::vector<DirectionSet> direction_sum(const DirectionSet& a, const DirectionSet& b, Dims dims) {
  using K = DirectionSet::Kind;
  const int dim = dims.total();
  if (a.kind == K::Full || b.kind == K::Full) return {DirectionSet::full(dim)};
  if (a.kind == K::Subspace && b.kind == K::Subspace) {
    std::vector<Covector> all = a.basis;
    all.insert(all.end(), b.basis.begin(), b.basis.end());
    return {DirectionSet::subspace(all, dim)};
  }
  if (a.kind == K::XiCap || b.kind == K::XiCap) {
    const DirectionSet& xi = a.kind == K::XiCap ? a : b;
    const DirectionSet& other = a.kind == K::XiCap ? b : a;
    if (within_eta_space(other, dims)) return {xi};
    return {DirectionSet::full(dim)};
  }
  if (a.kind == K::Cap && b.kind == K::Cap) {
    double ang = angle_between(a.axis, b.axis, dim);
    double r = std::max(a.radius, b.radius);
    if (ang > M_PI - a.radius - b.radius - 1e-9) return {DirectionSet::full(dim)};
    if (ang < 1e-12) return {DirectionSet::cap(a.axis, r, dim)};
    // caps along the great-circle arc joining the axes
    const double step = 0.05;
    int k = static_cast<int>(std::ceil(ang / step));
    std::vector<DirectionSet> out;
    Vec u = to_vec(a.axis, dim), v = to_vec(b.axis, dim);
    for (int i = 0; i <= k; ++i) {
      double t = static_cast<double>(i) / k;
      Vec w = (std::sin((1 - t) * ang) * u + std::sin(t * ang) * v) / std::sin(ang);
      out.push_back(DirectionSet::cap(to_cov(w), r + 0.5 * ang / k, dim));
    }
    return out;
  }
  // cap + subspace: exact only for degenerate caps
  const DirectionSet& c = a.kind == K::Cap ? a : b;
  const DirectionSet& s = a.kind == K::Cap ? b : a;
  if (c.radius > 0.0) return {DirectionSet::full(dim)};
  std::vector<Covector> all = s.basis;
  all.push_back(c.axis);
  return {DirectionSet::subspace(all, dim)};
}

bool directions_intersect(const DirectionSet& a, const DirectionSet& b, Dims dims, double slack, Covector* witness) {
  using K = DirectionSet::Kind;
  const int dim = dims.total();
  auto set_w = [&](const Covector& w) {
    if (witness) *witness = normalized(w, dim);
  };
  if (a.kind == K::Full && b.kind == K::Full) {
    Covector e{};
    e[0] = 1.0;
    set_w(e);
    return true;
  }
  if (a.kind == K::Full || b.kind == K::Full) {
    const DirectionSet& o = a.kind == K::Full ? b : a;
    if (o.kind == K::Subspace) {
      if (o.basis.empty()) return false;
      set_w(o.basis[0]);
    } else if (o.kind == K::Cap) {
      set_w(o.axis);
    } else {
      Covector e{};
      e[dims.n] = 1.0;
      set_w(e);
    }
    return true;
  }
  if (a.kind == K::Subspace && b.kind == K::Subspace) {
    auto inter = subspace_intersection(a.basis, b.basis, dim);
    if (!inter.empty()) set_w(inter[0]);
    return !inter.empty();
  }
  if (a.kind == K::Cap && b.kind == K::Cap) {
    bool hit = angle_between(a.axis, b.axis, dim) <= a.radius + b.radius + slack;
    if (hit) set_w(a.axis);
    return hit;
  }
  if ((a.kind == K::Cap && b.kind == K::Subspace) || (a.kind == K::Subspace && b.kind == K::Cap)) {
    const DirectionSet& c = a.kind == K::Cap ? a : b;
    const DirectionSet& s = a.kind == K::Cap ? b : a;
    double d = dist_to_subspace(c.axis, s.basis, dim);
    bool hit = std::asin(std::min(1.0, d)) <= c.radius + slack;
    if (hit) set_w(c.axis);
    return hit;
  }
  // XiCap against a cap or subspace: both contain η-only directions or overlapping ξ parts
  const DirectionSet& xi = a.kind == K::XiCap ? a : b;
  const DirectionSet& o = a.kind == K::XiCap ? b : a;
  if (o.kind == K::XiCap) {
    Covector e{};
    e[dims.n] = 1.0;
    set_w(e);
    return true;
  }
  if (o.kind == K::Cap) {
    bool hit = xi.contains(o.axis, o.radius + slack);
    if (hit) set_w(o.axis);
    return hit;
  }
  for (const auto& bvec : o.basis)
    if (xi.contains(bvec, slack)) {
      set_w(bvec);
      return true;
    }
  auto eta_part = subspace_intersection(o.basis, eta_axes(dims), dim);
  if (!eta_part.empty()) set_w(eta_part[0]);
  return !eta_part.empty();
}

Point base_witness(const BaseRegion& b) {
  Point p{};
  for (int i = 0; i < b.dims.total(); ++i) {
    const Interval& iv = b.box.iv[i];
    double lo = std::isfinite(iv.lo) ? iv.lo : -1.0, hi = std::isfinite(iv.hi) ? iv.hi : 1.0;
    p[i] = std::clamp(0.0, lo, hi);
    if (i >= b.dims.n && b.open_at_I && lo <= 0.0 && hi >= 0.0) p[i] = hi > 0.0 ? std::min(hi, 0.5) : lo;
  }
  return p;
}

}  // namespace

Cone cone_sum(const Cone& a, const Cone& b) {
  if (!(a.dims() == b.dims())) throw DomainError("cone_sum: dimension mismatch");
  Cone c(a.dims());
  for (const auto& p : a.pieces())
    for (const auto& q : b.pieces()) {
      BaseRegion base = intersect(p.base, q.base);
      if (base.empty()) continue;
      for (auto& dirs : direction_sum(p.dirs, q.dirs, a.dims())) c.add({base, dirs});
    }
  return c;
}

std::optional<TransversalityViolation> find_transversality_violation(const Cone& a, const Cone& b, double slack) {
  if (!(a.dims() == b.dims())) throw DomainError("check_transverse: dimension mismatch");
  for (const auto& p : a.pieces())
    for (const auto& q : b.pieces()) {
      BaseRegion base = intersect(p.base, q.base);
      if (base.empty()) continue;
      Covector w{};
      if (directions_intersect(p.dirs, q.dirs.negated(), a.dims(), slack, &w)) {
        TransversalityViolation v;
        v.point = base_witness(base);
        v.direction = w;
        v.detail = describe_base(base) + " shares " + p.dirs.describe() + " with -(" + q.dirs.describe() + ")";
        return v;
      }
    }
  return std::nullopt;
}

bool check_transverse(const Cone& a, const Cone& b, double slack) {
  return !find_transversality_violation(a, b, slack).has_value();
}

namespace {

std::vector<Point> sample_base(const BaseRegion& b, const Box& chart) {
  const int D = b.dims.total();
  std::vector<Point> out;
  std::array<std::array<double, 5>, kMaxDim> vals{};
  for (int i = 0; i < D; ++i) {
    double lo = std::max(b.box.iv[i].lo, chart.iv[i].lo), hi = std::min(b.box.iv[i].hi, chart.iv[i].hi);
    for (int k = 0; k < 5; ++k) vals[i][k] = lo + (hi - lo) * k / 4.0;
  }
  int total = 1;
  for (int i = 0; i < D; ++i) total *= 5;
  for (int c = 0; c < total; ++c) {
    int r = c;
    Point p{};
    for (int i = 0; i < D; ++i) {
      p[i] = vals[i][r % 5];
      r /= 5;
    }
    if (b.contains(p, 0.0)) out.push_back(p);
  }
  return out;
}

std::vector<Covector> sample_dirs(const DirectionSet& s, Dims dims) {
  using K = DirectionSet::Kind;
  const int dim = dims.total();
  std::vector<Covector> out;
  auto unit = [&](int i) {
    Covector e{};
    e[i] = 1.0;
    return e;
  };
  switch (s.kind) {
    case K::Full:
      for (int i = 0; i < dim; ++i) {
        out.push_back(unit(i));
        Covector m = unit(i);
        m[i] = -1.0;
        out.push_back(m);
      }
      break;
    case K::Cap: {
      out.push_back(s.axis);
      if (s.radius > 0.0)
        for (int i = 0; i < dim; ++i) {
          Vec a = to_vec(s.axis, dim), e = to_vec(unit(i), dim);
          Vec t = e - e.dot(a) * a;
          if (t.norm() < 1e-9) continue;
          t.normalize();
          out.push_back(to_cov(std::cos(s.radius) * a + std::sin(s.radius) * t));
          out.push_back(to_cov(std::cos(s.radius) * a - std::sin(s.radius) * t));
        }
      break;
    }
    case K::Subspace:
      for (size_t i = 0; i < s.basis.size(); ++i) {
        out.push_back(s.basis[i]);
        for (size_t j = i + 1; j < s.basis.size(); ++j) {
          Covector p{}, m{};
          for (int k = 0; k < dim; ++k) {
            p[k] = s.basis[i][k] + 0.7 * s.basis[j][k];
            m[k] = s.basis[i][k] - 0.7 * s.basis[j][k];
          }
          out.push_back(p);
          out.push_back(m);
        }
      }
      break;
    case K::XiCap: {
      Covector a = s.axis;
      out.push_back(a);
      for (int j = 0; j < dims.d; ++j) {
        Covector w = a;
        w[dims.n + j] = 1.0;
        out.push_back(w);
        out.push_back(unit(dims.n + j));
      }
      break;
    }
  }
  return out;
}

}  // namespace

bool check_scaling_stable(const Cone& g, const Box& chart_box, double slack) {
  const Dims dims = g.dims();
  const double lambdas[] = {1.0, 0.5, 0.25, 0.125};
  for (const auto& piece : g.pieces()) {
    auto pts = sample_base(piece.base, chart_box);
    auto dirs = sample_dirs(piece.dirs, dims);
    for (double lam : lambdas)
      for (const auto& p : pts)
        for (const auto& w : dirs) {
          Point q = p;
          for (int j = 0; j < dims.d; ++j) q[dims.n + j] /= lam;
          if (!chart_box.contains(q, 1e-12)) continue;
          Covector v = w;
          for (int j = 0; j < dims.d; ++j) v[dims.n + j] *= lam;
          if (!g.contains(q, v, slack, 1e-9)) return false;
        }
  }
  return true;
}

Cone xi_projection(const Cone& g, double shell_a, double shell_b) {
  using K = DirectionSet::Kind;
  const Dims dims = g.dims();
  const int dim = dims.total();
  Cone out(dims);
  for (const auto& piece : g.pieces()) {
    auto [lo, hi] = h_radius_range(piece.base);
    if (lo > shell_b || hi < shell_a) continue;
    BaseRegion base = piece.base;
    for (int j = 0; j < dims.d; ++j) base.box.iv[dims.n + j] = {0.0, 0.0};
    base.rmin = 0.0;
    base.rmax = 0.0;
    base.open_at_I = false;
    const DirectionSet& s = piece.dirs;
    switch (s.kind) {
      case K::Full:
        out.add({base, DirectionSet::full(dim)});
        break;
      case K::Subspace: {
        auto xi_part = subspace_intersection(s.basis, xi_axes(dims), dim);
        if (xi_part.empty()) break;
        auto eta = eta_axes(dims);
        xi_part.insert(xi_part.end(), eta.begin(), eta.end());
        out.add({base, DirectionSet::subspace(xi_part, dim)});
        break;
      }
      case K::Cap: {
        double eta_norm = 0.0;
        for (int j = 0; j < dims.d; ++j) eta_norm += s.axis[dims.n + j] * s.axis[dims.n + j];
        eta_norm = std::sqrt(eta_norm);
        // the cap reaches η = 0 only if its axis is within `radius` of the ξ-space
        if (dims.n == 0 || std::asin(std::min(1.0, eta_norm)) > s.radius + 1e-12) break;
        out.add({base, DirectionSet::xi_cap(s.axis, s.radius, dims)});
        break;
      }
      case K::XiCap:
        out.add({base, s});
        break;
    }
  }
  return out;
}

bool check_landing(const Cone& g, double slack) {
  using K = DirectionSet::Kind;
  const Dims dims = g.dims();
  for (const auto& piece : g.pieces()) {
    if (!piece.base.closure_meets_I()) continue;
    const DirectionSet& s = piece.dirs;
    switch (s.kind) {
      case K::Full:
      case K::XiCap:
        if (dims.n > 0) return false;
        break;
      case K::Subspace:
        for (const auto& b : s.basis)
          if (norm(b, dims.n) > slack) return false;
        break;
      case K::Cap:
        // the limits (ξ, λη)/|·| as λ → 0 retain any ξ ≠ 0 in the cap
        if (norm(s.axis, dims.n) + std::sin(s.radius) > slack && dims.n > 0) return false;
        break;
    }
  }
  return true;
}

}  // namespace scalext
