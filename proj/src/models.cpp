#include "scalext/models.hpp"

#include <sstream>

namespace scalext {

namespace {

std::vector<Factor1D> unit_factors(int n) {
  std::vector<Factor1D> fs;
  for (int i = 0; i < n; ++i) fs.push_back({[](double) { return 1.0; }, {}});
  return fs;
}

double hnorm(std::span<const double> h) {
  double s = 0.0;
  for (double v : h) s += v * v;
  return std::sqrt(s);
}

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::vector<std::string> model_names() {
  return {"power_law", "log_power", "delta_derivative", "one_sided", "nonsmooth_factor", "smooth"};
}

Distribution model(const std::string& name, const ModelParams& p, const ChartRegion& chart) {
  const Dims dims = chart.dims;
  const Box box = chart.full_box();
  if (name == "power_law" || name == "log_power") {
    if (!std::isfinite(p.a)) throw DomainError(name + ": exponent must be finite");
    const double a = p.a;
    const bool with_log = name == "log_power";
    KernelSpec k;
    k.x_factors = unit_factors(dims.n);
    auto hf = [a, with_log](std::span<const double> h) {
      double r = hnorm(h);
      if (r == 0.0) return 0.0;
      double v = std::pow(r, -a);
      return with_log ? v * std::log(r) : v;
    };
    k.h_factor = HFactor{hf, a > 0.0 || with_log};
    k.full = [hf, dims](const Point& q) { return hf(std::span<const double>(q.data() + dims.n, dims.d)); };
    k.singular_at_I = a >= dims.d;
    k.name = (with_log ? "|h|^-" : "|h|^-") + num(a) + (with_log ? "*log|h|" : "");
    Distribution t = kernel_distribution(chart, std::move(k), name + "(" + num(a) + ")");
    t.meta_degree = -a;
    t.meta_cone = conormal_I(dims, box);
    return t;
  }
  if (name == "delta_derivative") {
    for (int j = 0; j < kMaxDim; ++j)
      if (p.alpha[j] < 0 || (j >= dims.d && p.alpha[j] != 0))
        throw DomainError("delta_derivative: multi-index incompatible with d");
    DeltaTerm dt;
    dt.alpha = p.alpha;
    std::ostringstream id;
    id << "delta_derivative(";
    for (int j = 0; j < dims.d; ++j) id << (j ? "," : "") << p.alpha[j];
    id << ")";
    Distribution t = delta_distribution(chart, {dt}, id.str());
    t.meta_degree = -dims.d - multi_abs(p.alpha, dims.d);
    t.meta_cone = conormal_I(dims, box);
    return t;
  }
  if (name == "one_sided") {
    if (dims.d != 1) throw DomainError("one_sided: requires d = 1");
    if (!std::isfinite(p.a)) throw DomainError("one_sided: exponent must be finite");
    const double a = p.a;
    KernelSpec k;
    k.x_factors = unit_factors(dims.n);
    auto hf = [a](std::span<const double> h) { return h[0] > 0.0 ? std::pow(h[0], -a) : 0.0; };
    k.h_factor = HFactor{hf, true};
    k.full = [hf, dims](const Point& q) { return hf(std::span<const double>(q.data() + dims.n, 1)); };
    k.singular_at_I = a >= 1.0;
    k.name = "theta(h)h^-" + num(a);
    Distribution t = kernel_distribution(chart, std::move(k), "one_sided(" + num(a) + ")");
    t.meta_degree = -a;
    t.meta_cone = conormal_I(dims, box);
    return t;
  }
  if (name == "nonsmooth_factor") {
    if (dims.n < 1) throw DomainError("nonsmooth_factor: requires n >= 1");
    auto f = [](double x) { return 2.0 + (x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0)) * std::cbrt(std::abs(x)); };
    KernelSpec k;
    k.x_factors = unit_factors(dims.n);
    (*k.x_factors)[0] = Factor1D{f, {0.0}};
    k.h_factor = HFactor{[](std::span<const double>) { return 1.0; }, false};
    k.full = [f](const Point& q) { return f(q[0]); };
    k.x_singular = {{0.0}};
    k.name = "f(x1)";
    Distribution t = kernel_distribution(chart, std::move(k), "nonsmooth_factor");
    t.meta_degree = 0.0;
    t.meta_cone = conormal_hyperplane_x(dims, box, 0);
    return t;
  }
  if (name == "smooth") {
    KernelSpec k;
    if (p.g == "one") {
      k.x_factors = unit_factors(dims.n);
      k.h_factor = HFactor{[](std::span<const double>) { return 1.0; }, false};
      k.full = [](const Point&) { return 1.0; };
    } else if (p.g == "gauss") {
      std::vector<Factor1D> fs;
      for (int i = 0; i < dims.n; ++i) fs.push_back({[](double u) { return std::exp(-u * u); }, {}});
      k.x_factors = fs;
      k.h_factor = HFactor{[](std::span<const double> h) {
                             double r = hnorm(h);
                             return std::exp(-r * r);
                           },
                           false};
      k.full = [dims](const Point& q) {
        double s = 0.0;
        for (int i = 0; i < dims.total(); ++i) s += q[i] * q[i];
        return std::exp(-s);
      };
    } else if (p.g == "cos") {
      k.full = [dims](const Point& q) { return std::cos((dims.n ? q[0] : 0.0) + q[dims.n]); };
    } else {
      throw DomainError("smooth: unknown profile '" + p.g + "'");
    }
    k.name = "smooth:" + p.g;
    Distribution t = kernel_distribution(chart, std::move(k), "smooth(" + p.g + ")");
    t.meta_degree = 0.0;
    t.meta_cone = Cone(dims);
    return t;
  }
  throw DomainError("unknown model '" + name + "'");
}

}  // namespace scalext
